// Copyright 2026 The tempo-bell Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file inequality.hpp
 * The Bell functional |P(a,b) - P(a,c)| + P(b,c), bounded by 1 for every
 * deterministic model, and violation verdicts for exact or sampled
 * correlators.
 */
#pragma once

#include <cmath>
#include <optional>

#include "correlators.hpp"
#include "qubit.hpp"

namespace tempobell {

inline constexpr double kClassicalBound = 1.0;
inline constexpr double kDefaultSigmaThreshold = 3.0;

inline double bell_functional(const CorrelationSet &p) {
    return std::abs(p.p_ab - p.p_ac) + p.p_bc;
}

/// |a.b - a.c| + b.c, the functional at the quantum correlators.
inline double quantum_functional(const BlochVector &a, const BlochVector &b,
                                 const BlochVector &c) {
    return bell_functional(quantum_correlation_set(a, b, c));
}

struct ViolationReport {
    double functional_value = 0.0;
    double classical_bound = kClassicalBound;
    double margin = 0.0;
    bool violated = false;
    /// Root-sum-square of the three standard errors; estimates only.
    std::optional<double> margin_se;
    double sigma_threshold = kDefaultSigmaThreshold;
    /// |p_ab - p_ac| is within 3 (se_ab + se_ac) of the |.| kink, where the
    /// linear error propagation is unreliable.
    bool near_kink = false;
};

/**
 * Exact sets violate when margin > 1e-12 (rounding slack of the exact
 * arithmetic). Estimates violate when margin > sigma_threshold * margin_se.
 */
inline ViolationReport check_inequality(const CorrelationSet &p,
                                        double sigma_threshold =
                                            kDefaultSigmaThreshold) {
    p.validate();
    ViolationReport r;
    r.functional_value = bell_functional(p);
    r.margin = r.functional_value - r.classical_bound;
    r.sigma_threshold = sigma_threshold;
    if (p.se) {
        const auto &se = *p.se;
        r.margin_se = std::sqrt(se.ab * se.ab + se.ac * se.ac + se.bc * se.bc);
        r.violated = r.margin > sigma_threshold * *r.margin_se;
        r.near_kink = std::abs(p.p_ab - p.p_ac) < 3.0 * (se.ab + se.ac);
    } else {
        r.violated = r.margin > kExactTol;
    }
    return r;
}

} // namespace tempobell

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
 * @file correlators.hpp
 * Exact two-time correlators of sequential projective spin measurements.
 */
#pragma once

#include <cmath>
#include <optional>

#include "errors.hpp"
#include "qubit.hpp"

namespace tempobell {

struct StandardErrors {
    double ab = 0.0;
    double ac = 0.0;
    double bc = 0.0;
};

/**
 * The three pair correlators P(a,b), P(a,c), P(b,c). Standard errors are
 * absent for exact values and present for sampled estimates.
 */
struct CorrelationSet {
    double p_ab = 0.0;
    double p_ac = 0.0;
    double p_bc = 0.0;
    std::optional<StandardErrors> se;

    [[nodiscard]] bool is_estimate() const { return se.has_value(); }

    void validate() const {
        for (double p : {p_ab, p_ac, p_bc}) {
            if (!std::isfinite(p) || p < -1.0 - kExactTol ||
                p > 1.0 + kExactTol) {
                throw InvalidParameter("correlator outside [-1, 1]");
            }
        }
        if (se && (!(se->ab >= 0.0) || !(se->ac >= 0.0) || !(se->bc >= 0.0))) {
            throw InvalidParameter("standard errors must be non-negative");
        }
    }
};

namespace detail {

/// Sums s1 s2 p(s1) p(s2|s1) over the four branches; @p between maps the
/// post-measurement state onto the state seen by the second measurement.
template <typename Propagate>
double enumerate_branches(const QubitState &state, const BlochVector &first,
                          const BlochVector &second, Propagate &&between) {
    double total = 0.0;
    for (Outcome s1 : kOutcomes) {
        const double p1 = born_probability(state, first, s1);
        if (p1 < kMinBranchProbability) {
            continue;
        }
        const QubitState mid = between(collapse(state, first, s1));
        for (Outcome s2 : kOutcomes) {
            const double p2 = born_probability(mid, second, s2);
            total += value(s1) * value(s2) * p1 * p2;
        }
    }
    return total;
}

} // namespace detail

/**
 * Exact E[s1 s2] for a measurement along @p first, free evolution for @p dt
 * under @p rotation, then a measurement along @p second.
 *
 * With the identity evolution the result is first . second for every state.
 */
inline double sequential_correlator(const QubitState &state,
                                    const BlochVector &first,
                                    const BlochVector &second,
                                    const SpinRotation &rotation =
                                        SpinRotation::identity(),
                                    double dt = 0.0) {
    if (!(dt >= 0.0)) {
        throw InvalidParameter("measurement interval must be >= 0");
    }
    return detail::enumerate_branches(
        state, first, second,
        [&](const QubitState &s) { return evolve(s, rotation, dt); });
}

/**
 * Same correlator with an explicit clock: @p state is given at time
 * @p t_prepare, the measurements happen at @p t_first <= @p t_second.
 */
inline double sequential_correlator_at(const QubitState &state,
                                       double t_prepare,
                                       const BlochVector &first, double t_first,
                                       const BlochVector &second,
                                       double t_second,
                                       const SpinRotation &rotation) {
    const QubitState at_first =
        evolve_between(state, rotation, t_prepare, t_first);
    return detail::enumerate_branches(
        at_first, first, second, [&](const QubitState &s) {
            return evolve_between(s, rotation, t_first, t_second);
        });
}

/// Closed-form quantum correlators (a.b, a.c, b.c).
inline CorrelationSet quantum_correlation_set(const BlochVector &a,
                                              const BlochVector &b,
                                              const BlochVector &c) {
    return CorrelationSet{a.dot(b), a.dot(c), b.dot(c), std::nullopt};
}

} // namespace tempobell

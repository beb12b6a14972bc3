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
 * @file lhv.hpp
 * Deterministic hidden-variable models of the three-context experiment.
 *
 * Under determinism every value of the hidden initial conditions fixes the
 * outcomes s1, s2, s3 at the contexts (t1,a), (t2,b), (t3,c). The pair
 * correlators depend on the hidden variable only through that sign triple,
 * so an arbitrary density over hidden variables reduces to a distribution
 * over the eight sign triples.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <span>
#include <string>

#include "correlators.hpp"
#include "errors.hpp"
#include "qubit.hpp"
#include "rng.hpp"

namespace tempobell {

enum class DirectionLabel { A, B, C };

/// A (time index, direction) binding. The binding is fixed: 1-A, 2-B, 3-C.
struct MeasurementContext {
    int time_index;
    DirectionLabel direction;
};

inline constexpr std::array<MeasurementContext, 3> kContexts{
    MeasurementContext{1, DirectionLabel::A},
    MeasurementContext{2, DirectionLabel::B},
    MeasurementContext{3, DirectionLabel::C}};

/// Outcomes assigned to the three contexts by one hidden-variable value.
struct DeterministicStrategy {
    Outcome s1 = Outcome::Plus;
    Outcome s2 = Outcome::Plus;
    Outcome s3 = Outcome::Plus;

    [[nodiscard]] Outcome at(int time_index) const {
        switch (time_index) {
        case 1:
            return s1;
        case 2:
            return s2;
        case 3:
            return s3;
        default:
            throw InvalidParameter("time index must be 1, 2 or 3");
        }
    }

    /// Position in enumerate_strategies() order.
    [[nodiscard]] std::size_t index() const {
        return (s1 == Outcome::Minus ? 4U : 0U) |
               (s2 == Outcome::Minus ? 2U : 0U) |
               (s3 == Outcome::Minus ? 1U : 0U);
    }

    friend bool operator==(const DeterministicStrategy &,
                           const DeterministicStrategy &) = default;
};

inline constexpr std::size_t kNumStrategies = 8;

/// All 2^3 strategies; s1 is the most significant sign, + before -.
inline constexpr std::array<DeterministicStrategy, kNumStrategies>
enumerate_strategies() {
    std::array<DeterministicStrategy, kNumStrategies> out{};
    for (std::size_t i = 0; i < kNumStrategies; ++i) {
        out[i] = DeterministicStrategy{
            (i & 4U) ? Outcome::Minus : Outcome::Plus,
            (i & 2U) ? Outcome::Minus : Outcome::Plus,
            (i & 1U) ? Outcome::Minus : Outcome::Plus};
    }
    return out;
}

/// Bell functional |s1 s2 - s1 s3| + s2 s3 of a single strategy.
constexpr int strategy_functional(const DeterministicStrategy &s) {
    const int v1 = value(s.s1);
    const int v2 = value(s.s2);
    const int v3 = value(s.s3);
    const int diff = v1 * v2 - v1 * v3;
    return (diff < 0 ? -diff : diff) + v2 * v3;
}

/// Maximum of the Bell functional over all deterministic strategies (== 1).
constexpr int classical_max_functional() {
    int best = strategy_functional(enumerate_strategies()[0]);
    for (const auto &s : enumerate_strategies()) {
        const int f = strategy_functional(s);
        best = f > best ? f : best;
    }
    return best;
}

/// Probability distribution over the eight strategies.
class StrategyMixture {
  public:
    using Weights = std::array<double, kNumStrategies>;

    /// Validates non-negativity and unit sum (1e-12).
    static StrategyMixture from_weights(const Weights &w) {
        double sum = 0.0;
        for (double x : w) {
            if (!std::isfinite(x) || x < 0.0) {
                throw InvalidMixture("weights must be finite and >= 0");
            }
            sum += x;
        }
        if (std::abs(sum - 1.0) > kExactTol) {
            throw InvalidMixture("weights sum to " + std::to_string(sum) +
                                 ", expected 1");
        }
        return StrategyMixture{w};
    }

    static StrategyMixture from_weights(std::span<const double> w) {
        if (w.size() != kNumStrategies) {
            throw InvalidMixture("expected 8 weights, got " +
                                 std::to_string(w.size()));
        }
        Weights arr{};
        std::copy(w.begin(), w.end(), arr.begin());
        return from_weights(arr);
    }

    static StrategyMixture point_mass(const DeterministicStrategy &s) {
        Weights w{};
        w[s.index()] = 1.0;
        return StrategyMixture{w};
    }

    static StrategyMixture uniform() {
        Weights w{};
        w.fill(1.0 / kNumStrategies);
        return StrategyMixture{w};
    }

    /// Flat Dirichlet draw over the simplex.
    static StrategyMixture random(rng::Stream &stream) {
        Weights w{};
        double sum = 0.0;
        for (double &x : w) {
            x = -std::log1p(-stream.uniform01());
            sum += x;
        }
        for (double &x : w) {
            x /= sum;
        }
        return StrategyMixture{w};
    }

    [[nodiscard]] const Weights &weights() const { return w_; }
    [[nodiscard]] double weight(const DeterministicStrategy &s) const {
        return w_[s.index()];
    }

  private:
    explicit StrategyMixture(const Weights &w) : w_(w) {}
    Weights w_;
};

/// Mixture averages of s1 s2, s1 s3 and s2 s3.
inline CorrelationSet mixture_correlations(const StrategyMixture &mixture) {
    CorrelationSet out;
    const auto strategies = enumerate_strategies();
    for (std::size_t i = 0; i < kNumStrategies; ++i) {
        const double w = mixture.weights()[i];
        const auto &s = strategies[i];
        out.p_ab += w * value(s.s1) * value(s.s2);
        out.p_ac += w * value(s.s1) * value(s.s3);
        out.p_bc += w * value(s.s2) * value(s.s3);
    }
    return out;
}

/**
 * Numerical check of each step of the classical bound for one mixture.
 *
 * - difference identity: P(a,b) - P(a,c) equals both sum w s1 (s2 - s3)
 *   and sum w s1 s2 (1 - s2 s3);
 * - absolute-value bound: |P(a,b) - P(a,c)| <= sum w (1 - s2 s3);
 * - final inequality: |P(a,b) - P(a,c)| <= 1 - P(b,c).
 *
 * Margins are right side minus left side (>= 0 when the step holds).
 */
struct DerivationReport {
    CorrelationSet correlations;
    double difference_residual = 0.0;
    bool difference_identity_holds = false;
    double absolute_bound_margin = 0.0;
    bool absolute_bound_holds = false;
    double inequality_margin = 0.0;
    bool inequality_holds = false;

    [[nodiscard]] bool all_hold() const {
        return difference_identity_holds && absolute_bound_holds &&
               inequality_holds;
    }
};

inline DerivationReport verify_derivation_chain(const StrategyMixture &mixture) {
    DerivationReport r;
    r.correlations = mixture_correlations(mixture);

    double factored = 0.0;
    double squared_out = 0.0;
    double bound_rhs = 0.0;
    const auto strategies = enumerate_strategies();
    for (std::size_t i = 0; i < kNumStrategies; ++i) {
        const double w = mixture.weights()[i];
        const int s1 = value(strategies[i].s1);
        const int s2 = value(strategies[i].s2);
        const int s3 = value(strategies[i].s3);
        factored += w * s1 * (s2 - s3);
        squared_out += w * s1 * s2 * (1 - s2 * s3);
        bound_rhs += w * (1 - s2 * s3);
    }

    const double diff = r.correlations.p_ab - r.correlations.p_ac;
    r.difference_residual =
        std::max(std::abs(diff - factored), std::abs(diff - squared_out));
    r.difference_identity_holds = r.difference_residual <= kExactTol;

    r.absolute_bound_margin = bound_rhs - std::abs(diff);
    r.absolute_bound_holds = r.absolute_bound_margin >= -kExactTol;

    r.inequality_margin = (1.0 - r.correlations.p_bc) - std::abs(diff);
    r.inequality_holds = r.inequality_margin >= -kExactTol;
    return r;
}

/// Draws a strategy with probability equal to its weight.
inline DeterministicStrategy sample_strategy(const StrategyMixture &mixture,
                                             rng::Stream &stream) {
    const auto strategies = enumerate_strategies();
    const auto &w = mixture.weights();
    const double u = stream.uniform01();
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < kNumStrategies; ++i) {
        if (w[i] <= 0.0) {
            continue;
        }
        last_positive = i;
        cumulative += w[i];
        if (u < cumulative) {
            return strategies[i];
        }
    }
    // u landed in the rounding gap below 1.
    return strategies[last_positive];
}

} // namespace tempobell

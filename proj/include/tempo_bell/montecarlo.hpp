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
 * @file montecarlo.hpp
 * Simulation of the sequential-measurement experiment.
 *
 * Each trial prepares the spin, picks one of the context pairs
 * {(t1,a)(t2,b), (t1,a)(t3,c), (t2,b)(t3,c)} with probability 1/3 and
 * measures the two contexts in time order. The initial state is the state at
 * t1; it is evolved to the first measurement time, collapsed, evolved over
 * the interval and measured again.
 *
 * Reproducibility: trials are cut into blocks of kTrialBlock; block k draws
 * from a stream seeded with rng::derive_seed(seed, k). Shards own contiguous
 * block ranges and only accumulate integers, merged in block order, so any
 * shard count gives bit-identical estimates.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "correlators.hpp"
#include "errors.hpp"
#include "lhv.hpp"
#include "optimizer.hpp"
#include "qubit.hpp"
#include "rng.hpp"

namespace tempobell {

enum class ContextPair : int { AB = 0, AC = 1, BC = 2 };

inline constexpr std::array<ContextPair, 3> kContextPairs{
    ContextPair::AB, ContextPair::AC, ContextPair::BC};

inline const char *to_string(ContextPair p) {
    switch (p) {
    case ContextPair::AB:
        return "AB";
    case ContextPair::AC:
        return "AC";
    case ContextPair::BC:
        return "BC";
    }
    return "?";
}

/// Zero-based context indices (0 = (t1,a), 1 = (t2,b), 2 = (t3,c)).
constexpr std::array<int, 2> contexts_of(ContextPair p) {
    switch (p) {
    case ContextPair::AB:
        return {0, 1};
    case ContextPair::AC:
        return {0, 2};
    case ContextPair::BC:
        return {1, 2};
    }
    return {0, 1};
}

inline constexpr std::int64_t kTrialBlock = 1 << 14;

struct ExperimentConfig {
    DirectionTriple directions = sqrt2_configuration();
    std::array<double, 3> times{1.0, 2.0, 3.0};
    QubitState initial_state = QubitState::maximally_mixed();
    SpinRotation rotation = SpinRotation::identity();
    std::int64_t trials = 1'000'000;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(times[0] < times[1] && times[1] < times[2]) ||
            !std::isfinite(times[0]) || !std::isfinite(times[2])) {
            throw InvalidParameter("times must satisfy t1 < t2 < t3");
        }
        if (trials < 1) {
            throw InvalidParameter("trials must be >= 1");
        }
        if (!std::isfinite(rotation.angular_rate)) {
            throw InvalidParameter("precession rate must be finite");
        }
    }

    [[nodiscard]] const BlochVector &direction(int context) const {
        switch (context) {
        case 0:
            return directions.a;
        case 1:
            return directions.b;
        default:
            return directions.c;
        }
    }
};

struct TrialRecord {
    ContextPair pair = ContextPair::AB;
    Outcome first_outcome = Outcome::Plus;
    Outcome second_outcome = Outcome::Plus;
    int product = 1;

    friend bool operator==(const TrialRecord &, const TrialRecord &) = default;
};

struct EstimatedCorrelations {
    CorrelationSet correlations;
    /// Trials per pair, in AB, AC, BC order.
    std::array<std::int64_t, 3> counts{};
    /// Sum of outcome products per pair.
    std::array<std::int64_t, 3> product_sums{};

    [[nodiscard]] std::int64_t total_trials() const {
        return counts[0] + counts[1] + counts[2];
    }
};

namespace detail {

/// Born sampling that never selects a branch below kMinBranchProbability.
inline Outcome sample_outcome(const QubitState &state, const BlochVector &n,
                              rng::Stream &stream) {
    const double p_plus = born_probability(state, n, Outcome::Plus);
    const double u = stream.uniform01();
    if (p_plus < kMinBranchProbability) {
        return Outcome::Minus;
    }
    if (1.0 - p_plus < kMinBranchProbability) {
        return Outcome::Plus;
    }
    return u < p_plus ? Outcome::Plus : Outcome::Minus;
}

/// Per-config quantities reused by every trial.
class Protocol {
  public:
    explicit Protocol(const ExperimentConfig &cfg) : cfg_(cfg) {
        cfg.validate();
        const double t1 = cfg.times[0];
        for (int k = 0; k < 2; ++k) {
            prepared_[k] =
                evolve(cfg.initial_state, cfg.rotation, cfg.times[k] - t1);
        }
        for (ContextPair p : kContextPairs) {
            const auto [i, j] = contexts_of(p);
            interval_[static_cast<int>(p)] = cfg.times[j] - cfg.times[i];
        }
    }

    TrialRecord run(ContextPair pair, rng::Stream &stream) const {
        const auto [i, j] = contexts_of(pair);
        const QubitState &before = prepared_[i];
        const BlochVector &first = cfg_.direction(i);
        const BlochVector &second = cfg_.direction(j);

        const Outcome s1 = sample_outcome(before, first, stream);
        const QubitState mid =
            evolve(collapse(before, first, s1), cfg_.rotation,
                   interval_[static_cast<int>(pair)]);
        const Outcome s2 = sample_outcome(mid, second, stream);
        return TrialRecord{pair, s1, s2, value(s1) * value(s2)};
    }

    TrialRecord run(rng::Stream &stream) const {
        return run(kContextPairs[stream.uniform_index(3)], stream);
    }

  private:
    const ExperimentConfig &cfg_;
    std::array<QubitState, 2> prepared_{QubitState::maximally_mixed(),
                                        QubitState::maximally_mixed()};
    std::array<double, 3> interval_{};
};

struct Tally {
    std::array<std::int64_t, 3> counts{};
    std::array<std::int64_t, 3> sums{};

    void add(ContextPair p, int product) {
        ++counts[static_cast<int>(p)];
        sums[static_cast<int>(p)] += product;
    }
};

/// Runs @p trials trials in blocks; @p block_trial(stream) yields one record.
template <typename BlockRunner>
std::vector<Tally> run_blocks(std::int64_t trials, unsigned shards,
                              BlockRunner &&run_block) {
    const std::int64_t blocks = (trials + kTrialBlock - 1) / kTrialBlock;
    std::vector<Tally> tallies(static_cast<std::size_t>(blocks));
    auto run_range = [&](std::int64_t begin, std::int64_t end) {
        for (std::int64_t k = begin; k < end; ++k) {
            const std::int64_t n =
                std::min(kTrialBlock, trials - k * kTrialBlock);
            tallies[static_cast<std::size_t>(k)] = run_block(k, n);
        }
    };
    const auto workers = static_cast<std::int64_t>(
        std::clamp<std::int64_t>(shards, 1, std::max<std::int64_t>(blocks, 1)));
    if (workers == 1) {
        run_range(0, blocks);
    } else {
        std::vector<std::jthread> pool;
        for (std::int64_t w = 0; w < workers; ++w) {
            pool.emplace_back(run_range, w * blocks / workers,
                              (w + 1) * blocks / workers);
        }
    }
    return tallies;
}

inline EstimatedCorrelations summarize(const std::vector<Tally> &tallies) {
    EstimatedCorrelations out;
    for (const Tally &t : tallies) {
        for (int p = 0; p < 3; ++p) {
            out.counts[p] += t.counts[p];
            out.product_sums[p] += t.sums[p];
        }
    }
    std::array<double, 3> mean{};
    std::array<double, 3> se{};
    for (int p = 0; p < 3; ++p) {
        if (out.counts[p] == 0) {
            throw InsufficientTrials(std::string("no trials for pair ") +
                                     to_string(kContextPairs[p]));
        }
        const auto n = static_cast<double>(out.counts[p]);
        mean[p] = static_cast<double>(out.product_sums[p]) / n;
        se[p] = std::sqrt(std::max(0.0, 1.0 - mean[p] * mean[p]) / n);
    }
    out.correlations = CorrelationSet{mean[0], mean[1], mean[2],
                                      StandardErrors{se[0], se[1], se[2]}};
    return out;
}

} // namespace detail

/// One trial with the pair drawn uniformly.
inline TrialRecord run_trial(const ExperimentConfig &config,
                             rng::Stream &stream) {
    return detail::Protocol(config).run(stream);
}

/// One trial on a given pair.
inline TrialRecord run_trial(const ExperimentConfig &config, ContextPair pair,
                             rng::Stream &stream) {
    return detail::Protocol(config).run(pair, stream);
}

/// Sample means and standard errors sqrt((1 - p^2)/n) of the three pairs.
inline EstimatedCorrelations estimate_correlations(const ExperimentConfig &config,
                                                   unsigned shards = 1) {
    const detail::Protocol protocol(config);
    const auto tallies = detail::run_blocks(
        config.trials, shards, [&](std::int64_t block, std::int64_t n) {
            rng::Stream stream(rng::derive_seed(config.seed,
                                                static_cast<std::uint64_t>(block)));
            detail::Tally t;
            for (std::int64_t i = 0; i < n; ++i) {
                const TrialRecord r = protocol.run(stream);
                t.add(r.pair, r.product);
            }
            return t;
        });
    return detail::summarize(tallies);
}

/// Same protocol with outcomes read off strategies drawn from @p mixture.
inline EstimatedCorrelations run_lhv_experiment(const StrategyMixture &mixture,
                                                std::int64_t trials,
                                                std::uint64_t seed,
                                                unsigned shards = 1) {
    if (trials < 1) {
        throw InvalidParameter("trials must be >= 1");
    }
    const auto tallies = detail::run_blocks(
        trials, shards, [&](std::int64_t block, std::int64_t n) {
            rng::Stream stream(
                rng::derive_seed(seed, static_cast<std::uint64_t>(block)));
            detail::Tally t;
            for (std::int64_t i = 0; i < n; ++i) {
                const DeterministicStrategy s = sample_strategy(mixture, stream);
                const ContextPair pair = kContextPairs[stream.uniform_index(3)];
                const auto [first, second] = contexts_of(pair);
                t.add(pair, value(s.at(first + 1)) * value(s.at(second + 1)));
            }
            return t;
        });
    return detail::summarize(tallies);
}

} // namespace tempobell

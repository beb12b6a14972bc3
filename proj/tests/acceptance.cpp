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

// Acceptance suite: one line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "test_helpers.hpp"
#include "tempo_bell.hpp"

using namespace tempobell;
using nlohmann::json;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double max_seconds;
    std::function<Verdict()> body;
};

json run_cli_json(std::vector<std::string> args, int &code) {
    std::ostringstream out;
    std::ostringstream err;
    code = cli::run(std::move(args), out, err);
    if (code != 0) {
        return json{};
    }
    return json::parse(out.str());
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    return buf;
}

std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// 1. sqrt2 configuration through the exact command.
Verdict paper_value() {
    int code = 0;
    const json doc = run_cli_json({"exact", "--b", "0,0,1", "--c", "1,0,0",
                                   "--a-bisect-diff", "--format", "json"},
                                  code);
    if (code != 0) {
        return {false, "exit code " + std::to_string(code)};
    }
    const double f = doc["result"]["report"]["functional"].get<double>();
    const bool violated = doc["result"]["report"]["violated"].get<bool>();
    const double err = std::abs(f - 1.414213562);
    return {err <= 1e-9 && violated,
            "functional=" + fmt12(f) + " |f-1.414213562|=" + fmt(err) +
                " violated=" + (violated ? "true" : "false")};
}

// 2. Classical bound by enumeration plus random mixtures.
Verdict classical_bound() {
    const int bound = classical_max_functional();
    rng::Stream stream(20260101);
    double worst = -INFINITY;
    for (int i = 0; i < 1000; ++i) {
        const auto p = mixture_correlations(StrategyMixture::random(stream));
        worst = std::max(worst, bell_functional(p) - 1.0);
    }
    return {bound == 1 && worst <= 1e-12,
            "max over 8 strategies=" + std::to_string(bound) +
                " max mixture margin=" + fmt(worst)};
}

// 3. Global maximum 3/2 by local search and the 1-degree grid.
Verdict global_maximum() {
    const auto local = optimize_directions(20, 1e-8, 1);
    const auto grid = grid_scan_max(1.0);
    const double local_err = std::abs(local.value - 1.5);
    const double gap = std::abs(grid.value - local.value);
    return {local_err <= 1e-6 && gap <= 1e-3,
            "local=" + fmt12(local.value) + " (err " + fmt(local_err) +
                ") grid=" + fmt12(grid.value) + " (gap " + fmt(gap) + ")"};
}

// 4. Free correlator equals the dot product for every state.
Verdict state_independence() {
    rng::Stream s(4);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto st = test::random_state(s);
        for (int j = 0; j < 100; ++j) {
            const auto u = test::random_direction(s);
            const auto v = test::random_direction(s);
            worst = std::max(worst,
                             std::abs(sequential_correlator(st, u, v) - u.dot(v)));
        }
    }
    return {worst <= 1e-12, "max |E - u.v| over 10000 cases=" + fmt(worst)};
}

// 5. Monte Carlo at the sqrt2 configuration.
Verdict monte_carlo() {
    ExperimentConfig cfg;
    cfg.directions = sqrt2_configuration();
    cfg.trials = 1'000'000;
    cfg.seed = 42;
    const auto one = estimate_correlations(cfg, 1);
    const auto eight = estimate_correlations(cfg, 8);
    const auto exact = quantum_correlation_set(cfg.directions.a, cfg.directions.b,
                                               cfg.directions.c);
    const auto &p = one.correlations;
    const double z_ab = std::abs(p.p_ab - exact.p_ab) / p.se->ab;
    const double z_ac = std::abs(p.p_ac - exact.p_ac) / p.se->ac;
    const double z_bc = std::abs(p.p_bc - exact.p_bc) / p.se->bc;
    const auto report = check_inequality(p, 3.0);
    const bool identical = one.counts == eight.counts &&
                           one.product_sums == eight.product_sums &&
                           one.correlations.p_ab == eight.correlations.p_ab &&
                           one.correlations.p_ac == eight.correlations.p_ac &&
                           one.correlations.p_bc == eight.correlations.p_bc &&
                           one.correlations.se->ab == eight.correlations.se->ab &&
                           one.correlations.se->ac == eight.correlations.se->ac &&
                           one.correlations.se->bc == eight.correlations.se->bc;
    const bool pass = z_ab <= 4 && z_ac <= 4 && z_bc <= 4 && report.violated &&
                      identical;
    return {pass, "z=(" + std::to_string(z_ab) + ", " + std::to_string(z_ac) + ", " +
                      std::to_string(z_bc) + ") margin=" +
                      std::to_string(report.margin) + " se=" +
                      std::to_string(*report.margin_se) +
                      " violated=" + (report.violated ? "true" : "false") +
                      " 1-vs-8-shards-identical=" + (identical ? "true" : "false")};
}

// 6. Derivation chain on random mixtures.
Verdict derivation_chain() {
    rng::Stream s(6);
    double residual = 0.0;
    double min_abs = INFINITY;
    double min_ineq = INFINITY;
    bool all = true;
    for (int i = 0; i < 1000; ++i) {
        const auto r = verify_derivation_chain(StrategyMixture::random(s));
        residual = std::max(residual, r.difference_residual);
        min_abs = std::min(min_abs, r.absolute_bound_margin);
        min_ineq = std::min(min_ineq, r.inequality_margin);
        all = all && r.all_hold();
    }
    return {all && residual <= 1e-12 && min_abs >= -1e-12 && min_ineq >= -1e-12,
            "identity residual=" + fmt(residual) + " min abs-bound margin=" +
                fmt(min_abs) + " min inequality margin=" + fmt(min_ineq)};
}

// 7. Collapse idempotence and time-shift invariance.
Verdict collapse_and_time_shift() {
    rng::Stream s(7);
    double worst_repeat = 0.0;
    int cases = 0;
    while (cases < 100) {
        const auto st = test::random_state(s);
        const auto n = test::random_direction(s);
        const Outcome o = s.uniform01() < 0.5 ? Outcome::Plus : Outcome::Minus;
        if (born_probability(st, n, o) < kMinBranchProbability) {
            continue;
        }
        worst_repeat = std::max(
            worst_repeat, std::abs(born_probability(collapse(st, n, o), n, o) - 1.0));
        ++cases;
    }
    double worst_shift = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto st = test::random_state(s);
        const auto rot = test::random_rotation(s);
        const auto u = test::random_direction(s);
        const auto v = test::random_direction(s);
        const double t0 = s.uniform01();
        const double t1 = t0 + s.uniform01();
        const double t2 = t1 + 2.0 * s.uniform01();
        const double shift = 20.0 * s.uniform01() - 10.0;
        worst_shift = std::max(
            worst_shift,
            std::abs(sequential_correlator_at(st, t0, u, t1, v, t2, rot) -
                     sequential_correlator_at(st, t0 + shift, u, t1 + shift, v,
                                              t2 + shift, rot)));
    }
    return {worst_repeat <= 1e-12 && worst_shift <= 1e-12,
            "max |p_repeat - 1|=" + fmt(worst_repeat) +
                " max time-shift change=" + fmt(worst_shift)};
}

// 8. Sweep curve through the sweep command.
Verdict sweep_curve() {
    const auto dir = std::filesystem::temp_directory_path() / "tempo_bell_acceptance";
    std::filesystem::create_directories(dir);
    const auto json_path = (dir / "sweep.json").string();
    const auto csv_path = (dir / "sweep.csv").string();
    std::ostringstream out;
    std::ostringstream err;
    const int c1 = cli::run({"sweep", "--grid-points", "201", "--out", json_path,
                             "--format", "json"},
                            out, err);
    const int c2 = cli::run({"sweep", "--grid-points", "201", "--out", csv_path}, out,
                            err);
    if (c1 != 0 || c2 != 0) {
        return {false, "exit codes " + std::to_string(c1) + "," + std::to_string(c2)};
    }
    std::ifstream jf(json_path);
    const json rows = json::parse(jf);
    const auto oracle_rows = sweep_functional(201);
    double g0 = NAN;
    double g_half = NAN;
    double worst_cross = 0.0;
    bool aligned = rows.size() == oracle_rows.size();
    for (std::size_t i = 0; aligned && i < rows.size(); ++i) {
        const double u = rows[i]["u"].get<double>();
        const double g = rows[i]["functional"].get<double>();
        aligned = u == oracle_rows[i].u;
        worst_cross = std::max(worst_cross,
                               std::abs(g - quantum_functional(oracle_rows[i].triple)));
        if (u == 0.0) {
            g0 = g;
        }
        if (u == 0.5) {
            g_half = g;
        }
    }
    std::ifstream cf(csv_path);
    std::stringstream csv;
    csv << cf.rdbuf();
    const bool csv_ok = csv.str().rfind("u,functional\n", 0) == 0 &&
                        csv.str().find("\n0,1.41421356\n") != std::string::npos &&
                        csv.str().find("\n0.5,1.5\n") != std::string::npos;
    const double e0 = std::abs(g0 - std::numbers::sqrt2);
    const double e_half = std::abs(g_half - 1.5);
    return {aligned && e0 <= 1e-9 && e_half <= 1e-9 && worst_cross <= 1e-12 && csv_ok,
            "|g(0)-sqrt2|=" + fmt(e0) + " |g(0.5)-1.5|=" + fmt(e_half) +
                " max row cross-check=" + fmt(worst_cross) +
                " csv=" + (csv_ok ? "ok" : "bad")};
}

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "sqrt2 value of the exact command", 1.0, paper_value},
        {2, "classical bound is exactly 1", 1.0, classical_bound},
        {3, "global maximum 3/2 (local search + 1-degree grid)", 30.0, global_maximum},
        {4, "correlator state independence", 1.0, state_independence},
        {5, "Monte Carlo consistency, violation, resharding", 15.0, monte_carlo},
        {6, "derivation chain on random mixtures", 1.0, derivation_chain},
        {7, "collapse idempotence and time-shift invariance", 1.0,
         collapse_and_time_shift},
        {8, "sweep curve", 1.0, sweep_curve},
    };

    int failures = 0;
    for (const auto &c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Verdict o{false, ""};
        try {
            o = c.body();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        const bool in_time = secs < c.max_seconds;
        const bool pass = o.pass && in_time;
        failures += pass ? 0 : 1;
        std::printf("[%s] AC%d %s: %s; runtime %.3fs (limit %.0fs)%s\n",
                    pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(),
                    secs, c.max_seconds, in_time ? "" : " TOO SLOW");
    }
    std::printf("%d/%zu acceptance criteria passed\n",
                static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}

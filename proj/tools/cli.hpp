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
 * @file cli.hpp
 * Command-line front end of tempo-bell. Kept header-only so tests can drive
 * run() in-process.
 *
 * Exit codes: 0 success, 1 scientific check failure, 2 usage or config
 * error, 3 insufficient data, 4 I/O error.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tempo_bell.hpp"

namespace tempobell::cli {

using nlohmann::json;

enum ExitCode : int {
    kOk = 0,
    kCheckFailed = 1,
    kUsage = 2,
    kInsufficientData = 3,
    kIoError = 4,
};

class UsageError : public Error {
  public:
    explicit UsageError(const std::string &what) : Error(what) {}
};

class IoError : public Error {
  public:
    explicit IoError(const std::string &what) : Error("I/O error: " + what) {}
};

inline constexpr std::string_view kToolName = "tempo-bell";
inline constexpr const char *kSeedEnv = "TEMPO_BELL_SEED";

// ---------------------------------------------------------------------------
// Parsing helpers

inline std::vector<double> parse_numbers(std::string_view text,
                                         std::string_view what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string field(text.substr(pos, comma - pos));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(field, &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (field.empty() || used != field.size() || !std::isfinite(v)) {
            throw UsageError("malformed " + std::string(what) + " '" +
                             std::string(text) + "'");
        }
        out.push_back(v);
        pos = comma + 1;
    }
    return out;
}

inline Vector3 parse_vector(std::string_view text) {
    const auto v = parse_numbers(text, "vector");
    if (v.size() != 3) {
        throw UsageError("expected x,y,z but got '" + std::string(text) + "'");
    }
    return Vector3{v[0], v[1], v[2]};
}

inline std::string_view strip_prefix(std::string_view text,
                                     std::string_view prefix) {
    if (text.substr(0, prefix.size()) == prefix) {
        text.remove_prefix(prefix.size());
    }
    return text;
}

/// "mixed" or "bloch:x,y,z" (|r| <= 1; r = 0 is the mixed state).
inline QubitState parse_initial_state(std::string_view text) {
    if (text == "mixed") {
        return QubitState::maximally_mixed();
    }
    if (text.substr(0, 6) == "bloch:") {
        try {
            return QubitState::from_bloch(parse_vector(text.substr(6)));
        } catch (const InvalidState &e) {
            throw UsageError(e.what());
        }
    }
    throw UsageError("--initial must be 'mixed' or 'bloch:x,y,z'");
}

/// "x,y,z,rate", optionally prefixed with "axis:".
inline SpinRotation parse_precession(std::string_view text) {
    const auto v = parse_numbers(strip_prefix(text, "axis:"), "precession");
    if (v.size() != 4) {
        throw UsageError("--precession expects axis:x,y,z,rate");
    }
    return SpinRotation{make_direction(v[0], v[1], v[2]), v[3]};
}

inline std::array<double, 3> parse_times(std::string_view text) {
    const auto v = parse_numbers(text, "times");
    if (v.size() != 3 || !(v[0] < v[1] && v[1] < v[2])) {
        throw UsageError("--times expects t1,t2,t3 with t1 < t2 < t3");
    }
    return {v[0], v[1], v[2]};
}

struct DirectionFlags {
    std::string a;
    std::string b;
    std::string c;
    bool a_bisect_diff = false;

    [[nodiscard]] bool any() const {
        return !a.empty() || !b.empty() || !c.empty() || a_bisect_diff;
    }

    /// Normalized triple; with a_bisect_diff, a = (b - c)/|b - c|.
    [[nodiscard]] DirectionTriple resolve() const {
        if (b.empty() || c.empty()) {
            throw UsageError("--b and --c are required");
        }
        const BlochVector bv = make_direction(parse_vector(b));
        const BlochVector cv = make_direction(parse_vector(c));
        if (a_bisect_diff) {
            if (!a.empty()) {
                throw UsageError("--a and --a-bisect-diff are exclusive");
            }
            return DirectionTriple{make_direction(bv.vec() - cv.vec()), bv, cv};
        }
        if (a.empty()) {
            throw UsageError("--a or --a-bisect-diff is required");
        }
        return DirectionTriple{make_direction(parse_vector(a)), bv, cv};
    }

    void add_to(CLI::App *sub) {
        sub->add_option("--a", a, "direction a as x,y,z (normalized)");
        sub->add_option("--b", b, "direction b as x,y,z (normalized)");
        sub->add_option("--c", c, "direction c as x,y,z (normalized)");
        sub->add_flag("--a-bisect-diff", a_bisect_diff,
                      "set a = (b - c)/|b - c|");
    }

    void to_json(json &j) const {
        if (!a.empty()) {
            j["a"] = a;
        }
        if (!b.empty()) {
            j["b"] = b;
        }
        if (!c.empty()) {
            j["c"] = c;
        }
        j["a-bisect-diff"] = a_bisect_diff;
    }
};

// ---------------------------------------------------------------------------
// Output helpers

/// 9 significant digits, used in CSV and text tables.
inline std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline json vec_json(const BlochVector &v) {
    return json::array({v.x(), v.y(), v.z()});
}

inline std::string vec_text(const BlochVector &v) {
    return "(" + fmt9(v.x()) + ", " + fmt9(v.y()) + ", " + fmt9(v.z()) + ")";
}

inline json triple_json(const DirectionTriple &t) {
    return json{{"a", vec_json(t.a)}, {"b", vec_json(t.b)}, {"c", vec_json(t.c)}};
}

inline json correlations_json(const CorrelationSet &p) {
    json j{{"p_ab", p.p_ab}, {"p_ac", p.p_ac}, {"p_bc", p.p_bc}};
    if (p.se) {
        j["se_ab"] = p.se->ab;
        j["se_ac"] = p.se->ac;
        j["se_bc"] = p.se->bc;
    }
    return j;
}

inline json report_json(const ViolationReport &r) {
    json j{{"functional", r.functional_value},
           {"classical_bound", r.classical_bound},
           {"margin", r.margin},
           {"violated", r.violated}};
    if (r.margin_se) {
        j["margin_se"] = *r.margin_se;
        j["sigma_threshold"] = r.sigma_threshold;
        j["near_kink"] = r.near_kink;
    }
    return j;
}

inline json derivation_json(const DerivationReport &r) {
    return json{{"difference_identity_holds", r.difference_identity_holds},
                {"difference_residual", r.difference_residual},
                {"absolute_bound_holds", r.absolute_bound_holds},
                {"absolute_bound_margin", r.absolute_bound_margin},
                {"inequality_holds", r.inequality_holds},
                {"inequality_margin", r.inequality_margin}};
}

inline std::string strategy_text(const DeterministicStrategy &s) {
    auto sign = [](Outcome o) { return o == Outcome::Plus ? "+1" : "-1"; };
    return std::string("(") + sign(s.s1) + "," + sign(s.s2) + "," + sign(s.s3) +
           ")";
}

inline std::string utc_timestamp() {
    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Everything needed to re-run a command: pass the file back via --config.
struct RunManifest {
    std::string subcommand;
    json config = json::object();
    std::uint64_t seed = 0;
    std::string timestamp;

    [[nodiscard]] json to_json() const {
        return json{{"tool", kToolName},
                    {"version", kVersion},
                    {"subcommand", subcommand},
                    {"config", config},
                    {"seed", seed},
                    {"timestamp", timestamp}};
    }
};

inline void write_file(const std::string &path, const std::string &contents) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    f << contents;
    f.close();
    if (!f) {
        throw IoError("failed writing '" + path + "'");
    }
}

inline std::string manifest_path(const std::string &out) {
    return out + ".manifest.json";
}

enum class Format { Text, Json, Csv };

/// Emits a command's JSON document either to @p out or to a file with a
/// manifest sidecar; text mode prints @p text followed by the manifest.
inline void emit(const json &result, const std::string &text, Format format,
                 const std::string &out_path, const RunManifest &manifest,
                 std::ostream &out) {
    if (!out_path.empty()) {
        const std::string body = format == Format::Json
                                     ? result.dump(2) + "\n"
                                     : text;
        write_file(out_path, body);
        write_file(manifest_path(out_path), manifest.to_json().dump(2) + "\n");
        return;
    }
    if (format == Format::Json) {
        json doc{{"result", result}, {"manifest", manifest.to_json()}};
        out << doc.dump(2) << "\n";
    } else {
        out << text << "# manifest: " << manifest.to_json().dump() << "\n";
    }
}

// ---------------------------------------------------------------------------
// Commands

struct ExactOptions {
    DirectionFlags dirs;
    std::string format = "text";
    std::string out;
};

inline int cmd_exact(const ExactOptions &opt, const RunManifest &manifest,
                     std::ostream &out) {
    const DirectionTriple t = opt.dirs.resolve();
    const CorrelationSet p = quantum_correlation_set(t.a, t.b, t.c);
    const ViolationReport r = check_inequality(p);

    json result{{"directions", triple_json(t)},
                {"correlations", correlations_json(p)},
                {"report", report_json(r)}};
    std::ostringstream text;
    text << "a = " << vec_text(t.a) << "\n"
         << "b = " << vec_text(t.b) << "\n"
         << "c = " << vec_text(t.c) << "\n"
         << "P(a,b) = " << fmt9(p.p_ab) << "\n"
         << "P(a,c) = " << fmt9(p.p_ac) << "\n"
         << "P(b,c) = " << fmt9(p.p_bc) << "\n"
         << "functional |P(a,b)-P(a,c)|+P(b,c) = " << fmt9(r.functional_value)
         << "\n"
         << "classical bound = " << fmt9(r.classical_bound) << "\n"
         << "margin = " << fmt9(r.margin) << "\n"
         << "violated = " << (r.violated ? "true" : "false") << "\n";
    emit(result, text.str(), opt.format == "json" ? Format::Json : Format::Text,
         opt.out, manifest, out);
    return kOk;
}

struct LhvOptions {
    std::string mixture_file;
    bool scan_extremals = false;
    std::int64_t random = 0;
    std::uint64_t seed = 0;
    std::string format = "text";
    std::string out;
};

/// Reads {"weights": [8 numbers]} or a bare array of 8 numbers, in
/// enumerate_strategies() order.
inline StrategyMixture load_mixture(const std::string &path) {
    std::ifstream f(path);
    if (!f) {
        throw IoError("cannot read mixture file '" + path + "'");
    }
    json j;
    try {
        f >> j;
    } catch (const json::exception &e) {
        throw InvalidMixture(std::string("mixture file is not JSON: ") +
                             e.what());
    }
    const json &w = j.is_object() && j.contains("weights") ? j["weights"] : j;
    if (!w.is_array()) {
        throw InvalidMixture("mixture file needs an array of 8 weights");
    }
    std::vector<double> weights;
    for (const auto &x : w) {
        if (!x.is_number()) {
            throw InvalidMixture("weights must be numbers");
        }
        weights.push_back(x.get<double>());
    }
    return StrategyMixture::from_weights(std::span<const double>(weights));
}

inline json strategy_table_json() {
    json rows = json::array();
    for (const auto &s : enumerate_strategies()) {
        const auto p = mixture_correlations(StrategyMixture::point_mass(s));
        rows.push_back({{"strategy",
                         json::array({value(s.s1), value(s.s2), value(s.s3)})},
                        {"correlations", correlations_json(p)},
                        {"functional", strategy_functional(s)}});
    }
    return rows;
}

inline int cmd_lhv(const LhvOptions &opt, const RunManifest &manifest,
                   std::ostream &out) {
    const int modes = int(!opt.mixture_file.empty()) + int(opt.scan_extremals) +
                      int(opt.random > 0);
    if (modes != 1) {
        throw UsageError(
            "choose exactly one of --mixture, --scan-extremals, --random N");
    }

    json result{{"classical_bound", classical_max_functional()},
                {"strategies", strategy_table_json()}};
    std::ostringstream text;
    text << "strategy      P(a,b) P(a,c) P(b,c)  functional\n";
    for (const auto &s : enumerate_strategies()) {
        text << strategy_text(s) << "   " << value(s.s1) * value(s.s2) << "     "
             << value(s.s1) * value(s.s3) << "     " << value(s.s2) * value(s.s3)
             << "      " << strategy_functional(s) << "\n";
    }
    text << "classical bound (max over strategies) = "
         << classical_max_functional() << "\n";

    bool all_hold = true;
    auto check_one = [&](const StrategyMixture &m) {
        const DerivationReport d = verify_derivation_chain(m);
        const ViolationReport v = check_inequality(d.correlations);
        all_hold = all_hold && d.all_hold() && !v.violated;
        return std::pair{d, v};
    };

    if (opt.scan_extremals) {
        json checks = json::array();
        for (const auto &s : enumerate_strategies()) {
            const auto [d, v] = check_one(StrategyMixture::point_mass(s));
            checks.push_back({{"strategy", json::array({value(s.s1), value(s.s2),
                                                        value(s.s3)})},
                              {"derivation", derivation_json(d)},
                              {"report", report_json(v)}});
        }
        result["mode"] = "scan-extremals";
        result["checks"] = checks;
        text << "derivation checks on 8 extremal strategies: "
             << (all_hold ? "all pass" : "FAILED") << "\n";
    } else if (!opt.mixture_file.empty()) {
        const StrategyMixture m = load_mixture(opt.mixture_file);
        const auto [d, v] = check_one(m);
        result["mode"] = "mixture";
        result["weights"] = m.weights();
        result["correlations"] = correlations_json(d.correlations);
        result["derivation"] = derivation_json(d);
        result["report"] = report_json(v);
        text << "mixture P(a,b) = " << fmt9(d.correlations.p_ab)
             << "  P(a,c) = " << fmt9(d.correlations.p_ac)
             << "  P(b,c) = " << fmt9(d.correlations.p_bc) << "\n"
             << "functional = " << fmt9(v.functional_value)
             << "  margin = " << fmt9(v.margin) << "\n"
             << "derivation checks: " << (d.all_hold() ? "pass" : "FAILED")
             << "\n";
    } else {
        rng::Stream stream(opt.seed);
        std::int64_t passed = 0;
        double max_functional = -INFINITY;
        double min_inequality_margin = INFINITY;
        for (std::int64_t i = 0; i < opt.random; ++i) {
            const auto [d, v] = check_one(StrategyMixture::random(stream));
            passed += (d.all_hold() && !v.violated) ? 1 : 0;
            max_functional = std::max(max_functional, v.functional_value);
            min_inequality_margin =
                std::min(min_inequality_margin, d.inequality_margin);
        }
        result["mode"] = "random";
        result["mixtures"] = opt.random;
        result["passed"] = passed;
        result["max_functional"] = max_functional;
        result["min_inequality_margin"] = min_inequality_margin;
        text << "random mixtures: " << opt.random << ", passed: " << passed
             << "\nmax functional = " << fmt9(max_functional)
             << "\nmin inequality margin = " << fmt9(min_inequality_margin)
             << "\n";
    }
    result["all_checks_pass"] = all_hold;
    emit(result, text.str(), opt.format == "json" ? Format::Json : Format::Text,
         opt.out, manifest, out);
    return all_hold ? kOk : kCheckFailed;
}

struct OptimizeOptions {
    int restarts = 20;
    double tol = 1e-8;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    bool grid_check = false;
    std::string format = "text";
    std::string out;
};

inline int cmd_optimize(const OptimizeOptions &opt, const RunManifest &manifest,
                        std::ostream &out) {
    if (opt.restarts < 1 || !(opt.tol > 0.0)) {
        throw UsageError("--restarts must be >= 1 and --tol > 0");
    }
    const OptimizationResult r =
        optimize_directions(opt.restarts, opt.tol, opt.seed, opt.threads);
    const double paper_value = quantum_functional(sqrt2_configuration());

    json result{{"best", triple_json(r.best)},
                {"value", r.value},
                {"restarts_used", r.restarts_used},
                {"converged", r.converged},
                {"restart_values", r.restart_values},
                {"sqrt2_configuration_value", paper_value}};
    std::ostringstream text;
    text << "best a = " << vec_text(r.best.a) << "\n"
         << "best b = " << vec_text(r.best.b) << "\n"
         << "best c = " << vec_text(r.best.c) << "\n"
         << "max functional = " << fmt9(r.value) << "\n"
         << "restarts = " << r.restarts_used
         << ", converged = " << (r.converged ? "true" : "false") << "\n"
         << "b = z, c = x, a = (b-c)/sqrt2 gives " << fmt9(paper_value) << "\n";
    if (opt.grid_check) {
        const GridScanResult g = grid_scan_max(1.0);
        result["grid_max_1deg"] = g.value;
        text << "1-degree grid maximum = " << fmt9(g.value) << "\n";
    }
    emit(result, text.str(), opt.format == "json" ? Format::Json : Format::Text,
         opt.out, manifest, out);
    return kOk;
}

struct SimulateOptions {
    std::int64_t trials = 1'000'000;
    std::uint64_t seed = 0;
    std::string initial = "mixed";
    std::string precession;
    std::string times = "1,2,3";
    DirectionFlags dirs;
    unsigned shards = 1;
    double sigma = kDefaultSigmaThreshold;
    std::string format = "text";
    std::string out;
};

inline ExperimentConfig build_experiment(const SimulateOptions &opt) {
    ExperimentConfig cfg;
    cfg.directions = opt.dirs.any() ? opt.dirs.resolve() : sqrt2_configuration();
    cfg.times = parse_times(opt.times);
    cfg.initial_state = parse_initial_state(opt.initial);
    if (!opt.precession.empty()) {
        cfg.rotation = parse_precession(opt.precession);
    }
    if (opt.trials < 1) {
        throw UsageError("--trials must be >= 1");
    }
    cfg.trials = opt.trials;
    cfg.seed = opt.seed;
    return cfg;
}

/// Exact correlators of the configured protocol, pair by pair.
inline CorrelationSet exact_protocol_correlations(const ExperimentConfig &cfg) {
    std::array<double, 3> p{};
    for (ContextPair pair : kContextPairs) {
        const auto [i, j] = contexts_of(pair);
        const QubitState at_first = evolve(cfg.initial_state, cfg.rotation,
                                           cfg.times[i] - cfg.times[0]);
        p[static_cast<int>(pair)] = sequential_correlator(
            at_first, cfg.direction(i), cfg.direction(j), cfg.rotation,
            cfg.times[j] - cfg.times[i]);
    }
    return CorrelationSet{p[0], p[1], p[2], std::nullopt};
}

inline int cmd_simulate(const SimulateOptions &opt, const RunManifest &manifest,
                        std::ostream &out) {
    if (opt.shards < 1 || !(opt.sigma > 0.0)) {
        throw UsageError("--shards must be >= 1 and --sigma > 0");
    }
    const ExperimentConfig cfg = build_experiment(opt);
    const EstimatedCorrelations est = estimate_correlations(cfg, opt.shards);
    const CorrelationSet exact = exact_protocol_correlations(cfg);
    const ViolationReport r = check_inequality(est.correlations, opt.sigma);

    json result{{"directions", triple_json(cfg.directions)},
                {"estimates", correlations_json(est.correlations)},
                {"counts", {{"AB", est.counts[0]},
                            {"AC", est.counts[1]},
                            {"BC", est.counts[2]}}},
                {"exact", correlations_json(exact)},
                {"exact_functional", bell_functional(exact)},
                {"report", report_json(r)}};
    std::ostringstream text;
    const auto &e = est.correlations;
    text << "pair  count      estimate     se           exact\n"
         << "AB    " << est.counts[0] << "  " << fmt9(e.p_ab) << "  "
         << fmt9(e.se->ab) << "  " << fmt9(exact.p_ab) << "\n"
         << "AC    " << est.counts[1] << "  " << fmt9(e.p_ac) << "  "
         << fmt9(e.se->ac) << "  " << fmt9(exact.p_ac) << "\n"
         << "BC    " << est.counts[2] << "  " << fmt9(e.p_bc) << "  "
         << fmt9(e.se->bc) << "  " << fmt9(exact.p_bc) << "\n"
         << "functional = " << fmt9(r.functional_value)
         << " (exact " << fmt9(bell_functional(exact)) << ")\n"
         << "margin = " << fmt9(r.margin) << " +- " << fmt9(*r.margin_se)
         << "\n"
         << "violated at " << fmt9(opt.sigma)
         << " sigma = " << (r.violated ? "true" : "false") << "\n";
    if (r.near_kink) {
        text << "warning: |P(a,b)-P(a,c)| is near zero, error propagation is "
                "approximate\n";
    }
    emit(result, text.str(), opt.format == "json" ? Format::Json : Format::Text,
         opt.out, manifest, out);
    return kOk;
}

struct SweepOptions {
    int grid_points = 201;
    std::string out;
    std::string format = "csv";
};

inline std::string sweep_csv(const std::vector<SweepRow> &rows) {
    std::string s = "u,functional\n";
    for (const auto &r : rows) {
        s += fmt9(r.u) + "," + fmt9(r.functional) + "\n";
    }
    return s;
}

inline json sweep_json(const std::vector<SweepRow> &rows) {
    json arr = json::array();
    for (const auto &r : rows) {
        arr.push_back({{"u", r.u}, {"functional", r.functional}});
    }
    return arr;
}

inline int cmd_sweep(const SweepOptions &opt, const RunManifest &manifest,
                     std::ostream &out, std::ostream &err) {
    if (opt.grid_points < 2) {
        throw UsageError("--grid-points must be >= 2");
    }
    const auto rows = sweep_functional(opt.grid_points);
    const std::string body = opt.format == "json"
                                 ? sweep_json(rows).dump(2) + "\n"
                                 : sweep_csv(rows);
    if (opt.out.empty()) {
        out << body;
        err << "# manifest: " << manifest.to_json().dump() << "\n";
    } else {
        write_file(opt.out, body);
        write_file(manifest_path(opt.out), manifest.to_json().dump(2) + "\n");
    }
    return kOk;
}

struct DeriveCheckOptions {
    std::int64_t random = 1000;
    std::uint64_t seed = 0;
    std::string format = "text";
};

using DerivationChecker = std::function<DerivationReport(const StrategyMixture &)>;

/// Checks every mixture with @p checker; exit code 1 on any failure.
inline int derive_check(const std::vector<StrategyMixture> &mixtures,
                        const DerivationChecker &checker, Format format,
                        const RunManifest &manifest, std::ostream &out) {
    std::int64_t failures = 0;
    double worst_residual = 0.0;
    double min_abs_margin = INFINITY;
    double min_ineq_margin = INFINITY;
    json failed = json::array();
    for (std::size_t i = 0; i < mixtures.size(); ++i) {
        const DerivationReport r = checker(mixtures[i]);
        worst_residual = std::max(worst_residual, r.difference_residual);
        min_abs_margin = std::min(min_abs_margin, r.absolute_bound_margin);
        min_ineq_margin = std::min(min_ineq_margin, r.inequality_margin);
        if (!r.all_hold()) {
            ++failures;
            failed.push_back(i);
        }
    }
    const bool pass = failures == 0;
    json result{{"mixtures", mixtures.size()},
                {"failures", failures},
                {"failed_indices", failed},
                {"max_difference_residual", worst_residual},
                {"min_absolute_bound_margin", min_abs_margin},
                {"min_inequality_margin", min_ineq_margin},
                {"pass", pass}};
    std::ostringstream text;
    text << "mixtures checked: " << mixtures.size() << "\n"
         << "difference identity, max residual = " << fmt9(worst_residual)
         << "\n"
         << "absolute-value bound, min margin = " << fmt9(min_abs_margin) << "\n"
         << "inequality, min margin = " << fmt9(min_ineq_margin) << "\n"
         << (pass ? "PASS" : "FAIL") << " (" << failures << " failures)\n";
    emit(result, text.str(), format, "", manifest, out);
    return pass ? kOk : kCheckFailed;
}

inline int cmd_derive_check(const DeriveCheckOptions &opt,
                            const RunManifest &manifest, std::ostream &out) {
    if (opt.random < 1) {
        throw UsageError("--random must be >= 1");
    }
    rng::Stream stream(opt.seed);
    std::vector<StrategyMixture> mixtures;
    mixtures.reserve(static_cast<std::size_t>(opt.random));
    for (std::int64_t i = 0; i < opt.random; ++i) {
        mixtures.push_back(StrategyMixture::random(stream));
    }
    return derive_check(mixtures, verify_derivation_chain,
                        opt.format == "json" ? Format::Json : Format::Text,
                        manifest, out);
}

// ---------------------------------------------------------------------------
// Entry point

namespace detail {

inline bool is_subcommand(std::string_view s) {
    return s == "exact" || s == "lhv" || s == "optimize" || s == "simulate" ||
           s == "sweep" || s == "derive-check";
}

/// Turns a --config document into option tokens placed before the user's
/// flags, so explicit flags override file values.
inline std::vector<std::string> config_tokens(const json &cfg) {
    std::vector<std::string> tokens;
    for (const auto &[key, val] : cfg.items()) {
        if (val.is_boolean()) {
            if (val.get<bool>()) {
                tokens.push_back("--" + key);
            }
        } else if (val.is_string()) {
            tokens.push_back("--" + key + "=" + val.get<std::string>());
        } else if (val.is_number()) {
            tokens.push_back("--" + key + "=" + val.dump());
        } else if (!val.is_null()) {
            throw UsageError("config key '" + key + "' has unsupported type");
        }
    }
    return tokens;
}

inline json load_config(const std::string &path) {
    std::ifstream f(path);
    if (!f) {
        throw IoError("cannot read config '" + path + "'");
    }
    try {
        return json::parse(f);
    } catch (const json::exception &e) {
        throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
    }
}

} // namespace detail

/**
 * Runs the CLI on @p args (without the program name). Numbers in --config
 * files and manifests are re-read at full precision, so a manifest
 * reproduces its run.
 */
inline int run(std::vector<std::string> args, std::ostream &out,
               std::ostream &err) {
    try {
        // Peel off --config and splice its values in front of the flags.
        std::optional<std::string> config_path;
        std::vector<std::string> rest;
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (args[i] == "--config") {
                if (i + 1 >= args.size()) {
                    throw UsageError("--config needs a file");
                }
                config_path = args[++i];
            } else if (args[i].rfind("--config=", 0) == 0) {
                config_path = args[i].substr(9);
            } else {
                rest.push_back(args[i]);
            }
        }
        std::string subcommand;
        auto sub_it = std::find_if(rest.begin(), rest.end(),
                                   [](const std::string &s) {
                                       return detail::is_subcommand(s);
                                   });
        if (sub_it != rest.end()) {
            subcommand = *sub_it;
            rest.erase(sub_it);
        }
        std::vector<std::string> tokens;
        if (config_path) {
            const json doc = detail::load_config(*config_path);
            const bool is_manifest = doc.is_object() && doc.contains("config");
            if (is_manifest && doc.contains("subcommand")) {
                const auto named = doc["subcommand"].get<std::string>();
                if (subcommand.empty()) {
                    subcommand = named;
                } else if (subcommand != named) {
                    throw UsageError("manifest is for '" + named + "', not '" +
                                     subcommand + "'");
                }
            }
            const json &cfg = is_manifest ? doc["config"] : doc;
            if (!cfg.is_object()) {
                throw UsageError("config must be a JSON object");
            }
            tokens = detail::config_tokens(cfg);
        }
        std::vector<std::string> argv_tokens;
        if (!subcommand.empty()) {
            argv_tokens.push_back(subcommand);
        }
        argv_tokens.insert(argv_tokens.end(), tokens.begin(), tokens.end());
        argv_tokens.insert(argv_tokens.end(), rest.begin(), rest.end());

        CLI::App app{"Temporal Bell inequality toolkit: exact correlators, "
                     "deterministic models, optimization and simulation",
                     std::string(kToolName)};
        app.option_defaults()->multi_option_policy(
            CLI::MultiOptionPolicy::TakeLast);
        app.require_subcommand(1);
        app.set_version_flag("--version", kVersion);

        auto add_seed = [](CLI::App *sub, std::uint64_t &seed) {
            sub->add_option("--seed", seed, "random seed")
                ->envname(kSeedEnv)
                ->capture_default_str();
        };
        auto add_format = [](CLI::App *sub, std::string &format,
                             std::vector<std::string> choices) {
            sub->add_option("--format", format, "output format")
                ->check(CLI::IsMember(std::move(choices)))
                ->capture_default_str();
        };

        ExactOptions exact;
        auto *exact_cmd =
            app.add_subcommand("exact", "exact quantum correlators and verdict");
        exact.dirs.add_to(exact_cmd);
        add_format(exact_cmd, exact.format, {"text", "json"});
        exact_cmd->add_option("--out", exact.out, "write result to file");

        LhvOptions lhv;
        auto *lhv_cmd = app.add_subcommand(
            "lhv", "deterministic strategies, classical bound, checks");
        lhv_cmd->add_option("--mixture", lhv.mixture_file,
                            "JSON file with 8 strategy weights");
        lhv_cmd->add_flag("--scan-extremals", lhv.scan_extremals,
                          "check all 8 deterministic strategies");
        lhv_cmd->add_option("--random", lhv.random,
                            "check N random mixtures");
        add_seed(lhv_cmd, lhv.seed);
        add_format(lhv_cmd, lhv.format, {"text", "json"});
        lhv_cmd->add_option("--out", lhv.out, "write result to file");

        OptimizeOptions optimize;
        auto *opt_cmd = app.add_subcommand(
            "optimize", "maximize the quantum functional over directions");
        opt_cmd->add_option("--restarts", optimize.restarts)
            ->capture_default_str();
        opt_cmd->add_option("--tol", optimize.tol)->capture_default_str();
        add_seed(opt_cmd, optimize.seed);
        opt_cmd->add_option("--threads", optimize.threads)
            ->capture_default_str();
        opt_cmd->add_flag("--grid-check", optimize.grid_check,
                          "also run the 1-degree grid scan");
        add_format(opt_cmd, optimize.format, {"text", "json"});
        opt_cmd->add_option("--out", optimize.out, "write result to file");

        SimulateOptions simulate;
        auto *sim_cmd = app.add_subcommand(
            "simulate", "Monte Carlo run of the sequential measurement protocol");
        sim_cmd->add_option("--trials", simulate.trials)->capture_default_str();
        add_seed(sim_cmd, simulate.seed);
        sim_cmd->add_option("--initial", simulate.initial,
                            "mixed | bloch:x,y,z")
            ->capture_default_str();
        sim_cmd->add_option("--precession", simulate.precession,
                            "axis:x,y,z,rate");
        sim_cmd->add_option("--times", simulate.times, "t1,t2,t3")
            ->capture_default_str();
        simulate.dirs.add_to(sim_cmd);
        sim_cmd->add_option("--shards", simulate.shards)->capture_default_str();
        sim_cmd->add_option("--sigma", simulate.sigma,
                            "significance threshold in standard errors")
            ->capture_default_str();
        add_format(sim_cmd, simulate.format, {"text", "json"});
        sim_cmd->add_option("--out", simulate.out, "write result to file");

        SweepOptions sweep;
        auto *sweep_cmd = app.add_subcommand(
            "sweep", "functional maximized over a, as a function of b.c");
        sweep_cmd->add_option("--grid-points", sweep.grid_points)
            ->capture_default_str();
        sweep_cmd->add_option("--out", sweep.out, "output file");
        add_format(sweep_cmd, sweep.format, {"csv", "json"});

        DeriveCheckOptions derive;
        auto *derive_cmd = app.add_subcommand(
            "derive-check", "check each step of the classical bound");
        derive_cmd->add_option("--random", derive.random)->capture_default_str();
        add_seed(derive_cmd, derive.seed);
        add_format(derive_cmd, derive.format, {"text", "json"});

        std::reverse(argv_tokens.begin(), argv_tokens.end());
        try {
            app.parse(argv_tokens);
        } catch (const CLI::CallForHelp &e) {
            return app.exit(e, out, err);
        } catch (const CLI::CallForAllHelp &e) {
            return app.exit(e, out, err);
        } catch (const CLI::CallForVersion &e) {
            return app.exit(e, out, err);
        } catch (const CLI::ParseError &e) {
            app.exit(e, out, err);
            return kUsage;
        }

        RunManifest manifest;
        manifest.timestamp = utc_timestamp();
        json &cfg = manifest.config;
        if (exact_cmd->parsed()) {
            manifest.subcommand = "exact";
            exact.dirs.to_json(cfg);
            cfg["format"] = exact.format;
            return cmd_exact(exact, manifest, out);
        }
        if (lhv_cmd->parsed()) {
            manifest.subcommand = "lhv";
            manifest.seed = lhv.seed;
            if (!lhv.mixture_file.empty()) {
                cfg["mixture"] = lhv.mixture_file;
            }
            cfg["scan-extremals"] = lhv.scan_extremals;
            cfg["random"] = lhv.random;
            cfg["seed"] = lhv.seed;
            cfg["format"] = lhv.format;
            return cmd_lhv(lhv, manifest, out);
        }
        if (opt_cmd->parsed()) {
            manifest.subcommand = "optimize";
            manifest.seed = optimize.seed;
            cfg["restarts"] = optimize.restarts;
            cfg["tol"] = optimize.tol;
            cfg["seed"] = optimize.seed;
            cfg["threads"] = optimize.threads;
            cfg["grid-check"] = optimize.grid_check;
            cfg["format"] = optimize.format;
            return cmd_optimize(optimize, manifest, out);
        }
        if (sim_cmd->parsed()) {
            manifest.subcommand = "simulate";
            manifest.seed = simulate.seed;
            cfg["trials"] = simulate.trials;
            cfg["seed"] = simulate.seed;
            cfg["initial"] = simulate.initial;
            if (!simulate.precession.empty()) {
                cfg["precession"] = simulate.precession;
            }
            cfg["times"] = simulate.times;
            if (!simulate.dirs.any()) {
                simulate.dirs.b = "0,0,1";
                simulate.dirs.c = "1,0,0";
                simulate.dirs.a_bisect_diff = true;
            }
            simulate.dirs.to_json(cfg);
            cfg["shards"] = simulate.shards;
            cfg["sigma"] = simulate.sigma;
            cfg["format"] = simulate.format;
            return cmd_simulate(simulate, manifest, out);
        }
        if (sweep_cmd->parsed()) {
            manifest.subcommand = "sweep";
            cfg["grid-points"] = sweep.grid_points;
            cfg["format"] = sweep.format;
            if (!sweep.out.empty()) {
                cfg["out"] = sweep.out;
            }
            return cmd_sweep(sweep, manifest, out, err);
        }
        if (derive_cmd->parsed()) {
            manifest.subcommand = "derive-check";
            manifest.seed = derive.seed;
            cfg["random"] = derive.random;
            cfg["seed"] = derive.seed;
            cfg["format"] = derive.format;
            return cmd_derive_check(derive, manifest, out);
        }
        return kUsage;
    } catch (const InsufficientTrials &e) {
        err << kToolName << ": " << e.what() << "\n";
        return kInsufficientData;
    } catch (const IoError &e) {
        err << kToolName << ": " << e.what() << "\n";
        return kIoError;
    } catch (const Error &e) {
        // ZeroVector, InvalidMixture, InvalidParameter, InvalidState, usage.
        err << kToolName << ": " << e.what() << "\n";
        return kUsage;
    }
}

} // namespace tempobell::cli

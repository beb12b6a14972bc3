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
 * @file optimizer.hpp
 * Maximization of the quantum Bell functional over measurement directions.
 *
 * The functional only depends on the three pairwise dot products, so it is
 * invariant under a common rotation of (a, b, c). Every triple can be
 * rotated into the canonical frame a = z, b in the xz-plane, leaving three
 * angles: the polar angle of b and the polar/azimuthal angles of c.
 *
 * Local search is cyclic coordinate descent over those angles: each
 * coordinate is probed at +step then -step and the first improving probe is
 * accepted; a sweep with no improvement halves the step. The step starts at
 * pi/8 and the search stops once it falls below the tolerance.
 *
 * Restart r starts from angles drawn from the stream seeded with
 * rng::derive_seed(seed, r). Restarts may run on several threads; the best
 * value is reduced in restart order, first found wins ties.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <thread>
#include <vector>

#include <Eigen/Geometry>

#include "errors.hpp"
#include "inequality.hpp"
#include "qubit.hpp"
#include "rng.hpp"

namespace tempobell {

struct DirectionTriple {
    BlochVector a;
    BlochVector b;
    BlochVector c;
};

inline double quantum_functional(const DirectionTriple &t) {
    return quantum_functional(t.a, t.b, t.c);
}

/// The configuration reaching sqrt(2): b = z, c = x, a = (b - c)/sqrt(2).
inline DirectionTriple sqrt2_configuration() {
    const BlochVector b = axis_z();
    const BlochVector c = axis_x();
    return DirectionTriple{make_direction(b.vec() - c.vec()), b, c};
}

/// (polar of b, polar of c, azimuth of c) in the canonical frame.
using CanonicalAngles = std::array<double, 3>;

inline DirectionTriple triple_from_angles(const CanonicalAngles &ang) {
    const double theta_b = ang[0];
    const double theta_c = ang[1];
    const double phi_c = ang[2];
    return DirectionTriple{
        axis_z(), make_direction(std::sin(theta_b), 0.0, std::cos(theta_b)),
        make_direction(std::sin(theta_c) * std::cos(phi_c),
                       std::sin(theta_c) * std::sin(phi_c), std::cos(theta_c))};
}

/// Functional evaluated directly from canonical angles.
inline double canonical_functional(const CanonicalAngles &ang) {
    const double cb = std::cos(ang[0]);
    const double sb = std::sin(ang[0]);
    const double cc = std::cos(ang[1]);
    const double sc = std::sin(ang[1]);
    const double bc = sb * sc * std::cos(ang[2]) + cb * cc;
    return std::abs(cb - cc) + bc;
}

/// Rigidly rotates @p t so that a = z and b lies in the xz-plane (b_x >= 0).
inline DirectionTriple canonicalize(const DirectionTriple &t) {
    const Eigen::Quaterniond to_z =
        Eigen::Quaterniond::FromTwoVectors(t.a.vec(), Vector3::UnitZ());
    Vector3 b = to_z * t.b.vec();
    Vector3 c = to_z * t.c.vec();
    const double azimuth = std::hypot(b.x(), b.y()) > 0.0
                               ? std::atan2(b.y(), b.x())
                               : 0.0;
    const Eigen::AngleAxisd about_z(-azimuth, Vector3::UnitZ());
    b = about_z * b;
    c = about_z * c;
    b.y() = 0.0;
    return DirectionTriple{axis_z(), make_direction(b), make_direction(c)};
}

inline CanonicalAngles angles_of(const DirectionTriple &t) {
    const DirectionTriple k = canonicalize(t);
    return {std::atan2(k.b.x(), k.b.z()),
            std::acos(std::clamp(k.c.z(), -1.0, 1.0)),
            std::atan2(k.c.y(), k.c.x())};
}

struct OptimizationResult {
    DirectionTriple best;
    double value = 0.0;
    int restarts_used = 0;
    bool converged = false;
    /// Final value of every restart, in restart order.
    std::vector<double> restart_values;
};

struct LocalSearchOptions {
    double tol = 1e-8;
    double initial_step = std::numbers::pi / 8.0;
    std::int64_t max_evaluations = 2'000'000;
};

struct LocalSearchResult {
    CanonicalAngles angles{};
    double value = 0.0;
    bool converged = false;
    std::int64_t evaluations = 0;
};

/// Called with the incumbent value after every accepted move.
using IncumbentObserver = std::function<void(double)>;

inline LocalSearchResult coordinate_ascent(CanonicalAngles x,
                                           const LocalSearchOptions &opt,
                                           const IncumbentObserver &observer =
                                               {}) {
    LocalSearchResult out;
    double fx = canonical_functional(x);
    out.evaluations = 1;
    if (observer) {
        observer(fx);
    }
    double step = opt.initial_step;
    while (step >= opt.tol && out.evaluations < opt.max_evaluations) {
        bool improved = false;
        for (std::size_t k = 0; k < x.size(); ++k) {
            for (double dir : {1.0, -1.0}) {
                CanonicalAngles y = x;
                y[k] += dir * step;
                const double fy = canonical_functional(y);
                ++out.evaluations;
                if (fy > fx) {
                    x = y;
                    fx = fy;
                    improved = true;
                    if (observer) {
                        observer(fx);
                    }
                    break;
                }
            }
        }
        if (!improved) {
            step *= 0.5;
        }
    }
    out.angles = x;
    out.converged = step < opt.tol;
    // Report the functional of the materialized triple so the value is
    // reproducible from the returned directions alone.
    out.value = quantum_functional(triple_from_angles(x));
    return out;
}

namespace detail {

inline void check_search_parameters(int restarts, double tol) {
    if (restarts < 1) {
        throw InvalidParameter("restarts must be >= 1");
    }
    if (!(tol > 0.0) || !std::isfinite(tol)) {
        throw InvalidParameter("tol must be > 0");
    }
}

inline CanonicalAngles random_angles(rng::Stream &stream) {
    return {std::numbers::pi * stream.uniform01(),
            std::numbers::pi * stream.uniform01(),
            2.0 * std::numbers::pi * stream.uniform01()};
}

} // namespace detail

/// Multi-start coordinate ascent from random canonical triples.
inline OptimizationResult optimize_directions(int restarts, double tol,
                                              std::uint64_t seed,
                                              unsigned threads = 1) {
    detail::check_search_parameters(restarts, tol);
    LocalSearchOptions opt;
    opt.tol = tol;

    std::vector<LocalSearchResult> runs(static_cast<std::size_t>(restarts));
    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            rng::Stream stream(rng::derive_seed(seed, r));
            runs[r] = coordinate_ascent(detail::random_angles(stream), opt);
        }
    };

    const std::size_t n = runs.size();
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, n);
    if (workers == 1) {
        run_range(0, n);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(run_range, w * n / workers, (w + 1) * n / workers);
        }
    }

    OptimizationResult result{triple_from_angles(runs[0].angles),
                              runs[0].value, restarts, true, {}};
    std::size_t best = 0;
    for (std::size_t r = 0; r < n; ++r) {
        result.restart_values.push_back(runs[r].value);
        result.converged = result.converged && runs[r].converged;
        if (runs[r].value > runs[best].value) {
            best = r;
        }
    }
    result.best = triple_from_angles(runs[best].angles);
    result.value = runs[best].value;
    return result;
}

/// Single local search warm-started from an arbitrary triple.
inline OptimizationResult optimize_from(const DirectionTriple &start, double tol,
                                        const IncumbentObserver &observer = {}) {
    detail::check_search_parameters(1, tol);
    LocalSearchOptions opt;
    opt.tol = tol;
    const LocalSearchResult run =
        coordinate_ascent(angles_of(start), opt, observer);
    return OptimizationResult{triple_from_angles(run.angles), run.value, 1,
                              run.converged, {run.value}};
}

/// Maximum of the functional over a regular grid of canonical angles
/// (polar angles in [0, 180], azimuth in [0, 360), spacing in degrees).
struct GridScanResult {
    CanonicalAngles angles{};
    double value = 0.0;
};

inline GridScanResult grid_scan_max(double spacing_degrees = 1.0) {
    if (!(spacing_degrees > 0.0)) {
        throw InvalidParameter("grid spacing must be > 0");
    }
    const double deg = std::numbers::pi / 180.0;
    const auto polar_steps =
        static_cast<std::size_t>(std::floor(180.0 / spacing_degrees + 1e-9)) + 1;
    const auto azimuth_steps =
        static_cast<std::size_t>(std::ceil(360.0 / spacing_degrees - 1e-9));

    std::vector<double> cos_polar(polar_steps);
    std::vector<double> sin_polar(polar_steps);
    for (std::size_t i = 0; i < polar_steps; ++i) {
        cos_polar[i] = std::cos(i * spacing_degrees * deg);
        sin_polar[i] = std::sin(i * spacing_degrees * deg);
    }
    std::vector<double> cos_azimuth(azimuth_steps);
    for (std::size_t i = 0; i < azimuth_steps; ++i) {
        cos_azimuth[i] = std::cos(i * spacing_degrees * deg);
    }

    GridScanResult best{{0.0, 0.0, 0.0}, -INFINITY};
    for (std::size_t ib = 0; ib < polar_steps; ++ib) {
        for (std::size_t ic = 0; ic < polar_steps; ++ic) {
            const double ab_minus_ac = std::abs(cos_polar[ib] - cos_polar[ic]);
            const double zz = cos_polar[ib] * cos_polar[ic];
            const double xy = sin_polar[ib] * sin_polar[ic];
            for (std::size_t ip = 0; ip < azimuth_steps; ++ip) {
                const double f = ab_minus_ac + xy * cos_azimuth[ip] + zz;
                if (f > best.value) {
                    best = {{ib * spacing_degrees * deg,
                             ic * spacing_degrees * deg,
                             ip * spacing_degrees * deg},
                            f};
                }
            }
        }
    }
    return best;
}

/// One row of the functional maximized over a at fixed u = b.c.
struct SweepRow {
    double u;
    /// sqrt(2 - 2u) + u
    double functional;
    DirectionTriple triple;
    /// quantum_functional(triple), computed independently of the closed form.
    double realized;
};

/**
 * Functional along u = b.c in [-1, 1] on @p grid_points uniform points.
 * Each row is realized by b = z, c = (sqrt(1 - u^2), 0, u) and
 * a = (b - c)/|b - c| (a = x when b = c).
 */
inline std::vector<SweepRow> sweep_functional(int grid_points) {
    if (grid_points < 2) {
        throw InvalidParameter("grid_points must be >= 2");
    }
    const int intervals = grid_points - 1;
    std::vector<SweepRow> rows;
    rows.reserve(static_cast<std::size_t>(grid_points));
    for (int k = 0; k < grid_points; ++k) {
        const double u = static_cast<double>(2 * k - intervals) / intervals;
        const BlochVector b = axis_z();
        const BlochVector c =
            make_direction(std::sqrt(std::max(0.0, 1.0 - u * u)), 0.0, u);
        const Vector3 diff = b.vec() - c.vec();
        const BlochVector a = diff.norm() >= kMinDirectionNorm
                                  ? make_direction(diff)
                                  : axis_x();
        SweepRow row{u, std::sqrt(2.0 - 2.0 * u) + u, DirectionTriple{a, b, c},
                     0.0};
        row.realized = quantum_functional(row.triple);
        rows.push_back(row);
    }
    return rows;
}

} // namespace tempobell

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

#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

#include "tempo_bell/qubit.hpp"
#include "tempo_bell/rng.hpp"

namespace tempobell::test {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

/// Isotropic direction: uniform z and azimuth (Archimedes).
inline BlochVector random_direction(rng::Stream &s) {
    const double z = 2.0 * s.uniform01() - 1.0;
    const double phi = 2.0 * std::numbers::pi * s.uniform01();
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return make_direction(r * std::cos(phi), r * std::sin(phi), z);
}

/// Uniform point in the Bloch ball.
inline QubitState random_state(rng::Stream &s) {
    const BlochVector n = random_direction(s);
    const double radius = std::cbrt(s.uniform01());
    return QubitState::from_bloch(radius * n.vec());
}

inline SpinRotation random_rotation(rng::Stream &s) {
    return SpinRotation{random_direction(s), 4.0 * s.uniform01() - 2.0};
}

inline double max_abs_diff(const Matrix2c &x, const Matrix2c &y) {
    return (x - y).cwiseAbs().maxCoeff();
}

} // namespace tempobell::test

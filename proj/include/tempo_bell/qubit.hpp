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
 * @file qubit.hpp
 * Spin-1/2 kinematics: measurement directions, Pauli observables, density
 * matrices, projective measurement with collapse and free precession.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "errors.hpp"

namespace tempobell {

using Complex = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Vector3 = Eigen::Vector3d;

/// Tolerance of the exact 2x2 arithmetic checks.
inline constexpr double kExactTol = 1e-12;
/// Inputs shorter than this cannot be normalized into a direction.
inline constexpr double kMinDirectionNorm = 1e-9;
/// Branches with Born probability below this are treated as impossible.
inline constexpr double kMinBranchProbability = 1e-12;

inline Matrix2c pauli_x() {
    Matrix2c m;
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

inline Matrix2c pauli_y() {
    Matrix2c m;
    m << 0.0, Complex{0.0, -1.0}, Complex{0.0, 1.0}, 0.0;
    return m;
}

inline Matrix2c pauli_z() {
    Matrix2c m;
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

/**
 * Unit 3-vector used as a spin measurement direction.
 *
 * Only obtainable through make_direction(), so every instance is normalized.
 */
class BlochVector {
  public:
    [[nodiscard]] double x() const { return v_.x(); }
    [[nodiscard]] double y() const { return v_.y(); }
    [[nodiscard]] double z() const { return v_.z(); }
    [[nodiscard]] const Vector3 &vec() const { return v_; }

    [[nodiscard]] double dot(const BlochVector &other) const {
        return v_.dot(other.v_);
    }

    [[nodiscard]] BlochVector operator-() const { return BlochVector{-v_}; }

    friend bool operator==(const BlochVector &l, const BlochVector &r) {
        return l.v_ == r.v_;
    }

  private:
    explicit BlochVector(const Vector3 &unit) : v_(unit) {}
    friend BlochVector make_direction(const Vector3 &v);

    Vector3 v_;
};

/// Normalizes @p v; throws ZeroVector when its norm is below 1e-9.
inline BlochVector make_direction(const Vector3 &v) {
    const double norm = v.norm();
    if (!std::isfinite(norm) || norm < kMinDirectionNorm) {
        throw ZeroVector("direction (" + std::to_string(v.x()) + "," +
                         std::to_string(v.y()) + "," + std::to_string(v.z()) +
                         ") has norm below 1e-9");
    }
    return BlochVector{v / norm};
}

inline BlochVector make_direction(double x, double y, double z) {
    return make_direction(Vector3{x, y, z});
}

inline BlochVector axis_x() { return make_direction(1.0, 0.0, 0.0); }
inline BlochVector axis_y() { return make_direction(0.0, 1.0, 0.0); }
inline BlochVector axis_z() { return make_direction(0.0, 0.0, 1.0); }

/// Measurement outcome of a dichotomic spin measurement.
enum class Outcome : int { Plus = 1, Minus = -1 };

inline constexpr std::array<Outcome, 2> kOutcomes{Outcome::Plus,
                                                  Outcome::Minus};

[[nodiscard]] constexpr int value(Outcome s) { return static_cast<int>(s); }

[[nodiscard]] constexpr Outcome flipped(Outcome s) {
    return s == Outcome::Plus ? Outcome::Minus : Outcome::Plus;
}

/// sigma . n for an arbitrary real 3-vector (not necessarily unit).
inline Matrix2c sigma_dot(const Vector3 &n) {
    return n.x() * pauli_x() + n.y() * pauli_y() + n.z() * pauli_z();
}

/// Spin component along a direction, sigma . n.
struct SpinObservable {
    BlochVector direction;
    Matrix2c matrix;
};

inline SpinObservable observable(const BlochVector &n) {
    return SpinObservable{n, sigma_dot(n.vec())};
}

/// (I + s sigma.n) / 2
inline Matrix2c projector(const BlochVector &n, Outcome s) {
    return 0.5 * (Matrix2c::Identity() + double(value(s)) * sigma_dot(n.vec()));
}

/**
 * Density matrix of the spin. Construction validates Hermiticity, unit
 * trace and positivity, each to 1e-12.
 */
class QubitState {
  public:
    static QubitState maximally_mixed() {
        return QubitState{Matrix2c::Identity() * 0.5};
    }

    /// Pure state polarized along +n.
    static QubitState spin_up(const BlochVector &n) {
        return QubitState{projector(n, Outcome::Plus)};
    }

    /// rho = (I + r.sigma)/2 with |r| <= 1.
    static QubitState from_bloch(const Vector3 &r) {
        if (!r.allFinite() || r.norm() > 1.0 + kExactTol) {
            throw InvalidState("Bloch vector must have norm <= 1");
        }
        return QubitState{0.5 * (Matrix2c::Identity() + sigma_dot(r))};
    }

    static QubitState from_density_matrix(const Matrix2c &rho) {
        validate(rho);
        return QubitState{rho};
    }

    [[nodiscard]] const Matrix2c &rho() const { return rho_; }

    /// r with rho = (I + r.sigma)/2.
    [[nodiscard]] Vector3 bloch_vector() const {
        return Vector3{2.0 * rho_(0, 1).real(), -2.0 * rho_(0, 1).imag(),
                       (rho_(0, 0) - rho_(1, 1)).real()};
    }

    /// Both eigenvalues, ascending.
    [[nodiscard]] std::array<double, 2> eigenvalues() const {
        return eigenvalues_of(rho_);
    }

    static std::array<double, 2> eigenvalues_of(const Matrix2c &m) {
        const double a = m(0, 0).real();
        const double d = m(1, 1).real();
        const double half_gap =
            std::sqrt(0.25 * (a - d) * (a - d) + std::norm(m(0, 1)));
        const double mean = 0.5 * (a + d);
        return {mean - half_gap, mean + half_gap};
    }

    static void validate(const Matrix2c &rho) {
        if (!rho.allFinite()) {
            throw InvalidState("density matrix has non-finite entries");
        }
        if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kExactTol) {
            throw InvalidState("density matrix is not Hermitian");
        }
        if (std::abs(rho.trace() - 1.0) > kExactTol) {
            throw InvalidState("density matrix trace differs from 1");
        }
        const auto ev = eigenvalues_of(rho);
        if (ev[0] < -kExactTol || ev[1] > 1.0 + kExactTol) {
            throw InvalidState("density matrix is not positive semidefinite");
        }
    }

  private:
    explicit QubitState(const Matrix2c &rho) : rho_(rho) {}
    friend QubitState collapse(const QubitState &, const BlochVector &,
                               Outcome);
    friend QubitState conjugate(const QubitState &, const Matrix2c &);

    Matrix2c rho_;
};

/// tr(P rho), clamped to [0, 1].
inline double born_probability(const QubitState &state, const BlochVector &n,
                               Outcome s) {
    const double p = (projector(n, s) * state.rho()).trace().real();
    return std::clamp(p, 0.0, 1.0);
}

/// Lueders update P rho P / tr(P rho P).
inline QubitState collapse(const QubitState &state, const BlochVector &n,
                           Outcome s) {
    const double p = born_probability(state, n, s);
    if (p < kMinBranchProbability) {
        throw ImpossibleOutcome("outcome " + std::to_string(value(s)) +
                                " has probability " + std::to_string(p));
    }
    const Matrix2c proj = projector(n, s);
    Matrix2c post = proj * state.rho() * proj;
    post /= post.trace();
    // Symmetrize away rounding so the Hermiticity invariant holds exactly.
    return QubitState{0.5 * (post + post.adjoint())};
}

/// U rho U^dagger for a unitary U.
inline QubitState conjugate(const QubitState &state, const Matrix2c &u) {
    Matrix2c out = u * state.rho() * u.adjoint();
    return QubitState{0.5 * (out + out.adjoint())};
}

/**
 * Precession of the spin about a fixed axis. The default value is the free
 * particle (zero rate), for which every evolution is the identity.
 */
struct SpinRotation {
    BlochVector axis = axis_z();
    double angular_rate = 0.0; // radians per unit time

    static SpinRotation identity() { return SpinRotation{}; }

    [[nodiscard]] bool is_identity() const { return angular_rate == 0.0; }

    /// exp(-i (rate t / 2) sigma.axis); valid for any real t.
    [[nodiscard]] Matrix2c unitary(double t) const {
        const double half = 0.5 * angular_rate * t;
        return std::cos(half) * Matrix2c::Identity() -
               Complex{0.0, std::sin(half)} * sigma_dot(axis.vec());
    }
};

inline QubitState evolve(const QubitState &state, const SpinRotation &rotation,
                         double dt) {
    if (!(dt >= 0.0)) {
        throw InvalidParameter("evolution interval must be >= 0");
    }
    if (rotation.is_identity() || dt == 0.0) {
        return state;
    }
    return conjugate(state, rotation.unitary(dt));
}

/**
 * Evolves a state known at absolute time @p from to absolute time @p to
 * through U(to) U(from)^dagger, i.e. with the clock made explicit.
 */
inline QubitState evolve_between(const QubitState &state,
                                 const SpinRotation &rotation, double from,
                                 double to) {
    if (!(to >= from)) {
        throw InvalidParameter("evolution must run forward in time");
    }
    if (rotation.is_identity() || to == from) {
        return state;
    }
    return conjugate(state,
                     rotation.unitary(to) * rotation.unitary(from).adjoint());
}

} // namespace tempobell

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

#include <cmath>
#include <numbers>

#include <catch_amalgamated.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include "test_helpers.hpp"
#include "tempo_bell/qubit.hpp"

using namespace tempobell;
using tempobell::test::kInvSqrt2;
using Catch::Matchers::WithinAbs;

TEST_CASE("make_direction normalizes", "[qubit]") {
    const auto z = make_direction(0, 0, 2);
    CHECK(z.x() == 0.0);
    CHECK(z.y() == 0.0);
    CHECK(z.z() == 1.0);

    const auto d = make_direction(1, 1, 0);
    CHECK_THAT(d.x(), WithinAbs(kInvSqrt2, 1e-15));
    CHECK_THAT(d.y(), WithinAbs(kInvSqrt2, 1e-15));
    CHECK(d.z() == 0.0);
}

TEST_CASE("make_direction rejects near-zero input", "[qubit]") {
    CHECK_THROWS_AS(make_direction(0, 0, 0), ZeroVector);
    CHECK_THROWS_AS(make_direction(1e-10, 0, 0), ZeroVector);
    CHECK_THROWS_AS(make_direction(NAN, 0, 1), ZeroVector);
    CHECK_NOTHROW(make_direction(1e-9, 0, 0));
}

TEST_CASE("observable matches Pauli matrices", "[qubit]") {
    CHECK(observable(axis_z()).matrix == pauli_z());
    CHECK(observable(axis_x()).matrix == pauli_x());

    const auto n = make_direction(1, 0, 1);
    const Matrix2c m = observable(n).matrix;
    CHECK(test::max_abs_diff(m, (pauli_x() + pauli_z()) * kInvSqrt2) < 1e-15);

    // Independent eigensolve.
    Eigen::SelfAdjointEigenSolver<Matrix2c> es(m);
    CHECK_THAT(es.eigenvalues()(0), WithinAbs(-1.0, 1e-12));
    CHECK_THAT(es.eigenvalues()(1), WithinAbs(1.0, 1e-12));
}

TEST_CASE("observable squares to identity and is traceless", "[qubit][property]") {
    rng::Stream s(11);
    for (int i = 0; i < 1000; ++i) {
        const auto obs = observable(test::random_direction(s));
        REQUIRE(test::max_abs_diff(obs.matrix * obs.matrix,
                                   Matrix2c::Identity()) < 1e-12);
        REQUIRE(std::abs(obs.matrix.trace()) < 1e-12);
    }
}

TEST_CASE("projectors", "[qubit]") {
    Matrix2c up;
    up << 1, 0, 0, 0;
    Matrix2c down;
    down << 0, 0, 0, 1;
    CHECK(projector(axis_z(), Outcome::Plus) == up);
    CHECK(projector(axis_z(), Outcome::Minus) == down);

    rng::Stream s(12);
    for (int i = 0; i < 200; ++i) {
        const auto n = test::random_direction(s);
        const Matrix2c p = projector(n, Outcome::Plus);
        const Matrix2c q = projector(n, Outcome::Minus);
        REQUIRE(test::max_abs_diff(p + q, Matrix2c::Identity()) < 1e-12);
        REQUIRE(test::max_abs_diff(p * p, p) < 1e-12);
        REQUIRE(std::abs(p.trace() - 1.0) < 1e-12); // rank one
        REQUIRE(std::abs(p.determinant()) < 1e-12);
    }
}

TEST_CASE("QubitState validation", "[qubit]") {
    CHECK_NOTHROW(QubitState::maximally_mixed());
    CHECK_THROWS_AS(QubitState::from_bloch(Vector3{0.0, 0.0, 1.1}), InvalidState);

    Matrix2c not_hermitian;
    not_hermitian << 0.5, 0.1, 0.2, 0.5;
    CHECK_THROWS_AS(QubitState::from_density_matrix(not_hermitian), InvalidState);

    Matrix2c bad_trace;
    bad_trace << 0.6, 0.0, 0.0, 0.6;
    CHECK_THROWS_AS(QubitState::from_density_matrix(bad_trace), InvalidState);

    Matrix2c negative;
    negative << 1.2, 0.0, 0.0, -0.2;
    CHECK_THROWS_AS(QubitState::from_density_matrix(negative), InvalidState);

    const Vector3 r{0.3, -0.2, 0.5};
    CHECK((QubitState::from_bloch(r).bloch_vector() - r).norm() < 1e-15);
}

TEST_CASE("Born probabilities", "[qubit]") {
    const auto mixed = QubitState::maximally_mixed();
    const auto up_z = QubitState::spin_up(axis_z());
    CHECK_THAT(born_probability(mixed, make_direction(0.3, -1, 2), Outcome::Plus),
               WithinAbs(0.5, 1e-15));
    CHECK_THAT(born_probability(up_z, axis_z(), Outcome::Plus),
               WithinAbs(1.0, 1e-15));
    // tr([[1,1],[1,1]]/2 . [[1,0],[0,0]]) = 1/2
    CHECK_THAT(born_probability(up_z, axis_x(), Outcome::Plus),
               WithinAbs(0.5, 1e-15));

    rng::Stream s(13);
    for (int i = 0; i < 500; ++i) {
        const auto st = test::random_state(s);
        const auto n = test::random_direction(s);
        const double p = born_probability(st, n, Outcome::Plus);
        const double q = born_probability(st, n, Outcome::Minus);
        REQUIRE(std::abs(p + q - 1.0) < 1e-12);
        // (1 + r.n)/2
        REQUIRE(std::abs(p - 0.5 * (1.0 + st.bloch_vector().dot(n.vec()))) < 1e-12);
    }
}

TEST_CASE("collapse", "[qubit]") {
    const auto mixed = QubitState::maximally_mixed();
    const auto up_z = QubitState::spin_up(axis_z());

    const auto c1 = collapse(mixed, axis_z(), Outcome::Plus);
    CHECK(test::max_abs_diff(c1.rho(), up_z.rho()) < 1e-15);

    CHECK_THROWS_AS(collapse(up_z, axis_z(), Outcome::Minus), ImpossibleOutcome);

    Matrix2c up_x;
    up_x << 0.5, 0.5, 0.5, 0.5;
    const auto c2 = collapse(up_z, axis_x(), Outcome::Plus);
    CHECK(test::max_abs_diff(c2.rho(), up_x) < 1e-15);
}

TEST_CASE("collapse is idempotent and yields valid states", "[qubit][property]") {
    rng::Stream s(14);
    for (int i = 0; i < 500; ++i) {
        const auto st = test::random_state(s);
        const auto n = test::random_direction(s);
        const Outcome o = s.uniform01() < 0.5 ? Outcome::Plus : Outcome::Minus;
        if (born_probability(st, n, o) < kMinBranchProbability) {
            continue;
        }
        const auto post = collapse(st, n, o);
        REQUIRE_NOTHROW(QubitState::validate(post.rho()));
        REQUIRE(std::abs(born_probability(post, n, o) - 1.0) < 1e-12);
    }
}

TEST_CASE("evolve", "[qubit]") {
    rng::Stream s(15);
    const auto st = test::random_state(s);
    const SpinRotation still{axis_x(), 0.0};
    CHECK(evolve(st, still, 5.0).rho() == st.rho());
    CHECK(evolve(st, test::random_rotation(s), 0.0).rho() == st.rho());
    CHECK_THROWS_AS(evolve(st, still, -1.0), InvalidParameter);

    // Rotation by pi about x flips spin-up z to spin-down z.
    const auto flipped =
        evolve(QubitState::spin_up(axis_z()), SpinRotation{axis_x(), 1.0},
               std::numbers::pi);
    CHECK(test::max_abs_diff(flipped.rho(),
                             projector(axis_z(), Outcome::Minus)) < 1e-12);
}

TEST_CASE("evolve matches the matrix exponential and preserves spectra",
          "[qubit][property]") {
    rng::Stream s(16);
    for (int i = 0; i < 100; ++i) {
        const auto st = test::random_state(s);
        const auto rot = test::random_rotation(s);
        const double dt = 3.0 * s.uniform01();
        const auto out = evolve(st, rot, dt);

        const Matrix2c generator = Complex{0.0, -0.5 * rot.angular_rate * dt} *
                                   observable(rot.axis).matrix;
        const Matrix2c u = generator.exp();
        REQUIRE(test::max_abs_diff(out.rho(), u * st.rho() * u.adjoint()) < 1e-12);

        REQUIRE(test::max_abs_diff(out.rho(), out.rho().adjoint()) < 1e-12);
        REQUIRE(std::abs(out.rho().trace() - 1.0) < 1e-12);
        const auto before = st.eigenvalues();
        const auto after = out.eigenvalues();
        REQUIRE(std::abs(before[0] - after[0]) < 1e-12);
        REQUIRE(std::abs(before[1] - after[1]) < 1e-12);
    }
}

TEST_CASE("evolve_between composes like evolve", "[qubit]") {
    rng::Stream s(17);
    for (int i = 0; i < 100; ++i) {
        const auto st = test::random_state(s);
        const auto rot = test::random_rotation(s);
        const double t0 = 10.0 * s.uniform01() - 5.0;
        const double dt = 2.0 * s.uniform01();
        REQUIRE(test::max_abs_diff(evolve_between(st, rot, t0, t0 + dt).rho(),
                                   evolve(st, rot, dt).rho()) < 1e-12);
    }
    CHECK_THROWS_AS(evolve_between(QubitState::maximally_mixed(),
                                   SpinRotation{axis_x(), 1.0}, 2.0, 1.0),
                    InvalidParameter);
}

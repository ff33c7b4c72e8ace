// Copyright 2026 The phononwalk Authors

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
#include <numeric>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "phononwalk/crystal.hpp"
#include "phononwalk/errors.hpp"
#include "support/oracles.hpp"

using namespace phononwalk;
using Catch::Approx;

TEST_CASE("Potential of hand-evaluable configurations", "[crystal]")
{
    CHECK(dimensionless_potential(std::vector<double>{0.0}) == 0.0);
    CHECK(dimensionless_potential(std::vector<double>{-1.0, 1.0}) == Approx(1.5).epsilon(1e-15));
    // 0.62996^2 + 1 / 1.25992
    CHECK(dimensionless_potential(std::vector<double>{-0.62996, 0.62996}) ==
          Approx(1.1905507889769762).epsilon(1e-14));
}

TEST_CASE("Coincident or empty positions are rejected", "[crystal]")
{
    CHECK_THROWS_AS(dimensionless_potential(std::vector<double>{0.3, 0.3}), DomainError);
    CHECK_THROWS_AS(potential_gradient(std::vector<double>{1.0, -2.0, 1.0}), DomainError);
    CHECK_THROWS_AS(dimensionless_potential(std::vector<double>{}), DomainError);
}

TEST_CASE("Gradient at simple configurations", "[crystal]")
{
    CHECK(potential_gradient(std::vector<double>{0.0}) == std::vector<double>{0.0});
    const double u = std::cbrt(0.25);
    const auto g = potential_gradient(std::vector<double>{-u, u});
    CHECK(std::abs(g[0]) < 1e-15);
    CHECK(std::abs(g[1]) < 1e-15);
    // Rounded to five digits the residual is of order 1e-5.
    const auto g5 = potential_gradient(std::vector<double>{-0.62996, 0.62996});
    CHECK(std::abs(g5[0]) < 1e-4);
}

TEST_CASE("Gradient matches central finite differences", "[crystal]")
{
    std::mt19937_64 gen(7);
    std::uniform_int_distribution<int> size(1, 10);
    std::uniform_real_distribution<double> jitter(-0.15, 0.15);
    const auto potential = [](const std::vector<double> &u) { return dimensionless_potential(u); };
    for (int trial = 0; trial < 100; ++trial) {
        const int n = size(gen);
        std::vector<double> u = equilibrium_shape(n);
        for (double &x : u) {
            x += jitter(gen);
        }
        std::sort(u.begin(), u.end());
        const auto analytic = potential_gradient(u);
        const auto numeric = oracle::finite_difference_gradient(potential, u, 1e-6);
        for (int i = 0; i < n; ++i) {
            CHECK(std::abs(analytic[i] - numeric[i]) < 1e-6);
        }
    }
}

TEST_CASE("Hessian matches finite differences of the gradient", "[crystal]")
{
    const std::vector<double> u{-1.7, -0.5, 0.4, 1.6};
    const Eigen::MatrixXd hess = potential_hessian(u);
    for (int j = 0; j < 4; ++j) {
        const auto component = [j](const std::vector<double> &x) {
            return potential_gradient(x)[j];
        };
        const auto row = oracle::finite_difference_gradient(component, u, 1e-6);
        for (int i = 0; i < 4; ++i) {
            CHECK(hess(j, i) == Approx(row[i]).margin(1e-6));
        }
    }
}

TEST_CASE("Equilibrium of one and two ions", "[crystal]")
{
    CHECK(equilibrium_shape(1) == std::vector<double>{0.0});
    const auto u = equilibrium_shape(2);
    const double expected = std::cbrt(0.25); // force balance u^3 = 1/4
    CHECK(u[0] == Approx(-expected).epsilon(1e-13));
    CHECK(u[1] == Approx(expected).epsilon(1e-13));
}

TEST_CASE("Equilibrium invariants for 1..10 ions", "[crystal]")
{
    for (int n = 1; n <= 10; ++n) {
        CAPTURE(n);
        const auto u = equilibrium_shape(n);
        REQUIRE(static_cast<int>(u.size()) == n);
        for (int i = 1; i < n; ++i) {
            CHECK(u[i] > u[i - 1]);
        }
        CHECK(std::abs(std::accumulate(u.begin(), u.end(), 0.0)) < 1e-10);
        for (int i = 0; i < n; ++i) {
            CHECK(std::abs(u[i] + u[n - 1 - i]) < 1e-9);
        }
        double gnorm = 0.0;
        for (double g : potential_gradient(u)) {
            gnorm += g * g;
        }
        CHECK(std::sqrt(gnorm) < 1e-10);

        // Local minimum: Hessian positive definite.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(potential_hessian(u));
        CHECK(eig.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("Solver handles longer chains", "[crystal]")
{
    const auto u = equilibrium_shape(50);
    double gnorm = 0.0;
    for (double g : potential_gradient(u)) {
        gnorm += g * g;
    }
    CHECK(std::sqrt(gnorm) < 1e-10);
}

TEST_CASE("Iteration cap surfaces a convergence error", "[crystal]")
{
    CrystalSolverOptions opts;
    opts.max_iterations = 0;
    try {
        equilibrium_shape(5, opts);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError &e) {
        CHECK(e.residual() > 1e-10);
    }
}

TEST_CASE("Physical chain for the four-ion trap", "[crystal]")
{
    const IonChain chain = equilibrium_positions(oracle::four_ion_trap());
    REQUIRE(chain.size() == 4);
    // d0 ~ 20 um within 5 %.
    CHECK(chain.central_gap() == Approx(20e-6).epsilon(0.05));
    CHECK(chain.gaps().size() == 3);
    for (int n = 0; n < 4; ++n) {
        CHECK(chain.z0[n] == chain.length_scale * chain.u[n]);
    }
}

TEST_CASE("Length scale follows omega_z^(-2/3)", "[crystal]")
{
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 20; ++trial) {
        TrapConfig c = oracle::random_trap(gen, 5);
        const IonChain a = equilibrium_positions(c);
        const double factor = 0.5 + trial * 0.07;
        c.omega_z *= factor;
        const IonChain b = equilibrium_positions(c);
        const double expected = std::pow(factor, -2.0 / 3.0);
        for (int n = 0; n < 5; ++n) {
            if (a.z0[n] != 0.0) {
                CHECK(b.z0[n] / a.z0[n] == Approx(expected).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("Trap validation", "[crystal]")
{
    TrapConfig c = oracle::four_ion_trap();
    CHECK_NOTHROW(c.validate());
    c.omega_z = c.omega_y * 1.01;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = oracle::four_ion_trap();
    c.n_ions = 0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c = oracle::four_ion_trap();
    c.mass = -1.0;
    CHECK_THROWS_AS(equilibrium_positions(c), DomainError);
}

TEST_CASE("Single-ion chain has no central gap", "[crystal]")
{
    TrapConfig c = oracle::four_ion_trap();
    c.n_ions = 1;
    const IonChain chain = equilibrium_positions(c);
    CHECK(chain.u == std::vector<double>{0.0});
    CHECK(chain.gaps().empty());
    CHECK_THROWS_AS(chain.central_gap(), DomainError);
}

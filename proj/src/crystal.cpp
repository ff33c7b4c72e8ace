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

#include "phononwalk/crystal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "phononwalk/constants.hpp"
#include "phononwalk/errors.hpp"

namespace phononwalk {

namespace {

void check_positions(std::span<const double> u)
{
    if (u.empty()) {
        throw DomainError("ion positions: empty configuration");
    }
    for (std::size_t n = 0; n < u.size(); ++n) {
        if (!std::isfinite(u[n])) {
            throw DomainError("ion positions: non-finite entry");
        }
        for (std::size_t m = n + 1; m < u.size(); ++m) {
            if (u[n] == u[m]) {
                throw DomainError("ion positions: ions " + std::to_string(n + 1) + " and " +
                                  std::to_string(m + 1) + " coincide");
            }
        }
    }
}

double norm(const std::vector<double> &v)
{
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

bool strictly_ascending(const std::vector<double> &u)
{
    return std::adjacent_find(u.begin(), u.end(), std::greater_equal<>()) == u.end();
}

} // namespace

void TrapConfig::validate() const
{
    if (n_ions < 1) {
        throw DomainError("trap: n_ions must be >= 1");
    }
    if (!(mass > 0.0) || !(omega_x > 0.0) || !(omega_y > 0.0) || !(omega_z > 0.0)) {
        throw DomainError("trap: mass and all secular frequencies must be positive");
    }
    if (!(omega_z < omega_y)) {
        throw DomainError("trap: omega_z must be below omega_y for a linear crystal");
    }
}

std::vector<double> IonChain::gaps() const
{
    std::vector<double> out;
    for (std::size_t n = 1; n < z0.size(); ++n) {
        out.push_back(z0[n] - z0[n - 1]);
    }
    return out;
}

double IonChain::central_gap() const
{
    const int n = size();
    if (n < 2) {
        throw DomainError("central gap needs at least two ions");
    }
    if (n % 2 == 0) {
        return z0[n / 2] - z0[n / 2 - 1];
    }
    const int c = n / 2;
    return 0.5 * ((z0[c] - z0[c - 1]) + (z0[c + 1] - z0[c]));
}

double dimensionless_potential(std::span<const double> u)
{
    check_positions(u);
    double v = 0.0;
    for (std::size_t n = 0; n < u.size(); ++n) {
        v += 0.5 * u[n] * u[n];
        for (std::size_t m = n + 1; m < u.size(); ++m) {
            v += 1.0 / std::abs(u[n] - u[m]);
        }
    }
    return v;
}

std::vector<double> potential_gradient(std::span<const double> u)
{
    check_positions(u);
    std::vector<double> g(u.size());
    for (std::size_t n = 0; n < u.size(); ++n) {
        double gn = u[n];
        for (std::size_t m = 0; m < u.size(); ++m) {
            if (m == n) {
                continue;
            }
            const double d = u[n] - u[m];
            gn -= std::copysign(1.0 / (d * d), d);
        }
        g[n] = gn;
    }
    return g;
}

Eigen::MatrixXd potential_hessian(std::span<const double> u)
{
    check_positions(u);
    const auto n_ions = static_cast<Eigen::Index>(u.size());
    Eigen::MatrixXd hess = Eigen::MatrixXd::Identity(n_ions, n_ions);
    for (Eigen::Index n = 0; n < n_ions; ++n) {
        for (Eigen::Index m = 0; m < n_ions; ++m) {
            if (m == n) {
                continue;
            }
            const double d = std::abs(u[n] - u[m]);
            const double k = 2.0 / (d * d * d);
            hess(n, n) += k;
            hess(n, m) = -k;
        }
    }
    return hess;
}

double length_scale(const TrapConfig &config)
{
    return std::cbrt(constants::coulomb_k / (config.mass * config.omega_z * config.omega_z));
}

std::vector<double> equilibrium_shape(int n_ions, const CrystalSolverOptions &options)
{
    if (n_ions < 1) {
        throw DomainError("equilibrium: n_ions must be >= 1");
    }
    if (n_ions == 1) {
        return {0.0};
    }

    // Uniform seed spanning roughly the expected chain extent.
    const double half_width = 1.1 * std::pow(static_cast<double>(n_ions), 0.56) / 2.0;
    std::vector<double> u(n_ions);
    for (int n = 0; n < n_ions; ++n) {
        u[n] = -half_width + 2.0 * half_width * n / (n_ions - 1);
    }

    std::vector<double> g = potential_gradient(u);
    double gnorm = norm(g);
    double v = dimensionless_potential(u);

    for (int iter = 0; iter < options.max_iterations && gnorm >= options.gradient_tolerance;
         ++iter) {
        const Eigen::Map<const Eigen::VectorXd> grad(g.data(), n_ions);
        Eigen::VectorXd step;
        Eigen::LLT<Eigen::MatrixXd> llt(potential_hessian(u));
        if (llt.info() == Eigen::Success) {
            step = -llt.solve(grad);
        } else {
            step = -grad;
        }
        const double slope = grad.dot(step);

        // Backtrack until ordering survives and either the energy or the gradient drops.
        double alpha = 1.0;
        std::vector<double> trial(n_ions);
        bool accepted = false;
        for (int k = 0; k < 60; ++k, alpha *= 0.5) {
            for (int n = 0; n < n_ions; ++n) {
                trial[n] = u[n] + alpha * step(n);
            }
            if (!strictly_ascending(trial)) {
                continue;
            }
            const double v_trial = dimensionless_potential(trial);
            const std::vector<double> g_trial = potential_gradient(trial);
            const double gnorm_trial = norm(g_trial);
            if (v_trial <= v + 1e-4 * alpha * slope || gnorm_trial < gnorm) {
                u = trial;
                g = g_trial;
                gnorm = gnorm_trial;
                v = v_trial;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            break;
        }
    }

    // Remove the residual asymmetry left by rounding; the exact minimum is mirror symmetric.
    for (int n = 0; n < n_ions / 2; ++n) {
        const double half = 0.5 * (u[n_ions - 1 - n] - u[n]);
        u[n] = -half;
        u[n_ions - 1 - n] = half;
    }
    if (n_ions % 2 == 1) {
        u[n_ions / 2] = 0.0;
    }
    gnorm = norm(potential_gradient(u));
    if (!(gnorm < 1e-10)) {
        throw ConvergenceError("equilibrium: solver did not converge for n_ions=" +
                                   std::to_string(n_ions),
                               gnorm);
    }
    return u;
}

IonChain equilibrium_positions(const TrapConfig &config, const CrystalSolverOptions &options)
{
    config.validate();
    IonChain chain;
    chain.u = equilibrium_shape(config.n_ions, options);
    chain.length_scale = length_scale(config);
    chain.z0.reserve(chain.u.size());
    for (double x : chain.u) {
        chain.z0.push_back(chain.length_scale * x);
    }
    return chain;
}

} // namespace phononwalk

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

#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace phononwalk {

/// Ion species and secular trap frequencies. Frequencies in rad/s, mass in kg.
struct TrapConfig {
    int n_ions = 4;
    double mass = 0.0;
    double omega_x = 0.0; // carried along, not used by the model
    double omega_y = 0.0;
    double omega_z = 0.0;

    /// Throws DomainError unless n_ions >= 1, all frequencies > 0 and omega_z < omega_y.
    void validate() const;
};

/// Equilibrium axial positions of a linear chain, ascending.
struct IonChain {
    double length_scale = 0.0; // meters
    std::vector<double> u;     // dimensionless
    std::vector<double> z0;    // meters, z0[n] = length_scale * u[n]

    int size() const { return static_cast<int>(u.size()); }

    /// Adjacent gaps z0[n+1] - z0[n] in meters (empty for one ion).
    std::vector<double> gaps() const;

    /// Central-pair distance d0 in meters. For odd chains the two gaps next to the
    /// middle ion are averaged. Throws DomainError for fewer than two ions.
    double central_gap() const;
};

/// V(u) = sum u_n^2 / 2 + sum_{m>n} 1/|u_n - u_m|. Throws DomainError on empty input
/// or coincident positions.
double dimensionless_potential(std::span<const double> u);

/// dV/du_n.
std::vector<double> potential_gradient(std::span<const double> u);

/// d^2V/du_n du_m.
Eigen::MatrixXd potential_hessian(std::span<const double> u);

/// ell = (e^2 / (4 pi eps0 M omega_z^2))^(1/3).
double length_scale(const TrapConfig &config);

struct CrystalSolverOptions {
    int max_iterations = 10000;
    double gradient_tolerance = 1e-12;
};

/// Dimensionless equilibrium u for n_ions ions. Depends on n_ions only.
/// Throws ConvergenceError carrying the final gradient norm if the cap is hit.
std::vector<double> equilibrium_shape(int n_ions, const CrystalSolverOptions &options = {});

IonChain equilibrium_positions(const TrapConfig &config,
                               const CrystalSolverOptions &options = {});

} // namespace phononwalk

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

#include <Eigen/Dense>

#include "phononwalk/crystal.hpp"

namespace phononwalk {

/// Single-phonon radial Hamiltonian in the frame rotating at omega_y, rad/s.
///
/// Off-diagonal h(n,m) = -t_nm > 0, diagonal h(n,n) = sum_{m != n} t_nm < 0, so every
/// row sums to zero and h / (kappa0 / 2) is the dimensionless hopping pattern.
struct HoppingMatrix {
    Eigen::MatrixXd h;
    double kappa0 = 0.0; // rad/s; 0 for a single ion, where it is undefined
    int n_ions = 0;

    /// h / (kappa0 / 2). Depends on n_ions only.
    Eigen::MatrixXd normalized() const;

    /// Rebuild from a dimensionless pattern (in units of kappa0 / 2).
    static HoppingMatrix from_shape(const Eigen::MatrixXd &shape, double kappa0);
};

/// Continuous-time walk generator: M(n,m) = -gamma_nm off the diagonal,
/// M(n,n) = sum_l gamma_nl.
struct WalkGenerator {
    Eigen::MatrixXd m;
    Eigen::MatrixXd gamma; // zero diagonal
};

/// t_nm = -e^2 / (8 pi eps0 M omega_y |z_n - z_m|^3). Sites are 1-based.
double hopping_amplitude(const IonChain &chain, const TrapConfig &config, int n, int m);

/// kappa0 = e^2 / (4 pi eps0 M omega_y d0^3), d0 the central-pair distance.
double kappa0(const IonChain &chain, const TrapConfig &config);

HoppingMatrix hopping_matrix(const IonChain &chain, const TrapConfig &config);

/// Dimensionless hopping pattern h / (kappa0 / 2) for a chain of n_ions.
Eigen::MatrixXd hopping_shape(int n_ions);

WalkGenerator to_walk_generator(const HoppingMatrix &h);

/// Full-transfer time pi / (2 J) across the weakest nearest-neighbour bond J, seconds.
/// For the four-ion chain this is (0.79 kappa0 / 2pi)^-1 / 2.
double max_adjacent_hopping_time(const HoppingMatrix &h);

} // namespace phononwalk

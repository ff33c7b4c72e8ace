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

#include "phononwalk/coupling.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "phononwalk/constants.hpp"
#include "phononwalk/errors.hpp"

namespace phononwalk {

namespace {

void check_same_size(const IonChain &chain, const TrapConfig &config)
{
    if (chain.size() != config.n_ions || chain.z0.size() != chain.u.size()) {
        throw DomainError("chain has " + std::to_string(chain.size()) +
                          " ions but trap config has " + std::to_string(config.n_ions));
    }
}

} // namespace

Eigen::MatrixXd HoppingMatrix::normalized() const
{
    if (n_ions < 2 || !(kappa0 > 0.0)) {
        throw DomainError("normalized hopping matrix needs at least two ions");
    }
    return h / (0.5 * kappa0);
}

HoppingMatrix HoppingMatrix::from_shape(const Eigen::MatrixXd &shape, double kappa0)
{
    if (shape.rows() != shape.cols() || shape.rows() < 1) {
        throw DomainError("hopping shape must be a non-empty square matrix");
    }
    if (shape.rows() > 1 && !(kappa0 > 0.0 && std::isfinite(kappa0))) {
        throw DomainError("kappa0 must be positive and finite");
    }
    HoppingMatrix out;
    out.h = 0.5 * kappa0 * shape;
    out.kappa0 = kappa0;
    out.n_ions = static_cast<int>(shape.rows());
    return out;
}

double hopping_amplitude(const IonChain &chain, const TrapConfig &config, int n, int m)
{
    check_same_size(chain, config);
    const int size = chain.size();
    if (n < 1 || m < 1 || n > size || m > size) {
        throw DomainError("hopping amplitude: site index out of range");
    }
    if (n == m) {
        throw DomainError("hopping amplitude: sites must differ");
    }
    const double d = std::abs(chain.z0[n - 1] - chain.z0[m - 1]);
    return -constants::coulomb_k / (2.0 * config.mass * config.omega_y * d * d * d);
}

double kappa0(const IonChain &chain, const TrapConfig &config)
{
    check_same_size(chain, config);
    const double d0 = chain.central_gap();
    return constants::coulomb_k / (config.mass * config.omega_y * d0 * d0 * d0);
}

HoppingMatrix hopping_matrix(const IonChain &chain, const TrapConfig &config)
{
    check_same_size(chain, config);
    const int size = chain.size();
    HoppingMatrix out;
    out.n_ions = size;
    out.h = Eigen::MatrixXd::Zero(size, size);
    out.kappa0 = size >= 2 ? kappa0(chain, config) : 0.0;
    for (int n = 1; n <= size; ++n) {
        for (int m = n + 1; m <= size; ++m) {
            const double t = hopping_amplitude(chain, config, n, m);
            out.h(n - 1, m - 1) = -t;
            out.h(m - 1, n - 1) = -t;
        }
    }
    for (int n = 0; n < size; ++n) {
        double diag = 0.0;
        for (int m = 0; m < size; ++m) {
            if (m != n) {
                diag -= out.h(n, m);
            }
        }
        out.h(n, n) = diag;
    }
    return out;
}

Eigen::MatrixXd hopping_shape(int n_ions)
{
    if (n_ions < 2) {
        throw DomainError("hopping shape needs at least two ions");
    }
    // Any valid trap gives the same pattern; unit length scale keeps it exact.
    IonChain chain;
    chain.u = equilibrium_shape(n_ions);
    chain.z0 = chain.u;
    chain.length_scale = 1.0;
    const double d0 = chain.central_gap();
    const double d0_cubed = d0 * d0 * d0;

    Eigen::MatrixXd shape = Eigen::MatrixXd::Zero(n_ions, n_ions);
    for (int n = 0; n < n_ions; ++n) {
        for (int m = n + 1; m < n_ions; ++m) {
            const double d = std::abs(chain.z0[n] - chain.z0[m]);
            shape(n, m) = shape(m, n) = d0_cubed / (d * d * d);
        }
    }
    for (int n = 0; n < n_ions; ++n) {
        double diag = 0.0;
        for (int m = 0; m < n_ions; ++m) {
            if (m != n) {
                diag -= shape(n, m);
            }
        }
        shape(n, n) = diag;
    }
    return shape;
}

WalkGenerator to_walk_generator(const HoppingMatrix &h)
{
    const Eigen::Index size = h.h.rows();
    if (size != h.h.cols() || size != h.n_ions) {
        throw DomainError("walk generator: hopping matrix is not n_ions x n_ions");
    }
    WalkGenerator out;
    out.gamma = Eigen::MatrixXd::Zero(size, size);
    out.m = Eigen::MatrixXd::Zero(size, size);
    for (Eigen::Index n = 0; n < size; ++n) {
        double diag = 0.0;
        for (Eigen::Index m = 0; m < size; ++m) {
            if (m == n) {
                continue;
            }
            // gamma_nm = -t_nm, which is the stored off-diagonal.
            out.gamma(n, m) = h.h(n, m);
            out.m(n, m) = -out.gamma(n, m);
            diag += out.gamma(n, m);
        }
        out.m(n, n) = diag;
    }
    return out;
}

double max_adjacent_hopping_time(const HoppingMatrix &h)
{
    if (h.n_ions < 2) {
        throw DomainError("adjacent hopping time needs at least two ions");
    }
    double weakest = std::numeric_limits<double>::infinity();
    for (int n = 0; n + 1 < h.n_ions; ++n) {
        weakest = std::min(weakest, std::abs(h.h(n, n + 1)));
    }
    return std::numbers::pi / (2.0 * weakest);
}

} // namespace phononwalk

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

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phononwalk/coupling.hpp"

namespace phononwalk {

/// Collective modes of a hopping matrix: h * b.col(p) = omega(p) * b.col(p).
///
/// Modes are sorted by ascending omega; exact ties are ordered even mirror parity
/// first. Each column is signed so that its first non-negligible entry is positive.
struct ModeBasis {
    Eigen::VectorXd omega; // rad/s, rotating frame
    Eigen::MatrixXd b;     // n_ions x n_modes, orthonormal columns

    int n_sites() const { return static_cast<int>(b.rows()); }
    int n_modes() const { return static_cast<int>(b.cols()); }
};

/// Site populations P_nm(t) for a phonon started on `source` (1-based).
struct PropagationTrace {
    std::vector<double> times; // seconds
    Eigen::MatrixXd p;         // times.size() x n_sites
    int source = 1;
};

/// Imperfect preparation/readout, timing offset, heating and shot noise.
struct MeasurementModel {
    double scale = 1.0;        // population scale factor, (0, 1]
    double t_offset = 0.0;     // seconds; the model is evaluated at t - t_offset
    double heating_rate = 0.0; // quanta per second, spread uniformly over sites
    int shots = 50;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Sampled counts on a uniform time grid.
struct ObservationDataset {
    std::vector<double> times; // seconds
    Eigen::MatrixXi counts;    // times.size() x n_sites, each in [0, shots]
    int shots = 0;
    int source = 1;
    std::map<std::string, std::string> metadata;

    int n_sites() const { return static_cast<int>(counts.cols()); }
};

ModeBasis mode_decomposition(const HoppingMatrix &h);

/// P_nm(t) = |sum_p b_n^(p) b_m^(p) exp(-i omega_p t)|^2.
PropagationTrace propagate(const ModeBasis &basis, int source, std::span<const double> times);

/// Brute-force check of `propagate`: fixed-step RK4 on i psi' = h psi.
///
/// Integrates to t_end with step dt and records every `sample_every`-th step, starting
/// at t = 0. Requires kappa0 * dt < 0.01.
PropagationTrace ode_oracle(const HoppingMatrix &h, int source, double t_end, double dt,
                            int sample_every = 1);

/// Uniform grid t_k = k * dt for k in [0, round(t_end / dt)).
std::vector<double> uniform_times(double t_end, double dt);

/// Expected measured populations scale * P(t - t_offset) + heating_rate * t / N.
/// Unclamped; callers decide how to treat excursions outside [0, 1].
Eigen::MatrixXd expected_populations(const ModeBasis &basis, int source,
                                     std::span<const double> times,
                                     const MeasurementModel &model);

/// Draw a synthetic dataset. Deterministic in (inputs, model.seed): each time step gets
/// its own generator derived from the seed and the step index.
///
/// Expected populations are clamped to [0, 1]; an excursion beyond 0.05 sets
/// metadata["model_warning"] = "population_out_of_range".
ObservationDataset apply_measurement_model(const ModeBasis &basis, int source,
                                           std::span<const double> times,
                                           const MeasurementModel &model);

/// Counts divided by shots.
Eigen::MatrixXd observed_populations(const ObservationDataset &dataset);

/// Throws DomainError unless times are evenly spaced (relative tolerance 1e-6).
/// Returns the step.
double uniform_step(std::span<const double> times);

} // namespace phononwalk

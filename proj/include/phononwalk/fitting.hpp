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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "phononwalk/constants.hpp"
#include "phononwalk/dynamics.hpp"

namespace phononwalk {

/// The four fitted scalars.
struct FitParams {
    double kappa0 = 0.0;       // rad/s, sets the time scale of the whole matrix
    double t_offset = 0.0;     // s
    double scale = 1.0;
    double heating_rate = 0.0; // quanta/s
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const { return x >= lo && x <= hi; }
    double width() const { return hi - lo; }
};

struct FitBounds {
    Interval kappa0{constants::khz_to_rad_s(1.0), constants::khz_to_rad_s(10.0)};
    Interval t_offset{0.0, 200e-6};
    Interval scale{0.2, 1.2};
    Interval heating_rate{0.0, 50.0};

    /// Throws DomainError on empty or non-physical intervals.
    void validate() const;
    bool contains(const FitParams &params) const;
};

struct FitOptions {
    double kappa0_grid_step = 0.002;  // relative spacing of the geometric kappa0 grid
    double t_offset_grid_step = 10e-6; // s
    double tolerance = 1e-6;          // relative, per parameter
    int max_sweeps = 400;
};

struct FitResult {
    double kappa0 = 0.0;
    double t_offset = 0.0;
    double scale = 0.0;
    double heating_rate = 0.0;
    double rss = 0.0;
    double grid_rss = 0.0; // best coarse-grid value, before refinement
    long n_evals = 0;
    bool converged = false;
    std::vector<std::string> pinned; // parameters sitting on a bound

    FitParams params() const { return {kappa0, t_offset, scale, heating_rate}; }
};

/// Single-phonon walk on a fixed dimensionless chain, scaled by kappa0.
///
/// The hopping pattern h / (kappa0 / 2) depends only on the ion count, so the whole
/// propagation is a function of kappa0 * t.
class WalkModel {
  public:
    WalkModel(int n_ions, int source);
    WalkModel(const Eigen::MatrixXd &shape, int source);

    int n_sites() const { return static_cast<int>(weight_.rows()); }
    int source() const { return source_; }

    /// Ideal P(t - t_offset), times.size() x n_sites.
    Eigen::MatrixXd populations(std::span<const double> times, double kappa0,
                                double t_offset) const;

    /// scale * P(t - t_offset) + heating_rate * t / N, clamped to [0, 1].
    Eigen::MatrixXd predict(std::span<const double> times, const FitParams &params) const;

  private:
    Eigen::VectorXd eigenvalues_; // of the dimensionless pattern
    Eigen::MatrixXd weight_;      // b_m^(p) b_n^(p)
    int source_;
};

/// Sum over sites and time steps of (counts / shots - model)^2.
/// Throws DomainError if `params` lies outside `bounds`.
double residual_sum_squares(const ObservationDataset &dataset, const FitParams &params,
                            const WalkModel &model, const FitBounds &bounds = {});

/// Closed-form least squares for (scale, heating_rate) at fixed (kappa0, t_offset),
/// ignoring the [0, 1] clamp. The minimum is taken over the bounds box.
struct LinearSolution {
    double scale = 0.0;
    double heating_rate = 0.0;
    double rss = 0.0;
};

LinearSolution solve_scale_heating(const Eigen::MatrixXd &observed,
                                   const Eigen::MatrixXd &populations,
                                   std::span<const double> times, const FitBounds &bounds);

/// Coarse (kappa0, t_offset) grid with the linear pair solved exactly at each node,
/// then coordinate-wise golden-section refinement of all four parameters.
///
/// Deterministic in the dataset. Throws DegenerateDataError when the grid landscape
/// is flat (spread below 1e-12).
FitResult fit_observation(const ObservationDataset &dataset, const FitBounds &bounds = {},
                          const FitOptions &options = {});
FitResult fit_observation(const ObservationDataset &dataset, const WalkModel &model,
                          const FitBounds &bounds = {}, const FitOptions &options = {});

} // namespace phononwalk

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

#include "phononwalk/fitting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "phononwalk/coupling.hpp"
#include "phononwalk/errors.hpp"

namespace phononwalk {

namespace {

Eigen::MatrixXd shape_for(int n_ions)
{
    if (n_ions == 1) {
        return Eigen::MatrixXd::Zero(1, 1);
    }
    return hopping_shape(n_ions);
}

void check_interval(const Interval &iv, const char *name)
{
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi) {
        throw DomainError(std::string("fit bounds: empty interval for ") + name);
    }
}

// Quadratic form of the linear subproblem, accumulated over all sites and times.
struct NormalSums {
    double pp = 0.0, pg = 0.0, gg = 0.0, py = 0.0, gy = 0.0, yy = 0.0;

    double rss(double s, double h) const
    {
        return yy - 2.0 * s * py - 2.0 * h * gy + s * s * pp + 2.0 * s * h * pg + h * h * gg;
    }
};

NormalSums accumulate(const Eigen::MatrixXd &observed, const Eigen::MatrixXd &populations,
                      std::span<const double> times)
{
    const double n_sites = static_cast<double>(observed.cols());
    NormalSums sums;
    for (Eigen::Index k = 0; k < observed.rows(); ++k) {
        const double g = times[k] / n_sites;
        const double p_row = populations.row(k).sum();
        const double y_row = observed.row(k).sum();
        sums.pp += populations.row(k).squaredNorm();
        sums.pg += g * p_row;
        sums.gg += n_sites * g * g;
        sums.py += populations.row(k).dot(observed.row(k));
        sums.gy += g * y_row;
        sums.yy += observed.row(k).squaredNorm();
    }
    return sums;
}

LinearSolution minimize_box(const NormalSums &q, const FitBounds &bounds)
{
    const Interval &sb = bounds.scale;
    const Interval &hb = bounds.heating_rate;
    LinearSolution best{0.0, 0.0, std::numeric_limits<double>::infinity()};
    auto consider = [&](double s, double h) {
        const double r = q.rss(s, h);
        if (r < best.rss) {
            best = {s, h, r};
        }
    };

    const double det = q.pp * q.gg - q.pg * q.pg;
    if (det > 1e-14 * q.pp * q.gg) {
        const double s = (q.py * q.gg - q.gy * q.pg) / det;
        const double h = (q.gy * q.pp - q.py * q.pg) / det;
        if (sb.contains(s) && hb.contains(h)) {
            return {s, h, q.rss(s, h)};
        }
    }
    // Convex quadratic: otherwise the minimum sits on an edge of the box.
    for (double s : {sb.lo, sb.hi}) {
        const double h = q.gg > 0.0 ? std::clamp((q.gy - s * q.pg) / q.gg, hb.lo, hb.hi) : hb.lo;
        consider(s, h);
    }
    for (double h : {hb.lo, hb.hi}) {
        const double s = q.pp > 0.0 ? std::clamp((q.py - h * q.pg) / q.pp, sb.lo, sb.hi) : sb.lo;
        consider(s, h);
    }
    return best;
}

double clamped_rss(const Eigen::MatrixXd &observed, const Eigen::MatrixXd &populations,
                   std::span<const double> times, const FitParams &params)
{
    const double per_site = params.heating_rate / static_cast<double>(observed.cols());
    double rss = 0.0;
    for (Eigen::Index k = 0; k < observed.rows(); ++k) {
        const double background = per_site * times[k];
        for (Eigen::Index m = 0; m < observed.cols(); ++m) {
            const double model =
                std::clamp(params.scale * populations(k, m) + background, 0.0, 1.0);
            const double r = observed(k, m) - model;
            rss += r * r;
        }
    }
    return rss;
}

double &coordinate(FitParams &p, int i)
{
    switch (i) {
    case 0:
        return p.kappa0;
    case 1:
        return p.t_offset;
    case 2:
        return p.scale;
    default:
        return p.heating_rate;
    }
}

double coordinate(const FitParams &p, int i)
{
    FitParams copy = p;
    return coordinate(copy, i);
}

const Interval &coordinate_bounds(const FitBounds &b, int i)
{
    switch (i) {
    case 0:
        return b.kappa0;
    case 1:
        return b.t_offset;
    case 2:
        return b.scale;
    default:
        return b.heating_rate;
    }
}

constexpr std::array<const char *, 4> coordinate_names{"kappa0", "t_offset", "scale",
                                                       "heating_rate"};

// Golden-section search for the minimum of f on [a, b].
template <typename F>
std::pair<double, double> golden_section(F &&f, double a, double b, double tol)
{
    constexpr double r = 0.6180339887498949;
    double x1 = b - r * (b - a);
    double x2 = a + r * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

} // namespace

void FitBounds::validate() const
{
    check_interval(kappa0, "kappa0");
    check_interval(t_offset, "t_offset");
    check_interval(scale, "scale");
    check_interval(heating_rate, "heating_rate");
    if (!(kappa0.lo > 0.0)) {
        throw DomainError("fit bounds: kappa0 must be positive");
    }
    if (!(scale.lo > 0.0) || scale.hi > 1.5) {
        throw DomainError("fit bounds: scale must lie in (0, 1.5]");
    }
    if (heating_rate.lo < 0.0) {
        throw DomainError("fit bounds: heating_rate must be >= 0");
    }
}

bool FitBounds::contains(const FitParams &p) const
{
    return kappa0.contains(p.kappa0) && t_offset.contains(p.t_offset) &&
           scale.contains(p.scale) && heating_rate.contains(p.heating_rate);
}

WalkModel::WalkModel(int n_ions, int source) : WalkModel(shape_for(n_ions), source) {}

WalkModel::WalkModel(const Eigen::MatrixXd &shape, int source) : source_(source)
{
    const auto n = static_cast<int>(shape.rows());
    if (n < 1 || shape.cols() != n) {
        throw DomainError("walk model: shape must be a non-empty square matrix");
    }
    if (source < 1 || source > n) {
        throw DomainError("walk model: source site out of range");
    }
    HoppingMatrix unit;
    unit.h = shape;
    unit.n_ions = n;
    const ModeBasis basis = mode_decomposition(unit);
    eigenvalues_ = basis.omega;
    weight_.resize(n, n);
    for (int m = 0; m < n; ++m) {
        for (int p = 0; p < n; ++p) {
            weight_(m, p) = basis.b(m, p) * basis.b(source - 1, p);
        }
    }
}

Eigen::MatrixXd WalkModel::populations(std::span<const double> times, double kappa0,
                                       double t_offset) const
{
    const Eigen::Index n_modes = eigenvalues_.size();
    const Eigen::Index n_times = static_cast<Eigen::Index>(times.size());
    Eigen::MatrixXd out(n_times, n_sites());

    // On a uniform grid the phases advance by a fixed rotation; re-anchor periodically
    // so rounding in the recurrence stays at the 1e-15 level.
    constexpr Eigen::Index anchor_every = 32;
    bool uniform = n_times > 2;
    const double dt = uniform ? (times.back() - times.front()) / static_cast<double>(n_times - 1)
                              : 0.0;
    for (Eigen::Index k = 1; uniform && k < n_times; ++k) {
        uniform = std::abs((times[k] - times[k - 1]) - dt) <= 1e-9 * std::abs(dt);
    }
    Eigen::VectorXcd rotation(n_modes);
    for (Eigen::Index p = 0; p < n_modes; ++p) {
        rotation(p) = std::polar(1.0, -eigenvalues_(p) * 0.5 * kappa0 * dt);
    }

    Eigen::VectorXcd phase(n_modes);
    for (Eigen::Index k = 0; k < n_times; ++k) {
        if (!uniform || k % anchor_every == 0) {
            const double tau = 0.5 * kappa0 * (times[k] - t_offset);
            for (Eigen::Index p = 0; p < n_modes; ++p) {
                phase(p) = std::polar(1.0, -eigenvalues_(p) * tau);
            }
        } else {
            phase = phase.cwiseProduct(rotation);
        }
        for (Eigen::Index m = 0; m < n_sites(); ++m) {
            std::complex<double> a = 0.0;
            for (Eigen::Index p = 0; p < n_modes; ++p) {
                a += weight_(m, p) * phase(p);
            }
            out(k, m) = std::norm(a);
        }
    }
    return out;
}

Eigen::MatrixXd WalkModel::predict(std::span<const double> times, const FitParams &params) const
{
    Eigen::MatrixXd q = params.scale * populations(times, params.kappa0, params.t_offset);
    const double per_site = params.heating_rate / n_sites();
    for (Eigen::Index k = 0; k < q.rows(); ++k) {
        for (Eigen::Index m = 0; m < q.cols(); ++m) {
            q(k, m) = std::clamp(q(k, m) + per_site * times[k], 0.0, 1.0);
        }
    }
    return q;
}

double residual_sum_squares(const ObservationDataset &dataset, const FitParams &params,
                            const WalkModel &model, const FitBounds &bounds)
{
    bounds.validate();
    if (!bounds.contains(params)) {
        throw DomainError("rss: parameters outside the fit bounds");
    }
    if (dataset.n_sites() != model.n_sites()) {
        throw DomainError("rss: dataset and model disagree on the number of sites");
    }
    const Eigen::MatrixXd observed = observed_populations(dataset);
    const Eigen::MatrixXd pop = model.populations(dataset.times, params.kappa0, params.t_offset);
    return clamped_rss(observed, pop, dataset.times, params);
}

LinearSolution solve_scale_heating(const Eigen::MatrixXd &observed,
                                   const Eigen::MatrixXd &populations,
                                   std::span<const double> times, const FitBounds &bounds)
{
    if (observed.rows() != populations.rows() || observed.cols() != populations.cols() ||
        observed.rows() != static_cast<Eigen::Index>(times.size())) {
        throw DomainError("linear solve: shape mismatch");
    }
    return minimize_box(accumulate(observed, populations, times), bounds);
}

FitResult fit_observation(const ObservationDataset &dataset, const FitBounds &bounds,
                          const FitOptions &options)
{
    return fit_observation(dataset, WalkModel(dataset.n_sites(), dataset.source), bounds,
                           options);
}

FitResult fit_observation(const ObservationDataset &dataset, const WalkModel &model,
                          const FitBounds &bounds, const FitOptions &options)
{
    bounds.validate();
    if (dataset.n_sites() != model.n_sites()) {
        throw DomainError("fit: dataset and model disagree on the number of sites");
    }
    if (dataset.times.empty()) {
        throw DegenerateDataError("fit: dataset has no samples");
    }
    if (!(options.kappa0_grid_step > 0.0) || !(options.t_offset_grid_step > 0.0) ||
        !(options.tolerance > 0.0)) {
        throw DomainError("fit: grid steps and tolerance must be positive");
    }
    const Eigen::MatrixXd observed = observed_populations(dataset);
    const std::span<const double> times = dataset.times;
    long n_evals = 0;

    // Stage 1: geometric kappa0 grid x linear t_offset grid, ascending, so a strict
    // comparison keeps the lexicographically smallest node among equal minima.
    const int n_kappa =
        bounds.kappa0.hi > bounds.kappa0.lo
            ? static_cast<int>(std::ceil(std::log(bounds.kappa0.hi / bounds.kappa0.lo) /
                                         std::log1p(options.kappa0_grid_step))) +
                  1
            : 1;
    const int n_offset =
        bounds.t_offset.hi > bounds.t_offset.lo
            ? static_cast<int>(std::ceil(bounds.t_offset.width() / options.t_offset_grid_step)) +
                  1
            : 1;

    FitParams best;
    double best_rss = std::numeric_limits<double>::infinity();
    double worst_rss = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_kappa; ++i) {
        const double kappa =
            n_kappa == 1 ? bounds.kappa0.lo
                         : bounds.kappa0.lo * std::pow(bounds.kappa0.hi / bounds.kappa0.lo,
                                                       static_cast<double>(i) / (n_kappa - 1));
        for (int j = 0; j < n_offset; ++j) {
            const double offset =
                n_offset == 1 ? bounds.t_offset.lo
                              : bounds.t_offset.lo +
                                    bounds.t_offset.width() * static_cast<double>(j) /
                                        (n_offset - 1);
            const Eigen::MatrixXd pop = model.populations(times, kappa, offset);
            const LinearSolution lin = minimize_box(accumulate(observed, pop, times), bounds);
            ++n_evals;
            worst_rss = std::max(worst_rss, lin.rss);
            if (lin.rss < best_rss) {
                best_rss = lin.rss;
                best = {kappa, offset, lin.scale, lin.heating_rate};
            }
        }
    }
    if (!(worst_rss - best_rss >= 1e-12)) {
        throw DegenerateDataError("fit: residual landscape is flat over the search grid");
    }

    auto objective = [&](const FitParams &p) {
        ++n_evals;
        return clamped_rss(observed, model.populations(times, p.kappa0, p.t_offset), times, p);
    };

    FitResult result;
    double current = objective(best);
    result.grid_rss = current;

    // Stage 2: coordinate sweeps of golden-section line searches, plus a search along
    // each sweep's net displacement to cut through the kappa0 / t_offset valley.
    std::array<double, 4> radius{
        best.kappa0 * options.kappa0_grid_step * 2.0,
        options.t_offset_grid_step,
        0.1 * bounds.scale.width(),
        0.1 * bounds.heating_rate.width(),
    };
    auto abs_tol = [&](const FitParams &p, int i) {
        const Interval &iv = coordinate_bounds(bounds, i);
        return options.tolerance *
               std::max(std::abs(coordinate(p, i)), 1e-3 * iv.width());
    };

    bool converged = false;
    for (int sweep = 0; sweep < options.max_sweeps && !converged; ++sweep) {
        const FitParams start = best;
        bool small_moves = true;
        for (int i = 0; i < 4; ++i) {
            const Interval &iv = coordinate_bounds(bounds, i);
            if (iv.width() == 0.0) {
                continue;
            }
            const double x0 = coordinate(best, i);
            const double tol = abs_tol(best, i);
            const double lo = std::max(iv.lo, x0 - radius[i]);
            const double hi = std::min(iv.hi, x0 + radius[i]);
            FitParams trial = best;
            auto line = [&](double x) {
                coordinate(trial, i) = x;
                return objective(trial);
            };
            const auto [x_new, f_new] = golden_section(line, lo, hi, tol);
            double moved = 0.0;
            if (f_new < current) {
                moved = x_new - x0;
                coordinate(best, i) = x_new;
                current = f_new;
            }
            if (std::abs(moved) > tol) {
                small_moves = false;
            }
            radius[i] = std::max({3.0 * std::abs(moved), 0.5 * radius[i], 10.0 * tol});
        }

        std::array<double, 4> d{};
        double alpha_max = 3.0;
        bool any = false;
        for (int i = 0; i < 4; ++i) {
            d[i] = coordinate(best, i) - coordinate(start, i);
            if (d[i] != 0.0) {
                any = true;
                const Interval &iv = coordinate_bounds(bounds, i);
                const double room = d[i] > 0.0 ? (iv.hi - coordinate(best, i)) / d[i]
                                               : (iv.lo - coordinate(best, i)) / d[i];
                alpha_max = std::min(alpha_max, room);
            }
        }
        if (any && !small_moves && alpha_max > 0.0) {
            const FitParams anchor = best;
            auto along = [&](double a) {
                FitParams trial = anchor;
                for (int i = 0; i < 4; ++i) {
                    coordinate(trial, i) += a * d[i];
                }
                return objective(trial);
            };
            const auto [a, f] = golden_section(along, 0.0, alpha_max, 1e-3);
            if (f < current) {
                FitParams moved = anchor;
                for (int i = 0; i < 4; ++i) {
                    const Interval &iv = coordinate_bounds(bounds, i);
                    coordinate(moved, i) = std::clamp(coordinate(moved, i) + a * d[i], iv.lo, iv.hi);
                }
                const double f_moved = objective(moved);
                if (f_moved < current) {
                    best = moved;
                    current = f_moved;
                }
            }
        }
        converged = small_moves;
    }

    result.kappa0 = best.kappa0;
    result.t_offset = best.t_offset;
    result.scale = best.scale;
    result.heating_rate = best.heating_rate;
    result.rss = current;
    result.n_evals = n_evals;
    result.converged = converged;
    for (int i = 0; i < 4; ++i) {
        const Interval &iv = coordinate_bounds(bounds, i);
        const double x = coordinate(best, i);
        const double eps = 1e-6 * std::max(iv.width(), std::abs(x));
        if (iv.width() > 0.0 && (x - iv.lo <= eps || iv.hi - x <= eps)) {
            result.pinned.emplace_back(coordinate_names[i]);
        }
    }
    return result;
}

} // namespace phononwalk

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

#include "phononwalk/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <string>

#include "phononwalk/errors.hpp"

namespace phononwalk {

namespace {

constexpr std::complex<double> I(0.0, 1.0);

void check_site(int site, int n_sites)
{
    if (site < 1 || site > n_sites) {
        throw DomainError("site " + std::to_string(site) + " outside [1, " +
                          std::to_string(n_sites) + "]");
    }
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform in [0, 1) from the top 53 bits; avoids library-specific distributions so
// datasets are identical across standard library implementations.
double unit_uniform(std::mt19937_64 &gen)
{
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Rotate a block of degenerate modes onto mirror-parity eigenvectors, even first.
void split_by_parity(Eigen::MatrixXd &b, Eigen::Index first, Eigen::Index count)
{
    Eigen::MatrixXd block = b.middleCols(first, count);
    Eigen::MatrixXd reflected = block.colwise().reverse();
    Eigen::MatrixXd parity = block.transpose() * reflected;
    parity = 0.5 * (parity + parity.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(parity);
    // Eigenvalues come out ascending (-1 before +1); reverse to put even modes first.
    Eigen::MatrixXd rotated = block * solver.eigenvectors().rowwise().reverse();
    b.middleCols(first, count) = rotated;
}

} // namespace

void MeasurementModel::validate() const
{
    if (!(scale > 0.0 && scale <= 1.0)) {
        throw DomainError("measurement: scale must lie in (0, 1]");
    }
    if (shots < 1) {
        throw DomainError("measurement: shots must be >= 1");
    }
    if (!(heating_rate >= 0.0) || !std::isfinite(heating_rate)) {
        throw DomainError("measurement: heating_rate must be >= 0");
    }
    if (!std::isfinite(t_offset)) {
        throw DomainError("measurement: t_offset must be finite");
    }
}

ModeBasis mode_decomposition(const HoppingMatrix &h)
{
    const Eigen::Index n = h.h.rows();
    if (n == 0 || n != h.h.cols()) {
        throw DomainError("mode decomposition: hopping matrix must be square and non-empty");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.h);
    if (solver.info() != Eigen::Success) {
        throw DomainError("mode decomposition: eigen solver failed");
    }
    ModeBasis basis;
    basis.omega = solver.eigenvalues();
    basis.b = solver.eigenvectors();

    const double scale = std::max(basis.omega.cwiseAbs().maxCoeff(), 1e-300);
    const double tie = 1e-10 * scale;
    for (Eigen::Index first = 0; first < n;) {
        Eigen::Index last = first + 1;
        while (last < n && basis.omega(last) - basis.omega(last - 1) <= tie) {
            ++last;
        }
        if (last - first > 1) {
            split_by_parity(basis.b, first, last - first);
            const double mean = basis.omega.segment(first, last - first).mean();
            basis.omega.segment(first, last - first).setConstant(mean);
        }
        first = last;
    }

    for (Eigen::Index p = 0; p < n; ++p) {
        auto col = basis.b.col(p);
        col.normalize();
        for (Eigen::Index k = 0; k < n; ++k) {
            if (std::abs(col(k)) > 1e-10) {
                if (col(k) < 0.0) {
                    col = -col;
                }
                break;
            }
        }
    }
    return basis;
}

PropagationTrace propagate(const ModeBasis &basis, int source, std::span<const double> times)
{
    const int n_sites = basis.n_sites();
    const int n_modes = basis.n_modes();
    check_site(source, n_sites);

    // weight(m, p) = b_m^(p) b_n^(p)
    Eigen::MatrixXd weight(n_sites, n_modes);
    for (int m = 0; m < n_sites; ++m) {
        for (int p = 0; p < n_modes; ++p) {
            weight(m, p) = basis.b(m, p) * basis.b(source - 1, p);
        }
    }

    PropagationTrace trace;
    trace.source = source;
    trace.times.assign(times.begin(), times.end());
    trace.p.resize(static_cast<Eigen::Index>(times.size()), n_sites);

    Eigen::VectorXcd phase(n_modes);
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!std::isfinite(times[k])) {
            throw DomainError("propagate: non-finite time");
        }
        for (int p = 0; p < n_modes; ++p) {
            phase(p) = std::polar(1.0, -basis.omega(p) * times[k]);
        }
        const Eigen::VectorXcd amp = weight.cast<std::complex<double>>() * phase;
        trace.p.row(static_cast<Eigen::Index>(k)) = amp.cwiseAbs2().transpose();
    }
    return trace;
}

PropagationTrace ode_oracle(const HoppingMatrix &h, int source, double t_end, double dt,
                            int sample_every)
{
    const int n_sites = static_cast<int>(h.h.rows());
    check_site(source, n_sites);
    if (!(dt > 0.0) || !(t_end >= 0.0) || sample_every < 1) {
        throw DomainError("ode oracle: need dt > 0, t_end >= 0 and sample_every >= 1");
    }
    if (h.kappa0 * dt >= 0.01) {
        throw DomainError("ode oracle: step too coarse, kappa0 * dt must be < 0.01");
    }

    const double sample_dt = dt * sample_every;
    const long n_samples = std::lround(t_end / sample_dt);

    PropagationTrace trace;
    trace.source = source;
    trace.p.resize(n_samples, n_sites);
    trace.times.reserve(n_samples);

    const Eigen::MatrixXcd gen = -I * h.h.cast<std::complex<double>>();
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(n_sites);
    psi(source - 1) = 1.0;
    Eigen::VectorXcd k1(n_sites), k2(n_sites), k3(n_sites), k4(n_sites);

    for (long j = 0; j < n_samples; ++j) {
        trace.times.push_back(static_cast<double>(j) * sample_dt);
        trace.p.row(j) = psi.cwiseAbs2().transpose();
        if (j + 1 == n_samples) {
            break;
        }
        for (int s = 0; s < sample_every; ++s) {
            k1.noalias() = gen * psi;
            k2.noalias() = gen * (psi + 0.5 * dt * k1);
            k3.noalias() = gen * (psi + 0.5 * dt * k2);
            k4.noalias() = gen * (psi + dt * k3);
            psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
    return trace;
}

std::vector<double> uniform_times(double t_end, double dt)
{
    if (!(dt > 0.0) || !(t_end >= 0.0) || !std::isfinite(t_end)) {
        throw DomainError("time grid: need dt > 0 and finite t_end >= 0");
    }
    const long count = std::lround(t_end / dt);
    std::vector<double> times(count);
    for (long k = 0; k < count; ++k) {
        times[k] = static_cast<double>(k) * dt;
    }
    return times;
}

Eigen::MatrixXd expected_populations(const ModeBasis &basis, int source,
                                     std::span<const double> times,
                                     const MeasurementModel &model)
{
    std::vector<double> shifted(times.begin(), times.end());
    for (double &t : shifted) {
        t -= model.t_offset;
    }
    Eigen::MatrixXd q = model.scale * propagate(basis, source, shifted).p;
    const double per_site = model.heating_rate / basis.n_sites();
    for (Eigen::Index k = 0; k < q.rows(); ++k) {
        q.row(k).array() += per_site * times[k];
    }
    return q;
}

ObservationDataset apply_measurement_model(const ModeBasis &basis, int source,
                                           std::span<const double> times,
                                           const MeasurementModel &model)
{
    model.validate();
    if (times.size() > 1) {
        uniform_step(times);
    }
    const Eigen::MatrixXd q = expected_populations(basis, source, times, model);

    ObservationDataset data;
    data.times.assign(times.begin(), times.end());
    data.shots = model.shots;
    data.source = source;
    data.counts.resize(q.rows(), q.cols());

    bool out_of_range = false;
    for (Eigen::Index k = 0; k < q.rows(); ++k) {
        std::mt19937_64 gen(splitmix64(model.seed ^ splitmix64(static_cast<std::uint64_t>(k))));
        for (Eigen::Index m = 0; m < q.cols(); ++m) {
            const double raw = q(k, m);
            if (raw < -0.05 || raw > 1.05) {
                out_of_range = true;
            }
            const double prob = std::clamp(raw, 0.0, 1.0);
            int hits = 0;
            for (int s = 0; s < model.shots; ++s) {
                if (unit_uniform(gen) < prob) {
                    ++hits;
                }
            }
            data.counts(k, m) = hits;
        }
    }
    if (out_of_range) {
        data.metadata["model_warning"] = "population_out_of_range";
    }
    return data;
}

Eigen::MatrixXd observed_populations(const ObservationDataset &dataset)
{
    if (dataset.shots < 1) {
        throw DomainError("dataset: shots must be >= 1");
    }
    return dataset.counts.cast<double>() / static_cast<double>(dataset.shots);
}

double uniform_step(std::span<const double> times)
{
    if (times.size() < 2) {
        throw DomainError("time grid: need at least two samples");
    }
    const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    if (!(dt > 0.0)) {
        throw DomainError("time grid: times must increase");
    }
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (std::abs((times[k] - times[k - 1]) - dt) > 1e-6 * dt) {
            throw DomainError("time grid: non-uniform spacing at sample " + std::to_string(k));
        }
    }
    return dt;
}

} // namespace phononwalk

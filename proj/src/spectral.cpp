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

#include "phononwalk/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <tuple>

#include <fftw3.h>

#include "phononwalk/constants.hpp"
#include "phononwalk/errors.hpp"

namespace phononwalk {

namespace {

// The FFTW planner is not reentrant; execution of a finished plan is.
std::mutex fftw_planner_mutex;

class RealForwardPlan {
  public:
    explicit RealForwardPlan(int n) : n_(n)
    {
        in_ = fftw_alloc_real(n);
        out_ = fftw_alloc_complex(n / 2 + 1);
        std::lock_guard<std::mutex> lock(fftw_planner_mutex);
        plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
    }
    ~RealForwardPlan()
    {
        {
            std::lock_guard<std::mutex> lock(fftw_planner_mutex);
            fftw_destroy_plan(plan_);
        }
        fftw_free(in_);
        fftw_free(out_);
    }
    RealForwardPlan(const RealForwardPlan &) = delete;
    RealForwardPlan &operator=(const RealForwardPlan &) = delete;

    double *input() { return in_; }
    std::complex<double> output(int k) const { return {out_[k][0], out_[k][1]}; }
    void execute() { fftw_execute(plan_); }

  private:
    int n_;
    double *in_ = nullptr;
    fftw_complex *out_ = nullptr;
    fftw_plan plan_ = nullptr;
};

bool line_less(const SpectrumLine &a, const SpectrumLine &b)
{
    return std::tie(a.freq, a.p, a.q, a.amplitude) < std::tie(b.freq, b.p, b.q, b.amplitude);
}

} // namespace

AnalyticSpectrum analytic_spectrum(const ModeBasis &basis, int n, int m)
{
    const int n_sites = basis.n_sites();
    if (n < 1 || m < 1 || n > n_sites || m > n_sites) {
        throw DomainError("analytic spectrum: site index out of range");
    }
    const int n_modes = basis.n_modes();
    AnalyticSpectrum out;
    for (int p = 0; p < n_modes; ++p) {
        const double w = basis.b(n - 1, p) * basis.b(m - 1, p);
        out.dc += w * w;
    }
    for (int p = 0; p < n_modes; ++p) {
        for (int q = p + 1; q < n_modes; ++q) {
            // Grouped per site so that swapping n and m gives the identical double.
            const double amp = (basis.b(n - 1, q) * basis.b(n - 1, p)) *
                               (basis.b(m - 1, q) * basis.b(m - 1, p));
            const double freq = basis.omega(q) - basis.omega(p);
            if (freq <= 0.0) {
                out.dc += 2.0 * amp;
                continue;
            }
            out.lines.push_back({freq, amp, p + 1, q + 1});
        }
    }
    return out;
}

Window parse_window(const std::string &name)
{
    if (name == "rect" || name == "rectangular") {
        return Window::rectangular;
    }
    if (name == "hann") {
        return Window::hann;
    }
    throw DomainError("unknown window '" + name + "' (expected rect or hann)");
}

std::string window_name(Window window)
{
    return window == Window::hann ? "hann" : "rect";
}

DftSpectrum dft_trace(std::span<const double> times, const Eigen::MatrixXd &values, Window window)
{
    const int length = static_cast<int>(times.size());
    if (values.rows() != length) {
        throw DomainError("dft: value rows do not match the time grid");
    }
    const double dt = uniform_step(times);

    std::vector<double> weights(length, 1.0);
    if (window == Window::hann) {
        // Periodic Hann, so a full-period cosine keeps its coherent gain.
        for (int k = 0; k < length; ++k) {
            weights[k] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * k / length);
        }
    }
    double weight_sum = 0.0;
    for (double w : weights) {
        weight_sum += w;
    }

    DftSpectrum out;
    out.window = window;
    out.bin_width = 1.0 / (length * dt);
    const int n_bins = length / 2;
    for (int k = 1; k <= n_bins; ++k) {
        out.freqs.push_back(k * out.bin_width);
    }

    RealForwardPlan plan(length);
    for (Eigen::Index site = 0; site < values.cols(); ++site) {
        for (int k = 0; k < length; ++k) {
            plan.input()[k] = weights[k] * values(k, site);
        }
        plan.execute();
        out.dc.push_back(plan.output(0).real() / weight_sum);
        std::vector<double> mag(n_bins);
        for (int k = 1; k <= n_bins; ++k) {
            mag[k - 1] = std::abs(plan.output(k)) / weight_sum;
        }
        out.magnitude.push_back(std::move(mag));
    }
    return out;
}

DftSpectrum dft_trace(const PropagationTrace &trace, Window window)
{
    return dft_trace(trace.times, trace.p, window);
}

DftSpectrum dft_trace(const ObservationDataset &dataset, Window window)
{
    return dft_trace(dataset.times, observed_populations(dataset), window);
}

std::vector<PeakMatch> match_peaks(const DftSpectrum &dft, int site,
                                   std::span<const SpectrumLine> lines, double tol_bins,
                                   double floor)
{
    if (!(tol_bins >= 1.0)) {
        throw DomainError("match_peaks: tol_bins must be >= 1");
    }
    if (site < 1 || site > dft.n_sites()) {
        throw DomainError("match_peaks: site index out of range");
    }
    const std::vector<double> &mag = dft.magnitude[site - 1];
    const int n_bins = static_cast<int>(mag.size());

    std::vector<int> maxima;
    for (int k = 0; k < n_bins; ++k) {
        const bool above_left = k == 0 || mag[k] > mag[k - 1];
        const bool above_right = k + 1 == n_bins || mag[k] >= mag[k + 1];
        if (above_left && above_right && mag[k] > floor) {
            maxima.push_back(k);
        }
    }

    std::vector<SpectrumLine> sorted(lines.begin(), lines.end());
    std::sort(sorted.begin(), sorted.end(), line_less);

    std::vector<PeakMatch> report;
    report.reserve(sorted.size());
    for (const SpectrumLine &line : sorted) {
        PeakMatch match;
        match.line = line;
        const double line_hz = constants::rad_s_to_hz(line.freq);
        double best = tol_bins;
        for (int k : maxima) {
            const double offset = (dft.freqs[k] - line_hz) / dft.bin_width;
            // Ties go to the lower bin because maxima are scanned in ascending order.
            if (std::abs(offset) <= best && (!match.matched || std::abs(offset) < best)) {
                best = std::abs(offset);
                match.matched = true;
                match.bin = k;
                match.offset_bins = offset;
            }
        }
        if (match.matched) {
            match.peak_freq = dft.freqs[match.bin];
            match.peak_magnitude = mag[match.bin];
            match.ratio = line.amplitude != 0.0 ? match.peak_magnitude / std::abs(line.amplitude)
                                                : 0.0;
        }
        report.push_back(match);
    }
    return report;
}

} // namespace phononwalk

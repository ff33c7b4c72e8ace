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

#include "phononwalk/dynamics.hpp"

namespace phononwalk {

/// One beat component of P_nm(t): amplitude * 2 cos(freq * t).
struct SpectrumLine {
    double freq = 0.0;      // omega_q - omega_p, rad/s, > 0
    double amplitude = 0.0; // b_n^(q) b_m^(q) b_m^(p) b_n^(p)
    int p = 0;              // 1-based mode indices, p < q
    int q = 0;
};

struct AnalyticSpectrum {
    std::vector<SpectrumLine> lines; // ordered by (p, q)
    double dc = 0.0;                 // sum_p (b_n^(p) b_m^(p))^2
};

/// Beat lines and time-independent part of P_nm for source n and site m (1-based).
///
/// Pairs of exactly degenerate modes do not beat; their constant contribution is
/// folded into dc so that dc + 2 * sum(amplitude) still equals P_nm(0).
AnalyticSpectrum analytic_spectrum(const ModeBasis &basis, int n, int m);

enum class Window { rectangular, hann };

Window parse_window(const std::string &name);
std::string window_name(Window window);

/// One-sided DFT magnitudes of per-site sequences.
///
/// Bins k = 1 .. T/2 are stored in `magnitude`; the zero-frequency bin is kept apart
/// in `dc`. Magnitudes are |X_k| / sum(w), so a cosine of amplitude A on a bin centre
/// shows up as A / 2 and the DC bin equals the (weighted) mean.
struct DftSpectrum {
    std::vector<double> freqs;                  // Hz
    std::vector<std::vector<double>> magnitude; // [site][bin]
    std::vector<double> dc;                     // [site]
    double bin_width = 0.0;                     // Hz, 1 / (T dt)
    Window window = Window::rectangular;

    int n_sites() const { return static_cast<int>(magnitude.size()); }
};

/// `values` is times.size() x n_sites. Throws DomainError on a non-uniform grid.
DftSpectrum dft_trace(std::span<const double> times, const Eigen::MatrixXd &values,
                      Window window = Window::rectangular);
DftSpectrum dft_trace(const PropagationTrace &trace, Window window = Window::rectangular);
DftSpectrum dft_trace(const ObservationDataset &dataset, Window window = Window::rectangular);

struct PeakMatch {
    SpectrumLine line;
    bool matched = false;
    int bin = -1;               // index into DftSpectrum::freqs
    double peak_freq = 0.0;     // Hz
    double peak_magnitude = 0.0;
    double offset_bins = 0.0;   // (peak_freq - line freq) / bin_width
    double ratio = 0.0;         // peak_magnitude / |amplitude|
};

/// For every line, the nearest local maximum of `site`'s spectrum within tol_bins.
///
/// Local maxima below `floor` are ignored. The report is sorted by (freq, p, q) and
/// does not depend on the order of `lines`.
std::vector<PeakMatch> match_peaks(const DftSpectrum &dft, int site,
                                   std::span<const SpectrumLine> lines, double tol_bins,
                                   double floor = 1e-9);

} // namespace phononwalk

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


#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "phononwalk/constants.hpp"
#include "phononwalk/coupling.hpp"
#include "phononwalk/errors.hpp"
#include "phononwalk/spectral.hpp"
#include "support/oracles.hpp"

using namespace phononwalk;
using Catch::Approx;

namespace {

ModeBasis four_ion_basis()
{
    const TrapConfig c = oracle::four_ion_trap();
    return mode_decomposition(hopping_matrix(equilibrium_positions(c), c));
}

} // namespace

TEST_CASE("Analytic lines rebuild the population", "[spectral]")
{
    std::mt19937_64 gen(41);
    std::uniform_int_distribution<int> size(2, 8);
    std::uniform_real_distribution<double> when(0.0, 1e-2);
    for (int trial = 0; trial < 60; ++trial) {
        const TrapConfig c = oracle::random_trap(gen, size(gen));
        const ModeBasis basis = mode_decomposition(hopping_matrix(equilibrium_positions(c), c));
        const int n = basis.n_sites();
        std::uniform_int_distribution<int> site(1, n);
        const int src = site(gen);
        const int dst = site(gen);
        const AnalyticSpectrum spec = analytic_spectrum(basis, src, dst);
        CHECK(static_cast<int>(spec.lines.size()) == n * (n - 1) / 2);

        double at_zero = spec.dc;
        for (const auto &line : spec.lines) {
            CHECK(line.freq > 0.0);
            CHECK(line.p < line.q);
            at_zero += 2.0 * line.amplitude;
        }
        CHECK(at_zero == Approx(src == dst ? 1.0 : 0.0).margin(1e-12));

        const std::vector<double> times{when(gen), when(gen), when(gen)};
        const PropagationTrace tr = propagate(basis, src, times);
        for (int k = 0; k < 3; ++k) {
            double p = spec.dc;
            for (const auto &line : spec.lines) {
                p += 2.0 * line.amplitude * std::cos(line.freq * times[k]);
            }
            CHECK(p == Approx(tr.p(k, dst - 1)).margin(1e-12));
        }
    }
}

TEST_CASE("Two-site spectrum by hand", "[spectral]")
{
    const double k0 = 2345.0;
    const ModeBasis basis = mode_decomposition(HoppingMatrix::from_shape(hopping_shape(2), k0));
    const AnalyticSpectrum cross = analytic_spectrum(basis, 1, 2);
    REQUIRE(cross.lines.size() == 1);
    CHECK(cross.lines[0].freq == Approx(k0).epsilon(1e-13));
    CHECK(cross.lines[0].amplitude == Approx(-0.25).epsilon(1e-13));
    CHECK(cross.dc == Approx(0.5).epsilon(1e-13));
    const AnalyticSpectrum self = analytic_spectrum(basis, 1, 1);
    CHECK(self.lines[0].amplitude == Approx(0.25).epsilon(1e-13));
    CHECK(self.dc == Approx(0.5).epsilon(1e-13));
}

TEST_CASE("Degenerate pairs fold into the constant term", "[spectral]")
{
    Eigen::MatrixXd shape(3, 3);
    shape << -2, 1, 1, 1, -2, 1, 1, 1, -2;
    const ModeBasis basis = mode_decomposition(HoppingMatrix::from_shape(shape, 2.0));
    const AnalyticSpectrum spec = analytic_spectrum(basis, 1, 1);
    CHECK(spec.lines.size() == 2);
    double at_zero = spec.dc;
    for (const auto &line : spec.lines) {
        CHECK(line.freq == Approx(3.0).epsilon(1e-12));
        at_zero += 2.0 * line.amplitude;
    }
    CHECK(at_zero == Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(analytic_spectrum(basis, 0, 1), DomainError);
    CHECK_THROWS_AS(analytic_spectrum(basis, 1, 4), DomainError);
}

TEST_CASE("DFT magnitudes agree with a direct transform", "[spectral]")
{
    std::mt19937_64 gen(43);
    std::uniform_int_distribution<int> length(8, 65);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const int t = length(gen);
        const Window window = trial % 2 ? Window::hann : Window::rectangular;
        std::vector<double> times(t);
        Eigen::MatrixXd values(t, 2);
        for (int k = 0; k < t; ++k) {
            times[k] = k * 1e-5;
            values(k, 0) = value(gen);
            values(k, 1) = value(gen);
        }
        const DftSpectrum dft = dft_trace(times, values, window);
        CHECK(dft.n_sites() == 2);
        CHECK(static_cast<int>(dft.freqs.size()) == t / 2);
        CHECK(dft.bin_width == Approx(1.0 / (t * 1e-5)).epsilon(1e-9));
        for (int site = 0; site < 2; ++site) {
            std::vector<double> x(t);
            double wsum = 0.0;
            for (int k = 0; k < t; ++k) {
                const double w = window == Window::hann
                                     ? 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * k / t)
                                     : 1.0;
                x[k] = w * values(k, site);
                wsum += w;
            }
            const auto ref = oracle::direct_dft(x);
            CHECK(dft.dc[site] == Approx(ref[0].real() / wsum).margin(1e-12));
            for (int k = 1; k <= t / 2; ++k) {
                CHECK(dft.magnitude[site][k - 1] == Approx(std::abs(ref[k]) / wsum).margin(1e-12));
            }
        }
    }
}

TEST_CASE("Bin-centred cosine reads back its amplitude", "[spectral]")
{
    const int t = 800;
    const double dt = 12.5e-6;
    const int bin = 37;
    const double f = bin / (t * dt);
    std::vector<double> times(t);
    Eigen::MatrixXd values(t, 1);
    for (int k = 0; k < t; ++k) {
        times[k] = k * dt;
        values(k, 0) = 0.3 + 0.4 * std::cos(2.0 * std::numbers::pi * f * times[k]);
    }
    for (Window w : {Window::rectangular, Window::hann}) {
        const DftSpectrum dft = dft_trace(times, values, w);
        CHECK(dft.freqs[bin - 1] == Approx(f).epsilon(1e-12));
        CHECK(dft.magnitude[0][bin - 1] == Approx(0.2).epsilon(1e-12));
        CHECK(dft.dc[0] == Approx(0.3).epsilon(1e-12));
    }
}

TEST_CASE("Two-site walk: line ratio on a bin centre", "[spectral]")
{
    // kappa0 / 2pi = 2 kHz is bin 20 of a 10 ms record.
    const double k0 = constants::khz_to_rad_s(2.0);
    const ModeBasis basis = mode_decomposition(HoppingMatrix::from_shape(hopping_shape(2), k0));
    const PropagationTrace tr = propagate(basis, 1, uniform_times(0.01, 12.5e-6));
    const DftSpectrum dft = dft_trace(tr);
    const AnalyticSpectrum spec = analytic_spectrum(basis, 1, 2);
    const auto report = match_peaks(dft, 2, spec.lines, 1.0);
    REQUIRE(report.size() == 1);
    CHECK(report[0].matched);
    CHECK(report[0].bin == 19);
    CHECK(std::abs(report[0].offset_bins) < 1e-9);
    CHECK(report[0].ratio == Approx(1.0).margin(0.1));
    CHECK(dft.dc[1] == Approx(spec.dc).margin(1e-12));
}

TEST_CASE("Every line of the four-ion walk is resolved", "[spectral]")
{
    const ModeBasis basis = four_ion_basis();
    for (int source : {1, 2, 3, 4}) {
        const PropagationTrace tr = propagate(basis, source, uniform_times(0.01, 12.5e-6));
        const DftSpectrum dft = dft_trace(tr);
        CHECK(dft.bin_width == Approx(100.0).epsilon(1e-9));
        for (int site = 1; site <= 4; ++site) {
            const AnalyticSpectrum spec = analytic_spectrum(basis, source, site);
            for (const auto &m : match_peaks(dft, site, spec.lines, 1.0)) {
                CAPTURE(source, site, m.line.p, m.line.q);
                CHECK(m.matched);
                CHECK(std::abs(m.offset_bins) <= 1.0);
            }
            CHECK(std::abs(dft.dc[site - 1] - spec.dc) < 2e-3);
        }
    }
}

TEST_CASE("Peak report does not depend on line order", "[spectral]")
{
    const ModeBasis basis = four_ion_basis();
    const PropagationTrace tr = propagate(basis, 2, uniform_times(0.01, 12.5e-6));
    const DftSpectrum dft = dft_trace(tr, Window::hann);
    std::vector<SpectrumLine> lines = analytic_spectrum(basis, 2, 3).lines;
    const auto first = match_peaks(dft, 3, lines, 1.5);
    std::mt19937_64 gen(47);
    for (int trial = 0; trial < 20; ++trial) {
        std::shuffle(lines.begin(), lines.end(), gen);
        const auto again = match_peaks(dft, 3, lines, 1.5);
        REQUIRE(again.size() == first.size());
        for (std::size_t i = 0; i < first.size(); ++i) {
            CHECK(again[i].line.p == first[i].line.p);
            CHECK(again[i].line.q == first[i].line.q);
            CHECK(again[i].bin == first[i].bin);
        }
    }
    for (std::size_t i = 1; i < first.size(); ++i) {
        CHECK(first[i].line.freq >= first[i - 1].line.freq);
    }
}

TEST_CASE("Unmatched lines and matching limits", "[spectral]")
{
    const ModeBasis basis = four_ion_basis();
    const PropagationTrace tr = propagate(basis, 2, uniform_times(0.01, 12.5e-6));
    const DftSpectrum dft = dft_trace(tr);

    // A line far from any beat frequency.
    const std::vector<SpectrumLine> stray{{constants::khz_to_rad_s(30.0), 0.1, 1, 2}};
    const auto report = match_peaks(dft, 1, stray, 1.0);
    REQUIRE(report.size() == 1);
    CHECK_FALSE(report[0].matched);
    CHECK(report[0].bin == -1);

    // A floor above every peak removes all candidates.
    const auto lines = analytic_spectrum(basis, 2, 1).lines;
    for (const auto &m : match_peaks(dft, 1, lines, 1.0, 10.0)) {
        CHECK_FALSE(m.matched);
    }
    CHECK_THROWS_AS(match_peaks(dft, 1, lines, 0.5), DomainError);
    CHECK_THROWS_AS(match_peaks(dft, 5, lines, 1.0), DomainError);
}

TEST_CASE("Sampled dataset spectrum uses observed populations", "[spectral]")
{
    const ModeBasis basis = four_ion_basis();
    MeasurementModel model;
    model.scale = 0.66;
    model.seed = 3;
    const std::vector<double> times = uniform_times(0.01, 12.5e-6);
    const ObservationDataset data = apply_measurement_model(basis, 2, times, model);
    const DftSpectrum a = dft_trace(data);
    const DftSpectrum b = dft_trace(times, observed_populations(data));
    CHECK(a.dc == b.dc);
    CHECK(a.magnitude == b.magnitude);
}

TEST_CASE("Window names", "[spectral]")
{
    CHECK(parse_window("rect") == Window::rectangular);
    CHECK(parse_window("hann") == Window::hann);
    CHECK(window_name(Window::hann) == "hann");
    CHECK(window_name(parse_window(window_name(Window::rectangular))) == "rect");
    CHECK_THROWS_AS(parse_window("blackman"), DomainError);
}

TEST_CASE("DFT input checks", "[spectral]")
{
    const std::vector<double> times{0.0, 1.0, 2.0, 3.0};
    CHECK_THROWS_AS(dft_trace(times, Eigen::MatrixXd::Zero(3, 1)), DomainError);
    const std::vector<double> uneven{0.0, 1.0, 2.0, 3.5};
    CHECK_THROWS_AS(dft_trace(uneven, Eigen::MatrixXd::Zero(4, 1)), DomainError);
}

TEST_CASE("Mode-weight identities", "[spectral]")
{
    std::mt19937_64 gen(53);
    std::uniform_int_distribution<int> size(2, 9);
    for (int trial = 0; trial < 50; ++trial) {
        const TrapConfig c = oracle::random_trap(gen, size(gen));
        const ModeBasis basis = mode_decomposition(hopping_matrix(equilibrium_positions(c), c));
        const int n = basis.n_sites();
        for (int src = 1; src <= n; ++src) {
            double dc_sum = 0.0;
            std::vector<double> amp_sum(n * (n - 1) / 2, 0.0);
            for (int m = 1; m <= n; ++m) {
                const AnalyticSpectrum a = analytic_spectrum(basis, src, m);
                const AnalyticSpectrum b = analytic_spectrum(basis, m, src);
                dc_sum += a.dc;
                CHECK(a.dc == b.dc);
                REQUIRE(a.lines.size() == amp_sum.size());
                for (std::size_t i = 0; i < a.lines.size(); ++i) {
                    CHECK(a.lines[i].amplitude == b.lines[i].amplitude);
                    CHECK(std::abs(a.lines[i].amplitude) <= 1.0);
                    amp_sum[i] += a.lines[i].amplitude;
                }
            }
            CHECK(dc_sum == Approx(1.0).margin(1e-10));
            for (double s : amp_sum) {
                CHECK(std::abs(s) < 1e-10);
            }
        }
    }
}

TEST_CASE("Long-time average equals the constant term", "[spectral]")
{
    // Two sites: one beat period is exact.
    const double k0 = 5000.0;
    const ModeBasis two = mode_decomposition(HoppingMatrix::from_shape(hopping_shape(2), k0));
    const double period = 2.0 * std::numbers::pi / k0;
    const PropagationTrace tr2 = propagate(two, 1, uniform_times(7.0 * period, period / 400.0));
    CHECK(tr2.p.col(1).mean() == Approx(analytic_spectrum(two, 1, 2).dc).margin(1e-3));

    // Four ions: one second covers thousands of periods of every beat.
    const ModeBasis basis = four_ion_basis();
    const PropagationTrace tr = propagate(basis, 2, uniform_times(1.0, 12.5e-6));
    for (int m = 1; m <= 4; ++m) {
        CHECK(tr.p.col(m - 1).mean() == Approx(analytic_spectrum(basis, 2, m).dc).margin(1e-3));
    }
}

TEST_CASE("Constant input has an empty spectrum", "[spectral]")
{
    const std::vector<double> times = uniform_times(0.01, 12.5e-6);
    const Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(800, 2, 0.25);
    for (Window w : {Window::rectangular, Window::hann}) {
        const DftSpectrum dft = dft_trace(times, flat, w);
        // The Hann window itself has a component in the first bin.
        const int skip = w == Window::hann ? 1 : 0;
        for (int site = 0; site < 2; ++site) {
            const auto &mag = dft.magnitude[site];
            CHECK(*std::max_element(mag.begin() + skip, mag.end()) < 1e-12);
            CHECK(dft.dc[site] == Approx(0.25).epsilon(1e-13));
        }
        const auto lines = analytic_spectrum(four_ion_basis(), 2, 1).lines;
        for (const auto &m : match_peaks(dft, 1, lines, 1.0)) {
            CHECK_FALSE(m.matched);
        }
    }
}

TEST_CASE("Empty line list gives an empty report", "[spectral]")
{
    const std::vector<double> times = uniform_times(1e-3, 1e-5);
    const DftSpectrum dft = dft_trace(times, Eigen::MatrixXd::Random(100, 1));
    CHECK(match_peaks(dft, 1, std::vector<SpectrumLine>{}, 1.0).empty());
}

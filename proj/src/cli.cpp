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

#include "phononwalk/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "phononwalk/constants.hpp"
#include "phononwalk/coupling.hpp"
#include "phononwalk/crystal.hpp"
#include "phononwalk/dynamics.hpp"
#include "phononwalk/errors.hpp"
#include "phononwalk/fitting.hpp"
#include "phononwalk/formats.hpp"
#include "phononwalk/scenario.hpp"
#include "phononwalk/spectral.hpp"

namespace fs = std::filesystem;

namespace phononwalk::cli {

namespace {

struct Options {
    std::string scenario;
    std::optional<int> source;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string window = "rect";
    std::vector<std::string> bounds;
    std::string trace;
    std::string dataset;
    bool sampled = false;
    double tol_bins = 1.0;
    std::string param;
    std::string values;
    std::string range;
};

/// Collects generated files in memory and writes them together; nothing is left
/// behind if any write fails.
class OutputSet {
  public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

    std::ostringstream &add(const std::string &name)
    {
        files_.emplace_back(name, std::make_unique<std::ostringstream>());
        return *files_.back().second;
    }

    std::vector<fs::path> commit()
    {
        std::vector<fs::path> written;
        try {
            fs::create_directories(dir_);
            for (const auto &[name, body] : files_) {
                const fs::path path = dir_ / name;
                std::ofstream f(path, std::ios::binary | std::ios::trunc);
                if (!f) {
                    throw std::runtime_error("cannot write '" + path.string() + "'");
                }
                written.push_back(path);
                f << body->str();
                if (!f) {
                    throw std::runtime_error("cannot write '" + path.string() + "'");
                }
            }
        } catch (...) {
            std::error_code ec;
            for (const fs::path &p : written) {
                fs::remove(p, ec);
            }
            throw;
        }
        return written;
    }

  private:
    fs::path dir_;
    std::vector<std::pair<std::string, std::unique_ptr<std::ostringstream>>> files_;
};

Scenario scenario_from(const Options &o)
{
    Scenario s = o.scenario.empty() ? default_scenario() : load_scenario(o.scenario);
    if (o.source) {
        s.run.source = *o.source;
    }
    return s;
}

std::uint64_t resolve_seed(const Options &o, const Scenario &s)
{
    if (o.seed) {
        return *o.seed;
    }
    if (s.run.seed) {
        return *s.run.seed;
    }
    if (const char *env = std::getenv("PHONONWALK_SEED"); env != nullptr && *env != '\0') {
        return parse_uint64(env);
    }
    return 0;
}

fs::path out_dir(const Options &o, const Scenario *s)
{
    if (!o.out.empty()) {
        return o.out;
    }
    return s != nullptr ? fs::path(s->output.directory) : fs::path("out");
}

std::string join(const std::vector<double> &v, double factor)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += (i ? ", " : "") + format_double(v[i] * factor);
    }
    return s;
}

std::map<std::string, std::string> trap_metadata(const Scenario &s, double kappa)
{
    return {
        {"n_ions", std::to_string(s.n_ions)},
        {"mass_amu", format_double(s.mass_amu)},
        {"omega_x_mhz", format_double(s.omega_x_mhz)},
        {"omega_y_mhz", format_double(s.omega_y_mhz)},
        {"omega_z_mhz", format_double(s.omega_z_mhz)},
        {"kappa0_rad_s", format_double(kappa)},
        {"dt_us", format_double(s.run.dt_us)},
    };
}

int cmd_positions(const Options &o, std::ostream &out)
{
    const Scenario s = scenario_from(o);
    const IonChain chain = equilibrium_positions(s.trap());

    Records r{
        {"n_ions", std::to_string(chain.size())},
        {"length_scale_um", format_double(chain.length_scale * 1e6)},
        {"u", join(chain.u, 1.0)},
        {"z0_um", join(chain.z0, 1e6)},
        {"gaps_um", join(chain.gaps(), 1e6)},
    };
    if (chain.size() >= 2) {
        r.emplace_back("d0_um", format_double(chain.central_gap() * 1e6));
    }
    write_records(out, r);
    if (!o.out.empty()) {
        OutputSet files(o.out);
        write_records(files.add("positions.txt"), r);
        files.commit();
    }
    return success;
}

int cmd_simulate(const Options &o, std::ostream &out)
{
    const Scenario s = scenario_from(o);
    const TrapConfig trap = s.trap();
    const IonChain chain = equilibrium_positions(trap);
    const HoppingMatrix h = hopping_matrix(chain, trap);
    const ModeBasis basis = mode_decomposition(h);
    const std::vector<double> times = s.time_grid();
    const std::uint64_t seed = resolve_seed(o, s);

    const PropagationTrace trace = propagate(basis, s.run.source, times);
    ObservationDataset data =
        apply_measurement_model(basis, s.run.source, times, s.measurement_model(seed));
    auto meta = trap_metadata(s, h.kappa0);
    for (const auto &[k, v] : meta) {
        data.metadata[k] = v;
    }
    data.metadata["scale"] = format_double(s.measurement.scale);
    data.metadata["t_offset_us"] = format_double(s.measurement.t_offset_us);
    data.metadata["heating_rate"] = format_double(s.measurement.heating_rate);
    data.metadata["seed"] = std::to_string(seed);

    Records summary{
        {"n_ions", std::to_string(s.n_ions)},
        {"source", std::to_string(s.run.source)},
        {"seed", std::to_string(seed)},
        {"n_steps", std::to_string(times.size())},
        {"dt_us", format_double(s.run.dt_us)},
        {"shots", std::to_string(s.run.shots)},
    };
    if (s.n_ions >= 2) {
        const double hop = max_adjacent_hopping_time(h);
        summary.emplace_back("kappa0_rad_s", format_double(h.kappa0));
        summary.emplace_back("kappa0_khz", format_double(constants::rad_s_to_khz(h.kappa0)));
        summary.emplace_back("d0_um", format_double(chain.central_gap() * 1e6));
        summary.emplace_back("max_adjacent_hopping_time_us", format_double(hop * 1e6));
        summary.emplace_back("duration_over_hopping_time",
                             format_double(s.run.t_end_us * 1e-6 / hop));
    }
    summary.emplace_back("model_warning", data.metadata.count("model_warning")
                                              ? data.metadata["model_warning"]
                                              : "none");

    OutputSet files(out_dir(o, &s));
    if (s.output.csv) {
        write_trace_csv(files.add("trace.csv"), trace, meta);
        write_dataset_csv(files.add("dataset.csv"), data);
        write_matrix_csv(files.add("hamiltonian_rad_s.csv"), h.h, {{"units", "rad/s"}});
        if (s.n_ions >= 2) {
            write_matrix_csv(files.add("hamiltonian_kappa0_half.csv"), h.normalized(),
                             {{"units", "kappa0/2"},
                              {"kappa0_rad_s", format_double(h.kappa0)}});
        }
    }
    if (s.output.pgm) {
        write_pgm(files.add("trace.pgm"), trace.p);
        write_pgm(files.add("dataset.pgm"), observed_populations(data));
    }
    write_records(files.add("summary.txt"), summary);
    for (const fs::path &p : files.commit()) {
        out << p.string() << '\n';
    }
    return success;
}

int cmd_spectrum(const Options &o, std::ostream &out)
{
    const Scenario s = scenario_from(o);
    const Window window = parse_window(o.window);

    std::vector<double> times;
    Eigen::MatrixXd values;
    std::map<std::string, std::string> meta;
    int source = s.run.source;
    int n_ions = s.n_ions;
    double kappa = 0.0;

    if (!o.trace.empty()) {
        std::ifstream probe(o.trace);
        if (!probe) {
            throw ParseError("cannot open '" + o.trace + "'");
        }
        const bool sampled = is_dataset_csv(probe);
        std::ifstream in(o.trace);
        if (sampled) {
            ObservationDataset d = read_dataset_csv(in);
            times = d.times;
            values = observed_populations(d);
            meta = d.metadata;
        } else {
            TraceTable t = read_trace_csv(in);
            times = std::move(t.times);
            values = std::move(t.values);
            meta = std::move(t.metadata);
        }
        if (auto it = meta.find("source"); it != meta.end() && !o.source) {
            source = static_cast<int>(parse_int(it->second));
        }
        n_ions = static_cast<int>(values.cols());
        if (auto it = meta.find("kappa0_rad_s"); it != meta.end()) {
            kappa = parse_double(it->second);
        }
    }

    HoppingMatrix h;
    if (kappa > 0.0) {
        h = HoppingMatrix::from_shape(hopping_shape(n_ions), kappa);
    } else {
        const TrapConfig trap = s.trap();
        if (trap.n_ions != n_ions) {
            throw DomainError("trace has " + std::to_string(n_ions) +
                              " sites but the scenario has " + std::to_string(trap.n_ions));
        }
        h = hopping_matrix(equilibrium_positions(trap), trap);
    }
    const ModeBasis basis = mode_decomposition(h);

    if (o.trace.empty()) {
        times = s.time_grid();
        if (o.sampled) {
            const ObservationDataset d = apply_measurement_model(
                basis, source, times, s.measurement_model(resolve_seed(o, s)));
            values = observed_populations(d);
        } else {
            values = propagate(basis, source, times).p;
        }
    }

    const DftSpectrum dft = dft_trace(times, values, window);

    OutputSet files(out_dir(o, o.trace.empty() ? &s : nullptr));
    std::ostringstream &spec = files.add("spectrum.csv");
    spec << "f_khz";
    for (int m = 1; m <= n_ions; ++m) {
        spec << ",m" << m;
    }
    spec << '\n';
    for (std::size_t k = 0; k < dft.freqs.size(); ++k) {
        spec << format_double(dft.freqs[k] * 1e-3);
        for (int m = 0; m < n_ions; ++m) {
            spec << ',' << format_double(dft.magnitude[m][k]);
        }
        spec << '\n';
    }

    std::ostringstream &lines_csv = files.add("lines.csv");
    lines_csv << "site,p,q,f_khz,amplitude\n";

    Records report{
        {"source", std::to_string(source)},
        {"window", window_name(window)},
        {"bin_hz", format_double(dft.bin_width)},
        {"tol_bins", format_double(o.tol_bins)},
    };
    Records per_site;
    int n_lines = 0;
    int n_matched = 0;
    for (int m = 1; m <= n_ions; ++m) {
        const AnalyticSpectrum a = analytic_spectrum(basis, source, m);
        for (const SpectrumLine &l : a.lines) {
            lines_csv << m << ',' << l.p << ',' << l.q << ','
                      << format_double(constants::rad_s_to_khz(l.freq)) << ','
                      << format_double(l.amplitude) << '\n';
        }
        const std::string prefix = "site." + std::to_string(m) + ".";
        per_site.emplace_back(prefix + "dc_dft", format_double(dft.dc[m - 1]));
        per_site.emplace_back(prefix + "dc_analytic", format_double(a.dc));
        const auto matches = match_peaks(dft, m, a.lines, o.tol_bins);
        int idx = 0;
        for (const PeakMatch &pm : matches) {
            ++n_lines;
            std::string v = "p=" + std::to_string(pm.line.p) + " q=" + std::to_string(pm.line.q) +
                            " f_khz=" + format_double(constants::rad_s_to_khz(pm.line.freq)) +
                            " amplitude=" + format_double(pm.line.amplitude);
            if (pm.matched) {
                ++n_matched;
                v += " matched=yes peak_khz=" + format_double(pm.peak_freq * 1e-3) +
                     " offset_bins=" + format_double(pm.offset_bins) +
                     " ratio=" + format_double(pm.ratio);
            } else {
                v += " matched=no";
            }
            per_site.emplace_back(prefix + "line." + std::to_string(++idx), v);
        }
    }
    report.emplace_back("n_lines", std::to_string(n_lines));
    report.emplace_back("n_matched", std::to_string(n_matched));
    report.emplace_back("n_unmatched", std::to_string(n_lines - n_matched));
    report.insert(report.end(), per_site.begin(), per_site.end());
    write_records(files.add("match.txt"), report);
    files.commit();
    write_records(out, {report.begin(), report.begin() + 7});
    return success;
}

Interval parse_interval(std::string_view text, double factor)
{
    const auto parts = split(text, ':');
    if (parts.size() != 2) {
        throw CLI::ValidationError("--bounds", "expected lo:hi, got '" + std::string(text) + "'");
    }
    return {parse_double(parts[0]) * factor, parse_double(parts[1]) * factor};
}

FitBounds parse_bounds(const std::vector<std::string> &specs)
{
    FitBounds b;
    for (const std::string &spec : specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) {
            throw CLI::ValidationError("--bounds", "expected key=lo:hi, got '" + spec + "'");
        }
        const std::string key = spec.substr(0, eq);
        const std::string_view range = std::string_view(spec).substr(eq + 1);
        if (key == "kappa0_khz") {
            b.kappa0 = parse_interval(range, constants::khz_to_rad_s(1.0));
        } else if (key == "t_offset_us") {
            b.t_offset = parse_interval(range, 1e-6);
        } else if (key == "scale") {
            b.scale = parse_interval(range, 1.0);
        } else if (key == "heating_rate") {
            b.heating_rate = parse_interval(range, 1.0);
        } else {
            throw CLI::ValidationError("--bounds", "unknown bound '" + key + "'");
        }
    }
    b.validate();
    return b;
}

int cmd_fit(const Options &o, std::ostream &out)
{
    std::ifstream in(o.dataset);
    if (!in) {
        throw ParseError("cannot open dataset '" + o.dataset + "'");
    }
    ObservationDataset data = read_dataset_csv(in);
    if (o.source) {
        data.source = *o.source;
    }
    if (data.source < 1 || data.source > data.n_sites()) {
        throw DomainError("dataset has no valid source site; pass --source");
    }
    const FitBounds bounds = parse_bounds(o.bounds);
    const WalkModel model(data.n_sites(), data.source);
    const FitResult fit = fit_observation(data, model, bounds);

    std::string pinned;
    for (const std::string &p : fit.pinned) {
        pinned += (pinned.empty() ? "" : ",") + p;
    }
    const Records r{
        {"n_sites", std::to_string(data.n_sites())},
        {"source", std::to_string(data.source)},
        {"n_steps", std::to_string(data.times.size())},
        {"kappa0_rad_s", format_double(fit.kappa0)},
        {"kappa0_khz", format_double(constants::rad_s_to_khz(fit.kappa0))},
        {"t_offset_us", format_double(fit.t_offset * 1e6)},
        {"scale", format_double(fit.scale)},
        {"heating_rate", format_double(fit.heating_rate)},
        {"rss", format_double(fit.rss)},
        {"grid_rss", format_double(fit.grid_rss)},
        {"n_evals", std::to_string(fit.n_evals)},
        {"converged", fit.converged ? "true" : "false"},
        {"pinned", pinned.empty() ? "none" : pinned},
    };
    write_records(out, r);

    OutputSet files(out_dir(o, nullptr));
    write_records(files.add("fit.txt"), r);
    write_table_csv(files.add("overlay.csv"), data.times, model.predict(data.times, fit.params()),
                    "m", {{"source", std::to_string(data.source)}});
    files.commit();
    return success;
}

std::vector<double> sweep_values(const Options &o)
{
    std::vector<double> v;
    if (!o.values.empty()) {
        for (std::string_view f : split(o.values, ',')) {
            v.push_back(parse_double(f));
        }
    } else if (!o.range.empty()) {
        const auto parts = split(o.range, ':');
        if (parts.size() != 3) {
            throw DomainError("sweep: range must be lo:hi:count");
        }
        const double lo = parse_double(parts[0]);
        const double hi = parse_double(parts[1]);
        const long long count = parse_int(parts[2]);
        if (count < 1 || hi < lo || (count == 1 && hi != lo)) {
            throw DomainError("sweep: invalid range '" + o.range + "'");
        }
        for (long long i = 0; i < count; ++i) {
            v.push_back(count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (count - 1));
        }
    }
    if (v.empty()) {
        throw DomainError("sweep: give --values or --range");
    }
    return v;
}

int cmd_sweep(const Options &o, std::ostream &out)
{
    const Scenario base = scenario_from(o);
    if (o.param != "omega_y" && o.param != "omega_z" && o.param != "n_ions") {
        throw DomainError("sweep: parameter must be omega_y, omega_z or n_ions");
    }
    const std::vector<double> values = sweep_values(o);

    std::ostringstream table;
    table << (o.param == "n_ions" ? "n_ions" : o.param + "_mhz")
          << ",kappa0_khz,d0_um,max_hop_us\n";
    for (double value : values) {
        Scenario s = base;
        if (o.param == "omega_y") {
            s.omega_y_mhz = value;
        } else if (o.param == "omega_z") {
            s.omega_z_mhz = value;
        } else {
            if (value != std::floor(value)) {
                throw DomainError("sweep: n_ions values must be integers");
            }
            s.n_ions = static_cast<int>(value);
        }
        const TrapConfig trap = s.trap();
        const IonChain chain = equilibrium_positions(trap);
        const HoppingMatrix h = hopping_matrix(chain, trap);
        table << format_double(value) << ',' << format_double(constants::rad_s_to_khz(h.kappa0))
              << ',' << format_double(chain.central_gap() * 1e6) << ','
              << format_double(max_adjacent_hopping_time(h) * 1e6) << '\n';
    }
    out << table.str();
    if (!o.out.empty()) {
        OutputSet files(o.out);
        files.add("sweep.csv") << table.str();
        files.commit();
    }
    return success;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Single-phonon quantum walks in linear trapped-ion crystals", "phononwalk"};
    app.require_subcommand(1);
    Options o;

    auto add_scenario = [&](CLI::App *sub) {
        sub->add_option("--scenario", o.scenario, "Scenario file (built-in default if omitted)");
    };
    auto add_source = [&](CLI::App *sub) {
        sub->add_option("--source", o.source, "Initial phonon site (1-based)");
    };
    auto add_out = [&](CLI::App *sub) { sub->add_option("--out", o.out, "Output directory"); };

    CLI::App *positions = app.add_subcommand("positions", "Equilibrium ion positions");
    add_scenario(positions);
    add_out(positions);

    CLI::App *simulate = app.add_subcommand("simulate", "Ideal trace and sampled dataset");
    add_scenario(simulate);
    add_source(simulate);
    simulate->add_option("--seed", o.seed, "Sampling seed (overrides scenario and env)");
    add_out(simulate);

    CLI::App *spectrum = app.add_subcommand("spectrum", "DFT of a trace against analytic lines");
    add_scenario(spectrum);
    add_source(spectrum);
    spectrum->add_option("--trace", o.trace, "Trace or dataset CSV instead of simulating");
    spectrum->add_flag("--sampled", o.sampled, "Use a sampled dataset instead of the ideal trace");
    spectrum->add_option("--seed", o.seed, "Sampling seed for --sampled");
    spectrum->add_option("--window", o.window, "rect or hann")
        ->check(CLI::IsMember({"rect", "hann"}));
    spectrum->add_option("--tol-bins", o.tol_bins, "Peak matching tolerance in bins")
        ->check(CLI::Range(1.0, 1e9));
    add_out(spectrum);

    CLI::App *fit = app.add_subcommand("fit", "Recover the four model parameters from a dataset");
    fit->add_option("dataset,--dataset", o.dataset, "Dataset CSV")->required();
    fit->add_option("--bounds", o.bounds,
                    "key=lo:hi with key in kappa0_khz, t_offset_us, scale, heating_rate");
    add_source(fit);
    add_out(fit);

    CLI::App *sweep = app.add_subcommand("sweep", "Tabulate kappa0, d0 and hop time");
    add_scenario(sweep);
    sweep->add_option("--param", o.param, "omega_y | omega_z | n_ions")->required();
    auto *values = sweep->add_option("--values", o.values, "Comma-separated values (MHz for frequencies)");
    sweep->add_option("--range", o.range, "lo:hi:count")->excludes(values);
    add_out(sweep);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError &e) {
        app.exit(e, out, err);
        return usage_error;
    }

    try {
        if (*positions) {
            return cmd_positions(o, out);
        }
        if (*simulate) {
            return cmd_simulate(o, out);
        }
        if (*spectrum) {
            return cmd_spectrum(o, out);
        }
        if (*fit) {
            return cmd_fit(o, out);
        }
        if (*sweep) {
            return cmd_sweep(o, out);
        }
    } catch (const CLI::ValidationError &e) {
        err << "error: " << e.what() << '\n';
        return usage_error;
    } catch (const DegenerateDataError &e) {
        err << "error: " << e.what() << '\n';
        return degenerate_data;
    } catch (const ConvergenceError &e) {
        err << "error: " << e.what() << " (residual " << e.residual() << ")\n";
        return model_error;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return model_error;
    }
    return usage_error;
}

} // namespace phononwalk::cli

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

#include "phononwalk/scenario.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "phononwalk/constants.hpp"
#include "phononwalk/errors.hpp"
#include "phononwalk/formats.hpp"

namespace phononwalk {

namespace {

int checked_int(std::string_view text, int line)
{
    const long long v = parse_int(text, line);
    if (v < -2147483647LL || v > 2147483647LL) {
        throw ParseError("integer out of range", line);
    }
    return static_cast<int>(v);
}

} // namespace

TrapConfig Scenario::trap() const
{
    TrapConfig config;
    config.n_ions = n_ions;
    config.mass = mass_amu * constants::amu;
    config.omega_x = constants::mhz_to_rad_s(omega_x_mhz);
    config.omega_y = constants::mhz_to_rad_s(omega_y_mhz);
    config.omega_z = constants::mhz_to_rad_s(omega_z_mhz);
    return config;
}

MeasurementModel Scenario::measurement_model(std::uint64_t seed) const
{
    MeasurementModel model;
    model.scale = measurement.scale;
    model.t_offset = measurement.t_offset_us / 1e6;
    model.heating_rate = measurement.heating_rate;
    model.shots = run.shots;
    model.seed = seed;
    return model;
}

std::vector<double> Scenario::time_grid() const
{
    if (!(run.dt_us > 0.0) || !(run.t_end_us >= 0.0) || !std::isfinite(run.t_end_us)) {
        throw DomainError("run: need dt_us > 0 and finite t_end_us >= 0");
    }
    const long count = std::lround(run.t_end_us / run.dt_us);
    std::vector<double> times(count);
    for (long k = 0; k < count; ++k) {
        times[k] = (static_cast<double>(k) * run.dt_us) / 1e6;
    }
    return times;
}

std::string default_scenario_text()
{
    return "# Four 40Ca+ ions, radial y phonon, 10 ms at 12.5 us steps.\n"
           "trap.n_ions = 4\n"
           "trap.mass_amu = 40\n"
           "trap.omega_x_mhz = 3.1\n"
           "trap.omega_y_mhz = 2.9\n"
           "trap.omega_z_mhz = 0.09\n"
           "\n"
           "run.source = 2\n"
           "run.t_end_us = 10000\n"
           "run.dt_us = 12.5\n"
           "run.shots = 50\n"
           "run.seed = 1\n"
           "\n"
           "measurement.scale = 0.66\n"
           "measurement.t_offset_us = 50\n"
           "measurement.heating_rate = 5\n"
           "\n"
           "output.directory = out\n"
           "output.formats = csv,pgm\n";
}

Scenario default_scenario()
{
    std::istringstream in(default_scenario_text());
    return parse_scenario(in);
}

Scenario parse_scenario(std::istream &in)
{
    Scenario s;
    s.output.pgm = true;

    using Setter = std::function<void(std::string_view, int)>;
    const std::map<std::string, Setter, std::less<>> setters{
        {"trap.n_ions", [&](auto v, int l) { s.n_ions = checked_int(v, l); }},
        {"trap.mass_amu", [&](auto v, int l) { s.mass_amu = parse_double(v, l); }},
        {"trap.omega_x_mhz", [&](auto v, int l) { s.omega_x_mhz = parse_double(v, l); }},
        {"trap.omega_y_mhz", [&](auto v, int l) { s.omega_y_mhz = parse_double(v, l); }},
        {"trap.omega_z_mhz", [&](auto v, int l) { s.omega_z_mhz = parse_double(v, l); }},
        {"run.source", [&](auto v, int l) { s.run.source = checked_int(v, l); }},
        {"run.t_end_us", [&](auto v, int l) { s.run.t_end_us = parse_double(v, l); }},
        {"run.dt_us", [&](auto v, int l) { s.run.dt_us = parse_double(v, l); }},
        {"run.shots", [&](auto v, int l) { s.run.shots = checked_int(v, l); }},
        {"run.seed", [&](auto v, int l) { s.run.seed = parse_uint64(v, l); }},
        {"measurement.scale", [&](auto v, int l) { s.measurement.scale = parse_double(v, l); }},
        {"measurement.t_offset_us",
         [&](auto v, int l) { s.measurement.t_offset_us = parse_double(v, l); }},
        {"measurement.heating_rate",
         [&](auto v, int l) { s.measurement.heating_rate = parse_double(v, l); }},
        {"output.directory",
         [&](auto v, int l) {
             if (v.empty()) {
                 throw ParseError("output.directory is empty", l);
             }
             s.output.directory = std::string(v);
         }},
        {"output.formats",
         [&](auto v, int l) {
             s.output.csv = false;
             s.output.pgm = false;
             for (std::string_view f : split(v, ',')) {
                 f = trim(f);
                 if (f == "csv") {
                     s.output.csv = true;
                 } else if (f == "pgm") {
                     s.output.pgm = true;
                 } else {
                     throw ParseError("unknown output format '" + std::string(f) + "'", l);
                 }
             }
         }},
    };
    const std::set<std::string> optional{"run.seed", "output.directory", "output.formats"};

    std::set<std::string> seen;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view text = raw;
        if (const auto hash = text.find('#'); hash != std::string_view::npos) {
            text = text.substr(0, hash);
        }
        text = trim(text);
        if (text.empty()) {
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError("expected 'key = value'", line);
        }
        const std::string key(trim(text.substr(0, eq)));
        const std::string_view value = trim(text.substr(eq + 1));
        auto it = setters.find(key);
        if (it == setters.end()) {
            throw ParseError("unknown key '" + key + "'", line);
        }
        if (!seen.insert(key).second) {
            throw ParseError("repeated key '" + key + "'", line);
        }
        it->second(value, line);
    }
    for (const auto &[key, setter] : setters) {
        if (!seen.count(key) && !optional.count(key)) {
            throw ParseError("missing required key '" + key + "'");
        }
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open scenario file '" + path.string() + "'");
    }
    return parse_scenario(in);
}

} // namespace phononwalk

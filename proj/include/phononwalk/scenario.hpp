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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "phononwalk/crystal.hpp"
#include "phononwalk/dynamics.hpp"

namespace phononwalk {

struct RunSettings {
    int source = 2;
    double t_end_us = 10000.0;
    double dt_us = 12.5;
    int shots = 50;
    std::optional<std::uint64_t> seed;
};

struct MeasurementSettings {
    double scale = 0.66;
    double t_offset_us = 50.0;
    double heating_rate = 5.0;
};

struct OutputSettings {
    std::string directory = "out";
    bool csv = true;
    bool pgm = true;
};

/// A simulation run in laboratory units (MHz, amu, microseconds).
///
/// File format: one `key = value` per line, `#` starts a comment. Keys:
///
///   trap.n_ions  trap.mass_amu  trap.omega_x_mhz  trap.omega_y_mhz  trap.omega_z_mhz
///   run.source  run.t_end_us  run.dt_us  run.shots  [run.seed]
///   measurement.scale  measurement.t_offset_us  measurement.heating_rate
///   [output.directory]  [output.formats]   (comma list of csv, pgm)
///
/// Bracketed keys are optional. Unknown or repeated keys are rejected.
struct Scenario {
    double mass_amu = 40.0;
    double omega_x_mhz = 3.1;
    double omega_y_mhz = 2.9;
    double omega_z_mhz = 0.09;
    int n_ions = 4;
    RunSettings run;
    MeasurementSettings measurement;
    OutputSettings output;

    /// Trap in SI units (kg, rad/s).
    TrapConfig trap() const;

    /// Measurement model with shots and the given seed.
    MeasurementModel measurement_model(std::uint64_t seed) const;

    /// t_k = k * dt for k in [0, round(t_end / dt)), computed as (k * dt_us) / 1e6 so
    /// the grid prints as clean microsecond values.
    std::vector<double> time_grid() const;
};

/// The four-ion 40Ca+ configuration with (3.1, 2.9, 0.09) MHz traps, source ion 2,
/// 10 ms at 12.5 us steps, 50 shots.
Scenario default_scenario();
std::string default_scenario_text();

/// Throws ParseError naming the offending line or key.
Scenario parse_scenario(std::istream &in);
Scenario load_scenario(const std::filesystem::path &path);

} // namespace phononwalk

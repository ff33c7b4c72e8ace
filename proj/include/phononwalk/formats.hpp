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
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "phononwalk/dynamics.hpp"

namespace phononwalk {

// Numbers

/// Shortest decimal that parses back to exactly `x`.
std::string format_double(double x);

/// Decimal text for x * 10^power, built from the shortest digits of x, so that
/// parse_scaled(format_scaled(x, p), p) == x bit for bit.
std::string format_scaled(double x, int power);
double parse_scaled(std::string_view text, int power);

/// Strict parsers: the whole token must be consumed. Throw ParseError.
double parse_double(std::string_view text, int line = 0);
long long parse_int(std::string_view text, int line = 0);
std::uint64_t parse_uint64(std::string_view text, int line = 0);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

// Records: one `key = value` per line.

using Records = std::vector<std::pair<std::string, std::string>>;

void write_records(std::ostream &out, const Records &records);

// Trace and dataset files.
//
// Optional `# key = value` metadata lines, then a header row, then one row per time
// step. Ideal traces use `t_us,p1,...,pN`; sampled datasets use
// `t_us,c1,...,cN,shots`. Times are written in microseconds and read back to the
// identical double.

struct TraceTable {
    std::vector<double> times; // seconds
    Eigen::MatrixXd values;    // times.size() x n_sites
    std::map<std::string, std::string> metadata;
};

void write_trace_csv(std::ostream &out, const PropagationTrace &trace,
                     const std::map<std::string, std::string> &metadata = {});
void write_table_csv(std::ostream &out, std::span<const double> times,
                     const Eigen::MatrixXd &values, const std::string &column_prefix,
                     const std::map<std::string, std::string> &metadata = {});
TraceTable read_trace_csv(std::istream &in);

/// Writes dataset.metadata plus `source`.
void write_dataset_csv(std::ostream &out, const ObservationDataset &dataset);
ObservationDataset read_dataset_csv(std::istream &in);

/// True if the header row (after metadata) ends in `shots`.
bool is_dataset_csv(std::istream &in);

/// Comma-separated square matrix preceded by `# key = value` lines.
void write_matrix_csv(std::ostream &out, const Eigen::MatrixXd &m,
                      const std::map<std::string, std::string> &metadata = {});
Eigen::MatrixXd read_matrix_csv(std::istream &in);

/// Plain (P2) graymap: one row per site, one column per time step, values in [0, 1]
/// mapped linearly to 0..255.
void write_pgm(std::ostream &out, const Eigen::MatrixXd &values);

} // namespace phononwalk

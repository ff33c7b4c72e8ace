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

#include "phononwalk/formats.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "phononwalk/errors.hpp"

namespace phononwalk {

namespace {

constexpr int us_per_s_power = 6;

struct CsvBody {
    std::map<std::string, std::string> metadata;
    std::vector<std::string> header;
    int header_line = 0;
    std::vector<std::pair<int, std::vector<std::string>>> rows; // (line number, fields)
};

std::pair<std::string, std::string> split_key_value(std::string_view text, int line)
{
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
        throw ParseError("expected 'key = value'", line);
    }
    const std::string_view key = trim(text.substr(0, eq));
    if (key.empty()) {
        throw ParseError("empty key", line);
    }
    return {std::string(key), std::string(trim(text.substr(eq + 1)))};
}

CsvBody read_csv_body(std::istream &in)
{
    CsvBody body;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view text = trim(raw);
        if (text.empty()) {
            continue;
        }
        if (text.front() == '#') {
            if (!body.header.empty()) {
                throw ParseError("metadata after the header row", line);
            }
            auto [key, value] = split_key_value(text.substr(1), line);
            body.metadata[key] = value;
            continue;
        }
        std::vector<std::string> fields;
        for (std::string_view f : split(text, ',')) {
            fields.emplace_back(trim(f));
        }
        if (body.header.empty()) {
            body.header = std::move(fields);
            body.header_line = line;
        } else {
            if (fields.size() != body.header.size()) {
                throw ParseError("expected " + std::to_string(body.header.size()) +
                                     " fields, got " + std::to_string(fields.size()),
                                 line);
            }
            body.rows.emplace_back(line, std::move(fields));
        }
    }
    if (body.header.empty()) {
        throw ParseError("missing header row", line + 1);
    }
    if (body.header.front() != "t_us") {
        throw ParseError("first column must be t_us", body.header_line);
    }
    return body;
}

void write_metadata(std::ostream &out, const std::map<std::string, std::string> &metadata)
{
    for (const auto &[key, value] : metadata) {
        out << "# " << key << " = " << value << '\n';
    }
}

} // namespace

std::string format_double(double x)
{
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), end);
}

std::string format_scaled(double x, int power)
{
    if (!std::isfinite(x)) {
        return format_double(x);
    }
    if (x == 0.0) {
        return "0";
    }
    std::array<char, 64> buf{};
    auto [end, ec] =
        std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::scientific);
    const std::string_view sci(buf.data(), end - buf.data());
    const auto e_pos = sci.find('e');
    std::string_view mantissa = sci.substr(0, e_pos);
    const int exponent = static_cast<int>(parse_int(sci.substr(e_pos + 1))) + power;

    std::string sign;
    if (mantissa.front() == '-') {
        sign = "-";
        mantissa.remove_prefix(1);
    }
    std::string digits;
    for (char c : mantissa) {
        if (c != '.') {
            digits.push_back(c);
        }
    }
    const int n_digits = static_cast<int>(digits.size());
    const int point = exponent + 1; // digits before the decimal point
    if (point <= 0) {
        return sign + "0." + std::string(-point, '0') + digits;
    }
    if (point >= n_digits) {
        return sign + digits + std::string(point - n_digits, '0');
    }
    return sign + digits.substr(0, point) + "." + digits.substr(point);
}

double parse_scaled(std::string_view text, int power)
{
    text = trim(text);
    const auto e_pos = text.find_first_of("eE");
    std::string mantissa(text.substr(0, e_pos));
    long long exponent = -power;
    if (e_pos != std::string_view::npos) {
        exponent += parse_int(text.substr(e_pos + 1));
    }
    return parse_double(mantissa + "e" + std::to_string(exponent));
}

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

double parse_double(std::string_view text, int line)
{
    text = trim(text);
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw ParseError("not a number: '" + std::string(text) + "'", line);
    }
    return value;
}

long long parse_int(std::string_view text, int line)
{
    text = trim(text);
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    long long value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw ParseError("not an integer: '" + std::string(text) + "'", line);
    }
    return value;
}

std::uint64_t parse_uint64(std::string_view text, int line)
{
    text = trim(text);
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw ParseError("not an unsigned integer: '" + std::string(text) + "'", line);
    }
    return value;
}

void write_records(std::ostream &out, const Records &records)
{
    for (const auto &[key, value] : records) {
        out << key << " = " << value << '\n';
    }
}

void write_table_csv(std::ostream &out, std::span<const double> times,
                     const Eigen::MatrixXd &values, const std::string &column_prefix,
                     const std::map<std::string, std::string> &metadata)
{
    write_metadata(out, metadata);
    out << "t_us";
    for (Eigen::Index m = 0; m < values.cols(); ++m) {
        out << ',' << column_prefix << (m + 1);
    }
    out << '\n';
    for (Eigen::Index k = 0; k < values.rows(); ++k) {
        out << format_scaled(times[k], us_per_s_power);
        for (Eigen::Index m = 0; m < values.cols(); ++m) {
            out << ',' << format_double(values(k, m));
        }
        out << '\n';
    }
}

void write_trace_csv(std::ostream &out, const PropagationTrace &trace,
                     const std::map<std::string, std::string> &metadata)
{
    std::map<std::string, std::string> meta = metadata;
    meta["source"] = std::to_string(trace.source);
    write_table_csv(out, trace.times, trace.p, "p", meta);
}

TraceTable read_trace_csv(std::istream &in)
{
    CsvBody body = read_csv_body(in);
    const auto n_cols = static_cast<Eigen::Index>(body.header.size()) - 1;
    if (n_cols < 1) {
        throw ParseError("trace needs at least one site column", body.header_line);
    }
    TraceTable table;
    table.metadata = std::move(body.metadata);
    table.values.resize(static_cast<Eigen::Index>(body.rows.size()), n_cols);
    for (std::size_t k = 0; k < body.rows.size(); ++k) {
        const auto &[line, fields] = body.rows[k];
        try {
            table.times.push_back(parse_scaled(fields[0], us_per_s_power));
        } catch (const ParseError &) {
            throw ParseError("bad time value '" + fields[0] + "'", line);
        }
        for (Eigen::Index m = 0; m < n_cols; ++m) {
            table.values(static_cast<Eigen::Index>(k), m) = parse_double(fields[m + 1], line);
        }
    }
    return table;
}

void write_dataset_csv(std::ostream &out, const ObservationDataset &dataset)
{
    std::map<std::string, std::string> meta = dataset.metadata;
    meta["source"] = std::to_string(dataset.source);
    write_metadata(out, meta);
    out << "t_us";
    for (int m = 0; m < dataset.n_sites(); ++m) {
        out << ",c" << (m + 1);
    }
    out << ",shots\n";
    for (Eigen::Index k = 0; k < dataset.counts.rows(); ++k) {
        out << format_scaled(dataset.times[k], us_per_s_power);
        for (Eigen::Index m = 0; m < dataset.counts.cols(); ++m) {
            out << ',' << dataset.counts(k, m);
        }
        out << ',' << dataset.shots << '\n';
    }
}

ObservationDataset read_dataset_csv(std::istream &in)
{
    CsvBody body = read_csv_body(in);
    const auto n_fields = static_cast<Eigen::Index>(body.header.size());
    if (n_fields < 3 || body.header.back() != "shots") {
        throw ParseError("dataset header must be t_us,c1,...,cN,shots", body.header_line);
    }
    const Eigen::Index n_sites = n_fields - 2;

    ObservationDataset data;
    data.metadata = std::move(body.metadata);
    data.source = 0;
    if (auto it = data.metadata.find("source"); it != data.metadata.end()) {
        data.source = static_cast<int>(parse_int(it->second));
    }
    data.counts.resize(static_cast<Eigen::Index>(body.rows.size()), n_sites);
    for (std::size_t k = 0; k < body.rows.size(); ++k) {
        const auto &[line, fields] = body.rows[k];
        try {
            data.times.push_back(parse_scaled(fields[0], us_per_s_power));
        } catch (const ParseError &) {
            throw ParseError("bad time value '" + fields[0] + "'", line);
        }
        const long long shots = parse_int(fields.back(), line);
        if (shots < 1 || (k > 0 && shots != data.shots)) {
            throw ParseError("shots must be a positive constant", line);
        }
        data.shots = static_cast<int>(shots);
        for (Eigen::Index m = 0; m < n_sites; ++m) {
            const long long c = parse_int(fields[m + 1], line);
            if (c < 0 || c > shots) {
                throw ParseError("count outside [0, shots]", line);
            }
            data.counts(static_cast<Eigen::Index>(k), m) = static_cast<int>(c);
        }
    }
    if (body.rows.empty()) {
        throw ParseError("dataset has no rows", body.header_line);
    }
    return data;
}

bool is_dataset_csv(std::istream &in)
{
    std::string raw;
    while (std::getline(in, raw)) {
        const std::string_view text = trim(raw);
        if (text.empty() || text.front() == '#') {
            continue;
        }
        const auto fields = split(text, ',');
        return trim(fields.back()) == "shots";
    }
    return false;
}

void write_matrix_csv(std::ostream &out, const Eigen::MatrixXd &m,
                      const std::map<std::string, std::string> &metadata)
{
    write_metadata(out, metadata);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            out << (c ? "," : "") << format_double(m(r, c));
        }
        out << '\n';
    }
}

Eigen::MatrixXd read_matrix_csv(std::istream &in)
{
    std::vector<std::vector<double>> rows;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string_view text = trim(raw);
        if (text.empty() || text.front() == '#') {
            continue;
        }
        std::vector<double> row;
        for (std::string_view f : split(text, ',')) {
            row.push_back(parse_double(f, line));
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw ParseError("ragged matrix row", line);
        }
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return m;
}

void write_pgm(std::ostream &out, const Eigen::MatrixXd &values)
{
    // Plain PGM lines should stay within 70 characters.
    out << "P2\n" << values.rows() << ' ' << values.cols() << "\n255\n";
    for (Eigen::Index m = 0; m < values.cols(); ++m) {
        std::size_t width = 0;
        for (Eigen::Index k = 0; k < values.rows(); ++k) {
            const int level =
                static_cast<int>(std::lround(255.0 * std::clamp(values(k, m), 0.0, 1.0)));
            const std::string token = std::to_string(level);
            if (width > 0 && width + 1 + token.size() > 70) {
                out << '\n';
                width = 0;
            }
            if (width > 0) {
                out << ' ';
                ++width;
            }
            out << token;
            width += token.size();
        }
        out << '\n';
    }
}

} // namespace phononwalk

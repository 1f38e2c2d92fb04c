#pragma once

// PathSample CSV: header `t,x1[,x2,...]`, one row per observation time, numbers
// in shortest round-trip decimal form. Observation times are iΔ starting at 0.

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "sdetest/errors.hpp"
#include "sdetest/simulate.hpp"

namespace sdetest {

/// Shortest decimal string that parses back to exactly `value`.
inline std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
        text.remove_suffix(1);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty())
        throw DataError("not a number: '" + std::string(text) + "'");
    return value;
}

inline void write_path_csv(std::ostream& out, const PathSample& path) {
    out << 't';
    for (std::size_t j = 0; j < path.dimension(); ++j) out << ",x" << (j + 1);
    out << '\n';
    for (std::size_t i = 0; i < path.rows(); ++i) {
        out << format_double(static_cast<double>(i) * path.delta());
        for (std::size_t j = 0; j < path.dimension(); ++j) out << ',' << format_double(path.at(i, j));
        out << '\n';
    }
}

/// Parse a path CSV. Rows are numbered from 1 for the header line.
inline PathSample read_path_csv(std::istream& in) {
    std::string line;
    long line_no = 0;
    const auto split = [](const std::string& s) {
        std::vector<std::string_view> cells;
        std::string_view view(s);
        std::size_t start = 0;
        for (;;) {
            const auto comma = view.find(',', start);
            cells.push_back(view.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                 : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        return cells;
    };

    if (!std::getline(in, line)) throw DataError("empty CSV input", 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split(line);
    if (header.size() < 2 || header[0] != "t") throw DataError("CSV header must be t,x1[,x2,...]", 1);
    for (std::size_t j = 1; j < header.size(); ++j)
        if (header[j] != "x" + std::to_string(j)) throw DataError("unexpected header column '" + std::string(header[j]) + "'", 1);
    const std::size_t d = header.size() - 1;

    std::vector<double> times;
    std::vector<double> values;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != d + 1)
            throw DataError("row " + std::to_string(line_no) + ": expected " + std::to_string(d + 1) +
                                " fields, got " + std::to_string(cells.size()),
                            line_no);
        try {
            times.push_back(parse_double(cells[0]));
            for (std::size_t j = 1; j <= d; ++j) {
                const double v = parse_double(cells[j]);
                if (!std::isfinite(v)) throw DataError("non-finite value");
                values.push_back(v);
            }
        } catch (const DataError& e) {
            throw DataError("row " + std::to_string(line_no) + ": " + e.what(), line_no);
        }
    }
    if (times.size() < 2) throw DataError("CSV needs at least two observation rows", line_no);
    if (times[0] != 0.0) throw DataError("row 2: first observation time must be 0", 2);
    const double delta = times[1];
    if (!(delta > 0.0)) throw DataError("row 3: observation times must increase", 3);
    for (std::size_t i = 2; i < times.size(); ++i) {
        const double expected = static_cast<double>(i) * delta;
        if (std::abs(times[i] - expected) > 1e-9 * std::max(1.0, expected)) {
            const long row = static_cast<long>(i) + 2;
            throw DataError("row " + std::to_string(row) + ": observation times are not equidistant", row);
        }
    }
    return PathSample(delta, d, std::move(values));
}

inline void write_path_csv(const std::string& file, const PathSample& path) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw DataError("cannot open '" + file + "' for writing");
    write_path_csv(out, path);
    if (!out) throw DataError("failed writing '" + file + "'");
}

inline PathSample read_path_csv(const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw DataError("cannot open '" + file + "'");
    return read_path_csv(in);
}

}  // namespace sdetest

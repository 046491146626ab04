#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "homp/errors.hpp"
#include "homp/estimate.hpp"
#include "homp/simulate.hpp"

namespace homp {
namespace csv {

// 17 significant digits round-trips a 64-bit double exactly.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_series(std::ostream& os, const TimeGrid& grid, const std::vector<double>& values) {
    os << "time,value\n";
    for (std::int64_t i = 0; i <= grid.n_steps; ++i)
        os << format_double(grid.time(i)) << ',' << format_double(values[static_cast<std::size_t>(i)]) << '\n';
}

inline void write_path(std::ostream& os, const Path& path) { write_series(os, path.grid, path.values); }

inline void write_path_file(const std::string& filename, const Path& path) {
    std::ofstream os(filename, std::ios::binary);  // binary keeps LF endings everywhere
    if (!os) throw config_error("cannot open for writing: " + filename);
    write_path(os, path);
}

namespace detail {

inline std::string strip(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n' || s.back() == ' ' || s.back() == '\t'))
        s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    return s.substr(i);
}

}  // namespace detail

// Reads a `time,value` CSV into a Dataset. Errors name the offending line.
inline Dataset read_dataset(std::istream& is, const std::string& source_name = "<stream>") {
    std::string line;
    if (!std::getline(is, line))
        throw config_error(source_name + ": empty file, expected 'time,value' header on line 1");
    if (detail::strip(line) != "time,value")
        throw config_error(source_name + ": line 1: expected header 'time,value', got '" + detail::strip(line) +
                           "'");
    std::vector<double> times, values;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string row = detail::strip(line);
        if (row.empty()) continue;
        const auto comma = row.find(',');
        if (comma == std::string::npos)
            throw config_error(source_name + ": line " + std::to_string(line_no) + ": expected 'time,value' row");
        try {
            std::size_t used = 0;
            const double t = std::stod(row.substr(0, comma), &used);
            if (used != comma) throw std::invalid_argument("trailing junk");
            const std::string val = row.substr(comma + 1);
            const double v = std::stod(val, &used);
            if (used != val.size()) throw std::invalid_argument("trailing junk");
            times.push_back(t);
            values.push_back(v);
        } catch (const std::exception&) {
            throw config_error(source_name + ": line " + std::to_string(line_no) + ": cannot parse '" + row + "'");
        }
    }
    try {
        return Dataset(std::move(times), std::move(values));
    } catch (const config_error& e) {
        throw config_error(source_name + ": " + e.what());
    }
}

inline Dataset read_dataset_file(const std::string& filename) {
    std::ifstream is(filename, std::ios::binary);
    if (!is) throw config_error("cannot open dataset: " + filename);
    return read_dataset(is, filename);
}

}  // namespace csv
}  // namespace homp

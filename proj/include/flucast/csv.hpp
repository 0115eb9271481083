#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "flucast/common.hpp"

namespace flucast {

// Shortest decimal representation that round-trips the exact double, so
// cached panels and submission files re-read bit-identically.
inline std::string format_double(double value) {
    char buf[32];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, result.ptr);
}

inline double parse_double(std::string_view text, const std::string& context) {
    double value = 0.0;
    const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
    if (result.ec != std::errc{} || result.ptr != text.data() + text.size())
        throw InvalidDataError(context + ": not a number: '" + std::string(text) + "'");
    return value;
}

inline std::int64_t parse_int(std::string_view text, const std::string& context) {
    std::int64_t value = 0;
    const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
    if (result.ec != std::errc{} || result.ptr != text.data() + text.size())
        throw InvalidDataError(context + ": not an integer: '" + std::string(text) + "'");
    return value;
}

// Comma-separated table with a mandatory header row. Fields are plain
// (no quoting); empty cells are empty strings. Line numbers are 1-based and
// kept per data row for error reporting.
struct CsvTable {
    std::string path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;

    int column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }

    int require_column(std::string_view name) const {
        const int index = column(name);
        if (index < 0)
            throw IoError(path + ": missing required column '" + std::string(name) + "'");
        return index;
    }

    std::string context(std::size_t row) const {
        return path + ":" + std::to_string(line_numbers[row]);
    }
};

namespace detail {

inline std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t begin = 0;
    while (true) {
        const std::size_t comma = line.find(',', begin);
        if (comma == std::string_view::npos) {
            fields.emplace_back(line.substr(begin));
            break;
        }
        fields.emplace_back(line.substr(begin, comma - begin));
        begin = comma + 1;
    }
    return fields;
}

}  // namespace detail

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    CsvTable table;
    table.path = path;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = detail::split_fields(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size())
            throw InvalidDataError(path + ":" + std::to_string(line_number) + ": expected " +
                                   std::to_string(table.header.size()) + " fields, found " +
                                   std::to_string(fields.size()));
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(line_number);
    }
    if (table.header.empty()) throw IoError(path + ": missing header row");
    return table;
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << header[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace flucast

#include "csv.hpp"

#include <zonemem/error.hpp>

#include <charconv>
#include <cmath>
#include <sstream>

namespace zonemem::csv {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string::size_type start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

}  // namespace

std::vector<Row> read(const std::string& text, std::string_view header, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != header) {
        throw FormatError(source + ": expected header \"" + std::string(header) + "\"");
    }
    const std::size_t columns = split(std::string(header)).size();
    std::vector<Row> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        Row row{lineno, split(line)};
        if (row.fields.size() != columns) {
            throw FormatError(source + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(columns) + " columns, got " +
                              std::to_string(row.fields.size()));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

double to_double(const std::string& field, const std::string& where) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(v)) {
        throw FormatError(where + ": \"" + field + "\" is not a finite number");
    }
    return v;
}

std::uint64_t to_uint(const std::string& field, const std::string& where) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
        throw FormatError(where + ": \"" + field + "\" is not a non-negative integer");
    }
    return v;
}

}  // namespace zonemem::csv

#pragma once

// Minimal numeric CSV helpers shared by the file formats of the library.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace zonemem::csv {

struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

/// Splits text into rows, checking the header line matches `header` exactly.
/// Blank lines are skipped. Throws FormatError naming `source`.
std::vector<Row> read(const std::string& text, std::string_view header, const std::string& source);

double to_double(const std::string& field, const std::string& where);
std::uint64_t to_uint(const std::string& field, const std::string& where);

}  // namespace zonemem::csv

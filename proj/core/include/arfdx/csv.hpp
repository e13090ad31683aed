#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace arfdx::csv {

// RFC 4180 field quoting: quote when the field holds a comma, quote, CR or LF.
std::string escape(std::string_view field);

std::string format_row(const std::vector<std::string>& fields);

// Shortest representation that round-trips through strtod.
std::string format_double(double v);

// Parses RFC 4180 records. Lines starting with '#' outside a quoted field are
// provenance comments and are skipped.
std::vector<std::vector<std::string>> parse(std::string_view text);

}  // namespace arfdx::csv

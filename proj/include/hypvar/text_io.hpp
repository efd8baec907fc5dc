#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hypvar {

/// Shortest round-trip decimal for a double ("%.17g"), "nan"/"inf" spelled out.
std::string format_real(double x);

struct ParsedValueFile {
    std::vector<double> values;
    std::vector<std::size_t> lines; // 1-based source line of each value
    std::optional<int> genus;
};

/*!
 * Line-oriented numeric file: one decimal per line. A comment line of the
 * form "# genus=G" sets the genus; other lines starting with '#' and blank
 * lines are skipped. Anything else that is not a finite decimal throws
 * ParseError.
 */
ParsedValueFile parse_value_file(std::istream& in, const std::string& origin);

} // namespace hypvar

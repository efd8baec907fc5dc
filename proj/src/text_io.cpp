#include "hypvar/text_io.hpp"

#include "hypvar/errors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>

namespace hypvar {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

} // namespace

std::string format_real(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

ParsedValueFile parse_value_file(std::istream& in, const std::string& origin) {
    ParsedValueFile out;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '#') {
            const std::string body = trim(line.substr(1));
            if (body.rfind("genus=", 0) == 0) {
                const std::string g = trim(body.substr(6));
                int genus = 0;
                const auto [ptr, ec] = std::from_chars(g.data(), g.data() + g.size(), genus);
                if (ec != std::errc{} || ptr != g.data() + g.size()) {
                    throw ParseError(origin + ":" + std::to_string(line_no) +
                                         ": malformed genus header '" + line + "'",
                                     line_no);
                }
                out.genus = genus;
            }
            continue;
        }
        double v = 0.0;
        const char* last = line.data() + line.size();
        const auto [ptr, ec] = std::from_chars(line.data(), last, v);
        if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
            throw ParseError(origin + ":" + std::to_string(line_no) + ": not a finite number '" +
                                 line + "'",
                             line_no);
        }
        out.values.push_back(v);
        out.lines.push_back(line_no);
    }
    return out;
}

} // namespace hypvar

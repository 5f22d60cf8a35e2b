#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "omnistereo/errors.hpp"

namespace omnistereo {

// Shortest decimal string that parses back to exactly the same double.
// Locale independent, so files round trip and reruns are byte identical.
inline std::string to_decimal_string(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

// Strict full-token parse. Throws ParseError mentioning context on failure.
inline double parse_double(std::string_view token, const std::string& context) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    // from_chars rejects leading '+' and surrounding spaces; allow a '+'.
    if (first != last && *first == '+') {
        ++first;
    }
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last || first == last) {
        throw ParseError(context + ": not a number: '" + std::string(token) + "'");
    }
    return value;
}

inline long parse_long(std::string_view token, const std::string& context) {
    long value = 0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (first != last && *first == '+') {
        ++first;
    }
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last || first == last) {
        throw ParseError(context + ": not an integer: '" + std::string(token) + "'");
    }
    return value;
}

// Splits one CSV record on commas; no quoting, fields are trimmed of spaces
// and a trailing carriage return.
inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
        size_t comma = line.find(',', start);
        std::string_view field = comma == std::string_view::npos
                                     ? line.substr(start)
                                     : line.substr(start, comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
            field.remove_prefix(1);
        }
        while (!field.empty() &&
               (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
            field.remove_suffix(1);
        }
        fields.emplace_back(field);
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return fields;
}

}  // namespace omnistereo

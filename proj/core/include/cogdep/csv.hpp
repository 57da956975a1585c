#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace cogdep::csv {

// Splits one CSV line. Double-quoted fields may contain commas and "" escapes;
// embedded newlines are not supported.
std::vector<std::string> split_line(std::string_view line);

// Line-oriented reader that tolerates CRLF endings and skips blank lines.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    bool next(std::vector<std::string>& fields);
    std::size_t line_number() const { return line_; }

private:
    std::istream& in_;
    std::string buffer_;
    std::size_t line_ = 0;
};

// Shortest round-trip representation of a double.
std::string format_double(double v);

std::string quote_if_needed(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

std::optional<std::int64_t> parse_int(std::string_view s);
std::optional<double> parse_double(std::string_view s);

std::string_view trim(std::string_view s);

}  // namespace cogdep::csv

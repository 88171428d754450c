#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace psmdid::csv {

// Minimal RFC-4180 reader: quoted fields, doubled quotes, CRLF tolerated.
// Blank lines are skipped.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    // Reads the next record; returns false at end of input.
    bool next(std::vector<std::string>& fields);

    // 1-based physical line number of the last record returned.
    std::size_t line() const { return line_; }

private:
    std::istream& in_;
    std::size_t line_ = 0;
    std::size_t next_line_ = 1;
};

std::vector<std::string> split_line(std::string_view line);

std::string escape(std::string_view field);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

// Fixed-point text with the given number of decimals.
std::string format_fixed(double v, int decimals);

// Parses a full field as a double; throws std::invalid_argument otherwise.
double parse_double(std::string_view text);

std::string trim(std::string_view s);

}  // namespace psmdid::csv

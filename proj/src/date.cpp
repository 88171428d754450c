#include "psmdid/date.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace psmdid {

namespace {

template <typename Int>
bool parse_field(std::string_view s, Int& out) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

Date Date::from_ymd(int y, unsigned m, unsigned d) {
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw std::invalid_argument("invalid calendar date");
    return Date{std::chrono::sys_days{ymd}};
}

Date Date::parse(std::string_view text) {
    // strip surrounding whitespace and quotes
    while (!text.empty() && (text.front() == ' ' || text.front() == '"')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '"' || text.back() == '\r'))
        text.remove_suffix(1);

    int y = 0;
    unsigned m = 0, d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !parse_field(text.substr(0, 4), y) ||
        !parse_field(text.substr(5, 2), m) || !parse_field(text.substr(8, 2), d)) {
        throw std::invalid_argument("malformed date '" + std::string(text) + "' (expected YYYY-MM-DD)");
    }
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw std::invalid_argument("malformed date '" + std::string(text) + "' (no such day)");
    return Date{std::chrono::sys_days{ymd}};
}

std::string Date::to_string() const {
    std::chrono::year_month_day ymd{sys_days()};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

}  // namespace psmdid

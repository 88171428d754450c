#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace psmdid {

// Calendar day at daily resolution, stored as days since 1970-01-01.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days d) : days_(d.time_since_epoch().count()) {}

    static Date from_ymd(int y, unsigned m, unsigned d);

    // Parses YYYY-MM-DD; throws std::invalid_argument on malformed input.
    static Date parse(std::string_view text);

    std::string to_string() const;
    std::chrono::sys_days sys_days() const { return std::chrono::sys_days{std::chrono::days{days_}}; }
    int serial() const { return days_; }

    Date plus_days(int n) const {
        Date out;
        out.days_ = days_ + n;
        return out;
    }
    friend int days_between(Date from, Date to) { return to.days_ - from.days_; }

    friend constexpr auto operator<=>(Date, Date) = default;

private:
    int days_ = 0;
};

}  // namespace psmdid

#include "psmdid/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <stdexcept>

namespace psmdid::csv {

bool Reader::next(std::vector<std::string>& fields) {
    fields.clear();
    std::string line;
    while (std::getline(in_, line)) {
        line_ = next_line_++;
        std::string record = line;
        // quoted fields may span lines
        auto open_quotes = [](const std::string& s) {
            std::size_t q = 0;
            for (char c : s)
                if (c == '"') ++q;
            return q % 2 == 1;
        };
        while (open_quotes(record) && std::getline(in_, line)) {
            ++next_line_;
            record += '\n';
            record += line;
        }
        if (!record.empty() && record.back() == '\r') record.pop_back();
        if (trim(record).empty()) continue;
        fields = split_line(record);
        return true;
    }
    return false;
}

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
    return std::string(buf, ptr);
}

std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s = buf;
    // avoid "-0.0000"
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

double parse_double(std::string_view text) {
    const std::string t = trim(text);
    if (t.empty()) throw std::invalid_argument("empty numeric field");
    double v = 0.0;
    const char* first = t.data();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw std::invalid_argument("not a number: '" + t + "'");
    return v;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace psmdid::csv

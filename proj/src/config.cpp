#include "psmdid/config.hpp"

#include <fstream>
#include <sstream>

#include "psmdid/csv.hpp"
#include "psmdid/panel.hpp"

namespace psmdid {

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    auto cfg = parse(buffer.str(), path.string());
    cfg.base_dir_ = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    return cfg;
}

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
    KeyValueConfig cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string trimmed = csv::trim(line);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw InputError(origin + ":" + std::to_string(number) + ": expected 'key = value'");
        const std::string key = csv::trim(trimmed.substr(0, eq));
        if (key.empty()) throw InputError(origin + ":" + std::to_string(number) + ": empty key");
        cfg.values_[key] = csv::trim(trimmed.substr(eq + 1));
    }
    return cfg;
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string KeyValueConfig::get_or(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double KeyValueConfig::number_or(const std::string& key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        return csv::parse_double(*v);
    } catch (const std::invalid_argument&) {
        throw InputError(origin_ + ": '" + key + "' must be numeric, got '" + *v + "'");
    }
}

long KeyValueConfig::integer_or(const std::string& key, long fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        const long out = std::stol(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument(*v);
        return out;
    } catch (const std::exception&) {
        throw InputError(origin_ + ": '" + key + "' must be an integer, got '" + *v + "'");
    }
}

bool KeyValueConfig::flag_or(const std::string& key, bool fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "yes" || *v == "1" || *v == "on") return true;
    if (*v == "false" || *v == "no" || *v == "0" || *v == "off") return false;
    throw InputError(origin_ + ": '" + key + "' must be true or false, got '" + *v + "'");
}

std::vector<std::string> KeyValueConfig::list(const std::string& key) const {
    std::vector<std::string> out;
    auto v = get(key);
    if (!v) return out;
    for (const auto& item : csv::split_line(*v)) {
        auto t = csv::trim(item);
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

std::optional<std::filesystem::path> KeyValueConfig::path(const std::string& key) const {
    auto v = get(key);
    if (!v || v->empty()) return std::nullopt;
    std::filesystem::path p(*v);
    if (p.is_relative()) p = base_dir_ / p;
    return p;
}

}  // namespace psmdid

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace psmdid {

// Plain-text "key = value" configuration. '#' starts a comment; keys are
// case-sensitive; a repeated key overrides the earlier value.
class KeyValueConfig {
public:
    static KeyValueConfig load(const std::filesystem::path& path);
    static KeyValueConfig parse(const std::string& text, const std::string& origin = "<config>");

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    std::optional<std::string> get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double number_or(const std::string& key, double fallback) const;
    long integer_or(const std::string& key, long fallback) const;
    bool flag_or(const std::string& key, bool fallback) const;
    // Comma-separated list; empty items dropped.
    std::vector<std::string> list(const std::string& key) const;

    // Resolves a path value relative to the directory of the config file.
    std::optional<std::filesystem::path> path(const std::string& key) const;

    const std::filesystem::path& base_dir() const { return base_dir_; }
    void set_base_dir(std::filesystem::path p) { base_dir_ = std::move(p); }

private:
    std::map<std::string, std::string> values_;
    std::string origin_;
    std::filesystem::path base_dir_ = ".";
};

}  // namespace psmdid

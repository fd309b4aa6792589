#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vedit {

/**
 * Flat dotted-key configuration, one `key = value` pair per line.
 *
 * `#` starts a comment (whole line or trailing). Keys are dotted paths like
 * `train.batch`; values stay raw strings until a typed getter pulls them.
 * CLI overrides reuse the same `key=value` syntax and simply replace the
 * stored value, so a sweep harness can patch any field programmatically.
 *
 * echo() serializes the resolved state in a stable order; every artifact
 * (checkpoint, report, dataset manifest) embeds that echo.
 */
class Config {
public:
    Config() = default;

    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    void set(const std::string& key, const std::string& value);
    // Parses "key=value" (as passed on the command line) and applies it.
    void apply_override(const std::string& assignment);

    bool has(const std::string& key) const;

    int64_t get_int(const std::string& key, int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    // Comma-separated numbers, e.g. "2,4,6,8". Missing key -> fallback.
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

    // Same getters but throwing ConfigError when the key is absent.
    int64_t require_int(const std::string& key) const;
    double require_double(const std::string& key) const;
    std::string require_string(const std::string& key) const;

    std::string echo() const;
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

private:
    const std::string* find(const std::string& key) const;
    // Insertion-ordered; later set() of an existing key updates in place.
    std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace vedit

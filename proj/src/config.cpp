#include "vedit/config.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "vedit/common.h"

namespace vedit {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " has no '='");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config: line " + std::to_string(lineno) + " has empty key");
        cfg.set(key, value);
    }
    return cfg;
}

void Config::set(const std::string& key, const std::string& value) {
    for (auto& e : entries_) {
        if (e.first == key) {
            e.second = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

void Config::apply_override(const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override '" + assignment + "' is not key=value");
    std::string key = trim(assignment.substr(0, eq));
    std::string value = trim(assignment.substr(eq + 1));
    if (key.empty()) throw ConfigError("override '" + assignment + "' has empty key");
    set(key, value);
}

const std::string* Config::find(const std::string& key) const {
    for (const auto& e : entries_)
        if (e.first == key) return &e.second;
    return nullptr;
}

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

int64_t Config::get_int(const std::string& key, int64_t fallback) const {
    const std::string* v = find(key);
    if (!v) return fallback;
    try {
        size_t pos = 0;
        int64_t r = std::stoll(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing");
        return r;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': '" + *v + "' is not an integer");
    }
}

double Config::get_double(const std::string& key, double fallback) const {
    const std::string* v = find(key);
    if (!v) return fallback;
    try {
        size_t pos = 0;
        double r = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing");
        return r;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': '" + *v + "' is not a number");
    }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const std::string* v = find(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    throw ConfigError("config key '" + key + "': '" + *v + "' is not a bool");
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const std::string* v = find(key);
    return v ? *v : fallback;
}

std::vector<double> Config::get_list(const std::string& key, const std::vector<double>& fallback) const {
    const std::string* v = find(key);
    if (!v) return fallback;
    std::vector<double> out;
    std::istringstream in(*v);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': '" + item + "' is not a number");
        }
    }
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
}

int64_t Config::require_int(const std::string& key) const {
    if (!has(key)) throw ConfigError("config: missing required key '" + key + "'");
    return get_int(key, 0);
}

double Config::require_double(const std::string& key) const {
    if (!has(key)) throw ConfigError("config: missing required key '" + key + "'");
    return get_double(key, 0.0);
}

std::string Config::require_string(const std::string& key) const {
    if (!has(key)) throw ConfigError("config: missing required key '" + key + "'");
    return get_string(key, "");
}

std::string Config::echo() const {
    // Sorted for a canonical echo independent of definition order.
    auto sorted = entries_;
    std::sort(sorted.begin(), sorted.end());
    std::string out;
    for (const auto& e : sorted) {
        out += e.first;
        out += " = ";
        out += e.second;
        out += '\n';
    }
    return out;
}

}  // namespace vedit

#include "stiffgrasp/config.hpp"

#include <cstdlib>
#include <sstream>

namespace stiffgrasp {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, ',')) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ValidationError("config key '" + key + "': not a number: '" + v + "'");
    return d;
}

}  // namespace

ConfigMap ConfigMap::parse_text(const std::string& text) {
    ConfigMap cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
        cfg.values_[key] = value;
    }
    return cfg;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
    return parse_text(read_file_text(path));
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
    touched_[key] = true;
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    touched_[key] = true;
    auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_double(key, it->second);
}

int ConfigMap::get_int(const std::string& key, int fallback) const {
    double d = get_double(key, static_cast<double>(fallback));
    int i = static_cast<int>(d);
    if (static_cast<double>(i) != d)
        throw ValidationError("config key '" + key + "': expected integer");
    return i;
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
    touched_[key] = true;
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ValidationError("config key '" + key + "': expected true/false");
}

std::vector<double> ConfigMap::get_doubles(const std::string& key,
                                           const std::vector<double>& fallback) const {
    touched_[key] = true;
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    for (const auto& tok : split_list(it->second)) out.push_back(parse_double(key, tok));
    return out;
}

std::vector<std::string> ConfigMap::get_strings(const std::string& key,
                                                const std::vector<std::string>& fallback) const {
    touched_[key] = true;
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return split_list(it->second);
}

void ConfigMap::assert_consumed() const {
    for (const auto& [key, value] : values_) {
        (void)value;
        if (!touched_.count(key))
            throw ValidationError("unknown config key: '" + key + "'");
    }
}

}  // namespace stiffgrasp

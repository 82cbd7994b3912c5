#pragma once

#include <map>
#include <string>
#include <vector>

#include "stiffgrasp/util.hpp"

namespace stiffgrasp {

// Flat key=value configuration. Keys use dotted paths ("sim.dt"), values are
// scalars or comma-separated lists. '#' starts a comment. Unknown keys are
// rejected by consumers via assert_consumed(), so typos fail loudly.
class ConfigMap {
public:
    ConfigMap() = default;

    static ConfigMap parse_text(const std::string& text);
    static ConfigMap parse_file(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<std::string> get_strings(const std::string& key, const std::vector<std::string>& fallback) const;

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    // Throws ValidationError naming the first key nobody consumed.
    void assert_consumed() const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    mutable std::map<std::string, bool> touched_;
};

}  // namespace stiffgrasp

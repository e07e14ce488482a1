#include "softtrack/config.hpp"

#include <cstdlib>
#include <fstream>

namespace softtrack {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                          (s.front() == '\'' && s.back() == '\''))) {
        return s.substr(1, s.size() - 2);
    }
    return s;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    Config cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError(path + ":" + std::to_string(lineno) + ": unterminated section");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = unquote(trim(line.substr(eq + 1)));
        if (section.empty() || key.empty()) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": key outside a section");
        }
        cfg.set(section, key, value);
    }
    return cfg;
}

void Config::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
        throw ConfigError("override must look like section.key=value: " + assignment);
    }
    set(trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
        unquote(trim(assignment.substr(eq + 1))));
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
    values_[section][key] = value;
}

bool Config::has(const std::string& section, const std::string& key) const {
    const auto s = values_.find(section);
    return s != values_.end() && s->second.count(key) > 0;
}

std::string Config::str(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
    const auto s = values_.find(section);
    if (s == values_.end()) return fallback;
    const auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
}

double Config::num(const std::string& section, const std::string& key, double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = str(section, key, "");
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') {
        throw ConfigError(section + "." + key + ": not a number: " + v);
    }
    return d;
}

long Config::integer(const std::string& section, const std::string& key, long fallback) const {
    return static_cast<long>(num(section, key, static_cast<double>(fallback)));
}

bool Config::boolean(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = str(section, key, "");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(section + "." + key + ": not a boolean: " + v);
}

}  // namespace softtrack

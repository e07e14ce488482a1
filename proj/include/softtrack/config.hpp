#pragma once
#include <map>
#include <string>

#include "softtrack/errors.hpp"

namespace softtrack {

// Layered key/value configuration: [section] headers, key = value lines,
// '#' comments, optional quotes around strings. CLI overrides use
// "section.key=value". Every key has a built-in default, so the file and
// all sections are optional.
class Config {
  public:
    Config() = default;

    static Config parse_file(const std::string& path);
    void apply_override(const std::string& assignment);  // "section.key=value"

    bool has(const std::string& section, const std::string& key) const;
    double num(const std::string& section, const std::string& key, double fallback) const;
    long integer(const std::string& section, const std::string& key, long fallback) const;
    bool boolean(const std::string& section, const std::string& key, bool fallback) const;
    std::string str(const std::string& section, const std::string& key,
                    const std::string& fallback) const;

  private:
    void set(const std::string& section, const std::string& key, const std::string& value);
    std::map<std::string, std::map<std::string, std::string>> values_;
};

}  // namespace softtrack

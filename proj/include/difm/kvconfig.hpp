#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "difm/common.hpp"

namespace difm {

// Flat key=value configuration with dotted section prefixes, e.g.
//   train.seed = 7
//   model.k = 64
// '#' starts a comment. Later assignments win, so flag overrides are plain
// set() calls on top of the parsed file.
class KvConfig {
  public:
    static KvConfig parse_file(const std::string& path);
    static KvConfig parse_text(const std::string& text, const std::string& origin = "<text>");

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    int64_t get_int(const std::string& key) const;
    int64_t get_int(const std::string& key, int64_t fallback) const;
    uint64_t get_uint(const std::string& key) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // sorted key=value lines, parseable by parse_text
    std::string serialize() const;

    const std::map<std::string, std::string>& values() const { return values_; }

  private:
    std::map<std::string, std::string> values_;
};

}  // namespace difm

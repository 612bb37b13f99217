// SPDX-License-Identifier: Apache-2.0
//
// Flat key=value configuration files.
//
//   # comment
//   optimizer = satr
//   pop_size  = 256
//
// Keys are single tokens; values are everything after '=' with surrounding
// whitespace trimmed.  No sections, no nesting, no quoting.

#ifndef SATR_CONFIG_HPP_
#define SATR_CONFIG_HPP_

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace satr {

class Config {
 public:
  Config() = default;

  static Config parse_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string s = strip(line);
      if (s.empty() || s[0] == '#') continue;
      auto eq = s.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": expected key = value, got '" + s + "'");
      std::string key = strip(s.substr(0, eq));
      std::string val = strip(s.substr(eq + 1));
      if (key.empty())
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": empty key");
      cfg.kv_[key] = val;
    }
    return cfg;
  }

  static Config parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_string(ss.str());
  }

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string get_str(const std::string& key, const std::string& dflt) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? dflt : it->second;
  }
  std::string require_str(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end())
      throw std::runtime_error("missing required config key: " + key);
    return it->second;
  }

  long get_int(const std::string& key, long dflt) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    return to_int(key, it->second);
  }
  double get_real(const std::string& key, double dflt) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    return to_real(key, it->second);
  }
  bool get_bool(const std::string& key, bool dflt) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return dflt;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::runtime_error("config key '" + key + "': bad boolean '" + v +
                             "'");
  }

  void set(const std::string& key, const std::string& val) { kv_[key] = val; }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    out.reserve(kv_.size());
    for (const auto& [k, v] : kv_) out.push_back(k);
    return out;
  }

  // Canonical dump: sorted keys, one per line.  Embedded into checkpoints so
  // that a checkpoint is self-describing.
  std::string to_string() const {
    std::string out;
    for (const auto& [k, v] : kv_) out += k + " = " + v + "\n";
    return out;
  }

 private:
  static std::string strip(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }
  static long to_int(const std::string& key, const std::string& v) {
    char* end = nullptr;
    long x = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
      throw std::runtime_error("config key '" + key + "': bad integer '" + v +
                               "'");
    return x;
  }
  static double to_real(const std::string& key, const std::string& v) {
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
      throw std::runtime_error("config key '" + key + "': bad real '" + v +
                               "'");
    return x;
  }

  std::map<std::string, std::string> kv_;  // sorted => canonical dump
};

}  // namespace satr

#endif  // SATR_CONFIG_HPP_

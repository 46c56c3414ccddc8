#pragma once
// key=value configuration files ('#' starts a comment, blank lines ignored).
// Values stay as strings until queried; typed getters parse on demand so a
// single store can hold rates, counts and names alike.

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace aan {

class ParamSet {
 public:
  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  double get(const std::string& key, double fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    return parse_double(it->first, it->second);
  }

  long long get_int(const std::string& key, long long fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(it->second, &pos);
    } catch (const std::exception&) {
      throw std::runtime_error("config: bad integer for " + key + ": " + it->second);
    }
    if (pos != it->second.size())
      throw std::runtime_error("config: bad integer for " + key + ": " + it->second);
    return v;
  }

  std::string get_str(const std::string& key, const std::string& fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }

  // "key=value" (whitespace around either side tolerated).
  void set_line(const std::string& line) {
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: expected key=value, got: " + line);
    std::string k = trim(line.substr(0, eq));
    std::string v = trim(line.substr(eq + 1));
    if (k.empty()) throw std::runtime_error("config: empty key in: " + line);
    set(k, v);
  }

  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::string line;
    while (std::getline(in, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      set_line(line);
    }
  }

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  static std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }

  static double parse_double(const std::string& key, const std::string& raw) {
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(raw, &pos);
    } catch (const std::exception&) {
      throw std::runtime_error("config: bad number for " + key + ": " + raw);
    }
    if (pos != raw.size())
      throw std::runtime_error("config: bad number for " + key + ": " + raw);
    return v;
  }

  std::map<std::string, std::string> kv_;
};

}  // namespace aan

#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace pns::config {

/// Flat key-value configuration, a TOML-compatible subset:
///   key = value          # comment
/// Values are numbers, booleans, or (optionally quoted) strings. Keys may be
/// dotted (solver.dt). No sections, no arrays.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  const std::map<std::string, std::string>& raw() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace pns::config

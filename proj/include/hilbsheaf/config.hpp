#pragma once

// Flat key-value text files: one `key = value` per line, `#` starts a
// comment, blank lines ignored. Keys are unique.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hilbsheaf {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class KeyValueFile {
 public:
  static KeyValueFile parse(std::istream& is);
  static KeyValueFile load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& raw(const std::string& key) const;
  void set(const std::string& key, std::string value) { entries_[key] = std::move(value); }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<long long> get_ints(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace hilbsheaf

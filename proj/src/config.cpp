#include "hilbsheaf/config.hpp"

#include <fstream>
#include <sstream>

namespace hilbsheaf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_scalar(const std::string& key, const std::string& text) {
  std::istringstream is(text);
  T value{};
  if (!(is >> value)) throw ConfigError("config: cannot parse value of '" + key + "': " + text);
  std::string rest;
  if (is >> rest) throw ConfigError("config: trailing characters in '" + key + "': " + text);
  return value;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::string normalized = text;
  for (char& c : normalized)
    if (c == ',') c = ' ';
  std::istringstream is(normalized);
  std::vector<T> out;
  std::string tok;
  while (is >> tok) out.push_back(parse_scalar<T>(key, tok));
  return out;
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::istream& is) {
  KeyValueFile kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (!kv.entries_.emplace(key, value).second)
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  return parse(in);
}

const std::string& KeyValueFile::raw(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("config: missing key '" + key + "'");
  return it->second;
}

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? raw(key) : fallback;
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  return has(key) ? parse_scalar<double>(key, raw(key)) : fallback;
}

long long KeyValueFile::get_int(const std::string& key, long long fallback) const {
  return has(key) ? parse_scalar<long long>(key, raw(key)) : fallback;
}

std::uint64_t KeyValueFile::get_u64(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? parse_scalar<std::uint64_t>(key, raw(key)) : fallback;
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = raw(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: '" + key + "' is not a boolean: " + v);
}

std::vector<double> KeyValueFile::get_doubles(const std::string& key) const {
  return parse_list<double>(key, raw(key));
}

std::vector<long long> KeyValueFile::get_ints(const std::string& key) const {
  return parse_list<long long>(key, raw(key));
}

}  // namespace hilbsheaf

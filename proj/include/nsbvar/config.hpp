#pragma once

// Flat key-value configuration.
//
// Grammar (one entry per line):
//
//   line    := blank | comment | entry
//   comment := '#' any*
//   entry   := key ws* '=' ws* value
//   key     := [A-Za-z0-9_.-]+
//   value   := any* (trailing whitespace and a trailing '# comment' are stripped)
//
// Later entries override earlier ones. Keys are case-sensitive. Lists are
// comma-separated values.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nsbvar {

class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(const std::string& text, const std::string& origin = "<string>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }

  // Throws SchemaError when the key is absent.
  const std::string& require(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<int> get_ints(const std::string& key, const std::vector<int>& fallback) const;
  std::vector<std::string> get_strings(const std::string& key,
                                       const std::vector<std::string>& fallback) const;

  // All entries whose key starts with `prefix`, with the prefix removed.
  std::map<std::string, std::string> with_prefix(const std::string& prefix) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

  // Sorted `key = value` lines; parse(serialize()) reproduces the entries.
  std::string serialize() const;
  // FNV-1a 64-bit hash of serialize(), as 16 hex digits.
  std::string hash() const;

 private:
  std::map<std::string, std::string> entries_;
};

std::vector<std::string> split_list(const std::string& value, char sep = ',');
std::string trim(const std::string& s);
double parse_double(const std::string& s, const std::string& context);
long long parse_int(const std::string& s, const std::string& context);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace nsbvar

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace nbtv {

/// Flat "key = value" configuration. '#' starts a comment; blank lines are
/// ignored; list values are comma-separated. Later assignments (and set())
/// override earlier ones.
class Config {
 public:
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  /// Parses an override of the form "key=value".
  void set_assignment(std::string_view assignment);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::string> get_strings(const std::string& key,
                                       const std::vector<std::string>& fallback) const;

  /// Throws ConfigError naming the first key not in `known`.
  void require_known(const std::set<std::string>& known) const;

 private:
  std::map<std::string, std::string> entries_;
};

/// Shortest round-trip text for a double; used for canonical config text.
std::string format_double(double v);
std::string format_doubles(const std::vector<double>& v);

/// 64-bit FNV-1a of `text` as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

}  // namespace nbtv

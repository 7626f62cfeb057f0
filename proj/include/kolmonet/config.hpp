#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace kolmonet {

// Flat `key = value` configuration. One assignment per line; `#` starts a
// comment; keys are identifiers; values are taken verbatim after trimming
// (lists are comma-separated numbers, strings are unquoted). Typed access
// converts on demand and reports the offending key with its source line.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::filesystem::path& path);
  static Config from_stream(std::istream& is, std::string source);

  // Command-line style override; replaces any earlier value.
  void set(const std::string& key, std::string value);

  bool has(const std::string& key) const;
  std::vector<std::string> keys() const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_real(const std::string& key) const;
  double get_real(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& key) const;
  std::vector<double> get_list(const std::string& key,
                               std::vector<double> fallback) const;

 private:
  struct Entry {
    std::string value;
    int line = 0;  // 0 for programmatic overrides
  };

  [[noreturn]] void fail(const std::string& key, const std::string& why) const;
  const Entry& require(const std::string& key) const;

  std::map<std::string, Entry> entries_;
  std::string source_ = "<config>";
};

}  // namespace kolmonet

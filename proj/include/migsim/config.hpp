// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "migsim/time.hpp"

namespace migsim {

/// Raised on any malformed or out-of-range configuration value. The message
/// always starts with the dotted field path ("cost.bootstrap_s: ...").
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Minimal INI-style config: `[section]` headers, `key = value` lines, `#`
/// comments. Keys may repeat within a section (used for event lists); order is
/// preserved.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;

  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  Decimal get_decimal(const std::string& section, const std::string& key,
                      const Decimal& fallback) const;
  /// Exact decimal seconds -> nanoseconds.
  Nanos get_seconds_ns(const std::string& section, const std::string& key,
                       Nanos fallback) const;

  /// All values for a repeatable key, in file order.
  std::vector<std::string> get_all(const std::string& section, const std::string& key) const;

  /// Every (key, value) pair of a section, in file order.
  std::vector<std::pair<std::string, std::string>> section_entries(
      const std::string& section) const;

  void set(const std::string& section, const std::string& key, const std::string& value);

  /// Sections present, sorted.
  std::vector<std::string> sections() const;

 private:
  struct Entry {
    std::string key;
    std::string value;
  };
  std::map<std::string, std::vector<Entry>> sections_;

  [[noreturn]] static void fail(const std::string& section, const std::string& key,
                                const std::string& what);
};

/// "key=a foo=b" attribute lists used inside event values.
std::map<std::string, std::string> parse_kv_attrs(const std::string& text,
                                                  const std::string& field_path);

}  // namespace migsim

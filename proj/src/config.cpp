// SPDX-License-Identifier: Apache-2.0
#include "migsim/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace migsim {

namespace {

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

void Config::fail(const std::string& section, const std::string& key, const std::string& what) {
  throw ConfigError(section + "." + key + ": " + what);
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
      cfg.sections_[section];
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (section.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": key outside any [section]");
    cfg.sections_[section].push_back({key, value});
  }
  return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  if (it == sections_.end()) return false;
  return std::any_of(it->second.begin(), it->second.end(),
                     [&](const Entry& e) { return e.key == key; });
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  if (it != sections_.end()) {
    for (auto rit = it->second.rbegin(); rit != it->second.rend(); ++rit)
      if (rit->key == key) return rit->value;
  }
  fail(section, key, "required key missing");
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  if (!has(section, key)) return fallback;
  return get_string(section, key);
}

std::int64_t Config::get_int(const std::string& section, const std::string& key,
                             std::int64_t fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get_string(section, key);
  try {
    size_t pos = 0;
    std::int64_t out = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    fail(section, key, "expected integer, got '" + v + "'");
  }
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get_string(section, key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(section, key, "expected boolean, got '" + v + "'");
}

Decimal Config::get_decimal(const std::string& section, const std::string& key,
                            const Decimal& fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get_string(section, key);
  try {
    return parse_decimal(v);
  } catch (const std::exception& e) {
    fail(section, key, e.what());
  }
}

Nanos Config::get_seconds_ns(const std::string& section, const std::string& key,
                             Nanos fallback) const {
  if (!has(section, key)) return fallback;
  return decimal_seconds_to_ns(get_decimal(section, key, Decimal{}));
}

std::vector<std::string> Config::get_all(const std::string& section,
                                         const std::string& key) const {
  std::vector<std::string> out;
  auto it = sections_.find(section);
  if (it == sections_.end()) return out;
  for (const Entry& e : it->second)
    if (e.key == key) out.push_back(e.value);
  return out;
}

std::vector<std::pair<std::string, std::string>> Config::section_entries(
    const std::string& section) const {
  std::vector<std::pair<std::string, std::string>> out;
  auto it = sections_.find(section);
  if (it == sections_.end()) return out;
  for (const Entry& e : it->second) out.emplace_back(e.key, e.value);
  return out;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  sections_[section].push_back({key, value});
}

std::vector<std::string> Config::sections() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : sections_) out.push_back(name);
  return out;
}

std::map<std::string, std::string> parse_kv_attrs(const std::string& text,
                                                  const std::string& field_path) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError(field_path + ": expected attr=value, got '" + token + "'");
    out[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return out;
}

}  // namespace migsim

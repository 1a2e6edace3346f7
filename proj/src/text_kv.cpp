/* Copyright 2026 The PoseWarp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "posewarp/text_kv.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

#include "posewarp/error.hpp"

namespace posewarp {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_inline_kv(const std::string& text, char sep) {
  std::vector<std::pair<std::string, std::string>> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, sep)) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError(trim(item), "expected key=value, got '" + item + "'");
    out.emplace_back(trim(item.substr(0, eq)), trim(item.substr(eq + 1)));
  }
  return out;
}

std::map<std::string, std::string> parse_kv_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(t, "expected key=value line, got '" + t + "'");
    out[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return out;
}

int parse_int(const std::string& key, const std::string& value) {
  const long long v = parse_int64(key, value);
  if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(key, "value out of range for '" + key + "': " + value);
  return static_cast<int>(v);
}

long long parse_int64(const std::string& key, const std::string& value) {
  const std::string t = trim(value);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(key, "invalid integer for '" + key + "': '" + value + "'");
  }
  return v;
}

double parse_double(const std::string& key, const std::string& value) {
  const std::string t = trim(value);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(key, "invalid number for '" + key + "': '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string t = trim(value);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw ConfigError(key, "invalid boolean for '" + key + "': '" + value + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value, char sep) {
  std::vector<int> out;
  if (trim(value).empty()) return out;
  for (const auto& item : split(value, sep)) out.push_back(parse_int(key, item));
  return out;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value, char sep) {
  std::vector<double> out;
  if (trim(value).empty()) return out;
  for (const auto& item : split(value, sep)) out.push_back(parse_double(key, item));
  return out;
}

std::string join_ints(const std::vector<int>& values, char sep) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(values[i]);
  }
  return s;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::string join_doubles(const std::vector<double>& values, char sep) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += sep;
    s += format_double(values[i]);
  }
  return s;
}

}  // namespace posewarp

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

#ifndef POSEWARP_TEXT_KV_HPP_
#define POSEWARP_TEXT_KV_HPP_

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace posewarp {

/// "a=1,b=2" -> ordered (key, value) pairs.
std::vector<std::pair<std::string, std::string>> parse_inline_kv(const std::string& text, char sep = ',');

/// key=value lines; blank lines and lines starting with '#' are skipped.
std::map<std::string, std::string> parse_kv_text(const std::string& text);

/// Numeric conversions that throw ConfigError naming `key` on bad input.
int parse_int(const std::string& key, const std::string& value);
long long parse_int64(const std::string& key, const std::string& value);
double parse_double(const std::string& key, const std::string& value);
bool parse_bool(const std::string& key, const std::string& value);
std::vector<int> parse_int_list(const std::string& key, const std::string& value, char sep = ',');
std::vector<double> parse_double_list(const std::string& key, const std::string& value, char sep = ',');

std::string join_ints(const std::vector<int>& values, char sep = ',');
std::string join_doubles(const std::vector<double>& values, char sep = ',');

/// Shortest decimal text that round-trips the double exactly.
std::string format_double(double v);

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

}  // namespace posewarp

#endif  // POSEWARP_TEXT_KV_HPP_

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

#ifndef POSEWARP_ERROR_HPP_
#define POSEWARP_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <utility>

namespace posewarp {

/// Raised when a caller violates an operation's preconditions (shape
/// mismatches, invalid configuration, stale caches).
class ContractError : public std::invalid_argument {
 public:
  explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

/// Invalid configuration value; carries the offending key.
class ConfigError : public ContractError {
 public:
  ConfigError(std::string key, const std::string& what) : ContractError(what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Raised on malformed files (checkpoints, datasets, images).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when optimisation hits a non-finite value.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

#define POSEWARP_REQUIRE(cond, msg)                        \
  do {                                                     \
    if (!(cond)) throw ::posewarp::ContractError(msg);     \
  } while (0)

}  // namespace posewarp

#endif  // POSEWARP_ERROR_HPP_

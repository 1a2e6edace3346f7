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

#ifndef POSEWARP_CLI_HPP_
#define POSEWARP_CLI_HPP_

#include <iosfwd>

namespace posewarp {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,  ///< a check failed or an unexpected error occurred
  kExitUsage = 2,    ///< unknown subcommand or flag
  kExitConfig = 3,   ///< invalid configuration value; the key is reported
  kExitIo = 4,       ///< unreadable or malformed input file
};

/// Runs one subcommand. Errors are reported on `err` as a single line
/// "posewarp: error kind=<kind> key=<key>: <message>".
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace posewarp

#endif  // POSEWARP_CLI_HPP_

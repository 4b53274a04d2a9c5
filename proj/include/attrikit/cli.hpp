/*
 * Copyright 2026 The attrikit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ATTRIKIT_CLI_HPP_
#define ATTRIKIT_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace attrikit {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // computation error or failed check
inline constexpr int kExitUsage = 2;

// Entry point behind the `attrikit` binary. args[0] is the program name.
// Machine-readable results go to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace attrikit

#endif  // ATTRIKIT_CLI_HPP_

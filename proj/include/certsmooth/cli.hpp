/* Copyright 2026 The certsmooth Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/


#ifndef CERTSMOOTH_CLI_HPP_
#define CERTSMOOTH_CLI_HPP_

#include <cstdint>
#include <optional>
#include <ostream>

namespace certsmooth {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `certsmooth` tool. Subcommands: certify,
/// optimize-sigma, train-demo, report. Returns 0 on success, 2 on usage
/// errors and 1 on runtime failures.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Seed precedence: explicit flag, then CERTSMOOTH_SEED, then 0. Throws
/// std::invalid_argument when the variable is not an unsigned integer.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag);

}  // namespace certsmooth

#endif  // CERTSMOOTH_CLI_HPP_

// Copyright 2026 The HPL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HPL_CLI_COMMANDS_HPP
#define HPL_CLI_COMMANDS_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "hpl/retrieval.hpp"

namespace hpl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Entry point for `hpl <command> [flags]`. Data lines go to `out`, lines
/// starting with '#' there are human-readable; diagnostics go to `err`.
/// Returns 0 on success, 2 on usage errors, 1 on runtime errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "metrics<TAB>queries=N<TAB>recall@K=...<TAB>rp=...<TAB>map@r=...".
std::string format_report_line(const RetrievalReport& report);

/// '#'-prefixed table of the same report.
std::string format_report_table(const RetrievalReport& report);

}  // namespace hpl::cli

#endif  // HPL_CLI_COMMANDS_HPP

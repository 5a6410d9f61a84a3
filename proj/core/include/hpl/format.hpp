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

#ifndef HPL_FORMAT_HPP
#define HPL_FORMAT_HPP

#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace hpl {

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

/// Strict full-string parses; throw ContractError naming `what` on failure.
double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

/// "a,b,c" <-> list. An empty string is an empty list.
std::vector<double> parse_double_list(std::string_view text, std::string_view what);
std::vector<long long> parse_int_list(std::string_view text, std::string_view what);

template <typename T>
std::string join(std::span<const T> values, std::string_view sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += sep;
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

}  // namespace hpl

#endif  // HPL_FORMAT_HPP

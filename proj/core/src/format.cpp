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

#include "hpl/format.hpp"

#include <charconv>
#include <cmath>

#include "hpl/errors.hpp"

namespace hpl {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

namespace {

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  std::string_view body = text;
  if (!body.empty() && body.front() == '+') body.remove_prefix(1);
  T value{};
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (body.empty() || ec != std::errc() || ptr != body.data() + body.size()) {
    throw ContractError("invalid " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(std::string_view text, std::string_view what) {
  std::vector<T> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(',', start);
    out.push_back(parse_number<T>(text.substr(start, pos == std::string_view::npos ? pos : pos - start), what));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

double parse_double(std::string_view text, std::string_view what) {
  return parse_number<double>(text, what);
}

long long parse_int(std::string_view text, std::string_view what) {
  return parse_number<long long>(text, what);
}

std::vector<double> parse_double_list(std::string_view text, std::string_view what) {
  return parse_list<double>(text, what);
}

std::vector<long long> parse_int_list(std::string_view text, std::string_view what) {
  return parse_list<long long>(text, what);
}

}  // namespace hpl

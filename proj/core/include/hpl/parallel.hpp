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

#ifndef HPL_PARALLEL_HPP
#define HPL_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace hpl {

/// Caps worker threads used by parallel_for; 0 means hardware concurrency.
void set_max_threads(std::size_t n) noexcept;
std::size_t max_threads() noexcept;

/// Calls body(i) for every i in [0, n), splitting the range into contiguous
/// chunks across workers. Callers write results by index, so the outcome is
/// independent of the thread count. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hpl

#endif  // HPL_PARALLEL_HPP

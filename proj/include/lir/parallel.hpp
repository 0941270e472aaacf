// Copyright 2026 The LIR Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>

namespace lir {

/// Number of worker threads used by batch operations. 1 runs inline;
/// 0 means "all hardware threads".
struct Parallelism {
  unsigned threads = 1;

  unsigned resolved() const;
};

/// Runs body(i) for every i in [0, n). Work is split into contiguous chunks;
/// each index is visited exactly once. Callers write results into
/// index-addressed slots so output never depends on scheduling.
void parallel_for(std::size_t n, Parallelism par, const std::function<void(std::size_t)>& body);

}  // namespace lir

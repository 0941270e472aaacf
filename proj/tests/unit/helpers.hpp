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

#include <cstdint>
#include <vector>

#include "doctest.h"
#include "lir/error.hpp"
#include "lir/linalg.hpp"
#include "lir/rng.hpp"

namespace lir::testing {

/// Error code thrown by fn, failing the test when nothing is thrown.
template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected lir::Error");
  return ErrorCode::kIoError;
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Xoshiro256& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& x : m.data()) x = scale * rng.gaussian();
  return m;
}

inline std::vector<double> random_vector(std::size_t n, Xoshiro256& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.gaussian();
  return v;
}

}  // namespace lir::testing

//
// Copyright 2026 The HTL Toolkit Authors
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
//

#ifndef HTL_TESTS_TEST_UTIL_H_
#define HTL_TESTS_TEST_UTIL_H_

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include <gtest/gtest.h>

#include "htl/dataset.h"
#include "htl/error.h"
#include "htl/random.h"

namespace htl::testing {

// Runs fn and returns the HtlError code it throws; fails if nothing is thrown.
template <typename F>
ErrorCode CaptureCode(F&& fn, std::string* message = nullptr) {
  try {
    fn();
  } catch (const HtlError& e) {
    if (message) *message = e.what();
    return e.code();
  }
  ADD_FAILURE() << "expected an HtlError";
  return ErrorCode::kInvalidArgument;
}

inline Dataset MakeDataset(const Matrix& x, const Vector& y, DomainTag tag = DomainTag::kTarget) {
  return Dataset(x, y, tag);
}

inline Dataset Line1d(std::initializer_list<double> xs, std::initializer_list<double> ys,
                      DomainTag tag = DomainTag::kTarget) {
  Matrix x(static_cast<Index>(xs.size()), 1);
  Vector y(static_cast<Index>(ys.size()));
  Index i = 0;
  for (double v : xs) x(i++, 0) = v;
  i = 0;
  for (double v : ys) y(i++) = v;
  return Dataset(x, y, tag);
}

inline Dataset RandomDataset(Rng& rng, Index n, Index d, DomainTag tag = DomainTag::kTarget) {
  Matrix x(n, d);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) x(i, j) = rng.Uniform();
    y(i) = rng.Uniform(-1.0, 1.0);
  }
  return Dataset(x, y, tag);
}

inline Vector Point(double v) { return Vector::Constant(1, v); }

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path ScratchDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("htl_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

}  // namespace htl::testing

#endif  // HTL_TESTS_TEST_UTIL_H_

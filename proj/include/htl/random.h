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

#ifndef HTL_RANDOM_H_
#define HTL_RANDOM_H_

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace htl {

// Deterministic random source used by every randomized operation.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The standard distributions are implementation-defined, so the
// conversions below are written out explicitly:
//   Uniform()  = (next() >> 11) * 2^-53, a double in [0, 1)
//   Normal()   = Box-Muller on two uniforms, second variate cached
//   Below(m)   = rejection sampling on the top of the 64-bit range
// A given seed therefore reproduces the same stream bit-for-bit on a given
// platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }
  double Uniform();
  double Uniform(double low, double high);
  double Normal();
  double Normal(double mean, double stddev) { return mean + stddev * Normal(); }
  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t Below(std::uint64_t bound);
  // Fisher-Yates permutation of 0..n-1.
  std::vector<Eigen::Index> Permutation(Eigen::Index n);

 private:
  std::mt19937_64 engine_;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

// SplitMix64 finalizer over (seed, stream); gives independent sub-seeds for
// the source, target, validation, test and cross-validation streams of a run.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t stream);

}  // namespace htl

#endif  // HTL_RANDOM_H_

// Copyright 2026 The ExtEd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EXTED_RNG_HPP_
#define EXTED_RNG_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "exted/matrix.hpp"

namespace exted {

// Single-owner deterministic generator.
//
// Backed by std::mt19937_64, whose output sequence is fixed by the C++
// standard. Uniform reals take the top 53 bits of one 64-bit draw; no
// std::*_distribution is used because those are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1).
  double uniform();
  // Uniform integer on [0, n). n must be > 0.
  std::size_t below(std::size_t n);

  // Full engine state as text (the standard stream format of mt19937_64).
  std::string serialize() const;
  static Rng deserialize(std::uint64_t seed, const std::string& state);

  friend bool operator==(const Rng& a, const Rng& b) {
    return a.seed_ == b.seed_ && a.engine_ == b.engine_;
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// Uniform on [-sqrt(6/(rows+cols)), +sqrt(6/(rows+cols))], filled row-major.
Matrix glorot_init(Rng& rng, std::size_t rows, std::size_t cols);

// One N(mu, sigma^2) draw by Box-Muller: u1, u2 uniform with u1 in (0, 1],
// z = sqrt(-2 ln u1) * cos(2 pi u2). Always consumes exactly two uniforms,
// even when sigma == 0 (which returns mu exactly).
double gaussian_sample(Rng& rng, double mu, double sigma);

// In-place Fisher-Yates shuffle driven by `rng`.
template <typename T>
void shuffle_in_place(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = rng.below(i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace exted

#endif  // EXTED_RNG_HPP_

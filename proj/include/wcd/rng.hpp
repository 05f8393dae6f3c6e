/*
 * Copyright 2026 TransWCD-CPP Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef WCD_RNG_HPP_
#define WCD_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace wcd {

/// Deterministic random source. All distributions are implemented by hand on
/// top of the raw mt19937_64 output so results are identical across standard
/// library implementations (std::uniform_real_distribution etc. are not
/// portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi], inclusive. Unbiased via rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller. The second deviate of each pair is
  /// cached, so draws always consume the underlying stream in a fixed order.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Normal(mean, stddev) resampled until within `cut` standard deviations.
  double truncated_normal(double mean, double stddev, double cut = 2.0);

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// splitmix64 finalizer, used to combine seeds and tags.
std::uint64_t mix64(std::uint64_t x);

/// FNV-1a hash of a purpose tag.
std::uint64_t hash_tag(std::string_view tag);

/// Derive an independent substream from a master seed, a purpose tag and up
/// to two indices. Streams for different (purpose, i, j) never share state,
/// so consumers can be reordered or skipped without disturbing each other.
Rng derive_rng(std::uint64_t master, std::string_view purpose, std::uint64_t i = 0,
               std::uint64_t j = 0);

}  // namespace wcd

#endif  // WCD_RNG_HPP_

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

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "wcd/rng.hpp"

using wcd::Rng;

TEST_CASE("identical seeds give identical streams") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform stays in [0,1) and fills the range") {
  Rng r(7);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("uniform_int covers the closed range uniformly enough") {
  Rng r(99);
  std::vector<int> counts(6, 0);
  for (int i = 0; i < 60000; ++i) {
    auto v = r.uniform_int(10, 15);
    REQUIRE(v >= 10);
    REQUIRE(v <= 15);
    counts[static_cast<std::size_t>(v - 10)]++;
  }
  for (int c : counts) {
    CHECK(c > 9000);  // expectation 10000
    CHECK(c < 11000);
  }
  CHECK(r.uniform_int(3, 3) == 3);
  CHECK_THROWS(r.uniform_int(5, 4));
}

TEST_CASE("bernoulli matches its probability") {
  Rng r(5);
  int hits = 0;
  for (int i = 0; i < 40000; ++i) hits += r.bernoulli(0.3) ? 1 : 0;
  CHECK(hits > 11400);
  CHECK(hits < 12600);
  Rng z(5);
  for (int i = 0; i < 100; ++i) CHECK_FALSE(z.bernoulli(0.0));
}

TEST_CASE("normal has roughly standard moments") {
  Rng r(21);
  double sum = 0.0, sq = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    double x = r.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("truncated_normal respects the cut") {
  Rng r(33);
  for (int i = 0; i < 10000; ++i) {
    double x = r.truncated_normal(1.0, 0.5, 2.0);
    CHECK(x >= 1.0 - 2.0 * 0.5);
    CHECK(x <= 1.0 + 2.0 * 0.5);
  }
}

TEST_CASE("shuffle is a permutation and is seed-deterministic") {
  std::vector<int> v(50), w(50);
  for (int i = 0; i < 50; ++i) v[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)] = i;
  Rng a(4), b(4);
  a.shuffle(v);
  b.shuffle(w);
  CHECK(v == w);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("derived substreams are independent of sibling consumption") {
  // Reading more from one derived stream must not shift another.
  wcd::Rng a1 = wcd::derive_rng(7, "augment", 3, 0);
  (void)a1.next_u64();
  (void)a1.next_u64();
  wcd::Rng b1 = wcd::derive_rng(7, "shuffle", 0);
  const auto first = b1.next_u64();

  wcd::Rng b2 = wcd::derive_rng(7, "shuffle", 0);
  CHECK(b2.next_u64() == first);

  // Different tags and indices give different streams.
  CHECK(wcd::derive_rng(7, "augment", 0).next_u64() != wcd::derive_rng(7, "dropout", 0).next_u64());
  CHECK(wcd::derive_rng(7, "augment", 1).next_u64() != wcd::derive_rng(7, "augment", 2).next_u64());
  CHECK(wcd::derive_rng(7, "augment", 0, 1).next_u64() !=
        wcd::derive_rng(7, "augment", 1, 0).next_u64());
  CHECK(wcd::derive_rng(7, "augment", 0).next_u64() != wcd::derive_rng(8, "augment", 0).next_u64());
}

TEST_CASE("mix64 and hash_tag are stable injective-ish mixers") {
  CHECK(wcd::mix64(1) != wcd::mix64(2));
  CHECK(wcd::hash_tag("a") != wcd::hash_tag("b"));
  CHECK(wcd::hash_tag("augment") == wcd::hash_tag("augment"));
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(wcd::mix64(i));
  CHECK(seen.size() == 1000);
}

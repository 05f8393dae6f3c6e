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
#include <sstream>
#include <vector>

#include "doctest.h"
#include "wcd/errors.hpp"
#include "wcd/metrics.hpp"
#include "wcd/rng.hpp"

using namespace wcd;

namespace {

Tensor random_mask(i64 h, i64 w, Rng& rng, double p_on) {
  Tensor t = Tensor::zeros({h, w});
  for (i64 i = 0; i < t.numel(); ++i) t[i] = rng.bernoulli(p_on) ? 1.0 : 0.0;
  return t;
}

/// Naive per-pixel loop, the oracle for the accumulator.
ConfusionCounts naive_counts(const Tensor& pred, const Tensor& gt) {
  ConfusionCounts c;
  for (i64 i = 0; i < pred.numel(); ++i) {
    const bool p = pred[i] > 0.5, g = gt[i] > 0.5;
    if (p && g) ++c.tp;
    if (p && !g) ++c.fp;
    if (!p && g) ++c.fn;
    if (!p && !g) ++c.tn;
  }
  return c;
}

}  // namespace

TEST_CASE("frozen worked example") {
  // pred 1,1,0,0 vs gt 1,0,0,0 on a 2x2 map: tp=1 fp=1 fn=0 tn=2.
  Tensor pred = Tensor::from({2, 2}, {1.0, 1.0, 0.0, 0.0});
  Tensor gt = Tensor::from({2, 2}, {1.0, 0.0, 0.0, 0.0});
  ConfusionCounts c;
  c.accumulate(pred, gt);
  CHECK(c.tp == 1);
  CHECK(c.fp == 1);
  CHECK(c.fn == 0);
  CHECK(c.tn == 2);
  MetricsReport r = finalize(c);
  CHECK(r.precision == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r.recall == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(r.oa == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(r.iou == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("matches the naive loop on 100 random pairs") {
  Rng rng(42);
  ConfusionCounts total_fast, total_naive;
  for (int k = 0; k < 100; ++k) {
    Tensor pred = random_mask(16, 16, rng, 0.3);
    Tensor gt = random_mask(16, 16, rng, 0.25);
    ConfusionCounts fast;
    fast.accumulate(pred, gt);
    ConfusionCounts naive = naive_counts(pred, gt);
    CHECK(fast.tp == naive.tp);
    CHECK(fast.fp == naive.fp);
    CHECK(fast.fn == naive.fn);
    CHECK(fast.tn == naive.tn);
    total_fast.add(fast);
    total_naive.add(naive);
  }
  CHECK(total_fast.total() == 100 * 16 * 16);
  MetricsReport a = finalize(total_fast), b = finalize(total_naive);
  CHECK(a.precision == doctest::Approx(b.precision).epsilon(1e-12));
  CHECK(a.recall == doctest::Approx(b.recall).epsilon(1e-12));
  CHECK(a.f1 == doctest::Approx(b.f1).epsilon(1e-12));
  CHECK(a.oa == doctest::Approx(b.oa).epsilon(1e-12));
  CHECK(a.iou == doctest::Approx(b.iou).epsilon(1e-12));
}

TEST_CASE("zero-denominator conventions") {
  // All-negative prediction on all-negative gt: perfect agreement -> 1.0.
  ConfusionCounts clean;
  clean.tn = 100;
  MetricsReport r = finalize(clean);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK(r.f1 == 1.0);
  CHECK(r.iou == 1.0);
  CHECK(r.oa == 1.0);

  // Positive gt pixels entirely missed: precision undefined -> 0.0.
  ConfusionCounts missed;
  missed.fn = 10;
  missed.tn = 90;
  r = finalize(missed);
  CHECK(r.precision == 0.0);
  CHECK(r.recall == 0.0);
  CHECK(r.f1 == 0.0);
  CHECK(r.iou == 0.0);
  CHECK(r.oa == doctest::Approx(0.9).epsilon(1e-15));

  // Fabricated positives with no gt positives: recall undefined -> 0.0.
  ConfusionCounts fabricated;
  fabricated.fp = 5;
  fabricated.tn = 95;
  r = finalize(fabricated);
  CHECK(r.precision == 0.0);
  CHECK(r.recall == 0.0);
  CHECK(r.f1 == 0.0);
  CHECK(r.iou == 0.0);
}

TEST_CASE("empty counts raise") {
  ConfusionCounts empty;
  CHECK_THROWS_AS(finalize(empty), EmptyCounts);
}

TEST_CASE("merge order does not matter") {
  Rng rng(7);
  std::vector<ConfusionCounts> parts;
  for (int k = 0; k < 10; ++k) {
    ConfusionCounts c;
    c.accumulate(random_mask(8, 8, rng, 0.4), random_mask(8, 8, rng, 0.4));
    parts.push_back(c);
  }
  ConfusionCounts forward, backward;
  for (const auto& c : parts) forward.add(c);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) backward.add(*it);
  CHECK(forward.tp == backward.tp);
  CHECK(forward.fp == backward.fp);
  CHECK(forward.fn == backward.fn);
  CHECK(forward.tn == backward.tn);

  // Accumulating image-by-image equals counting the concatenated pixels:
  // metrics are micro-averaged.
  MetricsReport r = finalize(forward);
  i64 tp = 0, fp = 0, fn = 0, tn = 0;
  for (const auto& c : parts) {
    tp += c.tp;
    fp += c.fp;
    fn += c.fn;
    tn += c.tn;
  }
  CHECK(r.tp == tp);
  CHECK(r.fp == fp);
  CHECK(r.fn == fn);
  CHECK(r.tn == tn);
}

TEST_CASE("F1 is the harmonic mean of precision and recall") {
  ConfusionCounts c;
  c.tp = 30;
  c.fp = 20;
  c.fn = 10;
  c.tn = 40;
  MetricsReport r = finalize(c);
  const double expect = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  CHECK(r.f1 == doctest::Approx(expect).epsilon(1e-12));
  // IoU relates to F1 by iou = f1 / (2 - f1).
  CHECK(r.iou == doctest::Approx(r.f1 / (2.0 - r.f1)).epsilon(1e-12));
}

TEST_CASE("perfect and inverted predictors") {
  Rng rng(11);
  Tensor gt = random_mask(16, 16, rng, 0.5);
  ConfusionCounts perfect;
  perfect.accumulate(gt, gt);
  MetricsReport r = finalize(perfect);
  CHECK(r.f1 == 1.0);
  CHECK(r.oa == 1.0);
  CHECK(r.iou == 1.0);

  Tensor inv = Tensor::zeros({16, 16});
  for (i64 i = 0; i < inv.numel(); ++i) inv[i] = 1.0 - gt[i];
  ConfusionCounts wrong;
  wrong.accumulate(inv, gt);
  r = finalize(wrong);
  CHECK(r.f1 == 0.0);
  CHECK(r.oa == 0.0);
  CHECK(r.recall == 0.0);
}

TEST_CASE("accumulate validates shapes") {
  ConfusionCounts c;
  CHECK_THROWS_AS(c.accumulate(Tensor::zeros({2, 2}), Tensor::zeros({2, 3})), ShapeMismatch);
}

TEST_CASE("json and csv serialization") {
  ConfusionCounts c;
  c.tp = 1;
  c.fp = 1;
  c.tn = 2;
  MetricsReport r = finalize(c);
  const std::string js = metrics_to_json(r);
  CHECK(js.find("\"precision\"") != std::string::npos);
  CHECK(js.find("\"recall\"") != std::string::npos);
  CHECK(js.find("\"f1\"") != std::string::npos);
  CHECK(js.find("\"oa\"") != std::string::npos);
  CHECK(js.find("\"iou\"") != std::string::npos);
  CHECK(js.find("\"tp\"") != std::string::npos);

  const std::string row = metrics_to_csv_row("val", r);
  // split plus five indicators: six comma-separated fields
  CHECK(std::count(row.begin(), row.end(), ',') == 5);
  CHECK(row.rfind("val,", 0) == 0);
  CHECK(row.find('\n') == std::string::npos);
}

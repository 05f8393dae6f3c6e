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

#ifndef WCD_METRICS_HPP_
#define WCD_METRICS_HPP_

#include <string>

#include "wcd/tensor.hpp"

namespace wcd {

/// Pixel confusion counts with "changed" as the positive class. Counts merge
/// by addition, so accumulation order over images does not matter.
struct ConfusionCounts {
  i64 tp = 0, fp = 0, fn = 0, tn = 0;

  i64 total() const { return tp + fp + fn + tn; }
  void add(const ConfusionCounts& o);
  /// Accumulate one prediction/ground-truth pair (same shape, values 0/1).
  void accumulate(const Tensor& pred, const Tensor& gt);
};

struct MetricsReport {
  double precision = 0.0, recall = 0.0, f1 = 0.0, oa = 0.0, iou = 0.0;
  i64 tp = 0, fp = 0, fn = 0, tn = 0;
};

/// Micro-averaged indicators. A 0/0 ratio with tp=fp=fn=0 reports 1.0
/// (perfect agreement on an all-negative split); any other zero denominator
/// reports 0.0. Throws EmptyCounts when no pixels were accumulated.
MetricsReport finalize(const ConfusionCounts& counts);

std::string metrics_to_json(const MetricsReport& r);
/// One CSV row: split,precision,recall,f1,oa,iou (no header).
std::string metrics_to_csv_row(const std::string& split, const MetricsReport& r);

}  // namespace wcd

#endif  // WCD_METRICS_HPP_

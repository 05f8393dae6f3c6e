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

#include "wcd/metrics.hpp"

#include <sstream>

#include "json.hpp"
#include "wcd/errors.hpp"

namespace wcd {

void ConfusionCounts::add(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
}

void ConfusionCounts::accumulate(const Tensor& pred, const Tensor& gt) {
  if (!pred.same_shape(gt))
    throw ShapeMismatch("accumulate: pred " + shape_str(pred.shape()) + " vs gt " +
                        shape_str(gt.shape()));
  for (i64 i = 0; i < pred.numel(); ++i) {
    const bool p = pred[i] > 0.5;
    const bool g = gt[i] > 0.5;
    if (p && g)
      ++tp;
    else if (p && !g)
      ++fp;
    else if (!p && g)
      ++fn;
    else
      ++tn;
  }
}

namespace {

/// 0/0 with an empty positive story (tp=fp=fn=0) is perfect agreement.
double ratio(double num, double den, const ConfusionCounts& c) {
  if (den != 0.0) return num / den;
  return (c.tp == 0 && c.fp == 0 && c.fn == 0) ? 1.0 : 0.0;
}

}  // namespace

MetricsReport finalize(const ConfusionCounts& c) {
  if (c.total() == 0) throw EmptyCounts("finalize: no pixels accumulated");
  MetricsReport r;
  r.tp = c.tp;
  r.fp = c.fp;
  r.fn = c.fn;
  r.tn = c.tn;
  const double tp = static_cast<double>(c.tp);
  r.precision = ratio(tp, static_cast<double>(c.tp + c.fp), c);
  r.recall = ratio(tp, static_cast<double>(c.tp + c.fn), c);
  r.f1 = ratio(2.0 * tp, static_cast<double>(2 * c.tp + c.fp + c.fn), c);
  r.oa = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  r.iou = ratio(tp, static_cast<double>(c.tp + c.fp + c.fn), c);
  return r;
}

std::string metrics_to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["oa"] = r.oa;
  j["iou"] = r.iou;
  j["tp"] = r.tp;
  j["fp"] = r.fp;
  j["fn"] = r.fn;
  j["tn"] = r.tn;
  return j.dump(2);
}

std::string metrics_to_csv_row(const std::string& split, const MetricsReport& r) {
  std::ostringstream os;
  os.precision(10);
  os << split << "," << r.precision << "," << r.recall << "," << r.f1 << "," << r.oa << ","
     << r.iou;
  return os.str();
}

}  // namespace wcd

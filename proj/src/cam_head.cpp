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

#include "wcd/cam_head.hpp"

#include "wcd/errors.hpp"

namespace wcd {

CamHead::CamHead(i64 in_channels, ParamStore& store, Rng& rng) {
  w_ = store.create("head.classifier.weight", {1, in_channels, 1, 1}, ParamStore::Init::TruncNormal,
                    rng);
}

std::pair<ad::Var, ad::Var> CamHead::classify(const ad::Var& feat) const {
  ad::Var raw_cam = ad::conv2d(feat, w_, nullptr, Conv2dSpec{});
  ad::Var p_cls = ad::mean_all(raw_cam);
  return {p_cls, raw_cam};
}

ad::Var loss_cc(const std::vector<ad::Var>& logits, const std::vector<int>& labels) {
  if (logits.empty() || logits.size() != labels.size())
    throw ShapeMismatch("loss_cc: need one label per logit");
  std::vector<ad::Var> per_sample;
  per_sample.reserve(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      throw LabelError("loss_cc: label must be 0 or 1, got " + std::to_string(labels[i]));
    per_sample.push_back(
        ad::bce_with_logits_mean(logits[i], Tensor::scalar(static_cast<double>(labels[i]))));
  }
  return per_sample.size() == 1 ? per_sample[0] : ad::average(per_sample);
}

Tensor fuse_cams(const std::vector<Tensor>& maps, double eps_norm) {
  if (maps.empty()) throw ShapeMismatch("fuse_cams: no maps");
  if (eps_norm <= 0.0) throw RangeError("fuse_cams: eps_norm must be positive");
  auto as_2d = [](const Tensor& t) {
    if (t.ndim() == 2) return t;
    if (t.ndim() == 3 && t.size(0) == 1) return t.reshaped({t.size(1), t.size(2)});
    throw ShapeMismatch("fuse_cams: maps must be (h,w) or (1,h,w), got " + shape_str(t.shape()));
  };
  Tensor acc = as_2d(maps[0]);
  for (std::size_t i = 1; i < maps.size(); ++i) {
    Tensor m = as_2d(maps[i]);
    if (!m.same_shape(acc))
      throw ShapeMismatch("fuse_cams: map " + std::to_string(i) + " has shape " +
                          shape_str(m.shape()) + ", expected " + shape_str(acc.shape()));
    acc = add(acc, m);
  }
  acc = clamp_min(acc, 0.0);
  double mx = max_all(acc);
  return scale(acc, 1.0 / (mx + eps_norm));
}

Tensor predict_initial(const Tensor& fused_cam, double tau) {
  if (tau <= 0.0 || tau >= 1.0) throw ConfigError("predict_initial: tau must be in (0,1)");
  if (fused_cam.ndim() != 2)
    throw ShapeMismatch("predict_initial: expected (h,w), got " + shape_str(fused_cam.shape()));
  Tensor pred(fused_cam.shape());
  for (i64 i = 0; i < fused_cam.numel(); ++i) pred[i] = fused_cam[i] >= tau ? 1.0 : 0.0;
  return pred;
}

}  // namespace wcd

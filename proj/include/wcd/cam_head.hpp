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

#ifndef WCD_CAM_HEAD_HPP_
#define WCD_CAM_HEAD_HPP_

#include <utility>
#include <vector>

#include "wcd/autodiff.hpp"
#include "wcd/params.hpp"

namespace wcd {

/// Change classifier on top of the stage-4 feature map. A bias-free 1x1
/// convolution produces the raw activation map; global average pooling of
/// that map is the classification logit, so the logit is exactly the spatial
/// mean of the map.
class CamHead {
 public:
  CamHead(i64 in_channels, ParamStore& store, Rng& rng);

  /// feat (C,h,w) -> {p_cls scalar logit, raw activation map (1,h,w)}.
  std::pair<ad::Var, ad::Var> classify(const ad::Var& feat) const;

 private:
  ad::Var w_;
};

/// Mean binary cross entropy with logits over a batch of scalar logits.
/// Labels must be 0 or 1; anything else raises LabelError.
ad::Var loss_cc(const std::vector<ad::Var>& logits, const std::vector<int>& labels);

/// Fuse already-upsampled per-scale activation maps (all (h,w) or (1,h,w) of
/// one size, ascending scale order): elementwise sum, clamp below at zero,
/// divide by (spatial max + eps_norm). Result is (h,w) with values in [0,1).
Tensor fuse_cams(const std::vector<Tensor>& maps, double eps_norm);

/// Threshold a fused map: pixels at or above tau become 1. tau must lie in
/// (0,1) or ConfigError is raised.
Tensor predict_initial(const Tensor& fused_cam, double tau);

}  // namespace wcd

#endif  // WCD_CAM_HEAD_HPP_

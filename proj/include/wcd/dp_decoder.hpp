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

#ifndef WCD_DP_DECODER_HPP_
#define WCD_DP_DECODER_HPP_

#include <vector>

#include "wcd/autodiff.hpp"
#include "wcd/params.hpp"

namespace wcd {

struct DpConfig {
  std::vector<i64> rates{0, 1, 2, 3};
  i64 branch_channels = 64;
  i64 start_iteration = 2000;
};

/// Throws ConfigError unless rates are non-empty, non-negative, strictly
/// ascending and branch_channels/start_iteration are in range.
void validate_dp_config(const DpConfig& cfg);

/// Pixel decoder with parallel dilated branches. Rate 0 is a 1x1 convolution;
/// rate k>0 is a 3x3 convolution with dilation k and padding k, so every
/// branch preserves the feature map size. Branch outputs are concatenated in
/// ascending rate order, fused by a 1x1 convolution into a one-channel logit
/// map, and bilinearly upsampled to the requested output size.
class DpDecoder {
 public:
  DpDecoder(DpConfig cfg, i64 in_channels, ParamStore& store, Rng& rng);

  struct Out {
    ad::Var feat;    // concatenated branch features (n_rates*branch_channels, h, w)
    ad::Var logits;  // upsampled logit map (1, out_h, out_w)
  };
  Out decode(const ad::Var& feat_d4, i64 out_h, i64 out_w) const;

  struct BranchInfo {
    i64 rate, kernel, dilation, pad;
  };
  std::vector<BranchInfo> branches() const;
  const DpConfig& config() const { return cfg_; }
  i64 fused_channels() const { return static_cast<i64>(cfg_.rates.size()) * cfg_.branch_channels; }

 private:
  DpConfig cfg_;
  std::vector<ad::Var> bw_, bb_;  // per-branch conv weight/bias, ascending rate
  ad::Var fw_, fb_;               // fusion conv
};

/// Pixel supervision for one sample. Unchanged pairs are supervised by the
/// all-zero map implied by their image-level label; changed pairs use the
/// thresholded fused activation map as a pseudo-label.
struct SupervisionTarget {
  Tensor y;  // (h, w) of 0/1
  enum class Source { PriorAllZero, CamPseudoLabel } source;
};
SupervisionTarget select_target(int y_cls, const Tensor* pred_init, i64 h, i64 w);

/// Mean per-pixel binary cross entropy with logits between the decoder map
/// (1,h,w) and a 0/1 target (h,w).
ad::Var loss_cp(const ad::Var& dp_logits, const Tensor& target);

/// Final mask from decoder logits (1,h,w) or (h,w): sign threshold at zero,
/// ties count as changed.
Tensor predict_final(const Tensor& dp_logits);

}  // namespace wcd

#endif  // WCD_DP_DECODER_HPP_

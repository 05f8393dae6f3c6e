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

#ifndef WCD_LG_CONSTRAINT_HPP_
#define WCD_LG_CONSTRAINT_HPP_

#include <string>

#include "wcd/autodiff.hpp"
#include "wcd/tensor.hpp"

namespace wcd {

/// Label-gated local consistency penalty: a changed pair should predict at
/// least one changed pixel, an unchanged pair should predict none.
struct LgConfig {
  double alpha = 0.2;
  enum class Mode { Literal, Smooth } mode = Mode::Literal;
  enum class MaskSource { Init, Final } mask_source = MaskSource::Final;
};

LgConfig::Mode parse_lg_mode(const std::string& s);
std::string lg_mode_name(LgConfig::Mode m);
LgConfig::MaskSource parse_mask_source(const std::string& s);
std::string mask_source_name(LgConfig::MaskSource m);

/// Throws RangeError unless alpha lies in [0, 1].
void validate_lg_config(const LgConfig& cfg);

/// Predicted-changed region features: the binary prediction is downsampled
/// (nearest) to the feature resolution and multiplied into every channel.
/// `presence` reports whether any downsampled prediction pixel is changed,
/// so presence == false implies m_c is identically zero.
struct ChangedMask {
  Tensor m_c;        // (C, h, w)
  bool presence;     // any changed pixel after downsampling
  i64 changed_pixels;
};
ChangedMask changed_mask(const Tensor& pred, const Tensor& feat);

/// Penalty value for one sample. Literal mode charges alpha exactly when the
/// presence bit contradicts the image-level label. Smooth mode relaxes the
/// indicator to m = max over pixels of sigmoid(dp_logits): a changed pair is
/// charged alpha*(1-m), an unchanged pair alpha*m; dp_logits must then be
/// provided.
double lg_penalty(int y_cls, const ChangedMask& mask, const LgConfig& cfg,
                  const Tensor* dp_logits = nullptr);

/// Same literal rule from a bare presence bit (used when no decoder features
/// exist and the mask source is the initial prediction).
double lg_penalty_literal(int y_cls, bool presence, double alpha);

/// Differentiable smooth penalty term for the training graph. `m` must be a
/// scalar in [0,1] (e.g. sigmoid of the maximum decoder logit).
ad::Var lg_penalty_smooth(int y_cls, const ad::Var& m, double alpha);

}  // namespace wcd

#endif  // WCD_LG_CONSTRAINT_HPP_

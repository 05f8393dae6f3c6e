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

#ifndef WCD_MODEL_HPP_
#define WCD_MODEL_HPP_

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "wcd/cam_head.hpp"
#include "wcd/config.hpp"
#include "wcd/difference.hpp"
#include "wcd/dp_decoder.hpp"
#include "wcd/encoder.hpp"
#include "wcd/params.hpp"

namespace wcd {

/// Full change-detection model: encoder + temporal difference + change
/// classifier, plus the pixel decoder in the modes that train one. All
/// parameters live in one store in creation order (encoder, difference,
/// classifier head, decoder), initialized from a stream derived from the
/// seed, so two models built from the same config and seed are identical.
class TransWcdModel {
 public:
  TransWcdModel(const RunConfig& cfg, std::uint64_t seed);

  struct Forward {
    ad::Var feat_d4;  // temporal-difference stage-4 features (C4, h, w)
    ad::Var p_cls;    // scalar classification logit
    ad::Var raw_cam;  // pre-pooling activation map (1, h, w)
  };
  /// Differentiable forward pass on one pair of (3,H,W) images, H and W
  /// multiples of 32. Single stream fuses the images before the encoder;
  /// dual stream runs the shared encoder twice and fuses stage-4 features.
  Forward forward(const ad::Var& pre, const ad::Var& post, Rng* dropout_rng = nullptr) const;

  /// Fused multi-scale activation map at input resolution, in [0,1). Runs
  /// one no-grad forward per configured scale in ascending order (inputs
  /// rescaled to the nearest multiple of 32), resizes each raw map back to
  /// (H,W), sums, clamps below at zero and normalizes by (max + eps_norm).
  Tensor multiscale_cam(const Tensor& pre, const Tensor& post) const;

  struct Inference {
    Tensor cam;         // fused multi-scale map (H,W)
    double p_cls;       // native-scale classification logit
    Tensor pred_init;   // thresholded fused map (H,W), 0/1
    Tensor dp_logits;   // decoder logit map (H,W); undefined without decoder
    Tensor pred_final;  // decoder mask (H,W); undefined without decoder
  };
  Inference infer(const Tensor& pre, const Tensor& post) const;

  bool has_decoder() const { return decoder_ != nullptr; }
  const DpDecoder& decoder() const;
  const Encoder& encoder() const { return *encoder_; }
  const DifferenceModule& difference() const { return *diff_; }
  const CamHead& head() const { return *head_; }

  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }
  const RunConfig& config() const { return cfg_; }

  /// Overwrite parameter values from (name, tensor) pairs; every model
  /// parameter must be covered with a matching shape (wcd::Error otherwise).
  void load_params(const std::vector<std::pair<std::string, Tensor>>& named);

  /// Backbone/head split used by the optimizer's learning-rate groups.
  static bool is_head_param(const std::string& name);
  /// Decoder parameters sit behind the delayed-activation gate.
  static bool is_decoder_param(const std::string& name);

 private:
  /// Rounds a rescaled side to the closest positive multiple of 32.
  static i64 scaled_side(i64 side, double scale);

  RunConfig cfg_;
  ParamStore store_;
  std::unique_ptr<Encoder> encoder_;
  std::unique_ptr<DifferenceModule> diff_;
  std::unique_ptr<CamHead> head_;
  std::unique_ptr<DpDecoder> decoder_;
};

}  // namespace wcd

#endif  // WCD_MODEL_HPP_

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

#ifndef WCD_ENCODER_HPP_
#define WCD_ENCODER_HPP_

#include <string>
#include <vector>

#include "wcd/autodiff.hpp"
#include "wcd/params.hpp"

namespace wcd {

/// Hierarchical transformer encoder configuration. Four stages downsample by
/// 4, 8, 16 and 32 relative to the input.
struct EncoderConfig {
  std::vector<i64> embed_dims{64, 128, 320, 512};
  std::vector<i64> depths{2, 2, 2, 2};
  std::vector<i64> num_heads{1, 2, 5, 8};
  std::vector<i64> sr_ratios{8, 4, 2, 1};
  i64 mlp_ratio = 4;
  double drop_rate = 0.0;

  static EncoderConfig desk_tiny();
  static EncoderConfig mit_b1();
};

/// Throws ConfigError when stage counts, head divisibility or ranges are off.
void validate_encoder_config(const EncoderConfig& cfg);

/// Validates the config together with an input size; returns cfg unchanged.
/// Throws DimensionError when H or W is not a positive multiple of 32 and
/// ConfigError on config invariant violations.
EncoderConfig validate_config(const EncoderConfig& cfg, i64 h, i64 w);

/// Four-stage encoder: overlapping strided patch embedding, efficient
/// self-attention with spatial-reduction keys/values, Mix-FFN with a
/// depthwise 3x3 convolution, and a LayerNorm after every stage. No
/// positional embedding is used, so input resolution is free as long as both
/// sides divide by 32.
class Encoder {
 public:
  Encoder(EncoderConfig cfg, ParamStore& store, Rng& init_rng);

  /// Input (3, H, W) with H and W divisible by 32; returns the four stage
  /// feature maps (C_i, H/2^{i+2}, W/2^{i+2}). `dropout_rng` enables
  /// train-time dropout when the configured rate is positive.
  std::vector<ad::Var> forward(const ad::Var& x, Rng* dropout_rng = nullptr) const;

  const EncoderConfig& config() const { return cfg_; }

  /// Validates an input image shape. Throws DimensionError.
  static void check_input(const Tensor& x);

 private:
  struct NormP {
    ad::Var gamma, beta;
  };
  struct AttnP {
    ad::Var qw, qb, kw, kb, vw, vb, ow, ob;
    ad::Var srw, srb;  // spatial-reduction conv, only when sr > 1
    NormP srnorm;
  };
  struct FfnP {
    ad::Var w1, b1, dw, db, w2, b2;
  };
  struct BlockP {
    NormP norm1, norm2;
    AttnP attn;
    FfnP ffn;
  };
  struct StageP {
    ad::Var pw, pb;  // patch embedding conv
    NormP pnorm;
    std::vector<BlockP> blocks;
    NormP out_norm;
  };

  ad::Var attention(const StageP& st, const BlockP& blk, const ad::Var& tokens, i64 h, i64 w,
                    i64 heads, i64 sr, Rng* drop) const;
  ad::Var mix_ffn(const BlockP& blk, const ad::Var& tokens, i64 h, i64 w, Rng* drop) const;

  EncoderConfig cfg_;
  std::vector<StageP> stages_;
};

}  // namespace wcd

#endif  // WCD_ENCODER_HPP_

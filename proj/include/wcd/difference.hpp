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

#ifndef WCD_DIFFERENCE_HPP_
#define WCD_DIFFERENCE_HPP_

#include <string>

#include "wcd/autodiff.hpp"
#include "wcd/params.hpp"

namespace wcd {

/// Where the temporal difference is taken: Single fuses the two images before
/// the encoder (one stream), Dual runs a shared encoder on both images and
/// fuses the final feature maps (two streams, late difference).
enum class Stream { Single, Dual };

enum class DiffKind {
  Conv1x1NoAct,     // 1x1 conv on the channel concat, no activation
  Conv1x1Relu,      // 1x1 conv + ReLU
  AbsDiff,          // |a - b|, parameter-free (single-stream only)
  TwoLayerConv3x3,  // two 3x3 conv + ReLU layers
  Conv3x3Relu,      // 3x3 conv + ReLU (dual-stream only)
};

Stream parse_stream(const std::string& s);
std::string stream_name(Stream s);
DiffKind parse_diff_kind(const std::string& s);
std::string diff_kind_name(DiffKind k);

/// Default fusion for each placement.
DiffKind default_diff_kind(Stream stream);

/// Throws ConfigError when the kind is not available for the placement.
void validate_difference(Stream stream, DiffKind kind);

/// Temporal fusion operator. In single-stream mode it maps two (3,H,W)
/// images to one (3,H,W) difference image; in dual-stream mode it maps two
/// stage-4 feature maps (C,h,w) to one (C,h,w).
class DifferenceModule {
 public:
  DifferenceModule(Stream stream, DiffKind kind, i64 feat_channels, ParamStore& store, Rng& rng);

  ad::Var early(const ad::Var& pre, const ad::Var& post) const;
  ad::Var late(const ad::Var& feat_pre, const ad::Var& feat_post) const;

  Stream stream() const { return stream_; }
  DiffKind kind() const { return kind_; }

 private:
  ad::Var fuse(const ad::Var& a, const ad::Var& b) const;

  Stream stream_;
  DiffKind kind_;
  ad::Var w1_, b1_, w2_, b2_;
};

}  // namespace wcd

#endif  // WCD_DIFFERENCE_HPP_

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

#include "wcd/difference.hpp"

#include "wcd/errors.hpp"

namespace wcd {

Stream parse_stream(const std::string& s) {
  if (s == "single") return Stream::Single;
  if (s == "dual") return Stream::Dual;
  throw ConfigError("unknown stream: '" + s + "' (expected single|dual)");
}

std::string stream_name(Stream s) { return s == Stream::Single ? "single" : "dual"; }

DiffKind parse_diff_kind(const std::string& s) {
  if (s == "conv1x1_no_act") return DiffKind::Conv1x1NoAct;
  if (s == "conv1x1_relu") return DiffKind::Conv1x1Relu;
  if (s == "abs_diff") return DiffKind::AbsDiff;
  if (s == "two_layer_conv3x3") return DiffKind::TwoLayerConv3x3;
  if (s == "conv3x3_relu") return DiffKind::Conv3x3Relu;
  throw ConfigError("unknown difference kind: '" + s + "'");
}

std::string diff_kind_name(DiffKind k) {
  switch (k) {
    case DiffKind::Conv1x1NoAct: return "conv1x1_no_act";
    case DiffKind::Conv1x1Relu: return "conv1x1_relu";
    case DiffKind::AbsDiff: return "abs_diff";
    case DiffKind::TwoLayerConv3x3: return "two_layer_conv3x3";
    case DiffKind::Conv3x3Relu: return "conv3x3_relu";
  }
  throw ConfigError("bad difference kind");
}

DiffKind default_diff_kind(Stream stream) {
  return stream == Stream::Single ? DiffKind::Conv1x1NoAct : DiffKind::Conv3x3Relu;
}

void validate_difference(Stream stream, DiffKind kind) {
  if (stream == Stream::Single) {
    switch (kind) {
      case DiffKind::Conv1x1NoAct:
      case DiffKind::Conv1x1Relu:
      case DiffKind::AbsDiff:
      case DiffKind::TwoLayerConv3x3:
        return;
      default:
        throw ConfigError("difference kind '" + diff_kind_name(kind) +
                          "' is not available for single-stream");
    }
  }
  switch (kind) {
    case DiffKind::Conv1x1Relu:
    case DiffKind::Conv3x3Relu:
    case DiffKind::TwoLayerConv3x3:
      return;
    default:
      throw ConfigError("difference kind '" + diff_kind_name(kind) +
                        "' is not available for dual-stream");
  }
}

DifferenceModule::DifferenceModule(Stream stream, DiffKind kind, i64 feat_channels,
                                   ParamStore& store, Rng& rng)
    : stream_(stream), kind_(kind) {
  validate_difference(stream, kind);
  const i64 out_c = stream == Stream::Single ? 3 : feat_channels;
  const i64 in_c = 2 * out_c;
  using Init = ParamStore::Init;
  switch (kind_) {
    case DiffKind::AbsDiff:
      break;
    case DiffKind::Conv1x1NoAct:
    case DiffKind::Conv1x1Relu:
      w1_ = store.create("diff.conv1.weight", {out_c, in_c, 1, 1}, Init::TruncNormal, rng);
      b1_ = store.create("diff.conv1.bias", {out_c}, Init::Zeros, rng);
      break;
    case DiffKind::Conv3x3Relu:
      w1_ = store.create("diff.conv1.weight", {out_c, in_c, 3, 3}, Init::TruncNormal, rng);
      b1_ = store.create("diff.conv1.bias", {out_c}, Init::Zeros, rng);
      break;
    case DiffKind::TwoLayerConv3x3:
      w1_ = store.create("diff.conv1.weight", {out_c, in_c, 3, 3}, Init::TruncNormal, rng);
      b1_ = store.create("diff.conv1.bias", {out_c}, Init::Zeros, rng);
      w2_ = store.create("diff.conv2.weight", {out_c, out_c, 3, 3}, Init::TruncNormal, rng);
      b2_ = store.create("diff.conv2.bias", {out_c}, Init::Zeros, rng);
      break;
  }
}

ad::Var DifferenceModule::fuse(const ad::Var& a, const ad::Var& b) const {
  if (!a->value.same_shape(b->value))
    throw ShapeMismatch("difference inputs disagree: " + shape_str(a->value.shape()) + " vs " +
                        shape_str(b->value.shape()));
  if (kind_ == DiffKind::AbsDiff) return ad::abs_diff(a, b);

  ad::Var x = ad::concat_channels({a, b});
  Conv2dSpec c1x1;
  Conv2dSpec c3x3;
  c3x3.pad = 1;
  switch (kind_) {
    case DiffKind::Conv1x1NoAct:
      return ad::conv2d(x, w1_, b1_, c1x1);
    case DiffKind::Conv1x1Relu:
      return ad::relu(ad::conv2d(x, w1_, b1_, c1x1));
    case DiffKind::Conv3x3Relu:
      return ad::relu(ad::conv2d(x, w1_, b1_, c3x3));
    case DiffKind::TwoLayerConv3x3: {
      ad::Var h = ad::relu(ad::conv2d(x, w1_, b1_, c3x3));
      return ad::relu(ad::conv2d(h, w2_, b2_, c3x3));
    }
    default:
      throw ConfigError("bad difference kind");
  }
}

ad::Var DifferenceModule::early(const ad::Var& pre, const ad::Var& post) const {
  if (stream_ != Stream::Single)
    throw ConfigError("early difference requested on a dual-stream module");
  return fuse(pre, post);
}

ad::Var DifferenceModule::late(const ad::Var& feat_pre, const ad::Var& feat_post) const {
  if (stream_ != Stream::Dual)
    throw ConfigError("late difference requested on a single-stream module");
  return fuse(feat_pre, feat_post);
}

}  // namespace wcd

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

#include "wcd/dp_decoder.hpp"

#include "wcd/errors.hpp"

namespace wcd {

void validate_dp_config(const DpConfig& cfg) {
  if (cfg.rates.empty()) throw ConfigError("decoder: rates must not be empty");
  for (std::size_t i = 0; i < cfg.rates.size(); ++i) {
    if (cfg.rates[i] < 0) throw ConfigError("decoder: rates must be non-negative");
    if (i > 0 && cfg.rates[i] <= cfg.rates[i - 1])
      throw ConfigError("decoder: rates must be strictly ascending");
  }
  if (cfg.branch_channels <= 0) throw ConfigError("decoder: branch_channels must be positive");
  if (cfg.start_iteration < 0) throw ConfigError("decoder: start_iteration must be >= 0");
}

DpDecoder::DpDecoder(DpConfig cfg, i64 in_channels, ParamStore& store, Rng& rng)
    : cfg_(std::move(cfg)) {
  validate_dp_config(cfg_);
  using Init = ParamStore::Init;
  for (i64 r : cfg_.rates) {
    const i64 k = r == 0 ? 1 : 3;
    const std::string p = "decoder.branch" + std::to_string(r);
    bw_.push_back(store.create(p + ".weight", {cfg_.branch_channels, in_channels, k, k},
                               Init::TruncNormal, rng));
    bb_.push_back(store.create(p + ".bias", {cfg_.branch_channels}, Init::Zeros, rng));
  }
  fw_ = store.create("decoder.fuse.weight", {1, fused_channels(), 1, 1}, Init::TruncNormal, rng);
  fb_ = store.create("decoder.fuse.bias", {1}, Init::Zeros, rng);
}

std::vector<DpDecoder::BranchInfo> DpDecoder::branches() const {
  std::vector<BranchInfo> out;
  for (i64 r : cfg_.rates)
    out.push_back(r == 0 ? BranchInfo{0, 1, 1, 0} : BranchInfo{r, 3, r, r});
  return out;
}

DpDecoder::Out DpDecoder::decode(const ad::Var& feat_d4, i64 out_h, i64 out_w) const {
  if (feat_d4->value.ndim() != 3)
    throw ShapeMismatch("decode: expected (C,h,w), got " + shape_str(feat_d4->value.shape()));
  std::vector<ad::Var> outs;
  outs.reserve(bw_.size());
  for (std::size_t i = 0; i < bw_.size(); ++i) {
    const i64 r = cfg_.rates[i];
    Conv2dSpec spec;
    if (r > 0) {
      spec.dilation = r;
      spec.pad = r;
    }
    outs.push_back(ad::conv2d(feat_d4, bw_[i], bb_[i], spec));
  }
  ad::Var feat = outs.size() == 1 ? outs[0] : ad::concat_channels(outs);
  ad::Var logits = ad::conv2d(feat, fw_, fb_, Conv2dSpec{});
  logits = ad::bilinear_resize(logits, out_h, out_w);
  return {feat, logits};
}

SupervisionTarget select_target(int y_cls, const Tensor* pred_init, i64 h, i64 w) {
  if (y_cls == 0) return {Tensor({h, w}), SupervisionTarget::Source::PriorAllZero};
  if (y_cls != 1) throw LabelError("select_target: label must be 0 or 1");
  if (!pred_init || !pred_init->defined())
    throw ConfigError("select_target: changed sample needs an initial prediction");
  if (pred_init->ndim() != 2 || pred_init->size(0) != h || pred_init->size(1) != w)
    throw ShapeMismatch("select_target: prediction " + shape_str(pred_init->shape()) +
                        " vs requested " + std::to_string(h) + "x" + std::to_string(w));
  return {*pred_init, SupervisionTarget::Source::CamPseudoLabel};
}

ad::Var loss_cp(const ad::Var& dp_logits, const Tensor& target) {
  if (target.ndim() != 2) throw ShapeMismatch("loss_cp: target must be (h,w)");
  const Tensor& v = dp_logits->value;
  ad::Var flat = dp_logits;
  if (v.ndim() == 3 && v.size(0) == 1)
    flat = ad::reshape(dp_logits, {v.size(1), v.size(2)});
  else if (v.ndim() != 2)
    throw ShapeMismatch("loss_cp: logits must be (1,h,w) or (h,w)");
  return ad::bce_with_logits_mean(flat, target);
}

Tensor predict_final(const Tensor& dp_logits) {
  const Tensor* p = &dp_logits;
  Tensor flat;
  if (dp_logits.ndim() == 3 && dp_logits.size(0) == 1) {
    flat = dp_logits.reshaped({dp_logits.size(1), dp_logits.size(2)});
    p = &flat;
  } else if (dp_logits.ndim() != 2) {
    throw ShapeMismatch("predict_final: logits must be (1,h,w) or (h,w)");
  }
  Tensor pred(p->shape());
  for (i64 i = 0; i < p->numel(); ++i) pred[i] = (*p)[i] >= 0.0 ? 1.0 : 0.0;
  return pred;
}

}  // namespace wcd

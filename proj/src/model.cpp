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

#include "wcd/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "wcd/errors.hpp"

namespace wcd {

TransWcdModel::TransWcdModel(const RunConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  validate_run_config(cfg_);
  Rng init = derive_rng(seed, "init");
  const i64 c4 = cfg_.encoder.embed_dims.back();
  encoder_ = std::make_unique<Encoder>(cfg_.encoder, store_, init);
  diff_ = std::make_unique<DifferenceModule>(cfg_.stream, cfg_.difference, c4, store_, init);
  head_ = std::make_unique<CamHead>(c4, store_, init);
  if (mode_has_decoder(cfg_.mode)) {
    decoder_ = std::make_unique<DpDecoder>(cfg_.dp, c4, store_, init);
  }
}

const DpDecoder& TransWcdModel::decoder() const {
  if (!decoder_) throw ConfigError("model: this mode trains no pixel decoder");
  return *decoder_;
}

bool TransWcdModel::is_head_param(const std::string& name) {
  return name.rfind("encoder.", 0) != 0;
}

bool TransWcdModel::is_decoder_param(const std::string& name) {
  return name.rfind("decoder.", 0) == 0;
}

TransWcdModel::Forward TransWcdModel::forward(const ad::Var& pre, const ad::Var& post,
                                              Rng* dropout_rng) const {
  Forward out;
  if (cfg_.stream == Stream::Single) {
    ad::Var x = diff_->early(pre, post);
    out.feat_d4 = encoder_->forward(x, dropout_rng).back();
  } else {
    ad::Var f_pre = encoder_->forward(pre, dropout_rng).back();
    ad::Var f_post = encoder_->forward(post, dropout_rng).back();
    out.feat_d4 = diff_->late(f_pre, f_post);
  }
  auto [p_cls, raw_cam] = head_->classify(out.feat_d4);
  out.p_cls = std::move(p_cls);
  out.raw_cam = std::move(raw_cam);
  return out;
}

i64 TransWcdModel::scaled_side(i64 side, double scale) {
  const i64 units = std::max<i64>(1, std::llround(static_cast<double>(side) * scale / 32.0));
  return units * 32;
}

Tensor TransWcdModel::multiscale_cam(const Tensor& pre, const Tensor& post) const {
  Encoder::check_input(pre);
  Encoder::check_input(post);
  if (!pre.same_shape(post)) throw ShapeMismatch("multiscale_cam: pre/post size mismatch");
  const i64 h = pre.size(1), w = pre.size(2);

  ad::NoGradGuard no_grad;
  std::vector<double> scales = cfg_.cam_scales;
  std::sort(scales.begin(), scales.end());

  std::vector<Tensor> maps;
  maps.reserve(scales.size());
  for (double s : scales) {
    const i64 sh = scaled_side(h, s), sw = scaled_side(w, s);
    Tensor p = bilinear_resize(pre, sh, sw);
    Tensor q = bilinear_resize(post, sh, sw);
    Forward f = forward(ad::constant(std::move(p)), ad::constant(std::move(q)));
    const Tensor& raw = f.raw_cam->value;  // (1, sh/32, sw/32)
    maps.push_back(bilinear_resize(raw, h, w).reshaped({h, w}));
  }
  return fuse_cams(maps, cfg_.eps_norm);
}

TransWcdModel::Inference TransWcdModel::infer(const Tensor& pre, const Tensor& post) const {
  Inference out;
  out.cam = multiscale_cam(pre, post);
  out.pred_init = predict_initial(out.cam, cfg_.tau);

  ad::NoGradGuard no_grad;
  Forward native = forward(ad::constant(pre), ad::constant(post));
  out.p_cls = native.p_cls->value.item();
  if (decoder_) {
    const i64 h = pre.size(1), w = pre.size(2);
    DpDecoder::Out dec = decoder_->decode(native.feat_d4, h, w);
    out.dp_logits = dec.logits->value.reshaped({h, w});
    out.pred_final = predict_final(out.dp_logits);
  }
  return out;
}

void TransWcdModel::load_params(const std::vector<std::pair<std::string, Tensor>>& named) {
  std::map<std::string, const Tensor*> lookup;
  for (const auto& [name, tensor] : named) lookup[name] = &tensor;
  for (const auto& [name, var] : store_.entries()) {
    auto it = lookup.find(name);
    if (it == lookup.end()) throw Error("load_params: missing parameter '" + name + "'");
    if (!var->value.same_shape(*it->second)) {
      throw Error("load_params: shape mismatch for '" + name + "'");
    }
    var->value = *it->second;
    lookup.erase(it);
  }
  if (!lookup.empty()) {
    throw Error("load_params: unknown parameter '" + lookup.begin()->first + "'");
  }
}

}  // namespace wcd

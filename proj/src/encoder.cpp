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

#include "wcd/encoder.hpp"

#include <cmath>

#include "wcd/errors.hpp"

namespace wcd {

EncoderConfig EncoderConfig::desk_tiny() {
  EncoderConfig c;
  c.embed_dims = {16, 32, 64, 128};
  c.depths = {1, 1, 1, 1};
  c.num_heads = {1, 2, 4, 8};
  c.sr_ratios = {8, 4, 2, 1};
  c.mlp_ratio = 4;
  return c;
}

EncoderConfig EncoderConfig::mit_b1() {
  EncoderConfig c;
  c.embed_dims = {64, 128, 320, 512};
  c.depths = {2, 2, 2, 2};
  c.num_heads = {1, 2, 5, 8};
  c.sr_ratios = {8, 4, 2, 1};
  c.mlp_ratio = 4;
  return c;
}

void validate_encoder_config(const EncoderConfig& cfg) {
  if (cfg.embed_dims.size() != 4 || cfg.depths.size() != 4 || cfg.num_heads.size() != 4 ||
      cfg.sr_ratios.size() != 4)
    throw ConfigError("encoder: embed_dims/depths/num_heads/sr_ratios must all have 4 entries");
  for (int i = 0; i < 4; ++i) {
    if (cfg.embed_dims[i] <= 0) throw ConfigError("encoder: embed_dims must be positive");
    if (cfg.depths[i] <= 0) throw ConfigError("encoder: depths must be positive");
    if (cfg.num_heads[i] <= 0) throw ConfigError("encoder: num_heads must be positive");
    if (cfg.sr_ratios[i] <= 0) throw ConfigError("encoder: sr_ratios must be positive");
    if (cfg.embed_dims[i] % cfg.num_heads[i] != 0)
      throw ConfigError("encoder: embed_dims[" + std::to_string(i) + "]=" +
                        std::to_string(cfg.embed_dims[i]) + " not divisible by num_heads=" +
                        std::to_string(cfg.num_heads[i]));
    if (i > 0 && cfg.embed_dims[i] < cfg.embed_dims[i - 1])
      throw ConfigError("encoder: embed_dims must be non-decreasing across stages");
  }
  if (cfg.mlp_ratio < 1) throw ConfigError("encoder: mlp_ratio must be >= 1");
  if (cfg.drop_rate < 0.0 || cfg.drop_rate >= 1.0)
    throw ConfigError("encoder: drop_rate must be in [0, 1)");
}

EncoderConfig validate_config(const EncoderConfig& cfg, i64 h, i64 w) {
  validate_encoder_config(cfg);
  if (h < 32 || w < 32 || h % 32 != 0 || w % 32 != 0)
    throw DimensionError("input sides must be positive multiples of 32, got " + std::to_string(h) +
                         "x" + std::to_string(w));
  return cfg;
}

void Encoder::check_input(const Tensor& x) {
  if (x.ndim() != 3 || x.size(0) != 3)
    throw DimensionError("encoder input must be (3, H, W), got " + shape_str(x.shape()));
  i64 h = x.size(1), w = x.size(2);
  if (h < 32 || w < 32 || h % 32 != 0 || w % 32 != 0)
    throw DimensionError("encoder input sides must be positive multiples of 32, got " +
                         std::to_string(h) + "x" + std::to_string(w));
}

Encoder::Encoder(EncoderConfig cfg, ParamStore& store, Rng& init_rng) : cfg_(std::move(cfg)) {
  validate_encoder_config(cfg_);
  using Init = ParamStore::Init;
  auto tn = [&](const std::string& n, Shape s) { return store.create(n, std::move(s), Init::TruncNormal, init_rng); };
  auto zeros = [&](const std::string& n, Shape s) { return store.create(n, std::move(s), Init::Zeros, init_rng); };
  auto norm = [&](const std::string& n, i64 c) {
    return NormP{store.create(n + ".gamma", {c}, Init::Ones, init_rng),
                 store.create(n + ".beta", {c}, Init::Zeros, init_rng)};
  };

  i64 in_ch = 3;
  for (int i = 0; i < 4; ++i) {
    const std::string sp = "encoder.stage" + std::to_string(i);
    StageP st;
    const i64 c = cfg_.embed_dims[i];
    const i64 k = i == 0 ? 7 : 3;
    st.pw = tn(sp + ".patch.weight", {c, in_ch, k, k});
    st.pb = zeros(sp + ".patch.bias", {c});
    st.pnorm = norm(sp + ".patch.norm", c);
    for (i64 j = 0; j < cfg_.depths[i]; ++j) {
      const std::string bp = sp + ".block" + std::to_string(j);
      BlockP blk;
      blk.norm1 = norm(bp + ".norm1", c);
      blk.attn.qw = tn(bp + ".attn.q.weight", {c, c});
      blk.attn.qb = zeros(bp + ".attn.q.bias", {c});
      blk.attn.kw = tn(bp + ".attn.k.weight", {c, c});
      blk.attn.kb = zeros(bp + ".attn.k.bias", {c});
      blk.attn.vw = tn(bp + ".attn.v.weight", {c, c});
      blk.attn.vb = zeros(bp + ".attn.v.bias", {c});
      blk.attn.ow = tn(bp + ".attn.out.weight", {c, c});
      blk.attn.ob = zeros(bp + ".attn.out.bias", {c});
      if (cfg_.sr_ratios[i] > 1) {
        const i64 sr = cfg_.sr_ratios[i];
        blk.attn.srw = tn(bp + ".attn.sr.weight", {c, c, sr, sr});
        blk.attn.srb = zeros(bp + ".attn.sr.bias", {c});
        blk.attn.srnorm = norm(bp + ".attn.sr.norm", c);
      }
      blk.norm2 = norm(bp + ".norm2", c);
      const i64 hidden = c * cfg_.mlp_ratio;
      blk.ffn.w1 = tn(bp + ".ffn.fc1.weight", {c, hidden});
      blk.ffn.b1 = zeros(bp + ".ffn.fc1.bias", {hidden});
      blk.ffn.dw = tn(bp + ".ffn.dw.weight", {hidden, 1, 3, 3});
      blk.ffn.db = zeros(bp + ".ffn.dw.bias", {hidden});
      blk.ffn.w2 = tn(bp + ".ffn.fc2.weight", {hidden, c});
      blk.ffn.b2 = zeros(bp + ".ffn.fc2.bias", {c});
      st.blocks.push_back(std::move(blk));
    }
    st.out_norm = norm(sp + ".norm", c);
    stages_.push_back(std::move(st));
    in_ch = c;
  }
}

ad::Var Encoder::attention(const StageP&, const BlockP& blk, const ad::Var& tokens, i64 h, i64 w,
                           i64 heads, i64 sr, Rng* drop) const {
  const i64 c = tokens->value.size(1);
  const i64 d = c / heads;
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(d));

  ad::Var q = ad::linear(tokens, blk.attn.qw, blk.attn.qb);
  ad::Var kv_src = tokens;
  if (sr > 1) {
    if (h % sr != 0 || w % sr != 0)
      throw DimensionError("attention: feature map " + std::to_string(h) + "x" +
                           std::to_string(w) + " not divisible by sr=" + std::to_string(sr));
    ad::Var grid = ad::tokens_to_chw(tokens, h, w);
    Conv2dSpec spec;
    spec.stride = sr;
    grid = ad::conv2d(grid, blk.attn.srw, blk.attn.srb, spec);
    kv_src = ad::chw_to_tokens(grid);
    kv_src = ad::layer_norm(kv_src, blk.attn.srnorm.gamma, blk.attn.srnorm.beta);
  }
  ad::Var k = ad::linear(kv_src, blk.attn.kw, blk.attn.kb);
  ad::Var v = ad::linear(kv_src, blk.attn.vw, blk.attn.vb);

  std::vector<ad::Var> ctx;
  ctx.reserve(static_cast<std::size_t>(heads));
  for (i64 hd = 0; hd < heads; ++hd) {
    ad::Var qh = ad::take_cols(q, hd * d, (hd + 1) * d);
    ad::Var kh = ad::take_cols(k, hd * d, (hd + 1) * d);
    ad::Var vh = ad::take_cols(v, hd * d, (hd + 1) * d);
    ad::Var scores = ad::scale(ad::matmul(qh, ad::transpose2d(kh)), att_scale);
    ad::Var probs = ad::softmax_rows(scores);
    ctx.push_back(ad::matmul(probs, vh));
  }
  ad::Var out = ad::linear(heads == 1 ? ctx[0] : ad::concat_cols(ctx), blk.attn.ow, blk.attn.ob);
  if (drop && cfg_.drop_rate > 0.0) out = ad::dropout(out, cfg_.drop_rate, *drop);
  return out;
}

ad::Var Encoder::mix_ffn(const BlockP& blk, const ad::Var& tokens, i64 h, i64 w, Rng* drop) const {
  ad::Var x = ad::linear(tokens, blk.ffn.w1, blk.ffn.b1);
  const i64 hidden = x->value.size(1);
  ad::Var grid = ad::tokens_to_chw(x, h, w);
  Conv2dSpec spec;
  spec.pad = 1;
  spec.groups = hidden;
  grid = ad::conv2d(grid, blk.ffn.dw, blk.ffn.db, spec);
  grid = ad::gelu(grid);
  x = ad::chw_to_tokens(grid);
  x = ad::linear(x, blk.ffn.w2, blk.ffn.b2);
  if (drop && cfg_.drop_rate > 0.0) x = ad::dropout(x, cfg_.drop_rate, *drop);
  return x;
}

std::vector<ad::Var> Encoder::forward(const ad::Var& x, Rng* dropout_rng) const {
  check_input(x->value);
  std::vector<ad::Var> features;
  features.reserve(4);
  ad::Var cur = x;
  for (int i = 0; i < 4; ++i) {
    const StageP& st = stages_[static_cast<std::size_t>(i)];
    Conv2dSpec patch;
    patch.stride = i == 0 ? 4 : 2;
    patch.pad = i == 0 ? 3 : 1;
    ad::Var grid = ad::conv2d(cur, st.pw, st.pb, patch);
    const i64 h = grid->value.size(1), w = grid->value.size(2);
    ad::Var t = ad::chw_to_tokens(grid);
    t = ad::layer_norm(t, st.pnorm.gamma, st.pnorm.beta);
    for (const BlockP& blk : st.blocks) {
      ad::Var a = attention(st, blk, ad::layer_norm(t, blk.norm1.gamma, blk.norm1.beta), h, w,
                            cfg_.num_heads[i], cfg_.sr_ratios[i], dropout_rng);
      t = ad::add(t, a);
      ad::Var f = mix_ffn(blk, ad::layer_norm(t, blk.norm2.gamma, blk.norm2.beta), h, w,
                          dropout_rng);
      t = ad::add(t, f);
    }
    t = ad::layer_norm(t, st.out_norm.gamma, st.out_norm.beta);
    cur = ad::tokens_to_chw(t, h, w);
    features.push_back(cur);
  }
  return features;
}

}  // namespace wcd

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

#include "wcd/lg_constraint.hpp"

#include "wcd/errors.hpp"

namespace wcd {

LgConfig::Mode parse_lg_mode(const std::string& s) {
  if (s == "literal") return LgConfig::Mode::Literal;
  if (s == "smooth") return LgConfig::Mode::Smooth;
  throw ConfigError("unknown lg mode: '" + s + "' (expected literal|smooth)");
}

std::string lg_mode_name(LgConfig::Mode m) {
  return m == LgConfig::Mode::Literal ? "literal" : "smooth";
}

LgConfig::MaskSource parse_mask_source(const std::string& s) {
  if (s == "init") return LgConfig::MaskSource::Init;
  if (s == "final") return LgConfig::MaskSource::Final;
  throw ConfigError("unknown lg mask source: '" + s + "' (expected init|final)");
}

std::string mask_source_name(LgConfig::MaskSource m) {
  return m == LgConfig::MaskSource::Init ? "init" : "final";
}

void validate_lg_config(const LgConfig& cfg) {
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0))
    throw RangeError("lg: alpha must lie in [0, 1], got " + std::to_string(cfg.alpha));
}

ChangedMask changed_mask(const Tensor& pred, const Tensor& feat) {
  if (pred.ndim() != 2) throw ShapeMismatch("changed_mask: pred must be (H,W)");
  if (feat.ndim() != 3) throw ShapeMismatch("changed_mask: feat must be (C,h,w)");
  const i64 c = feat.size(0), h = feat.size(1), w = feat.size(2);
  Tensor small = (pred.size(0) == h && pred.size(1) == w) ? pred : nearest_resize(pred, h, w);

  ChangedMask out;
  out.m_c = Tensor({c, h, w});
  out.changed_pixels = 0;
  for (i64 i = 0; i < small.numel(); ++i)
    if (small[i] > 0.5) ++out.changed_pixels;
  out.presence = out.changed_pixels > 0;
  for (i64 ch = 0; ch < c; ++ch)
    for (i64 i = 0; i < h * w; ++i)
      out.m_c[ch * h * w + i] = feat[ch * h * w + i] * (small[i] > 0.5 ? 1.0 : 0.0);
  return out;
}

double lg_penalty_literal(int y_cls, bool presence, double alpha) {
  if (y_cls != 0 && y_cls != 1) throw LabelError("lg penalty: label must be 0 or 1");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw RangeError("lg penalty: alpha must lie in [0, 1], got " + std::to_string(alpha));
  if (y_cls == 1) return presence ? 0.0 : alpha;
  return presence ? alpha : 0.0;
}

double lg_penalty(int y_cls, const ChangedMask& mask, const LgConfig& cfg,
                  const Tensor* dp_logits) {
  validate_lg_config(cfg);
  if (cfg.mode == LgConfig::Mode::Literal)
    return lg_penalty_literal(y_cls, mask.presence, cfg.alpha);
  if (!dp_logits || !dp_logits->defined())
    throw ConfigError("lg penalty: smooth mode needs decoder logits");
  if (y_cls != 0 && y_cls != 1) throw LabelError("lg penalty: label must be 0 or 1");
  // max of sigmoid == sigmoid of max; evaluate on the single maximum.
  double m = sigmoid(Tensor::scalar(max_all(*dp_logits))).item();
  return y_cls == 1 ? cfg.alpha * (1.0 - m) : cfg.alpha * m;
}

ad::Var lg_penalty_smooth(int y_cls, const ad::Var& m, double alpha) {
  if (y_cls != 0 && y_cls != 1) throw LabelError("lg penalty: label must be 0 or 1");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw RangeError("lg penalty: alpha must lie in [0, 1], got " + std::to_string(alpha));
  if (m->value.numel() != 1) throw ShapeMismatch("lg penalty: m must be scalar");
  if (y_cls == 1) return ad::add_scalar(ad::scale(m, -alpha), alpha);  // alpha * (1 - m)
  return ad::scale(m, alpha);
}

}  // namespace wcd

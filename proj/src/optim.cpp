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

#include "wcd/optim.hpp"

#include <cmath>

#include "wcd/errors.hpp"

namespace wcd {

double lr_at(i64 iteration, LrGroup group, const LrSchedule& cfg) {
  if (iteration < 0 || iteration > cfg.max_iterations) {
    throw RangeError("lr_at: iteration outside [0, max_iterations]");
  }
  if (cfg.warmup_iterations < 0 || cfg.warmup_iterations >= cfg.max_iterations) {
    throw RangeError("lr_at: require 0 <= warmup < max_iterations");
  }
  double lr;
  if (iteration < cfg.warmup_iterations) {
    lr = cfg.base_lr * static_cast<double>(iteration + 1) /
         static_cast<double>(cfg.warmup_iterations);
  } else {
    const double progress = static_cast<double>(iteration - cfg.warmup_iterations) /
                            static_cast<double>(cfg.max_iterations - cfg.warmup_iterations);
    lr = cfg.base_lr * std::pow(1.0 - progress, cfg.poly_power);
  }
  return group == LrGroup::Head ? lr * cfg.head_lr_mult : lr;
}

AdamW::AdamW(double weight_decay, double beta1, double beta2, double eps)
    : weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (weight_decay < 0.0) throw RangeError("AdamW: weight_decay must be non-negative");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw RangeError("AdamW: betas must lie in [0,1)");
  }
  if (!(eps > 0.0)) throw RangeError("AdamW: eps must be positive");
}

void AdamW::add_param(const std::string& name, const ad::Var& var, LrGroup group, bool decay,
                      i64 gate_start) {
  if (!var) throw ConfigError("AdamW: null parameter '" + name + "'");
  Slot slot;
  slot.name = name;
  slot.var = var;
  slot.group = group;
  slot.decay = decay;
  slot.gate_start = gate_start;
  slot.m = Tensor::zeros(var->value.shape());
  slot.v = Tensor::zeros(var->value.shape());
  slots_.push_back(std::move(slot));
}

void AdamW::step(i64 iteration, double lr_backbone, double lr_head) {
  for (Slot& slot : slots_) {
    if (iteration < slot.gate_start) continue;
    slot.var->ensure_grad();
    const Tensor& g = slot.var->grad;
    Tensor& p = slot.var->value;
    slot.t += 1;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(slot.t));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(slot.t));
    const double lr = slot.group == LrGroup::Head ? lr_head : lr_backbone;
    const double wd = slot.decay ? weight_decay_ : 0.0;
    for (i64 i = 0; i < p.numel(); ++i) {
      const double gi = g[i];
      slot.m[i] = beta1_ * slot.m[i] + (1.0 - beta1_) * gi;
      slot.v[i] = beta2_ * slot.v[i] + (1.0 - beta2_) * gi * gi;
      const double mhat = slot.m[i] / bc1;
      const double vhat = slot.v[i] / bc2;
      p[i] -= lr * (mhat / (std::sqrt(vhat) + eps_) + wd * p[i]);
    }
  }
}

void AdamW::zero_grads() {
  for (Slot& slot : slots_) slot.var->clear_grad();
}

}  // namespace wcd

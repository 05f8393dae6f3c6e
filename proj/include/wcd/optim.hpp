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

#ifndef WCD_OPTIM_HPP_
#define WCD_OPTIM_HPP_

#include <string>
#include <vector>

#include "wcd/autodiff.hpp"
#include "wcd/tensor.hpp"

namespace wcd {

struct LrSchedule {
  double base_lr = 5e-5;
  double head_lr_mult = 10.0;
  i64 max_iterations = 30000;
  i64 warmup_iterations = 1500;
  double poly_power = 0.9;
};

enum class LrGroup { Backbone, Head };

/// Linear warm-up into polynomial decay. During warm-up the rate ramps as
/// base*(iter+1)/warmup; afterwards base*(1-(iter-warmup)/(max-warmup))^power.
/// Both branches give exactly base at iter == warmup, and 0 at iter == max.
/// The head group is the backbone rate times head_lr_mult.
/// Throws RangeError unless 0 <= iteration <= max_iterations.
double lr_at(i64 iteration, LrGroup group, const LrSchedule& cfg);

/// Adam with decoupled weight decay and per-parameter learning-rate group.
/// A slot only starts accumulating moment statistics at its gate iteration,
/// which is how decoder parameters stay frozen until their loss term opens.
class AdamW {
 public:
  struct Slot {
    std::string name;
    ad::Var var;
    LrGroup group = LrGroup::Backbone;
    bool decay = true;   // weight matrices yes; biases and norm affines no
    i64 gate_start = 0;  // first iteration at which this slot updates
    Tensor m, v;
    i64 t = 0;
  };

  explicit AdamW(double weight_decay = 0.01, double beta1 = 0.9, double beta2 = 0.999,
                 double eps = 1e-8);

  void add_param(const std::string& name, const ad::Var& var, LrGroup group, bool decay,
                 i64 gate_start = 0);

  /// One update over every gated-open slot. Gradients are read from each
  /// slot's autodiff node and must already be accumulated.
  void step(i64 iteration, double lr_backbone, double lr_head);

  void zero_grads();

  std::vector<Slot>& slots() { return slots_; }
  const std::vector<Slot>& slots() const { return slots_; }

  double weight_decay() const { return weight_decay_; }
  double beta1() const { return beta1_; }
  double beta2() const { return beta2_; }
  double eps() const { return eps_; }

 private:
  double weight_decay_, beta1_, beta2_, eps_;
  std::vector<Slot> slots_;
};

}  // namespace wcd

#endif  // WCD_OPTIM_HPP_

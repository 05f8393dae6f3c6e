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

#ifndef WCD_AUTODIFF_HPP_
#define WCD_AUTODIFF_HPP_

#include <functional>
#include <memory>
#include <vector>

#include "wcd/tensor.hpp"

namespace wcd {
class Rng;
}

namespace wcd::ad {

struct Node;
using Var = std::shared_ptr<Node>;

/// One vertex of the reverse-mode tape. Leaves carry parameters or inputs;
/// interior nodes keep the closure that routes gradients to their parents.
struct Node {
  Tensor value;
  Tensor grad;  // allocated on first accumulation
  bool requires_grad = false;
  std::vector<Var> parents;
  std::function<void(const Node&)> backward_fn;

  void ensure_grad();
  void accumulate(const Tensor& g);
  void clear_grad() { grad = Tensor(); }
};

/// Thread-local flag: while false, newly built nodes record no tape.
bool grad_enabled();
void set_grad_enabled(bool on);

struct NoGradGuard {
  NoGradGuard() : prev_(grad_enabled()) { set_grad_enabled(false); }
  ~NoGradGuard() { set_grad_enabled(prev_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

Var leaf(Tensor value, bool requires_grad);
inline Var constant(Tensor value) { return leaf(std::move(value), false); }
inline Var scalar_const(double v) { return constant(Tensor::scalar(v)); }

/// Copy of x's value with no tape attached.
Var detach(const Var& x);

/// Reverse pass from a scalar loss. Gradients accumulate into .grad of every
/// reachable node with requires_grad; call Node::clear_grad between steps.
void backward(const Var& loss);

// ====== arithmetic ======

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
/// sum_i coeff_i * v_i over same-shape tensors.
Var weighted_sum(const std::vector<Var>& vs, const std::vector<double>& coeffs);
/// Arithmetic mean of same-shape vars.
Var average(const std::vector<Var>& vs);

// ====== reductions ======

Var sum_all(const Var& x);
Var mean_all(const Var& x);
/// Maximum element as a scalar; the subgradient flows to the first argmax.
Var max_all(const Var& x);

// ====== activations ======

Var relu(const Var& x);
Var gelu(const Var& x);
Var sigmoid(const Var& x);
Var abs_diff(const Var& a, const Var& b);

// ====== linear / attention primitives ======

Var matmul(const Var& a, const Var& b);
Var transpose2d(const Var& a);
Var linear(const Var& x, const Var& w, const Var& b);  // b may be null
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-6);
Var softmax_rows(const Var& x);
Var take_cols(const Var& x, i64 c0, i64 c1);
Var concat_cols(const std::vector<Var>& parts);

// ====== convolution / layout ======

Var conv2d(const Var& x, const Var& w, const Var& b, const Conv2dSpec& spec);
Var bilinear_resize(const Var& x, i64 out_h, i64 out_w);
Var chw_to_tokens(const Var& x);
Var tokens_to_chw(const Var& t, i64 h, i64 w);
Var reshape(const Var& x, Shape shape);
Var concat_channels(const std::vector<Var>& parts);

/// Inverted dropout; identity when p == 0. Mask draws come from `rng`.
Var dropout(const Var& x, double p, Rng& rng);

// ====== losses ======

/// Mean over elements of the numerically stable binary cross entropy with
/// logits: max(p,0) - p*y + log(1 + exp(-|p|)).
Var bce_with_logits_mean(const Var& logits, const Tensor& targets);

}  // namespace wcd::ad

#endif  // WCD_AUTODIFF_HPP_

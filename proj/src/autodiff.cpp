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

#include "wcd/autodiff.hpp"

#include <cmath>
#include <unordered_set>

#include "wcd/errors.hpp"
#include "wcd/rng.hpp"

namespace wcd::ad {

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }
void set_grad_enabled(bool on) { g_grad_enabled = on; }

void Node::ensure_grad() {
  if (!grad.defined()) grad = Tensor(value.shape());
}

void Node::accumulate(const Tensor& g) {
  ensure_grad();
  if (!grad.same_shape(g))
    throw ShapeMismatch("gradient shape " + shape_str(g.shape()) + " vs value " +
                        shape_str(value.shape()));
  for (i64 i = 0; i < g.numel(); ++i) grad[i] += g[i];
}

Var leaf(Tensor value, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  return n;
}

Var detach(const Var& x) { return leaf(x->value, false); }

namespace {

/// Builds an interior node. The tape is only recorded when gradients are
/// enabled and at least one parent needs them.
Var make_node(Tensor value, std::vector<Var> parents, std::function<void(const Node&)> fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  if (g_grad_enabled) {
    bool any = false;
    for (const Var& p : parents)
      if (p && p->requires_grad) any = true;
    if (any) {
      n->requires_grad = true;
      n->parents = std::move(parents);
      n->backward_fn = std::move(fn);
    }
  }
  return n;
}

bool needs(const Var& v) { return v && v->requires_grad; }

}  // namespace

void backward(const Var& loss) {
  if (!loss) throw Error("backward: null loss");
  if (loss->value.numel() != 1) throw ShapeMismatch("backward: loss is not a scalar");
  if (!loss->requires_grad) throw Error("backward: loss does not require grad");

  // Iterative post-order DFS so deep graphs cannot overflow the stack.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.get(), 0);
  visited.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p && p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss->ensure_grad();
  loss->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn) {
      n->ensure_grad();
      n->backward_fn(*n);
    }
  }
}

// ====== arithmetic ======

Var add(const Var& a, const Var& b) {
  Tensor v = wcd::add(a->value, b->value);
  return make_node(std::move(v), {a, b}, [a, b](const Node& n) {
    if (needs(a)) a->accumulate(n.grad);
    if (needs(b)) b->accumulate(n.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  Tensor v = wcd::sub(a->value, b->value);
  return make_node(std::move(v), {a, b}, [a, b](const Node& n) {
    if (needs(a)) a->accumulate(n.grad);
    if (needs(b)) b->accumulate(wcd::scale(n.grad, -1.0));
  });
}

Var mul(const Var& a, const Var& b) {
  Tensor v = wcd::mul(a->value, b->value);
  return make_node(std::move(v), {a, b}, [a, b](const Node& n) {
    if (needs(a)) a->accumulate(wcd::mul(n.grad, b->value));
    if (needs(b)) b->accumulate(wcd::mul(n.grad, a->value));
  });
}

Var scale(const Var& a, double s) {
  return make_node(wcd::scale(a->value, s), {a}, [a, s](const Node& n) {
    if (needs(a)) a->accumulate(wcd::scale(n.grad, s));
  });
}

Var add_scalar(const Var& a, double s) {
  return make_node(wcd::add_scalar(a->value, s), {a}, [a](const Node& n) {
    if (needs(a)) a->accumulate(n.grad);
  });
}

Var weighted_sum(const std::vector<Var>& vs, const std::vector<double>& coeffs) {
  if (vs.empty() || vs.size() != coeffs.size()) throw RangeError("weighted_sum: size mismatch");
  Tensor v(vs[0]->value.shape());
  for (std::size_t k = 0; k < vs.size(); ++k) {
    if (!vs[k]->value.same_shape(v)) throw ShapeMismatch("weighted_sum: shape mismatch");
    for (i64 i = 0; i < v.numel(); ++i) v[i] += coeffs[k] * vs[k]->value[i];
  }
  std::vector<Var> parents(vs.begin(), vs.end());
  std::vector<double> cs = coeffs;
  auto vs_copy = vs;
  return make_node(std::move(v), std::move(parents), [vs_copy, cs](const Node& n) {
    for (std::size_t k = 0; k < vs_copy.size(); ++k)
      if (needs(vs_copy[k])) vs_copy[k]->accumulate(wcd::scale(n.grad, cs[k]));
  });
}

Var average(const std::vector<Var>& vs) {
  std::vector<double> cs(vs.size(), 1.0 / static_cast<double>(vs.size()));
  return weighted_sum(vs, cs);
}

// ====== reductions ======

Var sum_all(const Var& x) {
  Tensor v = Tensor::scalar(wcd::sum_all(x->value));
  return make_node(std::move(v), {x}, [x](const Node& n) {
    if (needs(x)) x->accumulate(Tensor::full(x->value.shape(), n.grad[0]));
  });
}

Var mean_all(const Var& x) {
  Tensor v = Tensor::scalar(wcd::mean_all(x->value));
  i64 count = x->value.numel();
  return make_node(std::move(v), {x}, [x, count](const Node& n) {
    if (needs(x))
      x->accumulate(Tensor::full(x->value.shape(), n.grad[0] / static_cast<double>(count)));
  });
}

Var max_all(const Var& x) {
  i64 arg = 0;
  Tensor v = Tensor::scalar(wcd::max_all(x->value, &arg));
  return make_node(std::move(v), {x}, [x, arg](const Node& n) {
    if (needs(x)) {
      Tensor g(x->value.shape());
      g[arg] = n.grad[0];
      x->accumulate(g);
    }
  });
}

// ====== activations ======

Var relu(const Var& x) {
  return make_node(wcd::relu(x->value), {x}, [x](const Node& n) {
    if (needs(x)) x->accumulate(wcd::relu_backward(x->value, n.grad));
  });
}

Var gelu(const Var& x) {
  return make_node(wcd::gelu(x->value), {x}, [x](const Node& n) {
    if (needs(x)) x->accumulate(wcd::gelu_backward(x->value, n.grad));
  });
}

Var sigmoid(const Var& x) {
  Tensor y = wcd::sigmoid(x->value);
  Tensor y_saved = y;
  return make_node(std::move(y), {x}, [x, y_saved](const Node& n) {
    if (needs(x)) x->accumulate(wcd::sigmoid_backward(y_saved, n.grad));
  });
}

Var abs_diff(const Var& a, const Var& b) {
  Tensor d = wcd::sub(a->value, b->value);
  Tensor v = wcd::abs_elems(d);
  Tensor sign(d.shape());
  for (i64 i = 0; i < d.numel(); ++i) sign[i] = d[i] > 0.0 ? 1.0 : (d[i] < 0.0 ? -1.0 : 0.0);
  return make_node(std::move(v), {a, b}, [a, b, sign](const Node& n) {
    Tensor g = wcd::mul(n.grad, sign);
    if (needs(a)) a->accumulate(g);
    if (needs(b)) b->accumulate(wcd::scale(g, -1.0));
  });
}

// ====== linear / attention primitives ======

Var matmul(const Var& a, const Var& b) {
  Tensor v = wcd::matmul(a->value, b->value);
  return make_node(std::move(v), {a, b}, [a, b](const Node& n) {
    if (needs(a)) a->accumulate(wcd::matmul(n.grad, wcd::transpose2d(b->value)));
    if (needs(b)) b->accumulate(wcd::matmul(wcd::transpose2d(a->value), n.grad));
  });
}

Var transpose2d(const Var& a) {
  return make_node(wcd::transpose2d(a->value), {a}, [a](const Node& n) {
    if (needs(a)) a->accumulate(wcd::transpose2d(n.grad));
  });
}

Var linear(const Var& x, const Var& w, const Var& b) {
  Tensor v = wcd::linear(x->value, w->value, b ? b->value : Tensor());
  return make_node(std::move(v), {x, w, b}, [x, w, b](const Node& n) {
    if (needs(x)) x->accumulate(wcd::matmul(n.grad, wcd::transpose2d(w->value)));
    if (needs(w)) w->accumulate(wcd::matmul(wcd::transpose2d(x->value), n.grad));
    if (needs(b)) {
      Tensor gb({b->value.numel()});
      for (i64 i = 0; i < n.grad.size(0); ++i)
        for (i64 j = 0; j < n.grad.size(1); ++j) gb[j] += n.grad.at(i, j);
      b->accumulate(gb);
    }
  });
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  Tensor xhat, rstd;
  Tensor v = wcd::layer_norm_rows(x->value, gamma->value, beta->value, eps, &xhat, &rstd);
  return make_node(std::move(v), {x, gamma, beta}, [x, gamma, beta, xhat, rstd](const Node& n) {
    Tensor gx, gg, gb;
    wcd::layer_norm_rows_backward(n.grad, xhat, rstd, gamma->value, needs(x) ? &gx : nullptr,
                                  needs(gamma) ? &gg : nullptr, needs(beta) ? &gb : nullptr);
    if (needs(x)) x->accumulate(gx);
    if (needs(gamma)) gamma->accumulate(gg);
    if (needs(beta)) beta->accumulate(gb);
  });
}

Var softmax_rows(const Var& x) {
  Tensor y = wcd::softmax_rows(x->value);
  Tensor y_saved = y;
  return make_node(std::move(y), {x}, [x, y_saved](const Node& n) {
    if (needs(x)) x->accumulate(wcd::softmax_rows_backward(n.grad, y_saved));
  });
}

Var take_cols(const Var& x, i64 c0, i64 c1) {
  return make_node(wcd::take_cols(x->value, c0, c1), {x}, [x, c0, c1](const Node& n) {
    if (needs(x)) {
      Tensor g(x->value.shape());
      for (i64 i = 0; i < g.size(0); ++i)
        for (i64 j = c0; j < c1; ++j) g.at(i, j) = n.grad.at(i, j - c0);
      x->accumulate(g);
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  std::vector<const Tensor*> vals;
  vals.reserve(parts.size());
  for (const Var& p : parts) vals.push_back(&p->value);
  Tensor v = wcd::concat_cols(vals);
  auto ps = parts;
  return make_node(std::move(v), parts, [ps](const Node& n) {
    i64 c0 = 0;
    for (const Var& p : ps) {
      i64 c = p->value.size(1);
      if (needs(p)) p->accumulate(wcd::take_cols(n.grad, c0, c0 + c));
      c0 += c;
    }
  });
}

// ====== convolution / layout ======

Var conv2d(const Var& x, const Var& w, const Var& b, const Conv2dSpec& spec) {
  Tensor v = wcd::conv2d(x->value, w->value, b ? b->value : Tensor(), spec);
  return make_node(std::move(v), {x, w, b}, [x, w, b, spec](const Node& n) {
    Tensor gx, gw, gb;
    wcd::conv2d_backward(x->value, w->value, spec, n.grad, needs(x) ? &gx : nullptr,
                         needs(w) ? &gw : nullptr, needs(b) ? &gb : nullptr);
    if (needs(x)) x->accumulate(gx);
    if (needs(w)) w->accumulate(gw);
    if (needs(b)) b->accumulate(gb);
  });
}

Var bilinear_resize(const Var& x, i64 out_h, i64 out_w) {
  const i64 in_h = x->value.size(1), in_w = x->value.size(2);
  Tensor v = wcd::bilinear_resize(x->value, out_h, out_w);
  return make_node(std::move(v), {x}, [x, in_h, in_w](const Node& n) {
    if (needs(x)) x->accumulate(wcd::bilinear_resize_backward(n.grad, in_h, in_w));
  });
}

Var chw_to_tokens(const Var& x) {
  const i64 h = x->value.size(1), w = x->value.size(2);
  return make_node(wcd::chw_to_tokens(x->value), {x}, [x, h, w](const Node& n) {
    if (needs(x)) x->accumulate(wcd::tokens_to_chw(n.grad, h, w));
  });
}

Var tokens_to_chw(const Var& t, i64 h, i64 w) {
  return make_node(wcd::tokens_to_chw(t->value, h, w), {t}, [t](const Node& n) {
    if (needs(t)) t->accumulate(wcd::chw_to_tokens(n.grad));
  });
}

Var reshape(const Var& x, Shape shape) {
  Shape orig = x->value.shape();
  return make_node(x->value.reshaped(std::move(shape)), {x}, [x, orig](const Node& n) {
    if (needs(x)) x->accumulate(n.grad.reshaped(orig));
  });
}

Var concat_channels(const std::vector<Var>& parts) {
  std::vector<const Tensor*> vals;
  vals.reserve(parts.size());
  for (const Var& p : parts) vals.push_back(&p->value);
  Tensor v = wcd::concat_channels(vals);
  auto ps = parts;
  return make_node(std::move(v), parts, [ps](const Node& n) {
    i64 c0 = 0;
    for (const Var& p : ps) {
      i64 c = p->value.size(0);
      if (needs(p)) {
        Tensor g({c, n.grad.size(1), n.grad.size(2)});
        std::copy(n.grad.data() + c0 * n.grad.size(1) * n.grad.size(2),
                  n.grad.data() + (c0 + c) * n.grad.size(1) * n.grad.size(2), g.data());
        p->accumulate(g);
      }
      c0 += c;
    }
  });
}

Var dropout(const Var& x, double p, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw RangeError("dropout: p must be in [0, 1)");
  if (p == 0.0) return x;
  Tensor mask(x->value.shape());
  const double keep = 1.0 - p;
  for (i64 i = 0; i < mask.numel(); ++i) mask[i] = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
  Tensor v = wcd::mul(x->value, mask);
  return make_node(std::move(v), {x}, [x, mask](const Node& n) {
    if (needs(x)) x->accumulate(wcd::mul(n.grad, mask));
  });
}

// ====== losses ======

Var bce_with_logits_mean(const Var& logits, const Tensor& targets) {
  if (!logits->value.same_shape(targets))
    throw ShapeMismatch("bce_with_logits: logits " + shape_str(logits->value.shape()) +
                        " vs targets " + shape_str(targets.shape()));
  const Tensor& p = logits->value;
  double acc = 0.0;
  for (i64 i = 0; i < p.numel(); ++i) {
    double v = p[i];
    acc += std::max(v, 0.0) - v * targets[i] + std::log1p(std::exp(-std::fabs(v)));
  }
  const i64 count = p.numel();
  Tensor v = Tensor::scalar(acc / static_cast<double>(count));
  Tensor y = targets;
  return make_node(std::move(v), {logits}, [logits, y, count](const Node& n) {
    if (needs(logits)) {
      Tensor g(logits->value.shape());
      double s = n.grad[0] / static_cast<double>(count);
      for (i64 i = 0; i < g.numel(); ++i) {
        double v = logits->value[i];
        double sig = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
        g[i] = s * (sig - y[i]);
      }
      logits->accumulate(g);
    }
  });
}

}  // namespace wcd::ad

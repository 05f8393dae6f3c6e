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

#include "wcd/tensor.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "wcd/errors.hpp"

namespace wcd {

namespace {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatRM>;
using MapC = Eigen::Map<const MatRM>;

i64 shape_numel(const Shape& s) {
  i64 n = 1;
  for (i64 d : s) {
    if (d <= 0) throw ShapeMismatch("non-positive dimension in shape " + shape_str(s));
    n *= d;
  }
  return n;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b))
    throw ShapeMismatch(std::string(what) + ": " + shape_str(a.shape()) + " vs " +
                        shape_str(b.shape()));
}

void check_rank(const Tensor& t, i64 rank, const char* what) {
  if (t.ndim() != rank)
    throw ShapeMismatch(std::string(what) + ": expected rank " + std::to_string(rank) +
                        ", got shape " + shape_str(t.shape()));
}

}  // namespace

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ")";
  return os.str();
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  data_.assign(static_cast<std::size_t>(shape_numel(shape_)), 0.0);
}

Tensor Tensor::full(Shape shape, double v) {
  Tensor t(std::move(shape));
  std::fill(t.data_.begin(), t.data_.end(), v);
  return t;
}

Tensor Tensor::from(Shape shape, std::vector<double> values) {
  Tensor t;
  t.shape_ = std::move(shape);
  if (shape_numel(t.shape_) != static_cast<i64>(values.size()))
    throw ShapeMismatch("from: " + std::to_string(values.size()) + " values for shape " +
                        shape_str(t.shape_));
  t.data_ = std::move(values);
  return t;
}

i64 Tensor::size(i64 d) const {
  if (d < 0 || d >= ndim()) throw ShapeMismatch("size: axis " + std::to_string(d) + " out of range");
  return shape_[static_cast<std::size_t>(d)];
}

double Tensor::item() const {
  if (numel() != 1) throw ShapeMismatch("item: tensor has " + std::to_string(numel()) + " elements");
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_numel(shape) != numel())
    throw ShapeMismatch("reshaped: " + shape_str(shape_) + " -> " + shape_str(shape));
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = data_;
  return t;
}

// ====== elementwise ======

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  Tensor out(a.shape());
  for (i64 i = 0; i < a.numel(); ++i) out[i] = a[i] + b[i];
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  Tensor out(a.shape());
  for (i64 i = 0; i < a.numel(); ++i) out[i] = a[i] - b[i];
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  Tensor out(a.shape());
  for (i64 i = 0; i < a.numel(); ++i) out[i] = a[i] * b[i];
  return out;
}

Tensor scale(const Tensor& a, double s) {
  Tensor out(a.shape());
  for (i64 i = 0; i < a.numel(); ++i) out[i] = a[i] * s;
  return out;
}

Tensor add_scalar(const Tensor& a, double s) {
  Tensor out(a.shape());
  for (i64 i = 0; i < a.numel(); ++i) out[i] = a[i] + s;
  return out;
}

Tensor relu(const Tensor& x) {
  Tensor out(x.shape());
  for (i64 i = 0; i < x.numel(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  return out;
}

Tensor gelu(const Tensor& x) {
  Tensor out(x.shape());
  for (i64 i = 0; i < x.numel(); ++i) out[i] = 0.5 * x[i] * (1.0 + std::erf(x[i] * M_SQRT1_2));
  return out;
}

Tensor sigmoid(const Tensor& x) {
  Tensor out(x.shape());
  for (i64 i = 0; i < x.numel(); ++i) {
    double v = x[i];
    out[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  }
  return out;
}

Tensor abs_elems(const Tensor& x) {
  Tensor out(x.shape());
  for (i64 i = 0; i < x.numel(); ++i) out[i] = std::fabs(x[i]);
  return out;
}

Tensor clamp_min(const Tensor& x, double lo) {
  Tensor out(x.shape());
  for (i64 i = 0; i < x.numel(); ++i) out[i] = x[i] < lo ? lo : x[i];
  return out;
}

Tensor clamp(const Tensor& x, double lo, double hi) {
  Tensor out(x.shape());
  for (i64 i = 0; i < x.numel(); ++i) out[i] = std::min(hi, std::max(lo, x[i]));
  return out;
}

double sum_all(const Tensor& x) {
  double s = 0.0;
  for (i64 i = 0; i < x.numel(); ++i) s += x[i];
  return s;
}

double mean_all(const Tensor& x) {
  if (x.numel() == 0) throw ShapeMismatch("mean_all: empty tensor");
  return sum_all(x) / static_cast<double>(x.numel());
}

double max_all(const Tensor& x, i64* argmax) {
  if (x.numel() == 0) throw ShapeMismatch("max_all: empty tensor");
  double best = x[0];
  i64 arg = 0;
  for (i64 i = 1; i < x.numel(); ++i)
    if (x[i] > best) {
      best = x[i];
      arg = i;
    }
  if (argmax) *argmax = arg;
  return best;
}

// ====== linear algebra ======

Tensor matmul(const Tensor& a, const Tensor& b) {
  check_rank(a, 2, "matmul lhs");
  check_rank(b, 2, "matmul rhs");
  if (a.size(1) != b.size(0))
    throw ShapeMismatch("matmul: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  Tensor out({a.size(0), b.size(1)});
  MapC A(a.data(), a.size(0), a.size(1));
  MapC B(b.data(), b.size(0), b.size(1));
  MapM O(out.data(), out.size(0), out.size(1));
  O.noalias() = A * B;
  return out;
}

Tensor transpose2d(const Tensor& a) {
  check_rank(a, 2, "transpose2d");
  Tensor out({a.size(1), a.size(0)});
  for (i64 i = 0; i < a.size(0); ++i)
    for (i64 j = 0; j < a.size(1); ++j) out.at(j, i) = a.at(i, j);
  return out;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  Tensor out = matmul(x, w);
  if (b.defined()) {
    if (b.numel() != out.size(1)) throw ShapeMismatch("linear: bias size " + shape_str(b.shape()));
    for (i64 i = 0; i < out.size(0); ++i)
      for (i64 j = 0; j < out.size(1); ++j) out.at(i, j) += b[j];
  }
  return out;
}

// ====== convolution ======

i64 conv_out_dim(i64 in, i64 k, i64 stride, i64 pad, i64 dilation) {
  i64 eff = dilation * (k - 1) + 1;
  i64 out = (in + 2 * pad - eff) / stride + 1;
  if (out <= 0)
    throw DimensionError("convolution output collapses: in=" + std::to_string(in) +
                         " k=" + std::to_string(k) + " stride=" + std::to_string(stride) +
                         " pad=" + std::to_string(pad) + " dilation=" + std::to_string(dilation));
  return out;
}

Tensor im2col(const Tensor& x, i64 kh, i64 kw, const Conv2dSpec& spec) {
  check_rank(x, 3, "im2col");
  const i64 cin = x.size(0), h = x.size(1), w = x.size(2);
  const i64 ho = conv_out_dim(h, kh, spec.stride, spec.pad, spec.dilation);
  const i64 wo = conv_out_dim(w, kw, spec.stride, spec.pad, spec.dilation);
  Tensor cols({cin * kh * kw, ho * wo});
  double* dst = cols.data();
  for (i64 c = 0; c < cin; ++c)
    for (i64 ky = 0; ky < kh; ++ky)
      for (i64 kx = 0; kx < kw; ++kx)
        for (i64 oy = 0; oy < ho; ++oy) {
          i64 iy = oy * spec.stride - spec.pad + ky * spec.dilation;
          if (iy < 0 || iy >= h) {
            dst += wo;
            continue;
          }
          const double* src = &x.at(c, iy, 0);
          for (i64 ox = 0; ox < wo; ++ox) {
            i64 ix = ox * spec.stride - spec.pad + kx * spec.dilation;
            *dst++ = (ix >= 0 && ix < w) ? src[ix] : 0.0;
          }
        }
  return cols;
}

Tensor col2im(const Tensor& cols, i64 cin, i64 h, i64 w, i64 kh, i64 kw, const Conv2dSpec& spec) {
  const i64 ho = conv_out_dim(h, kh, spec.stride, spec.pad, spec.dilation);
  const i64 wo = conv_out_dim(w, kw, spec.stride, spec.pad, spec.dilation);
  if (cols.size(0) != cin * kh * kw || cols.size(1) != ho * wo)
    throw ShapeMismatch("col2im: cols shape " + shape_str(cols.shape()));
  Tensor out({cin, h, w});
  const double* src = cols.data();
  for (i64 c = 0; c < cin; ++c)
    for (i64 ky = 0; ky < kh; ++ky)
      for (i64 kx = 0; kx < kw; ++kx)
        for (i64 oy = 0; oy < ho; ++oy) {
          i64 iy = oy * spec.stride - spec.pad + ky * spec.dilation;
          if (iy < 0 || iy >= h) {
            src += wo;
            continue;
          }
          double* dst = &out.at(c, iy, 0);
          for (i64 ox = 0; ox < wo; ++ox) {
            i64 ix = ox * spec.stride - spec.pad + kx * spec.dilation;
            double v = *src++;
            if (ix >= 0 && ix < w) dst[ix] += v;
          }
        }
  return out;
}

namespace {

void conv_check(const Tensor& x, const Tensor& w, const Tensor& b, const Conv2dSpec& spec) {
  check_rank(x, 3, "conv2d input");
  check_rank(w, 4, "conv2d weight");
  if (spec.stride < 1 || spec.dilation < 1 || spec.pad < 0 || spec.groups < 1)
    throw ConfigError("conv2d: invalid stride/pad/dilation/groups");
  if (w.size(0) % spec.groups != 0)
    throw ShapeMismatch("conv2d: out channels not divisible by groups");
  if (x.size(0) != w.size(1) * spec.groups)
    throw ShapeMismatch("conv2d: input " + shape_str(x.shape()) + " vs weight " +
                        shape_str(w.shape()) + " with groups=" + std::to_string(spec.groups));
  if (b.defined() && b.numel() != w.size(0))
    throw ShapeMismatch("conv2d: bias shape " + shape_str(b.shape()));
}

Tensor slice_channels(const Tensor& x, i64 c0, i64 c1) {
  Tensor out({c1 - c0, x.size(1), x.size(2)});
  std::copy(x.data() + c0 * x.size(1) * x.size(2), x.data() + c1 * x.size(1) * x.size(2),
            out.data());
  return out;
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, const Conv2dSpec& spec) {
  conv_check(x, w, b, spec);
  const i64 cin = x.size(0), h = x.size(1), ww = x.size(2);
  const i64 cout = w.size(0), cpg = w.size(1), kh = w.size(2), kw = w.size(3);
  const i64 ho = conv_out_dim(h, kh, spec.stride, spec.pad, spec.dilation);
  const i64 wo = conv_out_dim(ww, kw, spec.stride, spec.pad, spec.dilation);
  Tensor out({cout, ho, wo});

  if (spec.groups == cin && cpg == 1 && cout == cin) {
    // depthwise: direct loops beat im2col at 3x3
    for (i64 c = 0; c < cin; ++c)
      for (i64 oy = 0; oy < ho; ++oy)
        for (i64 ox = 0; ox < wo; ++ox) {
          double acc = 0.0;
          for (i64 ky = 0; ky < kh; ++ky) {
            i64 iy = oy * spec.stride - spec.pad + ky * spec.dilation;
            if (iy < 0 || iy >= h) continue;
            for (i64 kx = 0; kx < kw; ++kx) {
              i64 ix = ox * spec.stride - spec.pad + kx * spec.dilation;
              if (ix < 0 || ix >= ww) continue;
              acc += x.at(c, iy, ix) * w.data()[(c * kh + ky) * kw + kx];
            }
          }
          out.at(c, oy, ox) = acc;
        }
  } else if (spec.groups == 1) {
    Tensor cols = im2col(x, kh, kw, spec);
    MapC W(w.data(), cout, cin * kh * kw);
    MapC C(cols.data(), cols.size(0), cols.size(1));
    MapM O(out.data(), cout, ho * wo);
    O.noalias() = W * C;
  } else {
    const i64 opg = cout / spec.groups;
    for (i64 g = 0; g < spec.groups; ++g) {
      Tensor xg = slice_channels(x, g * cpg, (g + 1) * cpg);
      Tensor cols = im2col(xg, kh, kw, spec);
      MapC W(w.data() + g * opg * cpg * kh * kw, opg, cpg * kh * kw);
      MapC C(cols.data(), cols.size(0), cols.size(1));
      MapM O(out.data() + g * opg * ho * wo, opg, ho * wo);
      O.noalias() = W * C;
    }
  }

  if (b.defined())
    for (i64 c = 0; c < cout; ++c) {
      double* p = out.data() + c * ho * wo;
      for (i64 i = 0; i < ho * wo; ++i) p[i] += b[c];
    }
  return out;
}

void conv2d_backward(const Tensor& x, const Tensor& w, const Conv2dSpec& spec,
                     const Tensor& grad_out, Tensor* gx, Tensor* gw, Tensor* gb) {
  conv_check(x, w, Tensor(), spec);
  const i64 cin = x.size(0), h = x.size(1), ww = x.size(2);
  const i64 cout = w.size(0), cpg = w.size(1), kh = w.size(2), kw = w.size(3);
  const i64 ho = conv_out_dim(h, kh, spec.stride, spec.pad, spec.dilation);
  const i64 wo = conv_out_dim(ww, kw, spec.stride, spec.pad, spec.dilation);
  if (grad_out.ndim() != 3 || grad_out.size(0) != cout || grad_out.size(1) != ho ||
      grad_out.size(2) != wo)
    throw ShapeMismatch("conv2d_backward: grad shape " + shape_str(grad_out.shape()));

  if (gb) {
    *gb = Tensor({cout});
    for (i64 c = 0; c < cout; ++c) {
      const double* p = grad_out.data() + c * ho * wo;
      double acc = 0.0;
      for (i64 i = 0; i < ho * wo; ++i) acc += p[i];
      (*gb)[c] = acc;
    }
  }

  if (!gx && !gw) return;

  if (spec.groups == cin && cpg == 1 && cout == cin) {
    if (gw) *gw = Tensor(w.shape());
    if (gx) *gx = Tensor(x.shape());
    for (i64 c = 0; c < cin; ++c)
      for (i64 oy = 0; oy < ho; ++oy)
        for (i64 ox = 0; ox < wo; ++ox) {
          double g = grad_out.at(c, oy, ox);
          for (i64 ky = 0; ky < kh; ++ky) {
            i64 iy = oy * spec.stride - spec.pad + ky * spec.dilation;
            if (iy < 0 || iy >= h) continue;
            for (i64 kx = 0; kx < kw; ++kx) {
              i64 ix = ox * spec.stride - spec.pad + kx * spec.dilation;
              if (ix < 0 || ix >= ww) continue;
              if (gw) (*gw).data()[(c * kh + ky) * kw + kx] += g * x.at(c, iy, ix);
              if (gx) (*gx).at(c, iy, ix) += g * w.data()[(c * kh + ky) * kw + kx];
            }
          }
        }
    return;
  }

  const i64 opg = cout / spec.groups;
  if (gw) *gw = Tensor(w.shape());
  if (gx) *gx = Tensor(x.shape());
  for (i64 g = 0; g < spec.groups; ++g) {
    Tensor xg = spec.groups == 1 ? Tensor() : slice_channels(x, g * cpg, (g + 1) * cpg);
    const Tensor& xin = spec.groups == 1 ? x : xg;
    MapC GO(grad_out.data() + g * opg * ho * wo, opg, ho * wo);
    if (gw) {
      Tensor cols = im2col(xin, kh, kw, spec);
      MapC C(cols.data(), cols.size(0), cols.size(1));
      MapM GW(gw->data() + g * opg * cpg * kh * kw, opg, cpg * kh * kw);
      GW.noalias() = GO * C.transpose();
    }
    if (gx) {
      Tensor colgrad({cpg * kh * kw, ho * wo});
      MapC W(w.data() + g * opg * cpg * kh * kw, opg, cpg * kh * kw);
      MapM CG(colgrad.data(), colgrad.size(0), colgrad.size(1));
      CG.noalias() = W.transpose() * GO;
      Tensor gxg = col2im(colgrad, cpg, h, ww, kh, kw, spec);
      std::copy(gxg.data(), gxg.data() + gxg.numel(), gx->data() + g * cpg * h * ww);
    }
  }
}

// ====== normalization / activations ======

Tensor layer_norm_rows(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps,
                       Tensor* save_xhat, Tensor* save_rstd) {
  check_rank(x, 2, "layer_norm");
  const i64 n = x.size(0), c = x.size(1);
  if (gamma.numel() != c || beta.numel() != c)
    throw ShapeMismatch("layer_norm: gamma/beta size mismatch");
  Tensor y(x.shape());
  Tensor xhat(x.shape());
  Tensor rstd({n});
  for (i64 i = 0; i < n; ++i) {
    const double* row = x.data() + i * c;
    double mean = 0.0;
    for (i64 j = 0; j < c; ++j) mean += row[j];
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (i64 j = 0; j < c; ++j) {
      double d = row[j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(c);
    double rs = 1.0 / std::sqrt(var + eps);
    rstd[i] = rs;
    for (i64 j = 0; j < c; ++j) {
      double xh = (row[j] - mean) * rs;
      xhat.at(i, j) = xh;
      y.at(i, j) = xh * gamma[j] + beta[j];
    }
  }
  if (save_xhat) *save_xhat = std::move(xhat);
  if (save_rstd) *save_rstd = std::move(rstd);
  return y;
}

void layer_norm_rows_backward(const Tensor& grad_out, const Tensor& xhat, const Tensor& rstd,
                              const Tensor& gamma, Tensor* gx, Tensor* ggamma, Tensor* gbeta) {
  const i64 n = grad_out.size(0), c = grad_out.size(1);
  if (ggamma) *ggamma = Tensor({c});
  if (gbeta) *gbeta = Tensor({c});
  if (gx) *gx = Tensor(grad_out.shape());
  for (i64 i = 0; i < n; ++i) {
    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
    for (i64 j = 0; j < c; ++j) {
      double go = grad_out.at(i, j);
      double dxhat = go * gamma[j];
      sum_dxhat += dxhat;
      sum_dxhat_xhat += dxhat * xhat.at(i, j);
      if (ggamma) (*ggamma)[j] += go * xhat.at(i, j);
      if (gbeta) (*gbeta)[j] += go;
    }
    if (gx) {
      double inv_c = 1.0 / static_cast<double>(c);
      for (i64 j = 0; j < c; ++j) {
        double dxhat = grad_out.at(i, j) * gamma[j];
        (*gx).at(i, j) =
            rstd[i] * (dxhat - inv_c * sum_dxhat - xhat.at(i, j) * inv_c * sum_dxhat_xhat);
      }
    }
  }
}

Tensor softmax_rows(const Tensor& x) {
  check_rank(x, 2, "softmax");
  const i64 n = x.size(0), c = x.size(1);
  Tensor y(x.shape());
  for (i64 i = 0; i < n; ++i) {
    const double* row = x.data() + i * c;
    double m = row[0];
    for (i64 j = 1; j < c; ++j) m = std::max(m, row[j]);
    double z = 0.0;
    for (i64 j = 0; j < c; ++j) {
      double e = std::exp(row[j] - m);
      y.at(i, j) = e;
      z += e;
    }
    for (i64 j = 0; j < c; ++j) y.at(i, j) /= z;
  }
  return y;
}

Tensor softmax_rows_backward(const Tensor& grad_out, const Tensor& y) {
  const i64 n = y.size(0), c = y.size(1);
  Tensor gx(y.shape());
  for (i64 i = 0; i < n; ++i) {
    double dot = 0.0;
    for (i64 j = 0; j < c; ++j) dot += grad_out.at(i, j) * y.at(i, j);
    for (i64 j = 0; j < c; ++j) gx.at(i, j) = y.at(i, j) * (grad_out.at(i, j) - dot);
  }
  return gx;
}

Tensor gelu_backward(const Tensor& x, const Tensor& grad_out) {
  check_same_shape(x, grad_out, "gelu_backward");
  Tensor gx(x.shape());
  const double inv_sqrt_2pi = 0.3989422804014326779;
  for (i64 i = 0; i < x.numel(); ++i) {
    double v = x[i];
    double cdf = 0.5 * (1.0 + std::erf(v * M_SQRT1_2));
    double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
    gx[i] = grad_out[i] * (cdf + v * pdf);
  }
  return gx;
}

Tensor relu_backward(const Tensor& x, const Tensor& grad_out) {
  check_same_shape(x, grad_out, "relu_backward");
  Tensor gx(x.shape());
  for (i64 i = 0; i < x.numel(); ++i) gx[i] = x[i] > 0.0 ? grad_out[i] : 0.0;
  return gx;
}

Tensor sigmoid_backward(const Tensor& y, const Tensor& grad_out) {
  check_same_shape(y, grad_out, "sigmoid_backward");
  Tensor gx(y.shape());
  for (i64 i = 0; i < y.numel(); ++i) gx[i] = grad_out[i] * y[i] * (1.0 - y[i]);
  return gx;
}

// ====== resampling ======

namespace {

struct LerpAxis {
  std::vector<i64> i0, i1;
  std::vector<double> f;
};

LerpAxis lerp_axis(i64 in, i64 out) {
  LerpAxis ax;
  ax.i0.resize(static_cast<std::size_t>(out));
  ax.i1.resize(static_cast<std::size_t>(out));
  ax.f.resize(static_cast<std::size_t>(out));
  double scale = static_cast<double>(in) / static_cast<double>(out);
  for (i64 o = 0; o < out; ++o) {
    double s = (static_cast<double>(o) + 0.5) * scale - 0.5;
    s = std::min(std::max(s, 0.0), static_cast<double>(in - 1));
    i64 lo = static_cast<i64>(std::floor(s));
    ax.i0[o] = lo;
    ax.i1[o] = std::min(lo + 1, in - 1);
    ax.f[o] = s - static_cast<double>(lo);
  }
  return ax;
}

}  // namespace

Tensor bilinear_resize(const Tensor& x, i64 out_h, i64 out_w) {
  check_rank(x, 3, "bilinear_resize");
  const i64 c = x.size(0), h = x.size(1), w = x.size(2);
  if (out_h <= 0 || out_w <= 0) throw RangeError("bilinear_resize: non-positive output size");
  if (out_h == h && out_w == w) return x;
  LerpAxis ay = lerp_axis(h, out_h), ax = lerp_axis(w, out_w);
  Tensor out({c, out_h, out_w});
  for (i64 ch = 0; ch < c; ++ch)
    for (i64 oy = 0; oy < out_h; ++oy) {
      const double fy = ay.f[oy];
      const double* r0 = &x.at(ch, ay.i0[oy], 0);
      const double* r1 = &x.at(ch, ay.i1[oy], 0);
      double* dst = &out.at(ch, oy, 0);
      for (i64 ox = 0; ox < out_w; ++ox) {
        const double fx = ax.f[ox];
        double top = r0[ax.i0[ox]] * (1.0 - fx) + r0[ax.i1[ox]] * fx;
        double bot = r1[ax.i0[ox]] * (1.0 - fx) + r1[ax.i1[ox]] * fx;
        dst[ox] = top * (1.0 - fy) + bot * fy;
      }
    }
  return out;
}

Tensor bilinear_resize_backward(const Tensor& grad_out, i64 in_h, i64 in_w) {
  check_rank(grad_out, 3, "bilinear_resize_backward");
  const i64 c = grad_out.size(0), oh = grad_out.size(1), ow = grad_out.size(2);
  if (oh == in_h && ow == in_w) return grad_out;
  LerpAxis ay = lerp_axis(in_h, oh), ax = lerp_axis(in_w, ow);
  Tensor gx({c, in_h, in_w});
  for (i64 ch = 0; ch < c; ++ch)
    for (i64 oy = 0; oy < oh; ++oy) {
      const double fy = ay.f[oy];
      double* r0 = &gx.at(ch, ay.i0[oy], 0);
      double* r1 = &gx.at(ch, ay.i1[oy], 0);
      const double* src = &grad_out.at(ch, oy, 0);
      for (i64 ox = 0; ox < ow; ++ox) {
        const double fx = ax.f[ox];
        double g = src[ox];
        r0[ax.i0[ox]] += g * (1.0 - fy) * (1.0 - fx);
        r0[ax.i1[ox]] += g * (1.0 - fy) * fx;
        r1[ax.i0[ox]] += g * fy * (1.0 - fx);
        r1[ax.i1[ox]] += g * fy * fx;
      }
    }
  return gx;
}

Tensor nearest_resize(const Tensor& x, i64 out_h, i64 out_w) {
  if (x.ndim() != 2 && x.ndim() != 3) throw ShapeMismatch("nearest_resize: rank must be 2 or 3");
  const bool flat = x.ndim() == 2;
  const i64 c = flat ? 1 : x.size(0);
  const i64 h = flat ? x.size(0) : x.size(1);
  const i64 w = flat ? x.size(1) : x.size(2);
  if (out_h <= 0 || out_w <= 0) throw RangeError("nearest_resize: non-positive output size");
  Tensor out(flat ? Shape{out_h, out_w} : Shape{c, out_h, out_w});
  std::vector<i64> ys(static_cast<std::size_t>(out_h)), xs(static_cast<std::size_t>(out_w));
  for (i64 o = 0; o < out_h; ++o)
    ys[o] = std::min<i64>(h - 1, static_cast<i64>((static_cast<double>(o) + 0.5) *
                                                  static_cast<double>(h) / static_cast<double>(out_h)));
  for (i64 o = 0; o < out_w; ++o)
    xs[o] = std::min<i64>(w - 1, static_cast<i64>((static_cast<double>(o) + 0.5) *
                                                  static_cast<double>(w) / static_cast<double>(out_w)));
  for (i64 ch = 0; ch < c; ++ch)
    for (i64 oy = 0; oy < out_h; ++oy) {
      const double* src = x.data() + (ch * h + ys[oy]) * w;
      double* dst = out.data() + (ch * out_h + oy) * out_w;
      for (i64 ox = 0; ox < out_w; ++ox) dst[ox] = src[xs[ox]];
    }
  return out;
}

// ====== layout ======

Tensor chw_to_tokens(const Tensor& x) {
  check_rank(x, 3, "chw_to_tokens");
  const i64 c = x.size(0), h = x.size(1), w = x.size(2);
  Tensor t({h * w, c});
  for (i64 ch = 0; ch < c; ++ch) {
    const double* src = x.data() + ch * h * w;
    for (i64 n = 0; n < h * w; ++n) t.at(n, ch) = src[n];
  }
  return t;
}

Tensor tokens_to_chw(const Tensor& t, i64 h, i64 w) {
  check_rank(t, 2, "tokens_to_chw");
  if (t.size(0) != h * w)
    throw ShapeMismatch("tokens_to_chw: " + std::to_string(t.size(0)) + " tokens for " +
                        std::to_string(h) + "x" + std::to_string(w));
  const i64 c = t.size(1);
  Tensor x({c, h, w});
  for (i64 ch = 0; ch < c; ++ch) {
    double* dst = x.data() + ch * h * w;
    for (i64 n = 0; n < h * w; ++n) dst[n] = t.at(n, ch);
  }
  return x;
}

Tensor concat_channels(const std::vector<const Tensor*>& parts) {
  if (parts.empty()) throw ShapeMismatch("concat_channels: no inputs");
  const i64 h = parts[0]->size(1), w = parts[0]->size(2);
  i64 c = 0;
  for (const Tensor* p : parts) {
    check_rank(*p, 3, "concat_channels");
    if (p->size(1) != h || p->size(2) != w)
      throw ShapeMismatch("concat_channels: spatial mismatch " + shape_str(p->shape()));
    c += p->size(0);
  }
  Tensor out({c, h, w});
  double* dst = out.data();
  for (const Tensor* p : parts) {
    std::copy(p->data(), p->data() + p->numel(), dst);
    dst += p->numel();
  }
  return out;
}

Tensor take_cols(const Tensor& x, i64 c0, i64 c1) {
  check_rank(x, 2, "take_cols");
  if (c0 < 0 || c1 > x.size(1) || c0 >= c1) throw RangeError("take_cols: bad column range");
  Tensor out({x.size(0), c1 - c0});
  for (i64 i = 0; i < x.size(0); ++i)
    std::copy(x.data() + i * x.size(1) + c0, x.data() + i * x.size(1) + c1,
              out.data() + i * (c1 - c0));
  return out;
}

Tensor concat_cols(const std::vector<const Tensor*>& parts) {
  if (parts.empty()) throw ShapeMismatch("concat_cols: no inputs");
  const i64 n = parts[0]->size(0);
  i64 c = 0;
  for (const Tensor* p : parts) {
    check_rank(*p, 2, "concat_cols");
    if (p->size(0) != n) throw ShapeMismatch("concat_cols: row mismatch");
    c += p->size(1);
  }
  Tensor out({n, c});
  for (i64 i = 0; i < n; ++i) {
    double* dst = out.data() + i * c;
    for (const Tensor* p : parts) {
      std::copy(p->data() + i * p->size(1), p->data() + (i + 1) * p->size(1), dst);
      dst += p->size(1);
    }
  }
  return out;
}

}  // namespace wcd

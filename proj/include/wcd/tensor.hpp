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

#ifndef WCD_TENSOR_HPP_
#define WCD_TENSOR_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace wcd {

using i64 = std::int64_t;
using Shape = std::vector<i64>;

std::string shape_str(const Shape& s);

/// Dense row-major double tensor. Rank is dynamic; convolutional code uses
/// (C, H, W), token code uses (N, C), scalars use shape {1}.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, double v);
  static Tensor from(Shape shape, std::vector<double> values);
  static Tensor scalar(double v) { return full({1}, v); }

  bool defined() const { return !shape_.empty(); }
  i64 ndim() const { return static_cast<i64>(shape_.size()); }
  i64 numel() const { return static_cast<i64>(data_.size()); }
  i64 size(i64 d) const;
  const Shape& shape() const { return shape_; }
  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](i64 i) { return data_[static_cast<std::size_t>(i)]; }
  double operator[](i64 i) const { return data_[static_cast<std::size_t>(i)]; }

  double& at(i64 i, i64 j) { return data_[static_cast<std::size_t>(i * shape_[1] + j)]; }
  const double& at(i64 i, i64 j) const {
    return data_[static_cast<std::size_t>(i * shape_[1] + j)];
  }
  double& at(i64 c, i64 y, i64 x) {
    return data_[static_cast<std::size_t>((c * shape_[1] + y) * shape_[2] + x)];
  }
  const double& at(i64 c, i64 y, i64 x) const {
    return data_[static_cast<std::size_t>((c * shape_[1] + y) * shape_[2] + x)];
  }

  double item() const;  // value of a 1-element tensor

  /// Same data, new shape with identical element count.
  Tensor reshaped(Shape shape) const;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// ====== elementwise ======

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
Tensor relu(const Tensor& x);
Tensor gelu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor abs_elems(const Tensor& x);
Tensor clamp_min(const Tensor& x, double lo);
Tensor clamp(const Tensor& x, double lo, double hi);

double sum_all(const Tensor& x);
double mean_all(const Tensor& x);
/// Maximum element; if argmax is non-null it receives the flat index of the
/// first maximal element.
double max_all(const Tensor& x, i64* argmax = nullptr);

// ====== linear algebra (Eigen-backed) ======

Tensor matmul(const Tensor& a, const Tensor& b);       // (N,K)x(K,M) -> (N,M)
Tensor transpose2d(const Tensor& a);                   // (N,M) -> (M,N)
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);  // x(N,K), w(K,M), b(M) or empty

// ====== convolution ======

struct Conv2dSpec {
  i64 stride = 1;
  i64 pad = 0;
  i64 dilation = 1;
  i64 groups = 1;
};

i64 conv_out_dim(i64 in, i64 k, i64 stride, i64 pad, i64 dilation);

/// x (Cin,H,W), w (Cout,Cin/groups,kh,kw), b (Cout) or undefined.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, const Conv2dSpec& spec);

/// Gradients of conv2d. Any of gx/gw/gb may be null to skip that output.
void conv2d_backward(const Tensor& x, const Tensor& w, const Conv2dSpec& spec,
                     const Tensor& grad_out, Tensor* gx, Tensor* gw, Tensor* gb);

/// Patch-extraction helper used by the GEMM convolution path; exposed so the
/// tests can compare it against a direct implementation.
Tensor im2col(const Tensor& x, i64 kh, i64 kw, const Conv2dSpec& spec);
Tensor col2im(const Tensor& cols, i64 cin, i64 h, i64 w, i64 kh, i64 kw, const Conv2dSpec& spec);

// ====== normalization / activations over token rows ======

/// Row-wise layer norm over the last dimension of x (N,C). Saves the
/// normalized values and reciprocal stddev for the backward pass when the
/// pointers are non-null.
Tensor layer_norm_rows(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps,
                       Tensor* save_xhat = nullptr, Tensor* save_rstd = nullptr);
void layer_norm_rows_backward(const Tensor& grad_out, const Tensor& xhat, const Tensor& rstd,
                              const Tensor& gamma, Tensor* gx, Tensor* ggamma, Tensor* gbeta);

Tensor softmax_rows(const Tensor& x);
Tensor softmax_rows_backward(const Tensor& grad_out, const Tensor& y);

Tensor gelu_backward(const Tensor& x, const Tensor& grad_out);
Tensor relu_backward(const Tensor& x, const Tensor& grad_out);
Tensor sigmoid_backward(const Tensor& y, const Tensor& grad_out);

// ====== resampling ======

/// Bilinear resize of (C,H,W) with half-pixel centers (align_corners=false).
/// Resizing to the input size returns an exact copy.
Tensor bilinear_resize(const Tensor& x, i64 out_h, i64 out_w);
Tensor bilinear_resize_backward(const Tensor& grad_out, i64 in_h, i64 in_w);

/// Nearest-neighbour resize of (C,H,W) or (H,W).
Tensor nearest_resize(const Tensor& x, i64 out_h, i64 out_w);

// ====== layout ======

/// (C,H,W) -> (H*W, C) token matrix, row n = pixel (n / W, n % W).
Tensor chw_to_tokens(const Tensor& x);
/// (H*W, C) -> (C,H,W).
Tensor tokens_to_chw(const Tensor& t, i64 h, i64 w);

/// Concatenate (C_i,H,W) tensors along the channel axis, in argument order.
Tensor concat_channels(const std::vector<const Tensor*>& parts);

/// Column range [c0, c1) of a (N,C) matrix.
Tensor take_cols(const Tensor& x, i64 c0, i64 c1);
/// Concatenate (N,C_i) matrices along columns, in argument order.
Tensor concat_cols(const std::vector<const Tensor*>& parts);

}  // namespace wcd

#endif  // WCD_TENSOR_HPP_

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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "wcd/errors.hpp"
#include "wcd/rng.hpp"
#include "wcd/tensor.hpp"

using namespace wcd;

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (i64 i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

/// Direct sliding-window convolution, the oracle for the GEMM path.
Tensor conv2d_naive(const Tensor& x, const Tensor& w, const Tensor& b, const Conv2dSpec& s) {
  const i64 cin = x.size(0), h = x.size(1), wd = x.size(2);
  const i64 cout = w.size(0), cpg = w.size(1), kh = w.size(2), kw = w.size(3);
  const i64 ho = conv_out_dim(h, kh, s.stride, s.pad, s.dilation);
  const i64 wo = conv_out_dim(wd, kw, s.stride, s.pad, s.dilation);
  const i64 cin_per_g = cin / s.groups, cout_per_g = cout / s.groups;
  REQUIRE(cpg == cin_per_g);
  Tensor out = Tensor::zeros({cout, ho, wo});
  for (i64 oc = 0; oc < cout; ++oc) {
    const i64 g = oc / cout_per_g;
    for (i64 oy = 0; oy < ho; ++oy) {
      for (i64 ox = 0; ox < wo; ++ox) {
        double acc = b.defined() ? b[oc] : 0.0;
        for (i64 ic = 0; ic < cin_per_g; ++ic) {
          for (i64 ky = 0; ky < kh; ++ky) {
            for (i64 kx = 0; kx < kw; ++kx) {
              const i64 iy = oy * s.stride - s.pad + ky * s.dilation;
              const i64 ix = ox * s.stride - s.pad + kx * s.dilation;
              if (iy < 0 || iy >= h || ix < 0 || ix >= wd) continue;
              acc += x.at(g * cin_per_g + ic, iy, ix) *
                     w[((oc * cpg + ic) * kh + ky) * kw + kx];
            }
          }
        }
        out.at(oc, oy, ox) = acc;
      }
    }
  }
  return out;
}

void check_close(const Tensor& a, const Tensor& b, double tol = 1e-12) {
  REQUIRE(a.same_shape(b));
  for (i64 i = 0; i < a.numel(); ++i) {
    REQUIRE(std::abs(a[i] - b[i]) <= tol * std::max(1.0, std::abs(b[i])));
  }
}

}  // namespace

TEST_CASE("conv2d matches the naive oracle across spec combinations") {
  Rng rng(17);
  struct Case {
    i64 cin, cout, h, w, kh, kw;
    Conv2dSpec spec;
  };
  const std::vector<Case> cases = {
      {3, 8, 9, 11, 3, 3, {1, 1, 1, 1}},     // plain 3x3
      {3, 16, 16, 16, 7, 7, {4, 3, 1, 1}},   // patch-embedding shape
      {8, 8, 10, 10, 3, 3, {2, 1, 1, 1}},    // stride 2
      {4, 6, 8, 8, 3, 3, {1, 2, 2, 1}},      // dilation 2
      {6, 6, 7, 9, 3, 3, {1, 3, 3, 1}},      // dilation 3, matching pad
      {4, 4, 8, 8, 3, 3, {1, 1, 1, 4}},      // depthwise
      {6, 9, 8, 8, 3, 3, {1, 1, 1, 3}},      // grouped, cout != cin
      {5, 2, 6, 6, 1, 1, {1, 0, 1, 1}},      // 1x1
  };
  for (const auto& c : cases) {
    CAPTURE(c.cin);
    CAPTURE(c.cout);
    CAPTURE(c.spec.groups);
    Tensor x = random_tensor({c.cin, c.h, c.w}, rng);
    Tensor w = random_tensor({c.cout, c.cin / c.spec.groups, c.kh, c.kw}, rng);
    Tensor b = random_tensor({c.cout}, rng);
    check_close(conv2d(x, w, b, c.spec), conv2d_naive(x, w, b, c.spec));
    check_close(conv2d(x, w, Tensor(), c.spec), conv2d_naive(x, w, Tensor(), c.spec));
  }
}

TEST_CASE("conv2d output size collapses raise DimensionError") {
  CHECK_THROWS_AS(conv_out_dim(2, 5, 1, 0, 1), DimensionError);
  Rng rng(3);
  Tensor x = random_tensor({1, 2, 2}, rng);
  Tensor w = random_tensor({1, 1, 5, 5}, rng);
  CHECK_THROWS_AS(conv2d(x, w, Tensor(), Conv2dSpec{}), DimensionError);
}

TEST_CASE("conv2d_backward matches finite differences") {
  Rng rng(23);
  const Conv2dSpec spec{2, 1, 1, 1};
  Tensor x = random_tensor({3, 7, 7}, rng);
  Tensor w = random_tensor({4, 3, 3, 3}, rng);
  Tensor b = random_tensor({4}, rng);
  Tensor y0 = conv2d(x, w, b, spec);

  // Loss = weighted sum with fixed coefficients.
  Tensor coeff = random_tensor(y0.shape(), rng);
  Tensor gx, gw, gb;
  conv2d_backward(x, w, spec, coeff, &gx, &gw, &gb);

  const double eps = 1e-6;
  auto loss = [&](const Tensor& xx, const Tensor& ww, const Tensor& bb) {
    Tensor y = conv2d(xx, ww, bb, spec);
    double s = 0.0;
    for (i64 i = 0; i < y.numel(); ++i) s += y[i] * coeff[i];
    return s;
  };
  for (i64 i = 0; i < x.numel(); i += 17) {
    Tensor xp = x, xm = x;
    xp[i] += eps;
    xm[i] -= eps;
    const double fd = (loss(xp, w, b) - loss(xm, w, b)) / (2 * eps);
    CHECK(std::abs(fd - gx[i]) < 1e-6);
  }
  for (i64 i = 0; i < w.numel(); i += 13) {
    Tensor wp = w, wm = w;
    wp[i] += eps;
    wm[i] -= eps;
    const double fd = (loss(x, wp, b) - loss(x, wm, b)) / (2 * eps);
    CHECK(std::abs(fd - gw[i]) < 1e-6);
  }
  for (i64 i = 0; i < b.numel(); ++i) {
    Tensor bp = b, bm = b;
    bp[i] += eps;
    bm[i] -= eps;
    const double fd = (loss(x, w, bp) - loss(x, w, bm)) / (2 * eps);
    CHECK(std::abs(fd - gb[i]) < 1e-6);
  }
}

TEST_CASE("matmul and linear match naive loops") {
  Rng rng(5);
  Tensor a = random_tensor({4, 6}, rng);
  Tensor b = random_tensor({6, 3}, rng);
  Tensor c = matmul(a, b);
  for (i64 i = 0; i < 4; ++i) {
    for (i64 j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (i64 k = 0; k < 6; ++k) acc += a.at(i, k) * b.at(k, j);
      CHECK(c.at(i, j) == doctest::Approx(acc).epsilon(1e-12));
    }
  }
  Tensor bias = random_tensor({3}, rng);
  Tensor y = linear(a, b, bias);
  for (i64 i = 0; i < 4; ++i)
    for (i64 j = 0; j < 3; ++j)
      CHECK(y.at(i, j) == doctest::Approx(c.at(i, j) + bias[j]).epsilon(1e-12));
  CHECK_THROWS_AS(matmul(a, a), ShapeMismatch);

  Tensor at = transpose2d(a);
  for (i64 i = 0; i < 4; ++i)
    for (i64 j = 0; j < 6; ++j) CHECK(at.at(j, i) == a.at(i, j));
}

TEST_CASE("layer_norm_rows normalizes and backward matches finite differences") {
  Rng rng(31);
  const double eps = 1e-6;
  Tensor x = random_tensor({5, 8}, rng);
  Tensor gamma = random_tensor({8}, rng, 0.5, 1.5);
  Tensor beta = random_tensor({8}, rng);

  Tensor xhat, rstd;
  Tensor y = layer_norm_rows(x, gamma, beta, eps, &xhat, &rstd);
  for (i64 i = 0; i < 5; ++i) {
    double mean = 0.0, var = 0.0;
    for (i64 j = 0; j < 8; ++j) mean += xhat.at(i, j);
    mean /= 8;
    for (i64 j = 0; j < 8; ++j) var += (xhat.at(i, j) - mean) * (xhat.at(i, j) - mean);
    var /= 8;
    CHECK(std::abs(mean) < 1e-12);
    // var/(var+eps) is just shy of 1 because of the eps regularizer.
    CHECK(var == doctest::Approx(1.0).epsilon(1e-4));
  }

  Tensor coeff = random_tensor(y.shape(), rng);
  Tensor gx, gg, gb;
  layer_norm_rows_backward(coeff, xhat, rstd, gamma, &gx, &gg, &gb);
  auto loss = [&](const Tensor& xx, const Tensor& gm, const Tensor& bt) {
    Tensor yy = layer_norm_rows(xx, gm, bt, eps);
    double s = 0.0;
    for (i64 i = 0; i < yy.numel(); ++i) s += yy[i] * coeff[i];
    return s;
  };
  const double h = 1e-6;
  for (i64 i = 0; i < x.numel(); i += 7) {
    Tensor xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    CHECK(std::abs((loss(xp, gamma, beta) - loss(xm, gamma, beta)) / (2 * h) - gx[i]) < 1e-5);
  }
  for (i64 i = 0; i < 8; ++i) {
    Tensor gp = gamma, gm2 = gamma;
    gp[i] += h;
    gm2[i] -= h;
    CHECK(std::abs((loss(x, gp, beta) - loss(x, gm2, beta)) / (2 * h) - gg[i]) < 1e-5);
    Tensor bp = beta, bm = beta;
    bp[i] += h;
    bm[i] -= h;
    CHECK(std::abs((loss(x, gamma, bp) - loss(x, gamma, bm)) / (2 * h) - gb[i]) < 1e-5);
  }
}

TEST_CASE("softmax rows sum to one and are shift invariant") {
  Rng rng(41);
  Tensor x = random_tensor({6, 9}, rng, -5, 5);
  Tensor y = softmax_rows(x);
  for (i64 i = 0; i < 6; ++i) {
    double s = 0.0;
    for (i64 j = 0; j < 9; ++j) {
      CHECK(y.at(i, j) > 0.0);
      s += y.at(i, j);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
  Tensor xs = add_scalar(x, 123.0);
  check_close(softmax_rows(xs), y, 1e-9);
}

TEST_CASE("bilinear_resize: same size is an exact copy, constants preserved") {
  Rng rng(51);
  Tensor x = random_tensor({2, 5, 7}, rng);
  Tensor same = bilinear_resize(x, 5, 7);
  for (i64 i = 0; i < x.numel(); ++i) CHECK(same[i] == x[i]);

  Tensor c = Tensor::full({1, 4, 4}, 0.37);
  Tensor up = bilinear_resize(c, 9, 13);
  for (i64 i = 0; i < up.numel(); ++i) CHECK(up[i] == doctest::Approx(0.37).epsilon(1e-12));

  // Interpolation never escapes the input value range.
  Tensor r = bilinear_resize(x, 11, 3);
  double lo = x[0], hi = x[0];
  for (i64 i = 0; i < x.numel(); ++i) {
    lo = std::min(lo, x[i]);
    hi = std::max(hi, x[i]);
  }
  for (i64 i = 0; i < r.numel(); ++i) {
    CHECK(r[i] >= lo - 1e-12);
    CHECK(r[i] <= hi + 1e-12);
  }
}

TEST_CASE("bilinear_resize 2x matches hand-computed half-pixel centers") {
  // 1D case checked through a (1,1,2) row: centers land 25%/75% between inputs.
  Tensor x = Tensor::from({1, 1, 2}, {0.0, 1.0});
  Tensor y = bilinear_resize(x, 1, 4);
  CHECK(y[0] == doctest::Approx(0.0));    // clamped at the border
  CHECK(y[1] == doctest::Approx(0.25));
  CHECK(y[2] == doctest::Approx(0.75));
  CHECK(y[3] == doctest::Approx(1.0));
}

TEST_CASE("bilinear_resize_backward is the exact adjoint") {
  // <resize(x), g> == <x, resize_backward(g)> for all x, g.
  Rng rng(61);
  Tensor x = random_tensor({2, 4, 5}, rng);
  Tensor g = random_tensor({2, 7, 3}, rng);
  Tensor y = bilinear_resize(x, 7, 3);
  Tensor gx = bilinear_resize_backward(g, 4, 5);
  double lhs = 0.0, rhs = 0.0;
  for (i64 i = 0; i < y.numel(); ++i) lhs += y[i] * g[i];
  for (i64 i = 0; i < x.numel(); ++i) rhs += x[i] * gx[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("nearest_resize picks the nearest-exact source pixel") {
  Tensor x = Tensor::from({2, 2}, {1.0, 2.0, 3.0, 4.0});
  Tensor up = nearest_resize(x, 4, 4);
  CHECK(up.at(0, 0) == 1.0);
  CHECK(up.at(0, 3) == 2.0);
  CHECK(up.at(3, 0) == 3.0);
  CHECK(up.at(3, 3) == 4.0);
  CHECK(up.at(1, 1) == 1.0);
  CHECK(up.at(2, 2) == 4.0);

  Tensor down = nearest_resize(up, 2, 2);
  for (i64 i = 0; i < 4; ++i) CHECK(down[i] == x[i]);

  Tensor chw = Tensor::from({1, 2, 2}, {1.0, 2.0, 3.0, 4.0});
  Tensor up3 = nearest_resize(chw, 4, 4);
  CHECK(up3.size(0) == 1);
  CHECK(up3.at(0, 0, 0) == 1.0);
}

TEST_CASE("token layout round-trips") {
  Rng rng(71);
  Tensor x = random_tensor({3, 4, 5}, rng);
  Tensor t = chw_to_tokens(x);
  CHECK(t.size(0) == 20);
  CHECK(t.size(1) == 3);
  CHECK(t.at(7, 2) == x.at(2, 1, 2));  // pixel (1,2) of channel 2
  Tensor back = tokens_to_chw(t, 4, 5);
  for (i64 i = 0; i < x.numel(); ++i) CHECK(back[i] == x[i]);
}

TEST_CASE("concat and column selection") {
  Rng rng(81);
  Tensor a = random_tensor({2, 3, 3}, rng);
  Tensor b = random_tensor({4, 3, 3}, rng);
  Tensor cat = concat_channels({&a, &b});
  CHECK(cat.size(0) == 6);
  CHECK(cat.at(1, 2, 2) == a.at(1, 2, 2));
  CHECK(cat.at(3, 0, 1) == b.at(1, 0, 1));

  Tensor m = random_tensor({4, 6}, rng);
  Tensor cols = take_cols(m, 2, 5);
  CHECK(cols.size(1) == 3);
  CHECK(cols.at(3, 0) == m.at(3, 2));
  Tensor c0 = take_cols(m, 0, 2), c1 = take_cols(m, 2, 6);
  Tensor glued = concat_cols({&c0, &c1});
  for (i64 i = 0; i < m.numel(); ++i) CHECK(glued[i] == m[i]);
}

TEST_CASE("reductions and clamps") {
  Tensor x = Tensor::from({2, 3}, {-1.0, 4.0, 2.0, 4.0, -5.0, 0.0});
  CHECK(sum_all(x) == doctest::Approx(4.0));
  CHECK(mean_all(x) == doctest::Approx(4.0 / 6.0));
  i64 arg = -1;
  CHECK(max_all(x, &arg) == 4.0);
  CHECK(arg == 1);  // first of the two maxima
  Tensor cl = clamp_min(x, 0.0);
  CHECK(cl[0] == 0.0);
  CHECK(cl[1] == 4.0);
  Tensor cc = clamp(x, -1.0, 1.0);
  CHECK(cc[4] == -1.0);
  CHECK(cc[1] == 1.0);
}

TEST_CASE("activation backward helpers match finite differences") {
  Rng rng(91);
  Tensor x = random_tensor({40}, rng, -2, 2);
  Tensor g = random_tensor({40}, rng);
  Tensor gg = gelu_backward(x, g);
  Tensor rg = relu_backward(x, g);
  Tensor y = sigmoid(x);
  Tensor sg = sigmoid_backward(y, g);
  const double h = 1e-6;
  for (i64 i = 0; i < x.numel(); ++i) {
    auto fd = [&](Tensor (*f)(const Tensor&)) {
      Tensor xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      return (f(xp)[i] - f(xm)[i]) / (2 * h) * g[i];
    };
    CHECK(std::abs(fd(&gelu) - gg[i]) < 1e-5);
    CHECK(std::abs(fd(&sigmoid) - sg[i]) < 1e-5);
    if (std::abs(x[i]) > 1e-3) CHECK(std::abs(fd(&relu) - rg[i]) < 1e-5);
  }
}

TEST_CASE("tensor shape utilities") {
  Tensor t = Tensor::zeros({2, 3});
  CHECK(t.ndim() == 2);
  CHECK(t.numel() == 6);
  CHECK_FALSE(Tensor().defined());
  CHECK_THROWS_AS(t.item(), ShapeMismatch);
  CHECK(Tensor::scalar(3.5).item() == 3.5);
  Tensor r = t.reshaped({3, 2});
  CHECK(r.size(0) == 3);
  CHECK_THROWS_AS(t.reshaped({4, 2}), ShapeMismatch);
}

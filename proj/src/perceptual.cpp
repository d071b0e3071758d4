// SPDX-License-Identifier: Apache-2.0
#include "mmw/perceptual.hpp"

#include <cmath>

#include "mmw/common.hpp"
#include "mmw/rng.hpp"

namespace mmw {
namespace {

size_t conv_out(size_t n) { return (n + 1) / 2; }  // stride 2, pad 1, kernel 3

struct Tensor {
  uint32_t ch;
  size_t rows, cols;
  std::vector<double> v;
  double& at(uint32_t c, size_t i, size_t j) { return v[(c * rows + i) * cols + j]; }
  double at(uint32_t c, size_t i, size_t j) const { return v[(c * rows + i) * cols + j]; }
};

}  // namespace

PerceptualExtractor::PerceptualExtractor(uint64_t seed) : seed_(seed) {
  auto g = make_rng(seed, "perceptual");
  uint32_t chans[4] = {1, 8, 16, 16};
  for (int l = 0; l < 3; ++l) {
    Layer layer;
    layer.in_ch = chans[l];
    layer.out_ch = chans[l + 1];
    size_t n = size_t(layer.out_ch) * layer.in_ch * 9;
    layer.w.resize(n);
    double scale = 1.0 / double(layer.in_ch * 9);
    for (auto& w : layer.w) w = gaussian(g) * scale;
    layers_.push_back(std::move(layer));
  }
}

namespace {

Tensor conv_relu(const Tensor& x, const std::vector<double>& w, uint32_t in_ch,
                 uint32_t out_ch) {
  Tensor y{out_ch, conv_out(x.rows), conv_out(x.cols), {}};
  y.v.assign(size_t(out_ch) * y.rows * y.cols, 0.0);
  for (uint32_t o = 0; o < out_ch; ++o)
    for (size_t oi = 0; oi < y.rows; ++oi)
      for (size_t oj = 0; oj < y.cols; ++oj) {
        double acc = 0.0;
        for (uint32_t c = 0; c < in_ch; ++c) {
          const double* ker = w.data() + (size_t(o) * in_ch + c) * 9;
          for (int ki = 0; ki < 3; ++ki) {
            ptrdiff_t ii = ptrdiff_t(oi) * 2 - 1 + ki;
            if (ii < 0 || ii >= ptrdiff_t(x.rows)) continue;
            for (int kj = 0; kj < 3; ++kj) {
              ptrdiff_t jj = ptrdiff_t(oj) * 2 - 1 + kj;
              if (jj < 0 || jj >= ptrdiff_t(x.cols)) continue;
              acc += ker[ki * 3 + kj] * x.at(c, size_t(ii), size_t(jj));
            }
          }
        }
        y.at(o, oi, oj) = acc > 0.0 ? acc : 0.0;
      }
  return y;
}

// dx is accumulated from dy through the same sparsity pattern; ReLU mask
// comes from the cached output (y > 0 iff the pre-activation was > 0).
void conv_relu_backward(const Tensor& x, const Tensor& y, Tensor& dx, const Tensor& dy,
                        const std::vector<double>& w, uint32_t in_ch, uint32_t out_ch) {
  dx.v.assign(dx.v.size(), 0.0);
  for (uint32_t o = 0; o < out_ch; ++o)
    for (size_t oi = 0; oi < y.rows; ++oi)
      for (size_t oj = 0; oj < y.cols; ++oj) {
        if (!(y.at(o, oi, oj) > 0.0)) continue;
        double d = dy.at(o, oi, oj);
        if (d == 0.0) continue;
        for (uint32_t c = 0; c < in_ch; ++c) {
          const double* ker = w.data() + (size_t(o) * in_ch + c) * 9;
          for (int ki = 0; ki < 3; ++ki) {
            ptrdiff_t ii = ptrdiff_t(oi) * 2 - 1 + ki;
            if (ii < 0 || ii >= ptrdiff_t(x.rows)) continue;
            for (int kj = 0; kj < 3; ++kj) {
              ptrdiff_t jj = ptrdiff_t(oj) * 2 - 1 + kj;
              if (jj < 0 || jj >= ptrdiff_t(x.cols)) continue;
              dx.at(c, size_t(ii), size_t(jj)) += ker[ki * 3 + kj] * d;
            }
          }
        }
      }
}

}  // namespace

std::vector<double> PerceptualExtractor::features(const double* plane, size_t rows,
                                                  size_t cols) const {
  if (rows < 16 || cols < 16) fail(Err::InvalidDims, "feature input smaller than 16x16");
  Tensor t{1, rows, cols, std::vector<double>(plane, plane + rows * cols)};
  for (const auto& layer : layers_) t = conv_relu(t, layer.w, layer.in_ch, layer.out_ch);
  return std::move(t.v);
}

double PerceptualExtractor::l1_feature_loss(const double* pred, const double* target, size_t rows,
                                            size_t cols, std::vector<double>* grad_pred) const {
  if (rows < 16 || cols < 16) fail(Err::InvalidDims, "feature input smaller than 16x16");

  std::vector<Tensor> acts;
  acts.push_back({1, rows, cols, std::vector<double>(pred, pred + rows * cols)});
  for (const auto& layer : layers_)
    acts.push_back(conv_relu(acts.back(), layer.w, layer.in_ch, layer.out_ch));

  Tensor tt{1, rows, cols, std::vector<double>(target, target + rows * cols)};
  for (const auto& layer : layers_) tt = conv_relu(tt, layer.w, layer.in_ch, layer.out_ch);

  const Tensor& fp = acts.back();
  size_t n = fp.v.size();
  double loss = 0.0;
  for (size_t i = 0; i < n; ++i) loss += std::fabs(fp.v[i] - tt.v[i]);
  loss /= double(n);

  if (grad_pred) {
    Tensor dy{fp.ch, fp.rows, fp.cols, std::vector<double>(n, 0.0)};
    for (size_t i = 0; i < n; ++i) {
      double diff = fp.v[i] - tt.v[i];
      dy.v[i] = diff > 0.0 ? 1.0 / double(n) : (diff < 0.0 ? -1.0 / double(n) : 0.0);
    }
    for (size_t l = layers_.size(); l-- > 0;) {
      const Tensor& x = acts[l];
      Tensor dx{x.ch, x.rows, x.cols, std::vector<double>(x.v.size(), 0.0)};
      conv_relu_backward(x, acts[l + 1], dx, dy, layers_[l].w, layers_[l].in_ch,
                         layers_[l].out_ch);
      dy = std::move(dx);
    }
    *grad_pred = std::move(dy.v);
  }
  return loss;
}

}  // namespace mmw

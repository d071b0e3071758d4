// SPDX-License-Identifier: Apache-2.0
#include "mmw/inr_grad.hpp"

#include <algorithm>
#include <cmath>

#include "mmw/common.hpp"
#include "mmw/kernels.hpp"
#include "mmw/threading.hpp"

namespace mmw {

InrGradient InrGradient::zeros(const InrArch& arch) {
  auto counts = arch.param_count();
  InrGradient g;
  g.theta.assign(counts.theta, 0.0);
  g.modulations.assign(counts.modulation, 0.0);
  return g;
}

void InrGradient::add(const InrGradient& other) {
  if (other.theta.size() != theta.size() || other.modulations.size() != modulations.size())
    fail(Err::LengthMismatch, "gradient buffers");
  const auto& k = kernels::ops();
  k.axpy(1.0, other.theta.data(), theta.data(), theta.size());
  k.axpy(1.0, other.modulations.data(), modulations.data(), modulations.size());
}

double InrGradient::max_abs() const {
  const auto& k = kernels::ops();
  return std::max(k.max_abs(theta.data(), theta.size()),
                  k.max_abs(modulations.data(), modulations.size()));
}

namespace {

// Per-element caches for one forward/backward sweep.
struct GradScratch {
  std::vector<double> encoded;
  std::vector<double> pre;   // hidden_layers * width
  std::vector<double> post;  // hidden_layers * width
  std::vector<double> dh, dpre;
};

void forward_one(const InrDense& dense, const double* spatial, uint32_t frame,
                 const std::vector<InrArch::LayerShape>& shapes, GradScratch& ws, double out[2]) {
  const InrArch& arch = dense.arch;
  const auto& k = kernels::ops();
  uint32_t W = arch.width;

  double coords[4];
  size_t nc = 0;
  if (arch.variant == InrVariant::Base)
    coords[nc++] = arch.frames > 1 ? double(frame) / double(arch.frames - 1) : 0.0;
  coords[nc++] = spatial[0];
  coords[nc++] = spatial[1];
  coords[nc++] = spatial[2];
  positional_encode(arch.encoding(), std::span<const double>(coords, nc),
                    std::span<double>(ws.encoded));

  const double* x = ws.encoded.data();
  for (uint32_t l = 0; l < arch.hidden_layers; ++l) {
    const auto& s = shapes[l];
    double* pre = ws.pre.data() + size_t(l) * W;
    double* post = ws.post.data() + size_t(l) * W;
    k.matvec(dense.theta.data() + s.w_offset, x, dense.theta.data() + s.b_offset, pre, s.rows,
             s.cols);
    if (arch.variant == InrVariant::Modulated) {
      const double* gamma = dense.modulations.data() + arch.mod_offset(frame, l);
      k.film_relu(pre, gamma, gamma + W, post, W);
    } else {
      k.relu(pre, post, W);
    }
    x = post;
  }
  const auto& os = shapes.back();
  k.matvec(dense.theta.data() + os.w_offset, x, dense.theta.data() + os.b_offset, out, 2, W);
}

void backward_one(const InrDense& dense, const double* spatial, uint32_t frame,
                  const std::vector<InrArch::LayerShape>& shapes, GradScratch& ws,
                  const std::complex<double>& dpred, InrGradient& grad) {
  const InrArch& arch = dense.arch;
  const auto& k = kernels::ops();
  uint32_t W = arch.width;

  double out[2];
  forward_one(dense, spatial, frame, shapes, ws, out);

  double dy[2] = {dpred.real(), dpred.imag()};
  const auto& os = shapes.back();
  const double* h_last = ws.post.data() + size_t(arch.hidden_layers - 1) * W;
  k.ger_acc(dy, h_last, grad.theta.data() + os.w_offset, 2, W);
  grad.theta[os.b_offset] += dy[0];
  grad.theta[os.b_offset + 1] += dy[1];

  std::fill(ws.dh.begin(), ws.dh.end(), 0.0);
  k.matvec_t_acc(dense.theta.data() + os.w_offset, dy, ws.dh.data(), 2, W);

  for (uint32_t l = arch.hidden_layers; l-- > 0;) {
    const auto& s = shapes[l];
    const double* pre = ws.pre.data() + size_t(l) * W;
    if (arch.variant == InrVariant::Modulated) {
      const double* gamma = dense.modulations.data() + arch.mod_offset(frame, l);
      double* dmod = grad.modulations.data() + arch.mod_offset(frame, l);
      k.film_relu_bwd(ws.dh.data(), pre, gamma, gamma + W, ws.dpre.data(), dmod, dmod + W, W);
    } else {
      k.relu_bwd(ws.dh.data(), pre, ws.dpre.data(), W);
    }
    const double* x = l == 0 ? ws.encoded.data() : ws.post.data() + size_t(l - 1) * W;
    k.ger_acc(ws.dpre.data(), x, grad.theta.data() + s.w_offset, s.rows, s.cols);
    k.axpy(1.0, ws.dpre.data(), grad.theta.data() + s.b_offset, s.rows);
    if (l > 0) {
      std::fill(ws.dh.begin(), ws.dh.end(), 0.0);
      k.matvec_t_acc(dense.theta.data() + s.w_offset, ws.dpre.data(), ws.dh.data(), s.rows,
                     s.cols);
    }
  }
}

GradScratch make_scratch(const InrArch& arch) {
  GradScratch ws;
  ws.encoded.resize(arch.encoded_dim());
  ws.pre.resize(size_t(arch.hidden_layers) * arch.width);
  ws.post.resize(size_t(arch.hidden_layers) * arch.width);
  ws.dh.resize(arch.width);
  ws.dpre.resize(arch.width);
  return ws;
}

void check_batch(const InrDense& dense, const CoordBatch& batch) {
  if (batch.coords.size() != 3 * batch.size()) fail(Err::LengthMismatch, "batch coords");
  for (uint32_t f : batch.frames)
    if (f >= dense.arch.frames) fail(Err::InvalidArgument, "batch frame index out of range");
}

}  // namespace

void inr_forward_batch(const InrDense& dense, const CoordBatch& batch,
                       std::vector<std::complex<double>>& out) {
  check_batch(dense, batch);
  auto shapes = dense.arch.layers();
  out.resize(batch.size());
  size_t blocks = block_count(batch.size());
  parallel_for(blocks, [&](size_t blk) {
    GradScratch ws = make_scratch(dense.arch);
    size_t begin = blk * kGradBlock;
    size_t end = std::min(begin + kGradBlock, batch.size());
    for (size_t i = begin; i < end; ++i) {
      double y[2];
      forward_one(dense, batch.coords.data() + 3 * i, batch.frames[i], shapes, ws, y);
      out[i] = {y[0], y[1]};
    }
  });
}

void inr_backward_batch(const InrDense& dense, const CoordBatch& batch,
                        const std::vector<std::complex<double>>& dpred, InrGradient& grad) {
  check_batch(dense, batch);
  if (dpred.size() != batch.size()) fail(Err::LengthMismatch, "adjoint size");
  auto counts = dense.arch.param_count();
  if (grad.theta.size() != counts.theta || grad.modulations.size() != counts.modulation)
    fail(Err::LengthMismatch, "gradient buffers");

  auto shapes = dense.arch.layers();
  size_t blocks = block_count(batch.size());
  std::vector<InrGradient> partial(blocks);
  parallel_for(blocks, [&](size_t blk) {
    partial[blk] = InrGradient::zeros(dense.arch);
    GradScratch ws = make_scratch(dense.arch);
    size_t begin = blk * kGradBlock;
    size_t end = std::min(begin + kGradBlock, batch.size());
    for (size_t i = begin; i < end; ++i)
      backward_one(dense, batch.coords.data() + 3 * i, batch.frames[i], shapes, ws, dpred[i],
                   partial[blk]);
  });
  for (size_t blk = 0; blk < blocks; ++blk) grad.add(partial[blk]);
}

}  // namespace mmw

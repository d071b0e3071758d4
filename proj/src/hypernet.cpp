// SPDX-License-Identifier: Apache-2.0
#include "mmw/hypernet.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "mmw/common.hpp"
#include "mmw/kernels.hpp"
#include "mmw/rng.hpp"

namespace mmw {
namespace {

constexpr uint32_t kConv1Ch = 8;
constexpr uint32_t kConv2Ch = 16;

uint32_t conv_out(uint32_t n) { return (n + 1) / 2; }

struct ConvShape {
  uint32_t in_ch, out_ch, n_in, n_out;
};

// 3x3 kernel, stride 2, pad 1, ReLU. Weights laid out [out][in][3][3].
void conv_relu_fwd(const double* w, const double* b, const double* x, double* y,
                   const ConvShape& s) {
  for (uint32_t o = 0; o < s.out_ch; ++o)
    for (uint32_t oi = 0; oi < s.n_out; ++oi)
      for (uint32_t oj = 0; oj < s.n_out; ++oj) {
        double acc = b[o];
        for (uint32_t c = 0; c < s.in_ch; ++c)
          for (int ki = 0; ki < 3; ++ki) {
            int ii = int(oi) * 2 + ki - 1;
            if (ii < 0 || ii >= int(s.n_in)) continue;
            for (int kj = 0; kj < 3; ++kj) {
              int jj = int(oj) * 2 + kj - 1;
              if (jj < 0 || jj >= int(s.n_in)) continue;
              acc += w[((size_t(o) * s.in_ch + c) * 3 + ki) * 3 + kj] *
                     x[(size_t(c) * s.n_in + ii) * s.n_in + jj];
            }
          }
        y[(size_t(o) * s.n_out + oi) * s.n_out + oj] = acc > 0.0 ? acc : 0.0;
      }
}

// Masks by the cached post-activation; dw/db/dx all accumulate, dx optional.
void conv_relu_bwd(const double* w, const double* x, const double* y, const double* dy,
                   double* dw, double* db, double* dx, const ConvShape& s) {
  for (uint32_t o = 0; o < s.out_ch; ++o)
    for (uint32_t oi = 0; oi < s.n_out; ++oi)
      for (uint32_t oj = 0; oj < s.n_out; ++oj) {
        size_t oidx = (size_t(o) * s.n_out + oi) * s.n_out + oj;
        if (!(y[oidx] > 0.0)) continue;
        double g = dy[oidx];
        db[o] += g;
        for (uint32_t c = 0; c < s.in_ch; ++c)
          for (int ki = 0; ki < 3; ++ki) {
            int ii = int(oi) * 2 + ki - 1;
            if (ii < 0 || ii >= int(s.n_in)) continue;
            for (int kj = 0; kj < 3; ++kj) {
              int jj = int(oj) * 2 + kj - 1;
              if (jj < 0 || jj >= int(s.n_in)) continue;
              size_t widx = ((size_t(o) * s.in_ch + c) * 3 + ki) * 3 + kj;
              size_t xidx = (size_t(c) * s.n_in + ii) * s.n_in + jj;
              dw[widx] += g * x[xidx];
              if (dx) dx[xidx] += w[widx] * g;
            }
          }
      }
}

}  // namespace

void HyperConfig::validate() const {
  if (raster_grid < 4 || raster_grid > 512)
    fail(Err::InvalidArgument, "raster_grid must be in [4, 512]");
  if (env_latent < 1 || env_latent > 4096)
    fail(Err::InvalidArgument, "env_latent must be in [1, 4096]");
  if (pose_dmodel < 1 || pose_dmodel > 4096)
    fail(Err::InvalidArgument, "pose_dmodel must be in [1, 4096]");
  if (trunk_width < 1 || trunk_width > 8192)
    fail(Err::InvalidArgument, "trunk_width must be in [1, 8192]");
  if (tracks < 1 || tracks > 256) fail(Err::InvalidArgument, "tracks must be in [1, 256]");
  arch.validate();
}

HyperLayout::HyperLayout(const HyperConfig& cfg) {
  size_t cur = 0;
  auto seg = [&cur](size_t rows, size_t cols) {
    MatSeg m{cur, cur + rows * cols, rows, cols};
    cur = m.end();
    return m;
  };
  uint32_t o2 = conv_out(conv_out(cfg.raster_grid));
  c1 = seg(kConv1Ch, 9);
  c2 = seg(kConv2Ch, size_t(kConv1Ch) * 9);
  fc = seg(cfg.env_latent, size_t(kConv2Ch) * o2 * o2);
  embed = seg(cfg.pose_dmodel, size_t(3) * cfg.tracks);
  q = seg(cfg.pose_dmodel, cfg.pose_dmodel);
  k = seg(cfg.pose_dmodel, cfg.pose_dmodel);
  v = seg(cfg.pose_dmodel, cfg.pose_dmodel);
  t1 = seg(cfg.trunk_width, size_t(cfg.env_latent) + cfg.pose_dmodel);
  t2 = seg(cfg.trunk_width, cfg.trunk_width);
  theta_head = seg(cfg.arch.param_count().theta, cfg.trunk_width);
  mod_head = seg(size_t(cfg.arch.hidden_layers) * 2 * cfg.arch.width, cfg.trunk_width);
  total = cur;
}

SceneRaster rasterize(const Scene& scene, uint32_t grid) {
  scene.validate();
  if (grid < 1) fail(Err::InvalidArgument, "raster grid must be >= 1");
  SceneRaster raster{grid, std::vector<double>(size_t(grid) * grid, 0.0)};
  auto cell = [grid](double v, double lo, double hi) {
    auto i = static_cast<int64_t>((v - lo) / (hi - lo) * grid);
    return static_cast<size_t>(std::clamp<int64_t>(i, 0, int64_t(grid) - 1));
  };
  for (const auto& ref : scene.reflectors) {
    size_t ix = cell(ref.position[0], scene.room_min[0], scene.room_max[0]);
    size_t iy = cell(ref.position[1], scene.room_min[1], scene.room_max[1]);
    raster.cells[ix * grid + iy] += ref.amplitude;
  }
  return raster;
}

HyperNetWeights hyper_init(const HyperConfig& cfg, const Dims& base_dims, uint64_t seed) {
  cfg.validate();
  validate_dims(base_dims);
  if (base_dims.frames != cfg.arch.frames)
    fail(Err::InvalidDims, "base grid frames must match the generated network");
  HyperLayout lay(cfg);
  HyperNetWeights w{cfg, base_dims, 1.0, std::vector<double>(lay.total, 0.0)};
  auto g = make_rng(seed, "hyper_init");
  auto fill = [&](const MatSeg& m, double gain) {
    double lim = gain * std::sqrt(1.0 / double(m.cols));
    for (size_t i = m.w_off; i < m.end(); ++i) w.w[i] = uniform(g, -lim, lim);
  };
  fill(lay.c1, 1.0);
  fill(lay.c2, 1.0);
  fill(lay.fc, 1.0);
  fill(lay.embed, 1.0);
  fill(lay.q, 1.0);
  fill(lay.k, 1.0);
  fill(lay.v, 1.0);
  fill(lay.t1, 1.0);
  fill(lay.t2, 1.0);
  // Small heads keep the first generated networks tame (gamma near 1, weights
  // well inside the direct-fit init range) without cutting gradient flow.
  fill(lay.theta_head, 0.1);
  fill(lay.mod_head, 0.1);
  return w;
}

namespace {

void check_shapes(const HyperNetWeights& weights, const Trajectory& traj) {
  weights.cfg.validate();
  traj.validate();
  if (weights.w.size() != HyperLayout(weights.cfg).total)
    fail(Err::LengthMismatch, "hypernet weight vector size");
  if (traj.frames != weights.cfg.arch.frames)
    fail(Err::InvalidDims, "trajectory frames must match the generated network");
  if (traj.tracks.size() != weights.cfg.tracks)
    fail(Err::InvalidDims, "trajectory track count must match the hypernet");
}

}  // namespace

InrDense hyper_forward(const HyperNetWeights& weights, const Scene& scene, const Trajectory& traj,
                       HyperForward& cache) {
  check_shapes(weights, traj);
  const HyperConfig& cfg = weights.cfg;
  const HyperLayout lay(cfg);
  const auto& K = kernels::ops();
  const double* W = weights.w.data();

  uint32_t grid = cfg.raster_grid, o1 = conv_out(grid), o2 = conv_out(o1);
  uint32_t T = cfg.arch.frames, d = cfg.pose_dmodel, E = cfg.env_latent, U = cfg.trunk_width;
  uint32_t width = cfg.arch.width;
  size_t pose_dim = size_t(3) * cfg.tracks;
  size_t M = lay.mod_head.rows;

  cache.raster = rasterize(scene, grid);
  cache.a1.assign(size_t(kConv1Ch) * o1 * o1, 0.0);
  cache.a2.assign(size_t(kConv2Ch) * o2 * o2, 0.0);
  conv_relu_fwd(W + lay.c1.w_off, W + lay.c1.b_off, cache.raster.cells.data(), cache.a1.data(),
                {1, kConv1Ch, grid, o1});
  conv_relu_fwd(W + lay.c2.w_off, W + lay.c2.b_off, cache.a1.data(), cache.a2.data(),
                {kConv1Ch, kConv2Ch, o1, o2});
  cache.z_e.assign(E, 0.0);
  K.matvec(W + lay.fc.w_off, cache.a2.data(), W + lay.fc.b_off, cache.z_e.data(), E, lay.fc.cols);

  cache.pose_in.assign(size_t(T) * pose_dim, 0.0);
  for (uint32_t t = 0; t < T; ++t)
    for (uint32_t k = 0; k < cfg.tracks; ++k)
      for (int c = 0; c < 3; ++c)
        cache.pose_in[size_t(t) * pose_dim + size_t(k) * 3 + c] = traj.tracks[k].positions[t][c];

  cache.h.assign(size_t(T) * d, 0.0);
  cache.att_q.assign(size_t(T) * d, 0.0);
  cache.att_k.assign(size_t(T) * d, 0.0);
  cache.att_v.assign(size_t(T) * d, 0.0);
  cache.alpha.assign(size_t(T) * T, 0.0);
  cache.z_p.assign(size_t(T) * d, 0.0);
  for (uint32_t t = 0; t < T; ++t) {
    K.matvec(W + lay.embed.w_off, cache.pose_in.data() + size_t(t) * pose_dim,
             W + lay.embed.b_off, cache.h.data() + size_t(t) * d, d, pose_dim);
  }
  for (uint32_t t = 0; t < T; ++t) {
    const double* ht = cache.h.data() + size_t(t) * d;
    K.matvec(W + lay.q.w_off, ht, W + lay.q.b_off, cache.att_q.data() + size_t(t) * d, d, d);
    K.matvec(W + lay.k.w_off, ht, W + lay.k.b_off, cache.att_k.data() + size_t(t) * d, d, d);
    K.matvec(W + lay.v.w_off, ht, W + lay.v.b_off, cache.att_v.data() + size_t(t) * d, d, d);
  }
  double inv_sqrt_d = 1.0 / std::sqrt(double(d));
  std::vector<double> row(T);
  for (uint32_t t = 0; t < T; ++t) {
    double peak = -std::numeric_limits<double>::infinity();
    for (uint32_t u = 0; u < T; ++u) {
      row[u] = K.dot(cache.att_q.data() + size_t(t) * d, cache.att_k.data() + size_t(u) * d, d) *
               inv_sqrt_d;
      peak = std::max(peak, row[u]);
    }
    double denom = 0.0;
    for (uint32_t u = 0; u < T; ++u) {
      row[u] = std::exp(row[u] - peak);
      denom += row[u];
    }
    double* zt = cache.z_p.data() + size_t(t) * d;
    std::copy_n(cache.h.data() + size_t(t) * d, d, zt);
    for (uint32_t u = 0; u < T; ++u) {
      double a = row[u] / denom;
      cache.alpha[size_t(t) * T + u] = a;
      K.axpy(a, cache.att_v.data() + size_t(u) * d, zt, d);
    }
  }
  cache.z_pool.assign(d, 0.0);
  for (uint32_t t = 0; t < T; ++t)
    K.axpy(1.0 / double(T), cache.z_p.data() + size_t(t) * d, cache.z_pool.data(), d);

  std::vector<double> ctx(size_t(E) + d);
  auto trunk = [&](const double* zp, double* u1, double* u2) {
    std::copy_n(cache.z_e.data(), E, ctx.data());
    std::copy_n(zp, d, ctx.data() + E);
    K.matvec(W + lay.t1.w_off, ctx.data(), W + lay.t1.b_off, u1, U, ctx.size());
    K.relu(u1, u1, U);
    K.matvec(W + lay.t2.w_off, u1, W + lay.t2.b_off, u2, U, U);
    K.relu(u2, u2, U);
  };
  cache.u1.assign(size_t(T) * U, 0.0);
  cache.u2.assign(size_t(T) * U, 0.0);
  cache.u1_pool.assign(U, 0.0);
  cache.u2_pool.assign(U, 0.0);
  for (uint32_t t = 0; t < T; ++t)
    trunk(cache.z_p.data() + size_t(t) * d, cache.u1.data() + size_t(t) * U,
          cache.u2.data() + size_t(t) * U);
  trunk(cache.z_pool.data(), cache.u1_pool.data(), cache.u2_pool.data());

  auto counts = cfg.arch.param_count();
  InrDense dense{cfg.arch, std::vector<double>(counts.theta),
                 std::vector<double>(counts.modulation)};
  K.matvec(W + lay.theta_head.w_off, cache.u2_pool.data(), W + lay.theta_head.b_off,
           dense.theta.data(), counts.theta, U);
  cache.mod_raw.assign(size_t(T) * M, 0.0);
  for (uint32_t t = 0; t < T; ++t)
    K.matvec(W + lay.mod_head.w_off, cache.u2.data() + size_t(t) * U, W + lay.mod_head.b_off,
             cache.mod_raw.data() + size_t(t) * M, M, U);
  // Raw head output maps onto the modulation layout one to one; the scale
  // half passes through 1 + tanh so zero output is the identity film.
  for (size_t i = 0; i < dense.modulations.size(); ++i) {
    bool is_gamma = (i % (size_t(2) * width)) < width;
    dense.modulations[i] = is_gamma ? 1.0 + std::tanh(cache.mod_raw[i]) : cache.mod_raw[i];
  }
  return dense;
}

InrParams hyper_generate(const HyperNetWeights& weights, const Scene& scene,
                         const Trajectory& traj) {
  HyperForward cache;
  InrDense dense = hyper_forward(weights, scene, traj, cache);
  auto shapes = dense.arch.layers();
  const auto& out = shapes.back();
  for (size_t i = 0; i < out.rows * out.cols; ++i)
    dense.theta[out.w_offset + i] *= weights.output_scale;
  for (size_t i = 0; i < out.rows; ++i) dense.theta[out.b_offset + i] *= weights.output_scale;
  return to_params(dense);
}

SampleResult generate_signal(const HyperNetWeights& weights, const Scene& scene,
                             const Trajectory& traj, const SamplePlan& plan) {
  return sample(hyper_generate(weights, scene, traj), plan, weights.base_dims);
}

void hyper_backward(const HyperNetWeights& weights, const HyperForward& cache,
                    const InrGradient& dparams, std::vector<double>& grad_w) {
  const HyperConfig& cfg = weights.cfg;
  const HyperLayout lay(cfg);
  auto counts = cfg.arch.param_count();
  if (grad_w.size() != lay.total) fail(Err::LengthMismatch, "hypernet gradient buffer size");
  if (dparams.theta.size() != counts.theta || dparams.modulations.size() != counts.modulation)
    fail(Err::LengthMismatch, "generated-parameter gradient size");

  const auto& K = kernels::ops();
  const double* W = weights.w.data();
  double* G = grad_w.data();

  uint32_t grid = cfg.raster_grid, o1 = conv_out(grid), o2 = conv_out(o1);
  uint32_t T = cfg.arch.frames, d = cfg.pose_dmodel, E = cfg.env_latent, U = cfg.trunk_width;
  uint32_t width = cfg.arch.width;
  size_t pose_dim = size_t(3) * cfg.tracks;
  size_t M = lay.mod_head.rows;

  std::vector<double> draw(M);
  std::vector<double> du2(size_t(T) * U, 0.0), du2_pool(U, 0.0);
  for (uint32_t t = 0; t < T; ++t) {
    for (size_t i = 0; i < M; ++i) {
      size_t idx = size_t(t) * M + i;
      double up = dparams.modulations[idx];
      if ((i % (size_t(2) * width)) < width) {
        double th = std::tanh(cache.mod_raw[idx]);
        draw[i] = up * (1.0 - th * th);
      } else {
        draw[i] = up;
      }
    }
    K.ger_acc(draw.data(), cache.u2.data() + size_t(t) * U, G + lay.mod_head.w_off, M, U);
    K.axpy(1.0, draw.data(), G + lay.mod_head.b_off, M);
    K.matvec_t_acc(W + lay.mod_head.w_off, draw.data(), du2.data() + size_t(t) * U, M, U);
  }
  K.ger_acc(dparams.theta.data(), cache.u2_pool.data(), G + lay.theta_head.w_off, counts.theta, U);
  K.axpy(1.0, dparams.theta.data(), G + lay.theta_head.b_off, counts.theta);
  K.matvec_t_acc(W + lay.theta_head.w_off, dparams.theta.data(), du2_pool.data(), counts.theta, U);

  std::vector<double> ctx(size_t(E) + d), dctx(size_t(E) + d), du1(U), dpre(U);
  std::vector<double> dz_e(E, 0.0), dz_p(size_t(T) * d, 0.0), dz_pool(d, 0.0);
  auto trunk_bwd = [&](const double* zp, const double* u1, const double* u2, const double* du2_in,
                       double* dzp_acc) {
    K.relu_bwd(du2_in, u2, dpre.data(), U);
    K.ger_acc(dpre.data(), u1, G + lay.t2.w_off, U, U);
    K.axpy(1.0, dpre.data(), G + lay.t2.b_off, U);
    std::fill(du1.begin(), du1.end(), 0.0);
    K.matvec_t_acc(W + lay.t2.w_off, dpre.data(), du1.data(), U, U);
    K.relu_bwd(du1.data(), u1, dpre.data(), U);
    std::copy_n(cache.z_e.data(), E, ctx.data());
    std::copy_n(zp, d, ctx.data() + E);
    K.ger_acc(dpre.data(), ctx.data(), G + lay.t1.w_off, U, ctx.size());
    K.axpy(1.0, dpre.data(), G + lay.t1.b_off, U);
    std::fill(dctx.begin(), dctx.end(), 0.0);
    K.matvec_t_acc(W + lay.t1.w_off, dpre.data(), dctx.data(), U, ctx.size());
    K.axpy(1.0, dctx.data(), dz_e.data(), E);
    K.axpy(1.0, dctx.data() + E, dzp_acc, d);
  };
  for (uint32_t t = 0; t < T; ++t)
    trunk_bwd(cache.z_p.data() + size_t(t) * d, cache.u1.data() + size_t(t) * U,
              cache.u2.data() + size_t(t) * U, du2.data() + size_t(t) * U,
              dz_p.data() + size_t(t) * d);
  trunk_bwd(cache.z_pool.data(), cache.u1_pool.data(), cache.u2_pool.data(), du2_pool.data(),
            dz_pool.data());
  for (uint32_t t = 0; t < T; ++t)
    K.axpy(1.0 / double(T), dz_pool.data(), dz_p.data() + size_t(t) * d, d);

  // Attention: z_p[t] = h[t] + sum_u alpha[t][u] v[u], scores scaled by
  // 1/sqrt(d), softmax per row.
  double inv_sqrt_d = 1.0 / std::sqrt(double(d));
  std::vector<double> dh(size_t(T) * d, 0.0), dq(size_t(T) * d, 0.0), dk(size_t(T) * d, 0.0),
      dv(size_t(T) * d, 0.0);
  std::vector<double> dalpha(T), dscore(T);
  for (uint32_t t = 0; t < T; ++t) {
    const double* dzt = dz_p.data() + size_t(t) * d;
    K.axpy(1.0, dzt, dh.data() + size_t(t) * d, d);
    for (uint32_t u = 0; u < T; ++u) {
      dalpha[u] = K.dot(dzt, cache.att_v.data() + size_t(u) * d, d);
      K.axpy(cache.alpha[size_t(t) * T + u], dzt, dv.data() + size_t(u) * d, d);
    }
    double inner = 0.0;
    for (uint32_t u = 0; u < T; ++u) inner += cache.alpha[size_t(t) * T + u] * dalpha[u];
    for (uint32_t u = 0; u < T; ++u)
      dscore[u] = cache.alpha[size_t(t) * T + u] * (dalpha[u] - inner);
    for (uint32_t u = 0; u < T; ++u) {
      K.axpy(dscore[u] * inv_sqrt_d, cache.att_k.data() + size_t(u) * d,
             dq.data() + size_t(t) * d, d);
      K.axpy(dscore[u] * inv_sqrt_d, cache.att_q.data() + size_t(t) * d,
             dk.data() + size_t(u) * d, d);
    }
  }
  for (uint32_t t = 0; t < T; ++t) {
    const double* ht = cache.h.data() + size_t(t) * d;
    double* dht = dh.data() + size_t(t) * d;
    K.ger_acc(dq.data() + size_t(t) * d, ht, G + lay.q.w_off, d, d);
    K.axpy(1.0, dq.data() + size_t(t) * d, G + lay.q.b_off, d);
    K.matvec_t_acc(W + lay.q.w_off, dq.data() + size_t(t) * d, dht, d, d);
    K.ger_acc(dk.data() + size_t(t) * d, ht, G + lay.k.w_off, d, d);
    K.axpy(1.0, dk.data() + size_t(t) * d, G + lay.k.b_off, d);
    K.matvec_t_acc(W + lay.k.w_off, dk.data() + size_t(t) * d, dht, d, d);
    K.ger_acc(dv.data() + size_t(t) * d, ht, G + lay.v.w_off, d, d);
    K.axpy(1.0, dv.data() + size_t(t) * d, G + lay.v.b_off, d);
    K.matvec_t_acc(W + lay.v.w_off, dv.data() + size_t(t) * d, dht, d, d);
  }
  for (uint32_t t = 0; t < T; ++t) {
    K.ger_acc(dh.data() + size_t(t) * d, cache.pose_in.data() + size_t(t) * pose_dim,
              G + lay.embed.w_off, d, pose_dim);
    K.axpy(1.0, dh.data() + size_t(t) * d, G + lay.embed.b_off, d);
  }

  std::vector<double> dflat(lay.fc.cols, 0.0);
  K.ger_acc(dz_e.data(), cache.a2.data(), G + lay.fc.w_off, E, lay.fc.cols);
  K.axpy(1.0, dz_e.data(), G + lay.fc.b_off, E);
  K.matvec_t_acc(W + lay.fc.w_off, dz_e.data(), dflat.data(), E, lay.fc.cols);

  std::vector<double> da1(cache.a1.size(), 0.0);
  conv_relu_bwd(W + lay.c2.w_off, cache.a1.data(), cache.a2.data(), dflat.data(),
                G + lay.c2.w_off, G + lay.c2.b_off, da1.data(), {kConv1Ch, kConv2Ch, o1, o2});
  conv_relu_bwd(W + lay.c1.w_off, cache.raster.cells.data(), cache.a1.data(), da1.data(),
                G + lay.c1.w_off, G + lay.c1.b_off, nullptr, {1, kConv1Ch, grid, o1});
}

HyperTrainReport hyper_train(HyperNetWeights& weights, const std::vector<DatasetItem>& dataset,
                             const HyperTrainConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  weights.cfg.validate();
  HyperLayout lay(weights.cfg);
  if (weights.w.size() != lay.total) fail(Err::LengthMismatch, "hypernet weight vector size");
  if (dataset.empty()) fail(Err::InvalidArgument, "empty training dataset");
  if (cfg.epochs < 1) fail(Err::InvalidArgument, "epochs must be >= 1");

  const Dims dims = dataset.front().cube.dims();
  if (dims != weights.base_dims) fail(Err::InvalidDims, "dataset grid must match the hypernet");
  for (const auto& item : dataset) {
    item.scene.validate();
    item.trajectory.validate();
    if (item.cube.dims() != dims) fail(Err::InvalidDims, "dataset cubes must share dims");
    if (item.trajectory.frames != weights.cfg.arch.frames)
      fail(Err::InvalidDims, "trajectory frames must match the generated network");
    if (item.trajectory.tracks.size() != weights.cfg.tracks)
      fail(Err::InvalidDims, "trajectory track count must match the hypernet");
  }

  FitConfig inner;
  inner.batch = cfg.batch;
  inner.lambda_ssim = cfg.lambda_ssim;
  inner.lambda_mse = cfg.lambda_mse;
  inner.lambda_perceptual = cfg.lambda_perceptual;
  inner.energy_fraction = cfg.energy_fraction;
  inner.planes_per_epoch = cfg.planes_per_epoch;
  inner.ssim = cfg.ssim;
  validate_fit_config(dims, inner);

  double scale = 0.0;
  for (const auto& item : dataset) scale = std::max(scale, item.cube.peak_magnitude());
  if (!(scale > 0.0)) scale = 1.0;
  weights.output_scale = scale;

  std::vector<FitTarget> targets;
  targets.reserve(dataset.size());
  for (const auto& item : dataset) targets.push_back(FitTarget::build_scaled(item.cube, scale));

  std::unique_ptr<PerceptualExtractor> perceptual;
  if (cfg.lambda_perceptual > 0)
    perceptual = std::make_unique<PerceptualExtractor>(cfg.perceptual_seed);

  AdamState state(lay.total);
  std::vector<double> grad(lay.total, 0.0);
  HyperForward cache;
  HyperTrainReport report;
  report.losses.reserve(cfg.epochs);

  size_t n = dataset.size();
  std::vector<uint32_t> order(n);
  for (uint32_t e = 0; e < cfg.epochs; ++e) {
    std::iota(order.begin(), order.end(), 0u);
    auto g = make_rng(cfg.seed, "order", e);
    for (size_t i = 0; i + 1 < n; ++i)
      std::swap(order[i], order[i + uniform_index(g, n - i)]);
    EpochLoss mean{};
    for (uint32_t idx : order) {
      InrDense dense = hyper_forward(weights, dataset[idx].scene, dataset[idx].trajectory, cache);
      auto il = instance_loss_grad(dense, targets[idx], inner, perceptual.get(),
                                   derive_seed(cfg.seed, "item", idx), e);
      if (!std::isfinite(il.loss.total)) fail(Err::NonFinite, "hypernet training diverged");
      std::fill(grad.begin(), grad.end(), 0.0);
      hyper_backward(weights, cache, il.grad, grad);
      adam_step(weights.w, grad, state, cfg.adam);
      mean.total += il.loss.total;
      mean.mse += il.loss.mse;
      mean.ssim += il.loss.ssim;
      mean.perceptual += il.loss.perceptual;
    }
    mean.total /= double(n);
    mean.mse /= double(n);
    mean.ssim /= double(n);
    mean.perceptual /= double(n);
    report.losses.push_back(mean);
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace mmw

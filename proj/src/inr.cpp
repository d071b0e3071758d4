// SPDX-License-Identifier: Apache-2.0
#include "mmw/inr.hpp"

#include <cmath>
#include <fstream>

#include "mmw/common.hpp"
#include "mmw/kernels.hpp"
#include "mmw/rng.hpp"
#include "mmw/threading.hpp"

namespace mmw {

namespace {
constexpr char kMagic[4] = {'M', 'M', 'W', 'I'};
constexpr uint32_t kVersion = 1;
}  // namespace

void InrArch::validate() const {
  if (frequencies < 1 || frequencies > 16) fail(Err::InvalidArgument, "frequencies out of range");
  if (width < 2 || width > 4096) fail(Err::InvalidArgument, "width out of range");
  if (hidden_layers < 1 || hidden_layers > 64) fail(Err::InvalidArgument, "hidden layer count");
  if (frames < 1) fail(Err::InvalidDims, "frame count");
}

InrArch::Counts InrArch::param_count() const {
  validate();
  Counts c;
  size_t enc = encoded_dim();
  c.theta = size_t(width) * enc + width;                                    // input layer
  c.theta += size_t(hidden_layers - 1) * (size_t(width) * width + width);   // hidden stack
  c.theta += 2 * size_t(width) + 2;                                         // linear output
  c.modulation =
      variant == InrVariant::Modulated ? size_t(frames) * hidden_layers * 2 * width : 0;
  return c;
}

std::vector<InrArch::LayerShape> InrArch::layers() const {
  std::vector<LayerShape> shapes;
  shapes.reserve(hidden_layers + 1);
  size_t off = 0;
  size_t cols = encoded_dim();
  for (uint32_t l = 0; l < hidden_layers; ++l) {
    LayerShape s{off, off + size_t(width) * cols, width, cols};
    off = s.b_offset + width;
    shapes.push_back(s);
    cols = width;
  }
  shapes.push_back({off, off + 2 * size_t(width), 2, width});
  return shapes;
}

void InrParams::validate() const {
  auto counts = arch.param_count();
  if (theta.size() != counts.theta) fail(Err::LengthMismatch, "theta size");
  if (modulations.size() != counts.modulation) fail(Err::LengthMismatch, "modulation size");
  for (float v : theta)
    if (!std::isfinite(v)) fail(Err::NonFinite, "theta value");
  for (float v : modulations)
    if (!std::isfinite(v)) fail(Err::NonFinite, "modulation value");
}

InrParams make_params(const InrArch& arch) {
  auto counts = arch.param_count();
  InrParams p;
  p.arch = arch;
  p.theta.assign(counts.theta, 0.0f);
  p.modulations.assign(counts.modulation, 0.0f);
  for (uint32_t f = 0; f < arch.frames && arch.variant == InrVariant::Modulated; ++f)
    for (uint32_t l = 0; l < arch.hidden_layers; ++l) {
      float* g = p.modulations.data() + arch.mod_offset(f, l);
      for (uint32_t i = 0; i < arch.width; ++i) g[i] = 1.0f;
    }
  return p;
}

void params_write(const InrParams& params, const std::filesystem::path& path) {
  params.validate();
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(Err::IoFailure, "open for write: " + path.string());
  put_magic(os, kMagic);
  put_u32(os, kVersion);
  put_u32(os, static_cast<uint32_t>(params.arch.variant));
  put_u32(os, params.arch.frequencies);
  put_u32(os, params.arch.width);
  put_u32(os, params.arch.hidden_layers);
  put_u32(os, params.arch.frames);
  put_u32(os, static_cast<uint32_t>(params.theta.size()));
  put_u32(os, static_cast<uint32_t>(params.modulations.size()));
  for (float v : params.theta) put_f32(os, v);
  for (float v : params.modulations) put_f32(os, v);
  if (!os) fail(Err::IoFailure, "write: " + path.string());
}

InrParams params_read(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(Err::IoFailure, "open for read: " + path.string());
  expect_magic(is, kMagic, "params file");
  if (get_u32(is) != kVersion) fail(Err::VersionMismatch, "params file");
  InrParams p;
  uint32_t variant = get_u32(is);
  if (variant > 1) fail(Err::ParseError, "unknown network variant");
  p.arch.variant = static_cast<InrVariant>(variant);
  p.arch.frequencies = get_u32(is);
  p.arch.width = get_u32(is);
  p.arch.hidden_layers = get_u32(is);
  p.arch.frames = get_u32(is);
  auto counts = p.arch.param_count();
  uint32_t theta_n = get_u32(is);
  uint32_t mod_n = get_u32(is);
  if (theta_n != counts.theta || mod_n != counts.modulation)
    fail(Err::LengthMismatch, "params payload counts");
  p.theta.resize(theta_n);
  p.modulations.resize(mod_n);
  for (auto& v : p.theta) v = get_f32(is);
  for (auto& v : p.modulations) v = get_f32(is);
  if (is.peek() != std::char_traits<char>::eof()) fail(Err::LengthMismatch, "params payload size");
  p.validate();
  return p;
}

InrDense to_dense(const InrParams& params) {
  params.validate();
  InrDense d;
  d.arch = params.arch;
  d.theta.assign(params.theta.begin(), params.theta.end());
  d.modulations.assign(params.modulations.begin(), params.modulations.end());
  return d;
}

InrParams to_params(const InrDense& dense) {
  InrParams p;
  p.arch = dense.arch;
  p.theta.assign(dense.theta.begin(), dense.theta.end());
  p.modulations.assign(dense.modulations.begin(), dense.modulations.end());
  p.validate();
  return p;
}

std::complex<double> inr_forward(const InrDense& dense, const double spatial[3], uint32_t frame,
                                 InrScratch& scratch) {
  const InrArch& arch = dense.arch;
  if (frame >= arch.frames) fail(Err::InvalidArgument, "frame index out of range");
  const auto& k = kernels::ops();
  auto enc_cfg = arch.encoding();
  uint32_t W = arch.width;

  scratch.encoded.resize(enc_cfg.output_dim());
  scratch.h.resize(W);
  scratch.pre.resize(W);

  double coords[4];
  size_t nc = 0;
  if (arch.variant == InrVariant::Base) {
    coords[nc++] = arch.frames > 1 ? double(frame) / double(arch.frames - 1) : 0.0;
  }
  coords[nc++] = spatial[0];
  coords[nc++] = spatial[1];
  coords[nc++] = spatial[2];
  positional_encode(enc_cfg, std::span<const double>(coords, nc),
                    std::span<double>(scratch.encoded));

  auto shapes = arch.layers();
  const double* x = scratch.encoded.data();
  for (uint32_t l = 0; l < arch.hidden_layers; ++l) {
    const auto& s = shapes[l];
    k.matvec(dense.theta.data() + s.w_offset, x, dense.theta.data() + s.b_offset,
             scratch.pre.data(), s.rows, s.cols);
    if (arch.variant == InrVariant::Modulated) {
      const double* gamma = dense.modulations.data() + arch.mod_offset(frame, l);
      k.film_relu(scratch.pre.data(), gamma, gamma + W, scratch.h.data(), W);
    } else {
      k.relu(scratch.pre.data(), scratch.h.data(), W);
    }
    x = scratch.h.data();
  }
  const auto& out = shapes.back();
  double y[2];
  k.matvec(dense.theta.data() + out.w_offset, x, dense.theta.data() + out.b_offset, y, 2, W);
  return {y[0], y[1]};
}

std::complex<double> inr_forward(const InrParams& params, const double spatial[3],
                                 uint32_t frame) {
  InrDense dense = to_dense(params);
  InrScratch scratch;
  return inr_forward(dense, spatial, frame, scratch);
}

std::complex<double> mlp_forward(const InrDense& dense, std::span<const double> coords,
                                 InrScratch& scratch) {
  const InrArch& arch = dense.arch;
  const auto& k = kernels::ops();
  auto enc_cfg = arch.encoding();
  uint32_t W = arch.width;

  scratch.encoded.resize(enc_cfg.output_dim());
  scratch.h.resize(W);
  scratch.pre.resize(W);
  positional_encode(enc_cfg, coords, std::span<double>(scratch.encoded));

  auto shapes = arch.layers();
  const double* x = scratch.encoded.data();
  for (uint32_t l = 0; l < arch.hidden_layers; ++l) {
    const auto& s = shapes[l];
    k.matvec(dense.theta.data() + s.w_offset, x, dense.theta.data() + s.b_offset,
             scratch.pre.data(), s.rows, s.cols);
    k.relu(scratch.pre.data(), scratch.h.data(), W);
    x = scratch.h.data();
  }
  const auto& out = shapes.back();
  double y[2];
  k.matvec(dense.theta.data() + out.w_offset, x, dense.theta.data() + out.b_offset, y, 2, W);
  return {y[0], y[1]};
}

namespace {

std::vector<double> axis_plan(uint32_t base_n, uint32_t factor, const SamplePlan& plan,
                              uint64_t master, const char* tag, uint32_t& out_n) {
  // Returns the normalized coordinate per output bin along one axis.
  std::vector<double> coords;
  if (plan.mode == SamplePlan::Mode::SuperRes) {
    out_n = factor * (base_n - 1) + 1;
    coords.resize(out_n);
    double denom = double(factor) * (base_n - 1);
    for (uint32_t j = 0; j < out_n; ++j) coords[j] = base_n == 1 ? 0.0 : j / denom;
    return coords;
  }
  out_n = base_n;
  coords.resize(out_n);
  if (plan.mode == SamplePlan::Mode::Augment) {
    auto g = make_rng(master, tag);
    double scale = plan.radius / 8.0;
    for (uint32_t j = 0; j < out_n; ++j) {
      double jitter = uniform01(g) * scale;
      coords[j] = base_n == 1 ? 0.0 : (j + jitter) / double(base_n - 1);
    }
  } else {
    for (uint32_t j = 0; j < out_n; ++j) coords[j] = base_n == 1 ? 0.0 : double(j) / (base_n - 1);
  }
  return coords;
}

}  // namespace

SampleResult sample(const InrParams& params, const SamplePlan& plan, const Dims& base_dims) {
  validate_dims(base_dims);
  if (base_dims.frames != params.arch.frames)
    fail(Err::LengthMismatch, "base frame count does not match network");
  if (plan.mode == SamplePlan::Mode::SuperRes &&
      (plan.factor_r < 1 || plan.factor_d < 1 || plan.factor_a < 1))
    fail(Err::InvalidArgument, "upsampling factors must be >= 1");
  if (plan.mode == SamplePlan::Mode::Augment && plan.radius > 7)
    fail(Err::InvalidArgument, "jitter radius must be in [0, 7]");

  bool super = plan.mode == SamplePlan::Mode::SuperRes;
  uint32_t fr = super ? plan.factor_r : 1;
  uint32_t fd = super ? plan.factor_d : 1;
  uint32_t fa = super ? plan.factor_a : 1;

  uint32_t R = 0, D = 0, A = 0;
  auto rc = axis_plan(base_dims.range, fr, plan, plan.seed, "axis.range", R);
  auto dc = axis_plan(base_dims.doppler, fd, plan, plan.seed, "axis.doppler", D);
  auto ac = axis_plan(base_dims.antennas, fa, plan, plan.seed, "axis.antenna", A);

  Dims out_dims{base_dims.frames, R, D, A};
  validate_dims(out_dims);
  InrDense dense = to_dense(params);

  std::vector<std::complex<float>> data(out_dims.cells());
  size_t per_frame = size_t(R) * D * A;
  size_t blocks = block_count(data.size());
  parallel_for(blocks, [&](size_t blk) {
    InrScratch scratch;
    size_t begin = blk * kGradBlock;
    size_t end = std::min(begin + kGradBlock, data.size());
    for (size_t idx = begin; idx < end; ++idx) {
      uint32_t t = uint32_t(idx / per_frame);
      size_t rem = idx % per_frame;
      uint32_t r = uint32_t(rem / (size_t(D) * A));
      rem %= size_t(D) * A;
      uint32_t d = uint32_t(rem / A);
      uint32_t a = uint32_t(rem % A);
      double spatial[3] = {rc[r], dc[d], ac[a]};
      auto z = inr_forward(dense, spatial, t, scratch);
      data[idx] = {static_cast<float>(z.real()), static_cast<float>(z.imag())};
    }
  });

  SampleResult res{ComplexCube(out_dims, std::move(data)), out_dims.cells(),
                   size_t(fr) * fd * fa * base_dims.cells()};
  return res;
}

double compression_ratio(const Dims& dims, size_t total_params) {
  if (total_params == 0) fail(Err::InvalidArgument, "zero parameter count");
  return double(dims.scalars()) / double(total_params);
}

}  // namespace mmw

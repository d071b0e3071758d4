// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mmw/cube.hpp"
#include "mmw/encoding.hpp"

namespace mmw {

// Modulated: 3-D spatial input (r, d, a), per-frame FiLM on every hidden
// layer. Base: 4-D input (t, r, d, a), no modulation state at all.
enum class InrVariant : uint32_t { Base = 0, Modulated = 1 };

struct InrArch {
  InrVariant variant = InrVariant::Modulated;
  uint32_t frequencies = 8;
  uint32_t width = 32;
  uint32_t hidden_layers = 4;
  uint32_t frames = 20;

  uint32_t input_dim() const { return variant == InrVariant::Base ? 4 : 3; }
  EncodingConfig encoding() const { return {input_dim(), frequencies}; }
  uint32_t encoded_dim() const { return encoding().output_dim(); }

  struct Counts {
    size_t theta = 0;
    size_t modulation = 0;
    size_t total() const { return theta + modulation; }
  };
  Counts param_count() const;
  void validate() const;

  // Hidden layers then the 2-wide linear output head.
  struct LayerShape {
    size_t w_offset, b_offset, rows, cols;
  };
  std::vector<LayerShape> layers() const;

  // Offset of a (gamma, beta) pair: frame-major, then layer; gamma spans
  // [off, off+W), beta [off+W, off+2W).
  size_t mod_offset(uint32_t frame, uint32_t layer) const {
    return (size_t(frame) * hidden_layers + layer) * 2 * width;
  }
};

// Serialized network state, float32 end to end.
struct InrParams {
  InrArch arch;
  std::vector<float> theta;
  std::vector<float> modulations;

  void validate() const;
  std::span<const float> gamma(uint32_t frame, uint32_t layer) const {
    return {modulations.data() + arch.mod_offset(frame, layer), arch.width};
  }
  std::span<const float> beta(uint32_t frame, uint32_t layer) const {
    return {modulations.data() + arch.mod_offset(frame, layer) + arch.width, arch.width};
  }
};

// Identity state: seeded theta is the caller's business, gamma = 1, beta = 0.
InrParams make_params(const InrArch& arch);

void params_write(const InrParams& params, const std::filesystem::path& path);
InrParams params_read(const std::filesystem::path& path);

// Evaluation-side mirror in double precision.
struct InrDense {
  InrArch arch;
  std::vector<double> theta;
  std::vector<double> modulations;
};
InrDense to_dense(const InrParams& params);
InrParams to_params(const InrDense& dense);

// Scratch space reused across forward calls; one per thread/block.
struct InrScratch {
  std::vector<double> encoded, h, pre;
};

// spatial = normalized (r, d, a); the Base variant derives its time input
// from frame/(frames-1). frame must be < arch.frames.
std::complex<double> inr_forward(const InrDense& dense, const double spatial[3], uint32_t frame,
                                 InrScratch& scratch);
std::complex<double> inr_forward(const InrParams& params, const double spatial[3], uint32_t frame);

// Bare MLP over pre-assembled encoder inputs (length input_dim), plain ReLU,
// same kernel path as inr_forward. Identity modulation (gamma 1, beta 0)
// reproduces this bit for bit.
std::complex<double> mlp_forward(const InrDense& dense, std::span<const double> coords,
                                 InrScratch& scratch);

struct SamplePlan {
  enum class Mode { Grid, SuperRes, Augment };
  Mode mode = Mode::Grid;
  // SuperRes upsampling factors along (range, doppler, antenna); the frame
  // axis stays discrete.
  uint32_t factor_r = 1, factor_d = 1, factor_a = 1;
  // Augment: one-sided jitter of each base bin j to [j, j + radius/8],
  // radius an integer in [0, 7].
  uint32_t radius = 0;
  uint64_t seed = 0;
};

struct SampleResult {
  ComplexCube cube;
  size_t points_emitted;   // cells actually evaluated (inclusive grid ends)
  size_t points_nominal;   // factor_r * factor_d * factor_a * base cells
};

// Evaluates the INR at grid / upsampled / jittered coordinates derived from
// base_dims. base_dims.frames must equal arch.frames.
SampleResult sample(const InrParams& params, const SamplePlan& plan, const Dims& base_dims);

double compression_ratio(const Dims& dims, size_t total_params);

}  // namespace mmw

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mmw/cube.hpp"
#include "mmw/fit.hpp"
#include "mmw/inr.hpp"
#include "mmw/radar.hpp"

namespace mmw {

// Amortized generator: a scene raster and a track trajectory go in, INR
// parameters come out. Toy scale throughout; every width is configurable.
struct HyperConfig {
  uint32_t raster_grid = 32;   // scene occupancy raster, grid x grid
  uint32_t env_latent = 64;    // scene embedding size
  uint32_t pose_dmodel = 64;   // per-frame pose embedding size
  uint32_t trunk_width = 256;
  uint32_t tracks = 6;         // tracks every trajectory must carry
  InrArch arch;                // shape of the generated network

  void validate() const;
};

// Top-down amplitude-weighted occupancy over the room's (x, y) extent.
struct SceneRaster {
  uint32_t grid = 0;
  std::vector<double> cells;  // grid x grid, x-major
};
SceneRaster rasterize(const Scene& scene, uint32_t grid);

// Flat weight vector with a fixed segment order (see HyperLayout).
struct HyperNetWeights {
  HyperConfig cfg;
  Dims base_dims;             // sampling grid the weights were trained for
  double output_scale = 1.0;  // multiplied into the generated output layer
  std::vector<double> w;
};

struct MatSeg {
  size_t w_off = 0, b_off = 0, rows = 0, cols = 0;
  size_t end() const { return b_off + rows; }
};

// env conv1 -> conv2 -> fc | pose embed, attention q/k/v | trunk fc1, fc2 |
// theta head | modulation head. Conv segments store rows = out channels,
// cols = in channels * 9.
struct HyperLayout {
  MatSeg c1, c2, fc, embed, q, k, v, t1, t2, theta_head, mod_head;
  size_t total = 0;
  explicit HyperLayout(const HyperConfig& cfg);
};

HyperNetWeights hyper_init(const HyperConfig& cfg, const Dims& base_dims, uint64_t seed);

// Every intermediate needed by the backward pass.
struct HyperForward {
  SceneRaster raster;
  std::vector<double> a1, a2;        // post-relu conv activations
  std::vector<double> z_e;           // scene latent
  std::vector<double> pose_in;       // frames x (3 * tracks)
  std::vector<double> h, att_q, att_k, att_v;  // frames x d
  std::vector<double> alpha;         // frames x frames softmax rows
  std::vector<double> z_p;           // frames x d, residual added
  std::vector<double> z_pool;        // mean over frames
  std::vector<double> u1, u2;        // frames x trunk (post-relu)
  std::vector<double> u1_pool, u2_pool;
  std::vector<double> mod_raw;       // frames x (hidden_layers * 2 * width)
};

// Runs the generator; gamma = 1 + tanh(raw), beta = raw. The returned dense
// network is unscaled (training operates in normalized target space).
InrDense hyper_forward(const HyperNetWeights& weights, const Scene& scene, const Trajectory& traj,
                       HyperForward& cache);

// Packs the generated network into float parameters with output_scale folded
// into the linear output layer.
InrParams hyper_generate(const HyperNetWeights& weights, const Scene& scene,
                         const Trajectory& traj);

// hyper_generate followed by sample() on the stored base grid.
SampleResult generate_signal(const HyperNetWeights& weights, const Scene& scene,
                             const Trajectory& traj, const SamplePlan& plan);

// Chain rule from generated-parameter gradients back to every weight.
// `grad_w` must be zero-initialized or accumulating.
void hyper_backward(const HyperNetWeights& weights, const HyperForward& cache,
                    const InrGradient& dparams, std::vector<double>& grad_w);

struct DatasetItem {
  Scene scene;
  Trajectory trajectory;
  ComplexCube cube;
};

struct HyperTrainConfig {
  uint32_t epochs = 1000;
  AdamConfig adam;
  uint32_t batch = 16384;
  double lambda_ssim = 0.5;
  double lambda_mse = 0.3;
  double lambda_perceptual = 0.2;
  double energy_fraction = 0.5;
  uint32_t planes_per_epoch = 2;
  uint64_t seed = 0;
  uint64_t perceptual_seed = 0;
  SsimConfig ssim;
};

struct HyperTrainReport {
  std::vector<EpochLoss> losses;  // per-epoch mean over dataset items
  double wall_seconds = 0;
};

// One epoch = one pass over the dataset in a seeded random order, one
// optimizer step per item. Items must share cube dims and track count; the
// dataset-wide peak magnitude becomes weights.output_scale.
HyperTrainReport hyper_train(HyperNetWeights& weights, const std::vector<DatasetItem>& dataset,
                             const HyperTrainConfig& cfg);

void hyper_write(const HyperNetWeights& weights, const std::filesystem::path& path);
HyperNetWeights hyper_read(const std::filesystem::path& path);

// Manifest: {"items": [{"scene": ..., "trajectory": ..., "cube": ...}, ...]},
// paths resolved relative to the manifest's directory.
std::vector<DatasetItem> dataset_read(const std::filesystem::path& manifest);

}  // namespace mmw

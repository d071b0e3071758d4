// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <random>
#include <utility>
#include <vector>

#include "mmw/adam.hpp"
#include "mmw/cube.hpp"
#include "mmw/inr.hpp"
#include "mmw/inr_grad.hpp"
#include "mmw/perceptual.hpp"
#include "mmw/ssim.hpp"

namespace mmw {

struct FitConfig {
  uint32_t epochs = 500;
  AdamConfig adam;
  uint32_t batch = 16384;
  double lambda_ssim = 0.5;
  double lambda_mse = 0.3;
  double lambda_perceptual = 0.2;
  // Fraction of the scattered batch drawn by the energy-weighted range
  // sampler; the rest is uniform over all coordinates.
  double energy_fraction = 0.5;
  uint32_t planes_per_epoch = 2;
  uint64_t seed = 0;
  uint64_t perceptual_seed = 0;
  SsimConfig ssim;
};

struct EpochLoss {
  double total = 0, mse = 0, ssim = 0, perceptual = 0;
};

struct FitReport {
  std::vector<EpochLoss> losses;
  double scale = 1.0;  // normalization folded into the output layer
  double final_cssim = 0, final_psnr_db = 0, final_mse = 0;
  double wall_seconds = 0;
};

// Draws a range bin with probability proportional to its energy; uniform
// when total energy is zero.
class EnergySampler {
 public:
  explicit EnergySampler(const std::vector<double>& energy);
  uint32_t draw(std::mt19937_64& g) const;

 private:
  std::vector<double> cdf_;
  double total_ = 0.0;
};

// Per-range-bin sum of |z|^2.
std::vector<double> range_energy(const ComplexCube& cube);

// Fit-ready view of a cube: values normalized by the peak magnitude, plus
// the sampling machinery derived from them.
struct FitTarget {
  Dims dims;
  std::vector<std::complex<double>> values;
  double scale = 1.0;      // divisor applied to the raw cube (>= tiny)
  double norm_peak = 1.0;  // SSIM dynamic range after normalization
  GridSpec grid;
  EnergySampler sampler;

  static FitTarget build(const ComplexCube& cube);
  // Shared-scale variant for multi-cube training; scale must be positive.
  static FitTarget build_scaled(const ComplexCube& cube, double scale);
  const std::complex<double>& at(uint32_t t, uint32_t r, uint32_t d, uint32_t a) const {
    return values[((size_t(t) * dims.range + r) * dims.doppler + d) * dims.antennas + a];
  }
};

// Shared sanity checks on the loss knobs against a target shape.
void validate_fit_config(const Dims& dims, const FitConfig& cfg);

// One epoch's loss and parameter gradient for a network against a target.
// Draw streams are derived from (seed, epoch) separately for the scattered
// batch and the plane choice, and the perceptual extractor is only consulted
// when its weight is positive, so zeroing a term cannot perturb the others.
// Shared by single-instance fitting and hypernet training.
struct InstanceLoss {
  EpochLoss loss;
  InrGradient grad;
};
InstanceLoss instance_loss_grad(const InrDense& dense, const FitTarget& target,
                                const FitConfig& cfg, const PerceptualExtractor* perceptual,
                                uint64_t seed, uint32_t epoch);

// Seeded layer-uniform initialization, bounds +-sqrt(1/fan_in).
void init_theta(const InrArch& arch, uint64_t seed, std::vector<double>& theta);

// Fits one cube. The returned parameters have the normalization scale folded
// into the linear output layer, so sample() reproduces raw-scale values.
std::pair<InrParams, FitReport> fit_instance(const ComplexCube& cube, const InrArch& arch,
                                             const FitConfig& cfg);

// epoch,total,mse,ssim,perceptual rows plus a trailing summary comment.
void fit_report_write_csv(const FitReport& report, const std::filesystem::path& path);

}  // namespace mmw

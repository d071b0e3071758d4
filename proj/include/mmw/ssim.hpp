// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

namespace mmw {

struct SsimConfig {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

// Mean SSIM over valid (fully interior) Gaussian windows. `dyn_range` is the
// dynamic range L in the stabilizer constants C1 = (k1 L)^2, C2 = (k2 L)^2;
// a tiny floor keeps all-zero planes well defined (identical planes give
// exactly 1). Planes are row-major rows x cols; both dims must be >= window.
double ssim_plane(const double* x, const double* y, size_t rows, size_t cols, double dyn_range,
                  const SsimConfig& cfg = {});

// Also writes d(mean SSIM)/dx into gx (assigned, not accumulated).
double ssim_plane_grad(const double* x, const double* y, size_t rows, size_t cols,
                       double dyn_range, std::vector<double>& gx, const SsimConfig& cfg = {});

}  // namespace mmw

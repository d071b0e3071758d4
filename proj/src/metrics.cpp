// SPDX-License-Identifier: Apache-2.0
#include "mmw/metrics.hpp"

#include <cmath>
#include <vector>

#include "mmw/common.hpp"

namespace mmw {

double cssim(const ComplexCube& pred, const ComplexCube& target, DynRange convention,
             const SsimConfig& cfg) {
  if (!(pred.dims() == target.dims())) fail(Err::LengthMismatch, "cube shapes differ");
  const Dims& dims = pred.dims();
  double L = target.peak_magnitude();
  if (convention == DynRange::Joint) L = std::max(L, pred.peak_magnitude());

  size_t rows = dims.range, cols = dims.doppler;
  std::vector<double> xr(rows * cols), xi(rows * cols), yr(rows * cols), yi(rows * cols);
  double acc = 0.0;
  for (uint32_t t = 0; t < dims.frames; ++t)
    for (uint32_t a = 0; a < dims.antennas; ++a) {
      for (uint32_t r = 0; r < rows; ++r)
        for (uint32_t d = 0; d < cols; ++d) {
          const auto& zp = pred.at(t, r, d, a);
          const auto& zt = target.at(t, r, d, a);
          xr[r * cols + d] = zp.real();
          xi[r * cols + d] = zp.imag();
          yr[r * cols + d] = zt.real();
          yi[r * cols + d] = zt.imag();
        }
      double s_re = ssim_plane(xr.data(), yr.data(), rows, cols, L, cfg);
      double s_im = ssim_plane(xi.data(), yi.data(), rows, cols, L, cfg);
      acc += 0.5 * (s_re + s_im);
    }
  return acc / (double(dims.frames) * dims.antennas);
}

double cube_mse(const ComplexCube& pred, const ComplexCube& target) {
  if (!(pred.dims() == target.dims())) fail(Err::LengthMismatch, "cube shapes differ");
  double acc = 0.0;
  const auto& p = pred.data();
  const auto& t = target.data();
  for (size_t i = 0; i < p.size(); ++i) {
    double dre = double(p[i].real()) - t[i].real();
    double dim = double(p[i].imag()) - t[i].imag();
    acc += dre * dre + dim * dim;
  }
  return acc / (2.0 * double(p.size()));
}

double psnr_db(const ComplexCube& pred, const ComplexCube& target) {
  double mse = cube_mse(pred, target);
  if (mse == 0.0) return 99.0;
  double peak = target.peak_magnitude();
  if (peak == 0.0) return -99.0;
  return 10.0 * std::log10(peak * peak / mse);
}

namespace {
double sq_dist(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}
}  // namespace

double hausdorff_directed(const PointCloud& from, const PointCloud& to) {
  if (from.points.empty() || to.points.empty())
    fail(Err::InvalidArgument, "hausdorff distance of an empty cloud");
  double worst = 0.0;
  for (const auto& p : from.points) {
    double best = sq_dist(p, to.points[0]);
    for (size_t i = 1; i < to.points.size(); ++i) {
      double d = sq_dist(p, to.points[i]);
      if (d < best) best = d;
    }
    if (best > worst) worst = best;
  }
  return std::sqrt(worst);
}

double hausdorff(const PointCloud& a, const PointCloud& b) {
  return std::max(hausdorff_directed(a, b), hausdorff_directed(b, a));
}

}  // namespace mmw

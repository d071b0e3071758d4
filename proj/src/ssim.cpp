// SPDX-License-Identifier: Apache-2.0
#include "mmw/ssim.hpp"

#include <cmath>

#include "mmw/common.hpp"

namespace mmw {
namespace {

std::vector<double> gaussian_window(int n, double sigma) {
  std::vector<double> w(size_t(n) * n);
  double c = (n - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double v = std::exp(-((i - c) * (i - c) + (j - c) * (j - c)) / (2.0 * sigma * sigma));
      w[size_t(i) * n + j] = v;
      sum += v;
    }
  for (double& v : w) v /= sum;
  return w;
}

struct WindowStats {
  double mu_x, mu_y, var_x, var_y, cov;
};

WindowStats window_stats(const double* x, const double* y, size_t cols, size_t i0, size_t j0,
                         const std::vector<double>& g, int n) {
  double mx = 0, my = 0, xx = 0, yy = 0, xy = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double w = g[size_t(i) * n + j];
      double xv = x[(i0 + i) * cols + (j0 + j)];
      double yv = y[(i0 + i) * cols + (j0 + j)];
      mx += w * xv;
      my += w * yv;
      xx += w * (xv * xv);
      yy += w * (yv * yv);
      // xv * yv first: the product is commutative, so swapping the planes
      // cannot change the rounding and the score stays exactly symmetric.
      xy += w * (xv * yv);
    }
  return {mx, my, xx - mx * mx, yy - my * my, xy - mx * my};
}

void check_plane(size_t rows, size_t cols, int window) {
  if (rows < size_t(window) || cols < size_t(window))
    fail(Err::InvalidDims, "plane smaller than the comparison window");
}

}  // namespace

double ssim_plane(const double* x, const double* y, size_t rows, size_t cols, double dyn_range,
                  const SsimConfig& cfg) {
  check_plane(rows, cols, cfg.window);
  double L = dyn_range > 1e-12 ? dyn_range : 1e-12;
  double C1 = cfg.k1 * L * cfg.k1 * L;
  double C2 = cfg.k2 * L * cfg.k2 * L;
  auto g = gaussian_window(cfg.window, cfg.sigma);

  double acc = 0.0;
  size_t count = 0;
  for (size_t i0 = 0; i0 + cfg.window <= rows; ++i0)
    for (size_t j0 = 0; j0 + cfg.window <= cols; ++j0) {
      auto st = window_stats(x, y, cols, i0, j0, g, cfg.window);
      double num = (2.0 * st.mu_x * st.mu_y + C1) * (2.0 * st.cov + C2);
      double den = (st.mu_x * st.mu_x + st.mu_y * st.mu_y + C1) * (st.var_x + st.var_y + C2);
      acc += num / den;
      ++count;
    }
  return acc / double(count);
}

double ssim_plane_grad(const double* x, const double* y, size_t rows, size_t cols,
                       double dyn_range, std::vector<double>& gx, const SsimConfig& cfg) {
  check_plane(rows, cols, cfg.window);
  double L = dyn_range > 1e-12 ? dyn_range : 1e-12;
  double C1 = cfg.k1 * L * cfg.k1 * L;
  double C2 = cfg.k2 * L * cfg.k2 * L;
  auto g = gaussian_window(cfg.window, cfg.sigma);
  int n = cfg.window;

  gx.assign(rows * cols, 0.0);
  double acc = 0.0;
  size_t count = 0;
  for (size_t i0 = 0; i0 + n <= rows; ++i0)
    for (size_t j0 = 0; j0 + n <= cols; ++j0) {
      auto st = window_stats(x, y, cols, i0, j0, g, n);
      double A1 = 2.0 * st.mu_x * st.mu_y + C1;
      double A2 = 2.0 * st.cov + C2;
      double B1 = st.mu_x * st.mu_x + st.mu_y * st.mu_y + C1;
      double B2 = st.var_x + st.var_y + C2;
      double s = (A1 * A2) / (B1 * B2);
      acc += s;
      ++count;
      double inv_b1b2 = 1.0 / (B1 * B2);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double w = g[size_t(i) * n + j];
          size_t idx = (i0 + i) * cols + (j0 + j);
          double xv = x[idx];
          double yv = y[idx];
          gx[idx] += w * ((2.0 * st.mu_y * A2 + 2.0 * (yv - st.mu_y) * A1) * inv_b1b2 -
                          s * (2.0 * st.mu_x / B1 + 2.0 * (xv - st.mu_x) / B2));
        }
    }
  double inv_count = 1.0 / double(count);
  for (double& v : gx) v *= inv_count;
  return acc * inv_count;
}

}  // namespace mmw

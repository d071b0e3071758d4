// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <complex>

#include "mmw/common.hpp"
#include "mmw/fft.hpp"
#include "mmw/radar.hpp"

namespace mmw {

PointCloud extract_pointcloud(const ComplexCube& cube, uint32_t frame, double threshold_db,
                              const RadarConfig& cfg, uint32_t angle_bins) {
  const Dims& dims = cube.dims();
  if (frame >= dims.frames) fail(Err::InvalidArgument, "frame index out of range");
  if (cfg.antennas.total() != dims.antennas)
    fail(Err::LengthMismatch, "antenna layout does not match cube antenna axis");
  uint32_t n_az = cfg.antennas.azimuth;
  uint32_t n_el = cfg.antennas.elevation;
  if (n_az == 0 || n_el == 0)
    fail(Err::BadPlane, "point extraction needs both azimuth and elevation elements");
  if (angle_bins % 2 != 0 || angle_bins < n_az || angle_bins < n_el)
    fail(Err::InvalidArgument, "angle_bins must be even and cover both sub-arrays");
  if (threshold_db > 0.0) fail(Err::InvalidArgument, "threshold_db must be <= 0");

  uint32_t R = dims.range;
  uint32_t D = dims.doppler;
  std::vector<double> volume(size_t(R) * angle_bins * angle_bins, 0.0);
  std::vector<std::complex<double>> sig(std::max(n_az, n_el));
  std::vector<double> maz(angle_bins), mel(angle_bins);

  for (uint32_t r = 0; r < R; ++r) {
    double* vr = volume.data() + size_t(r) * angle_bins * angle_bins;
    for (uint32_t d = 0; d < D; ++d) {
      for (uint32_t k = 0; k < n_az; ++k) {
        const auto& z = cube.at(frame, r, d, k);
        sig[k] = {double(z.real()), double(z.imag())};
      }
      auto az_spec = dft_padded_shifted(sig.data(), n_az, angle_bins);
      for (uint32_t b = 0; b < angle_bins; ++b) maz[b] = std::abs(az_spec[b]);

      for (uint32_t k = 0; k < n_el; ++k) {
        const auto& z = cube.at(frame, r, d, n_az + k);
        sig[k] = {double(z.real()), double(z.imag())};
      }
      auto el_spec = dft_padded_shifted(sig.data(), n_el, angle_bins);
      for (uint32_t b = 0; b < angle_bins; ++b) mel[b] = std::abs(el_spec[b]);

      for (uint32_t ba = 0; ba < angle_bins; ++ba)
        for (uint32_t be = 0; be < angle_bins; ++be) {
          double v = maz[ba] * mel[be];
          double& cell = vr[size_t(ba) * angle_bins + be];
          if (v > cell) cell = v;
        }
    }
  }

  double peak = 0.0;
  for (double v : volume)
    if (v > peak) peak = v;

  PointCloud cloud;
  if (peak <= 0.0) return cloud;

  double floor = peak * std::pow(10.0, threshold_db / 20.0);
  double res = cfg.range_resolution();
  for (uint32_t r = 0; r < R; ++r)
    for (uint32_t ba = 0; ba < angle_bins; ++ba)
      for (uint32_t be = 0; be < angle_bins; ++be) {
        if (volume[(size_t(r) * angle_bins + ba) * angle_bins + be] < floor) continue;
        double range = r * res;
        double sin_az = 2.0 * double(ba) / angle_bins - 1.0;
        double sin_el = 2.0 * double(be) / angle_bins - 1.0;
        double cos_el = std::sqrt(std::max(0.0, 1.0 - sin_el * sin_el));
        cloud.points.push_back({range * cos_el * sin_az,
                                range * cos_el * std::sqrt(std::max(0.0, 1.0 - sin_az * sin_az)),
                                range * sin_el});
      }
  return cloud;
}

}  // namespace mmw

// SPDX-License-Identifier: Apache-2.0
#include "mmw/spectrogram.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>

#include "mmw/common.hpp"
#include "mmw/fft.hpp"

namespace mmw {

PlaneKind plane_kind_from_name(const std::string& name) {
  if (name == "rd") return PlaneKind::RangeDoppler;
  if (name == "ra") return PlaneKind::RangeAzimuth;
  if (name == "re") return PlaneKind::RangeElevation;
  fail(Err::InvalidArgument, "unknown plane '" + name + "' (expected rd, ra or re)");
}

namespace {

SpectrogramPlane range_doppler(const ComplexCube& cube, uint32_t frame) {
  const Dims& d = cube.dims();
  SpectrogramPlane plane{PlaneKind::RangeDoppler, d.range, d.doppler, {}};
  plane.mag.assign(plane.rows * plane.cols, 0.0);
  for (uint32_t r = 0; r < d.range; ++r)
    for (uint32_t dd = 0; dd < d.doppler; ++dd) {
      double acc = 0.0;
      for (uint32_t a = 0; a < d.antennas; ++a) {
        const auto& z = cube.at(frame, r, dd, a);
        acc += std::hypot(double(z.real()), double(z.imag()));
      }
      plane.at(r, dd) = acc / double(d.antennas);
    }
  return plane;
}

SpectrogramPlane range_angle(const ComplexCube& cube, PlaneKind kind, uint32_t frame,
                             const AntennaLayout& layout, uint32_t angle_bins) {
  const Dims& d = cube.dims();
  bool azimuth = kind == PlaneKind::RangeAzimuth;
  uint32_t sub = azimuth ? layout.azimuth : layout.elevation;
  uint32_t offset = azimuth ? 0 : layout.azimuth;
  if (sub == 0)
    fail(Err::BadPlane, azimuth ? "layout has no azimuth elements" : "layout has no elevation elements");
  if (angle_bins < sub || angle_bins % 2 != 0)
    fail(Err::InvalidArgument, "angle_bins must be even and >= the sub-array size");

  SpectrogramPlane plane{kind, d.range, angle_bins, {}};
  plane.mag.assign(plane.rows * plane.cols, 0.0);
  std::vector<std::complex<double>> sig(sub);
  for (uint32_t r = 0; r < d.range; ++r)
    for (uint32_t dd = 0; dd < d.doppler; ++dd) {
      for (uint32_t k = 0; k < sub; ++k) {
        const auto& z = cube.at(frame, r, dd, offset + k);
        sig[k] = {double(z.real()), double(z.imag())};
      }
      auto spec = dft_padded_shifted(sig.data(), sub, angle_bins);
      for (uint32_t b = 0; b < angle_bins; ++b) {
        double m = std::abs(spec[b]);
        if (m > plane.at(r, b)) plane.at(r, b) = m;
      }
    }
  return plane;
}

}  // namespace

SpectrogramPlane project_spectrogram(const ComplexCube& cube, PlaneKind kind, uint32_t frame,
                                     const AntennaLayout& layout, uint32_t angle_bins) {
  const Dims& d = cube.dims();
  if (frame >= d.frames) fail(Err::InvalidArgument, "frame index out of range");
  if (kind == PlaneKind::RangeDoppler) return range_doppler(cube, frame);
  if (layout.total() != d.antennas)
    fail(Err::LengthMismatch, "antenna layout does not match cube antenna axis");
  return range_angle(cube, kind, frame, layout, angle_bins);
}

void write_pgm(const SpectrogramPlane& plane, const std::filesystem::path& path) {
  double lo = plane.mag.empty() ? 0.0 : plane.mag[0];
  double hi = lo;
  for (double v : plane.mag) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  double span = hi - lo;
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(Err::IoFailure, "open for write: " + path.string());
  os << "P5\n" << plane.cols << " " << plane.rows << "\n255\n";
  for (double v : plane.mag) {
    long q = span > 0.0 ? std::lround((v - lo) / span * 255.0) : 0;
    unsigned char byte = static_cast<unsigned char>(q < 0 ? 0 : (q > 255 ? 255 : q));
    os.write(reinterpret_cast<const char*>(&byte), 1);
  }
  if (!os) fail(Err::IoFailure, "write: " + path.string());
}

void write_csv(const SpectrogramPlane& plane, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(Err::IoFailure, "open for write: " + path.string());
  char buf[64];
  for (size_t r = 0; r < plane.rows; ++r) {
    for (size_t c = 0; c < plane.cols; ++c) {
      std::snprintf(buf, sizeof buf, "%.9g", plane.at(r, c));
      if (c) os << ',';
      os << buf;
    }
    os << '\n';
  }
  if (!os) fail(Err::IoFailure, "write: " + path.string());
}

}  // namespace mmw

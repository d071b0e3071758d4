// SPDX-License-Identifier: Apache-2.0
#include "mmw/cube.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "mmw/common.hpp"

namespace mmw {

namespace {
constexpr char kMagic[4] = {'M', 'M', 'W', 'C'};
constexpr uint32_t kVersion = 1;
// Caps the in-memory footprint at 16 GiB worth of complex<float> and, more to
// the point, rejects absurd headers before any allocation.
constexpr size_t kMaxCells = size_t(1) << 31;

std::vector<double> axis_coords(uint32_t n) {
  std::vector<double> c(n);
  if (n == 1) {
    c[0] = 0.0;
    return c;
  }
  for (uint32_t i = 0; i < n; ++i) c[i] = double(i) / double(n - 1);
  return c;
}
}  // namespace

void validate_dims(const Dims& dims) {
  if (dims.frames < 1 || dims.range < 2 || dims.doppler < 2 || dims.antennas < 1)
    fail(Err::InvalidDims, "cube needs frames>=1, range>=2, doppler>=2, antennas>=1");
  // Overflow-safe product check.
  size_t n = dims.frames;
  for (size_t d : {size_t(dims.range), size_t(dims.doppler), size_t(dims.antennas)}) {
    if (n > kMaxCells / d) fail(Err::DimOverflow, "cube cell count");
    n *= d;
  }
}

ComplexCube::ComplexCube(Dims dims, std::vector<std::complex<float>> data)
    : dims_(dims), data_(std::move(data)) {
  validate_dims(dims_);
  if (data_.size() != dims_.cells()) fail(Err::LengthMismatch, "cube payload size");
  check_finite();
}

ComplexCube ComplexCube::zeros(Dims dims) {
  validate_dims(dims);
  return ComplexCube(dims, std::vector<std::complex<float>>(dims.cells()));
}

double ComplexCube::peak_magnitude() const {
  double peak = 0.0;
  for (const auto& z : data_) {
    double m = std::hypot(double(z.real()), double(z.imag()));
    if (m > peak) peak = m;
  }
  return peak;
}

void ComplexCube::check_finite() const {
  for (const auto& z : data_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      fail(Err::NonFinite, "cube value");
}

void cube_write(const ComplexCube& cube, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(Err::IoFailure, "open for write: " + path.string());
  put_magic(os, kMagic);
  put_u32(os, kVersion);
  const Dims& d = cube.dims();
  put_u32(os, d.frames);
  put_u32(os, d.range);
  put_u32(os, d.doppler);
  put_u32(os, d.antennas);
  for (const auto& z : cube.data()) {
    put_f32(os, z.real());
    put_f32(os, z.imag());
  }
  if (!os) fail(Err::IoFailure, "write: " + path.string());
}

ComplexCube cube_read(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(Err::IoFailure, "open for read: " + path.string());
  expect_magic(is, kMagic, "cube file");
  uint32_t version = get_u32(is);
  if (version != kVersion) fail(Err::VersionMismatch, "cube file");
  Dims d;
  d.frames = get_u32(is);
  d.range = get_u32(is);
  d.doppler = get_u32(is);
  d.antennas = get_u32(is);
  validate_dims(d);
  std::vector<std::complex<float>> data(d.cells());
  for (auto& z : data) {
    float re = get_f32(is);
    float im = get_f32(is);
    z = {re, im};
  }
  // A trailing byte means the writer and header disagree; treat as corrupt.
  if (is.peek() != std::char_traits<char>::eof()) fail(Err::LengthMismatch, "cube payload size");
  return ComplexCube(d, std::move(data));
}

GridSpec GridSpec::from_dims(const Dims& dims) {
  GridSpec g;
  g.t = axis_coords(dims.frames);
  g.r = axis_coords(dims.range);
  g.d = axis_coords(dims.doppler);
  g.a = axis_coords(dims.antennas);
  return g;
}

}  // namespace mmw

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace mmw {

struct Dims {
  uint32_t frames = 0;     // t
  uint32_t range = 0;      // r
  uint32_t doppler = 0;    // d
  uint32_t antennas = 0;   // a

  size_t cells() const {
    return size_t(frames) * range * doppler * antennas;
  }
  // Real scalar count, the figure compression ratios are quoted against.
  size_t scalars() const { return cells() * 2; }
  bool operator==(const Dims&) const = default;
};

// Dense complex radar cube, layout t-major: ((t*R + r)*D + d)*A + a.
// Minimum shape (1,2,2,1); every value finite.
class ComplexCube {
 public:
  ComplexCube(Dims dims, std::vector<std::complex<float>> data);
  static ComplexCube zeros(Dims dims);

  const Dims& dims() const { return dims_; }
  size_t index(uint32_t t, uint32_t r, uint32_t d, uint32_t a) const {
    return ((size_t(t) * dims_.range + r) * dims_.doppler + d) * dims_.antennas + a;
  }
  std::complex<float>& at(uint32_t t, uint32_t r, uint32_t d, uint32_t a) {
    return data_[index(t, r, d, a)];
  }
  const std::complex<float>& at(uint32_t t, uint32_t r, uint32_t d, uint32_t a) const {
    return data_[index(t, r, d, a)];
  }
  std::vector<std::complex<float>>& data() { return data_; }
  const std::vector<std::complex<float>>& data() const { return data_; }

  // Largest |z| over the cube; 0 for the all-zero cube.
  double peak_magnitude() const;

  // Throws MmwError(NonFinite) if any component is NaN/Inf.
  void check_finite() const;

 private:
  Dims dims_;
  std::vector<std::complex<float>> data_;
};

void validate_dims(const Dims& dims);

void cube_write(const ComplexCube& cube, const std::filesystem::path& path);
ComplexCube cube_read(const std::filesystem::path& path);

// Normalized grid coordinates, axis value i/(N-1) in [0,1] (0 when N == 1).
struct GridSpec {
  std::vector<double> t, r, d, a;
  static GridSpec from_dims(const Dims& dims);
};

}  // namespace mmw

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mmw/antenna.hpp"
#include "mmw/cube.hpp"

namespace mmw {

enum class PlaneKind { RangeDoppler, RangeAzimuth, RangeElevation };

PlaneKind plane_kind_from_name(const std::string& name);  // "rd" | "ra" | "re"

// Magnitude image, rows = range bins, row-major.
struct SpectrogramPlane {
  PlaneKind kind;
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> mag;

  double& at(size_t r, size_t c) { return mag[r * cols + c]; }
  double at(size_t r, size_t c) const { return mag[r * cols + c]; }
};

// RangeDoppler: mean over antennas of |cube|.
// RangeAzimuth / RangeElevation: per (range, doppler), DFT the corresponding
// antenna sub-axis zero-padded to angle_bins (fftshifted), take magnitudes,
// then reduce over doppler with max. Throws MmwError(BadPlane) when the
// layout lacks the requested sub-axis, MmwError(LengthMismatch) when the
// layout total disagrees with the cube's antenna axis.
SpectrogramPlane project_spectrogram(const ComplexCube& cube, PlaneKind kind, uint32_t frame,
                                     const AntennaLayout& layout = {}, uint32_t angle_bins = 32);

// 8-bit P5, min-max normalized per image (all-equal input maps to 0).
void write_pgm(const SpectrogramPlane& plane, const std::filesystem::path& path);
// Raw magnitudes, one row per line, %.9g fields.
void write_csv(const SpectrogramPlane& plane, const std::filesystem::path& path);

}  // namespace mmw

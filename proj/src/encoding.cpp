// SPDX-License-Identifier: Apache-2.0
#include "mmw/encoding.hpp"

#include <cmath>
#include <numbers>

#include "mmw/common.hpp"

namespace mmw {

void positional_encode(const EncodingConfig& cfg, std::span<const double> coords,
                       std::span<double> out) {
  if (coords.size() != cfg.input_dim) fail(Err::LengthMismatch, "encoder input size");
  if (out.size() != cfg.output_dim()) fail(Err::LengthMismatch, "encoder output size");
  uint32_t n = cfg.input_dim;
  for (uint32_t i = 0; i < n; ++i) out[i] = coords[i];
  double scale = std::numbers::pi;
  size_t cursor = n;
  for (uint32_t f = 0; f < cfg.frequencies; ++f) {
    for (uint32_t i = 0; i < n; ++i) out[cursor + i] = std::cos(scale * coords[i]);
    for (uint32_t i = 0; i < n; ++i) out[cursor + n + i] = std::sin(scale * coords[i]);
    cursor += 2 * n;
    scale *= 2.0;
  }
}

}  // namespace mmw

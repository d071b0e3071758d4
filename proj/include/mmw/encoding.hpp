// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>

namespace mmw {

// Fourier features with raw passthrough. Output layout is coordinate-major
// per block: [x0..x_{n-1}, cos(pi x0)..cos(pi x_{n-1}), sin(pi x0)..,
// cos(2 pi x0).., sin(2 pi x0).., ..] with frequency doubling per octave,
// so output_dim = n * (1 + 2 * frequencies).
struct EncodingConfig {
  uint32_t input_dim = 3;
  uint32_t frequencies = 8;
  uint32_t output_dim() const { return input_dim * (1 + 2 * frequencies); }
};

void positional_encode(const EncodingConfig& cfg, std::span<const double> coords,
                       std::span<double> out);

}  // namespace mmw

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "mmw/inr.hpp"

namespace mmw {

// Hand-written reverse mode over the fixed network graph. 64-bit throughout.
struct InrGradient {
  std::vector<double> theta;
  std::vector<double> modulations;

  static InrGradient zeros(const InrArch& arch);
  void add(const InrGradient& other);
  double max_abs() const;
};

// Scattered evaluation points: 3 normalized spatial coords plus a frame
// index per element.
struct CoordBatch {
  std::vector<double> coords;      // 3 * size()
  std::vector<uint32_t> frames;
  size_t size() const { return frames.size(); }
  void push(double r, double d, double a, uint32_t frame) {
    coords.insert(coords.end(), {r, d, a});
    frames.push_back(frame);
  }
};

void inr_forward_batch(const InrDense& dense, const CoordBatch& batch,
                       std::vector<std::complex<double>>& out);

// Accumulates d(sum_i Re(conj(dpred_i)) * ...)/dparams -- concretely, for a
// scalar loss L, pass dpred_i = (dL/dRe_i, dL/dIm_i); gradients of theta and
// modulations are ADDED into `grad`. Work is blocked in fixed 1024-element
// chunks whose partial sums are merged in block order, so results do not
// depend on the worker count. Backward is linear in dpred and additive over
// batch elements.
void inr_backward_batch(const InrDense& dense, const CoordBatch& batch,
                        const std::vector<std::complex<double>>& dpred, InrGradient& grad);

}  // namespace mmw

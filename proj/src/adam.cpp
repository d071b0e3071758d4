// SPDX-License-Identifier: Apache-2.0
#include "mmw/adam.hpp"

#include <cmath>

#include "mmw/common.hpp"
#include "mmw/kernels.hpp"

namespace mmw {

void adam_step(std::vector<double>& params, const std::vector<double>& grad, AdamState& state,
               const AdamConfig& cfg) {
  size_t n = params.size();
  if (grad.size() != n || state.m.size() != n || state.v.size() != n)
    fail(Err::LengthMismatch, "optimizer buffers");
  state.step += 1;
  double t = static_cast<double>(state.step);
  double inv_bc1 = 1.0 / (1.0 - std::pow(cfg.beta1, t));
  double inv_bc2 = 1.0 / (1.0 - std::pow(cfg.beta2, t));
  kernels::ops().adam_update(params.data(), grad.data(), state.m.data(), state.v.data(), n,
                             cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, inv_bc1, inv_bc2);
}

}  // namespace mmw

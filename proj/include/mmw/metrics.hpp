// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mmw/cube.hpp"
#include "mmw/radar.hpp"
#include "mmw/ssim.hpp"

namespace mmw {

// Dynamic-range convention for complex SSIM: Reference takes L from the
// second (target) cube's peak magnitude, Joint from both. Joint makes the
// measure symmetric; Reference is what fitting reports.
enum class DynRange { Reference, Joint };

// Mean over (frame, antenna) of the averaged real-plane and imaginary-plane
// SSIM of the range-doppler views.
double cssim(const ComplexCube& pred, const ComplexCube& target,
             DynRange convention = DynRange::Reference, const SsimConfig& cfg = {});

// MSE over all real and imaginary components jointly.
double cube_mse(const ComplexCube& pred, const ComplexCube& target);

// 10 log10(peak^2 / mse) with peak = target's largest |z|; identical cubes
// return the +99 dB sentinel, a zero-signal target with nonzero error -99.
double psnr_db(const ComplexCube& pred, const ComplexCube& target);

double hausdorff_directed(const PointCloud& from, const PointCloud& to);
double hausdorff(const PointCloud& a, const PointCloud& b);  // symmetric

}  // namespace mmw

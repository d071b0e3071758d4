// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

namespace mmw {

// Fixed random convolutional feature stack: 3x3 kernels, stride 2, zero
// padding 1, ReLU, channels 1 -> 8 -> 16 -> 16. Weights are drawn once from
// a seeded unit Gaussian scaled by 1/fan_in; biases are zero. The stack is
// never trained, it only supplies a stable feature space, so two extractors
// with the same seed are identical. With zero biases the whole map is
// positively 1-homogeneous: features(s * x) = s * features(x) for s >= 0.
class PerceptualExtractor {
 public:
  explicit PerceptualExtractor(uint64_t seed = 0);

  // Input plane is rows x cols row-major; both dims must be >= 16.
  std::vector<double> features(const double* plane, size_t rows, size_t cols) const;

  // Mean absolute feature difference and, optionally, its gradient with
  // respect to `pred` (assigned, not accumulated).
  double l1_feature_loss(const double* pred, const double* target, size_t rows, size_t cols,
                         std::vector<double>* grad_pred = nullptr) const;

  uint64_t seed() const { return seed_; }

 private:
  struct Layer {
    uint32_t in_ch, out_ch;
    std::vector<double> w;  // out_ch x in_ch x 3 x 3
  };
  std::vector<Layer> layers_;
  uint64_t seed_;
};

}  // namespace mmw

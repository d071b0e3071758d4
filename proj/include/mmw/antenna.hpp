// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace mmw {

// Virtual array: azimuth elements first along the antenna axis, then
// elevation elements.
struct AntennaLayout {
  uint32_t azimuth = 8;
  uint32_t elevation = 4;
  uint32_t total() const { return azimuth + elevation; }
  bool operator==(const AntennaLayout&) const = default;
};

}  // namespace mmw

// Copyright 2026 The MSRD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MSRD_REGION_DISCOVERY_HPP_
#define MSRD_REGION_DISCOVERY_HPP_

#include <cstdint>
#include <vector>

#include "msrd/grad_weights.hpp"
#include "msrd/tensor.hpp"

namespace msrd {

/// Sliding-window settings for local-maximum discovery.
struct DiscoveryConfig {
  std::uint32_t window = 3;  // odd, >= 1
  std::uint32_t stride = 1;  // >= 1, applied to rows and columns
  float min_value = 0.0f;    // maxima must be strictly above this (and above 0)

  /// Throws ErrorCode::kInvalidArgument when a field is out of range.
  void validate() const;
};

struct Peak {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  float value = 0.0f;
  friend bool operator==(const Peak&, const Peak&) = default;
};

/// Local maxima of one channel, in visit order, and their mean.
struct LocalMaxima {
  std::vector<Peak> peaks;
  float weight = 0.0f;  // 0 when no peak qualifies
};

/// A visited position (row, col), rows and cols stepping by `stride` from 0,
/// qualifies when its value equals the maximum of the window x window
/// neighbourhood clipped to the map, and is > max(0, min_value).
///
/// Runs a separable running-max filter, O(H * W) independent of the window.
LocalMaxima find_local_maxima(const Tensor& map, const DiscoveryConfig& cfg);

/// Mean of the channel's local maxima, computed in double and rounded once.
float mean_peak_value(const std::vector<Peak>& peaks);

/// find_local_maxima applied to every channel of a K x H x W stack.
std::vector<LocalMaxima> discover_regions(const Tensor& weight_maps, const DiscoveryConfig& cfg);

/// One weight per channel: the mean of its local maxima (0 if none).
std::vector<float> channel_weights(const GradientWeightMap& gwm, const DiscoveryConfig& cfg);
std::vector<float> channel_weights(const Tensor& weight_maps, const DiscoveryConfig& cfg);

}  // namespace msrd

#endif  // MSRD_REGION_DISCOVERY_HPP_

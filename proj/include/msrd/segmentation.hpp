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

#ifndef MSRD_SEGMENTATION_HPP_
#define MSRD_SEGMENTATION_HPP_

#include <cstdint>
#include <vector>

#include "msrd/localization.hpp"
#include "msrd/manifest.hpp"

namespace msrd {

enum class BoxMode {
  kLargest,  // one box around the component with the most pixels
  kAll,      // one box per component
};

struct SegmentationConfig {
  float tau = 0.2f;  // fraction of the map maximum, in [0, 1)
  BoxMode mode = BoxMode::kLargest;

  void validate() const;
};

struct Pixel {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
  friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

/// One 8-connected component; pixels are in row-major order.
struct Component {
  std::vector<Pixel> pixels;
};

/// 1 where map > tau * max(map). Empty mask for an all-zero map.
Mask threshold_mask(const LocalizationMap& map, float tau);

/// 8-connected components via two-pass union-find labelling. Components are
/// ordered by their first pixel in row-major order.
std::vector<Component> connected_components(const Mask& mask);

/// Tight box of a component in map-grid coordinates.
BoundingBox tight_box(const Component& component);

/// Maps a map-grid box to image pixels whose centres fall inside the scaled
/// cell extent, clamped to the image.
BoundingBox rescale_box(const BoundingBox& grid_box, std::uint32_t map_height, std::uint32_t map_width,
                        std::uint32_t image_width, std::uint32_t image_height);

/// Threshold, label, select and rescale. Returns an empty list for an empty
/// mask.
std::vector<BoundingBox> boxes_from_map(const LocalizationMap& map, const SegmentationConfig& cfg,
                                        std::uint32_t image_width, std::uint32_t image_height);

}  // namespace msrd

#endif  // MSRD_SEGMENTATION_HPP_

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

#ifndef MSRD_LOCALIZATION_HPP_
#define MSRD_LOCALIZATION_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "msrd/tensor.hpp"

namespace msrd {

/// Single-channel, nonnegative class evidence map. When `normalized` is set
/// the values lie in [0, 1] and the maximum is 1 unless the map is all zero.
struct LocalizationMap {
  Tensor map;
  std::string scale_tag;
  bool normalized = false;
};

/// Binary H x W mask, one byte per pixel (0 or 1).
struct Mask {
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<std::uint8_t> bits;

  Mask() = default;
  Mask(std::uint32_t h, std::uint32_t w) : height(h), width(w), bits(std::size_t{h} * w, 0) {}

  std::uint8_t at(std::size_t i, std::size_t j) const { return bits[i * width + j]; }
  std::uint8_t& at(std::size_t i, std::size_t j) { return bits[i * width + j]; }
  std::size_t count() const;
  Tensor to_tensor() const;

  friend bool operator==(const Mask&, const Mask&) = default;
};

enum class FusionMode {
  kNormalizeEach,  // normalize every input to [0, 1] before upsampling and summing
  kRaw,            // literal elementwise sum of the upsampled inputs
};

/// max(0, sum_k weights[k] * activations[k]).
LocalizationMap layer_locmap(const Tensor& activations, std::span<const float> weights, std::string scale_tag = {});

/// Bilinear resize with half-pixel centres: src = (dst + 0.5) * in / out - 0.5,
/// clamped to the border.
Tensor upsample_bilinear(const Tensor& map, std::uint32_t out_height, std::uint32_t out_width);

/// Nearest-neighbour resize of a binary mask with half-pixel centres.
Mask upsample_nearest(const Mask& mask, std::uint32_t out_height, std::uint32_t out_width);

/// Upsamples every map to the target grid and sums them. The result is not
/// normalized. The target must be at least as large as every input.
LocalizationMap fuse(std::span<const LocalizationMap> maps, std::uint32_t target_height, std::uint32_t target_width,
                     FusionMode mode);

/// Divides by the maximum; an all-zero map is returned unchanged.
LocalizationMap normalize01(const LocalizationMap& map);

/// 1 where the normalized map exceeds `delta`.
Mask binarize_for_explanation(const LocalizationMap& map, float delta);

}  // namespace msrd

#endif  // MSRD_LOCALIZATION_HPP_

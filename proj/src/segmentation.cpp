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

#include "msrd/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "msrd/error.hpp"

namespace msrd {

namespace {

class DisjointSet {
 public:
  std::uint32_t make() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::uint32_t> parent_;
};

constexpr std::uint32_t kBackground = 0xFFFFFFFFu;

}  // namespace

void SegmentationConfig::validate() const {
  if (!(tau >= 0.0f && tau < 1.0f)) throw Error(ErrorCode::kInvalidArgument, "tau must lie in [0, 1)");
}

Mask threshold_mask(const LocalizationMap& map, float tau) {
  if (map.map.rank() != 2) throw Error(ErrorCode::kShape, "localization map must be H x W");
  if (!(tau >= 0.0f && tau < 1.0f)) throw Error(ErrorCode::kInvalidArgument, "tau must lie in [0, 1)");
  float peak = 0.0f;
  for (float v : map.map.data()) peak = std::max(peak, v);
  Mask out(map.map.height(), map.map.width());
  if (peak <= 0.0f) return out;
  const float cut = tau * peak;
  const auto d = map.map.data();
  for (std::size_t p = 0; p < d.size(); ++p) out.bits[p] = d[p] > cut ? 1 : 0;
  return out;
}

std::vector<Component> connected_components(const Mask& mask) {
  const std::size_t h = mask.height, w = mask.width;
  std::vector<std::uint32_t> label(h * w, kBackground);
  DisjointSet sets;

  // First pass: provisional labels from the already-visited neighbours
  // (W, NW, N, NE), recording equivalences.
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      if (!mask.at(i, j)) continue;
      std::uint32_t current = kBackground;
      auto visit = [&](std::size_t ni, std::size_t nj) {
        const auto l = label[ni * w + nj];
        if (l == kBackground) return;
        if (current == kBackground) {
          current = l;
        } else {
          sets.unite(current, l);
        }
      };
      if (j > 0) visit(i, j - 1);
      if (i > 0) {
        if (j > 0) visit(i - 1, j - 1);
        visit(i - 1, j);
        if (j + 1 < w) visit(i - 1, j + 1);
      }
      label[i * w + j] = current == kBackground ? sets.make() : current;
    }
  }

  // Second pass: resolve roots; components are created in order of their
  // first pixel, and each pixel list stays row-major.
  std::vector<std::uint32_t> slot_of_root;
  std::vector<Component> out;
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      const auto l = label[i * w + j];
      if (l == kBackground) continue;
      const auto root = sets.find(l);
      if (root >= slot_of_root.size()) slot_of_root.resize(root + 1, kBackground);
      if (slot_of_root[root] == kBackground) {
        slot_of_root[root] = static_cast<std::uint32_t>(out.size());
        out.emplace_back();
      }
      out[slot_of_root[root]].pixels.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
    }
  }
  return out;
}

BoundingBox tight_box(const Component& component) {
  if (component.pixels.empty()) throw Error(ErrorCode::kInvalidArgument, "empty component has no box");
  BoundingBox b{std::numeric_limits<std::int32_t>::max(), std::numeric_limits<std::int32_t>::max(), -1, -1};
  for (const auto& p : component.pixels) {
    const auto r = static_cast<std::int32_t>(p.row), c = static_cast<std::int32_t>(p.col);
    b.x_min = std::min(b.x_min, c);
    b.x_max = std::max(b.x_max, c);
    b.y_min = std::min(b.y_min, r);
    b.y_max = std::max(b.y_max, r);
  }
  return b;
}

BoundingBox rescale_box(const BoundingBox& grid_box, std::uint32_t map_height, std::uint32_t map_width,
                        std::uint32_t image_width, std::uint32_t image_height) {
  const double sx = static_cast<double>(image_width) / map_width;
  const double sy = static_cast<double>(image_height) / map_height;
  // Pixel p is covered when its centre p + 0.5 lies in [lo * s, (hi + 1) * s].
  auto span = [](std::int32_t lo, std::int32_t hi, double s, std::uint32_t limit) {
    auto first = static_cast<std::int64_t>(std::ceil(lo * s - 0.5));
    auto last = static_cast<std::int64_t>(std::floor((hi + 1) * s - 0.5));
    first = std::clamp<std::int64_t>(first, 0, limit - 1);
    last = std::clamp<std::int64_t>(last, first, limit - 1);
    return std::pair{static_cast<std::int32_t>(first), static_cast<std::int32_t>(last)};
  };
  const auto [x0, x1] = span(grid_box.x_min, grid_box.x_max, sx, image_width);
  const auto [y0, y1] = span(grid_box.y_min, grid_box.y_max, sy, image_height);
  return {x0, y0, x1, y1};
}

std::vector<BoundingBox> boxes_from_map(const LocalizationMap& map, const SegmentationConfig& cfg,
                                        std::uint32_t image_width, std::uint32_t image_height) {
  cfg.validate();
  if (image_width == 0 || image_height == 0) throw Error(ErrorCode::kInvalidArgument, "image size must be positive");
  const auto components = connected_components(threshold_mask(map, cfg.tau));
  std::vector<BoundingBox> out;
  if (components.empty()) return out;
  auto to_image = [&](const Component& c) {
    return rescale_box(tight_box(c), map.map.height(), map.map.width(), image_width, image_height);
  };
  if (cfg.mode == BoxMode::kAll) {
    for (const auto& c : components) out.push_back(to_image(c));
    return out;
  }
  // max_element keeps the first of equal sizes, i.e. the earliest first pixel.
  const auto largest = std::max_element(components.begin(), components.end(), [](const auto& a, const auto& b) {
    return a.pixels.size() < b.pixels.size();
  });
  out.push_back(to_image(*largest));
  return out;
}

}  // namespace msrd

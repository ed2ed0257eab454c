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

#include "msrd/region_discovery.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <span>

#include "msrd/error.hpp"

namespace msrd {

namespace {

// out[j] = max(in[j - radius .. j + radius] clipped to [0, n)), for in/out
// addressed with a stride so the same routine handles rows and columns.
void running_max(const float* in, float* out, std::size_t n, std::size_t step, std::size_t radius,
                 std::deque<std::size_t>& window) {
  window.clear();
  for (std::size_t idx = 0; idx < n + radius; ++idx) {
    if (idx < n) {
      const float v = in[idx * step];
      while (!window.empty() && in[window.back() * step] <= v) window.pop_back();
      window.push_back(idx);
    }
    if (idx < radius) continue;
    const std::size_t j = idx - radius;
    while (window.front() + radius < j) window.pop_front();
    out[j * step] = in[window.front() * step];
  }
}

Tensor max_filter(const Tensor& map, std::uint32_t window_size) {
  const std::size_t h = map.height(), w = map.width(), r = window_size / 2;
  Tensor rows({map.height(), map.width()});
  Tensor out({map.height(), map.width()});
  std::deque<std::size_t> scratch;
  const float* src = map.data().data();
  float* tmp = rows.mutable_data().data();
  for (std::size_t i = 0; i < h; ++i) running_max(src + i * w, tmp + i * w, w, 1, r, scratch);
  float* dst = out.mutable_data().data();
  for (std::size_t j = 0; j < w; ++j) running_max(tmp + j, dst + j, h, w, r, scratch);
  return out;
}

}  // namespace

void DiscoveryConfig::validate() const {
  if (window == 0 || window % 2 == 0) {
    throw Error(ErrorCode::kInvalidArgument, "window must be a positive odd integer, got " + std::to_string(window));
  }
  if (stride == 0) throw Error(ErrorCode::kInvalidArgument, "stride must be >= 1");
  if (!(min_value >= 0.0f) || !std::isfinite(min_value)) {
    throw Error(ErrorCode::kInvalidArgument, "min_value must be finite and >= 0");
  }
}

float mean_peak_value(const std::vector<Peak>& peaks) {
  if (peaks.empty()) return 0.0f;
  double sum = 0.0;
  for (const auto& p : peaks) sum += p.value;
  return static_cast<float>(sum / static_cast<double>(peaks.size()));
}

LocalMaxima find_local_maxima(const Tensor& map, const DiscoveryConfig& cfg) {
  cfg.validate();
  if (map.rank() != 2) throw Error(ErrorCode::kShape, "local maxima need an H x W map, got " + shape_string(map.shape()));
  const Tensor filtered = max_filter(map, cfg.window);
  const float gate = std::max(0.0f, cfg.min_value);
  LocalMaxima out;
  for (std::uint32_t i = 0; i < map.height(); i += cfg.stride) {
    for (std::uint32_t j = 0; j < map.width(); j += cfg.stride) {
      const float v = map.at(i, j);
      if (v == filtered.at(i, j) && v > gate) out.peaks.push_back({i, j, v});
    }
  }
  out.weight = mean_peak_value(out.peaks);
  return out;
}

std::vector<LocalMaxima> discover_regions(const Tensor& weight_maps, const DiscoveryConfig& cfg) {
  if (weight_maps.rank() != 3) {
    throw Error(ErrorCode::kShape, "gradient weight maps must be K x H x W, got " + shape_string(weight_maps.shape()));
  }
  std::vector<LocalMaxima> out;
  out.reserve(weight_maps.channels());
  for (std::size_t k = 0; k < weight_maps.channels(); ++k) out.push_back(find_local_maxima(weight_maps.plane(k), cfg));
  return out;
}

std::vector<float> channel_weights(const Tensor& weight_maps, const DiscoveryConfig& cfg) {
  std::vector<float> w;
  for (const auto& lm : discover_regions(weight_maps, cfg)) w.push_back(lm.weight);
  return w;
}

std::vector<float> channel_weights(const GradientWeightMap& gwm, const DiscoveryConfig& cfg) {
  return channel_weights(gwm.alpha, cfg);
}

}  // namespace msrd

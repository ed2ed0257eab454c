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

#include "msrd/localization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "msrd/error.hpp"

namespace msrd {

namespace {

struct Tap {
  std::size_t lo;
  std::size_t hi;
  double frac;
};

std::vector<Tap> bilinear_taps(std::uint32_t in, std::uint32_t out) {
  std::vector<Tap> taps(out);
  const double scale = static_cast<double>(in) / out;
  for (std::uint32_t d = 0; d < out; ++d) {
    double src = (d + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const auto lo = static_cast<std::size_t>(std::floor(src));
    const auto hi = std::min<std::size_t>(lo + 1, in - 1);
    taps[d] = {lo, hi, src - static_cast<double>(lo)};
  }
  return taps;
}

double lerp(double a, double b, double t) { return a + t * (b - a); }

void require_map(const Tensor& t, const char* what) {
  if (t.rank() != 2) throw Error(ErrorCode::kShape, std::string(what) + " must be H x W, got " + shape_string(t.shape()));
}

float max_value(const Tensor& t) {
  float m = 0.0f;
  for (float v : t.data()) m = std::max(m, v);
  return m;
}

}  // namespace

std::size_t Mask::count() const { return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1)); }

Tensor Mask::to_tensor() const {
  Tensor t({height, width});
  auto d = t.mutable_data();
  for (std::size_t p = 0; p < bits.size(); ++p) d[p] = bits[p] ? 1.0f : 0.0f;
  return t;
}

LocalizationMap layer_locmap(const Tensor& activations, std::span<const float> weights, std::string scale_tag) {
  if (activations.rank() != 3) {
    throw Error(ErrorCode::kShape, "activations must be K x H x W, got " + shape_string(activations.shape()));
  }
  if (weights.size() != activations.channels()) {
    throw Error(ErrorCode::kShape, "got " + std::to_string(weights.size()) + " channel weights for " +
                                       std::to_string(activations.channels()) + " channels");
  }
  const std::size_t plane = std::size_t{activations.height()} * activations.width();
  std::vector<double> acc(plane, 0.0);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] == 0.0f) continue;
    const auto a = activations.channel(k);
    const double w = weights[k];
    for (std::size_t p = 0; p < plane; ++p) acc[p] += w * a[p];
  }
  LocalizationMap out{Tensor({activations.height(), activations.width()}), std::move(scale_tag), false};
  auto d = out.map.mutable_data();
  for (std::size_t p = 0; p < plane; ++p) d[p] = acc[p] > 0.0 ? static_cast<float>(acc[p]) : 0.0f;
  out.map.check_finite();
  return out;
}

Tensor upsample_bilinear(const Tensor& map, std::uint32_t out_height, std::uint32_t out_width) {
  require_map(map, "upsample input");
  if (out_height == 0 || out_width == 0) throw Error(ErrorCode::kInvalidArgument, "output size must be positive");
  if (map.height() == out_height && map.width() == out_width) return map;
  const auto ty = bilinear_taps(map.height(), out_height);
  const auto tx = bilinear_taps(map.width(), out_width);
  Tensor out({out_height, out_width});
  for (std::uint32_t i = 0; i < out_height; ++i) {
    for (std::uint32_t j = 0; j < out_width; ++j) {
      const double top = lerp(map.at(ty[i].lo, tx[j].lo), map.at(ty[i].lo, tx[j].hi), tx[j].frac);
      const double bottom = lerp(map.at(ty[i].hi, tx[j].lo), map.at(ty[i].hi, tx[j].hi), tx[j].frac);
      out.at(i, j) = static_cast<float>(lerp(top, bottom, ty[i].frac));
    }
  }
  return out;
}

Mask upsample_nearest(const Mask& mask, std::uint32_t out_height, std::uint32_t out_width) {
  if (out_height == 0 || out_width == 0) throw Error(ErrorCode::kInvalidArgument, "output size must be positive");
  auto index = [](std::uint32_t d, std::uint32_t in, std::uint32_t out) {
    const auto s = static_cast<std::size_t>(std::floor((d + 0.5) * in / out));
    return std::min<std::size_t>(s, in - 1);
  };
  Mask out(out_height, out_width);
  for (std::uint32_t i = 0; i < out_height; ++i) {
    const auto si = index(i, mask.height, out_height);
    for (std::uint32_t j = 0; j < out_width; ++j) out.at(i, j) = mask.at(si, index(j, mask.width, out_width));
  }
  return out;
}

LocalizationMap fuse(std::span<const LocalizationMap> maps, std::uint32_t target_height, std::uint32_t target_width,
                     FusionMode mode) {
  if (maps.empty()) throw Error(ErrorCode::kInvalidArgument, "fusion needs at least one localization map");
  LocalizationMap out{Tensor({target_height, target_width}), {}, false};
  auto acc = out.map.mutable_data();
  for (const auto& m : maps) {
    require_map(m.map, "fusion input");
    if (m.map.height() > target_height || m.map.width() > target_width) {
      throw Error(ErrorCode::kShape, "fusion target " + std::to_string(target_height) + "x" +
                                         std::to_string(target_width) + " is smaller than input " +
                                         shape_string(m.map.shape()));
    }
    const Tensor base = mode == FusionMode::kNormalizeEach ? normalize01(m).map : m.map;
    const Tensor up = upsample_bilinear(base, target_height, target_width);
    const auto src = up.data();
    for (std::size_t p = 0; p < acc.size(); ++p) acc[p] += src[p];
    out.scale_tag += (out.scale_tag.empty() ? "" : "+") + m.scale_tag;
  }
  return out;
}

LocalizationMap normalize01(const LocalizationMap& map) {
  require_map(map.map, "localization map");
  LocalizationMap out = map;
  out.normalized = true;
  const float m = max_value(map.map);
  if (m > 0.0f) {
    for (auto& v : out.map.mutable_data()) v = v > 0.0f ? v / m : 0.0f;
  }
  return out;
}

Mask binarize_for_explanation(const LocalizationMap& map, float delta) {
  require_map(map.map, "localization map");
  if (!(delta >= 0.0f && delta < 1.0f)) throw Error(ErrorCode::kInvalidArgument, "delta must lie in [0, 1)");
  Mask out(map.map.height(), map.map.width());
  const auto d = map.map.data();
  for (std::size_t p = 0; p < d.size(); ++p) out.bits[p] = d[p] > delta ? 1 : 0;
  return out;
}

}  // namespace msrd

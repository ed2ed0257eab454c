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

#include "msrd/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "msrd/error.hpp"

namespace msrd {

std::string encode_heatmap_pgm(const LocalizationMap& map, std::uint32_t width, std::uint32_t height) {
  const LocalizationMap norm = map.normalized ? map : normalize01(map);
  const Tensor up = upsample_bilinear(norm.map, height, width);
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.reserve(out.size() + up.size());
  for (float v : up.data()) {
    out.push_back(static_cast<char>(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f))));
  }
  return out;
}

void write_heatmap_pgm(const LocalizationMap& map, std::uint32_t width, std::uint32_t height,
                       const std::filesystem::path& path) {
  const auto bytes = encode_heatmap_pgm(map, width, height);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "cannot write heatmap " + path.string());
}

}  // namespace msrd

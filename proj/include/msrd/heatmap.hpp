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

#ifndef MSRD_HEATMAP_HPP_
#define MSRD_HEATMAP_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include "msrd/localization.hpp"

namespace msrd {

/// 8-bit binary PGM (P5) of a map: normalized to [0, 1], bilinearly resized
/// to width x height, then scaled to 0..255 with rounding.
std::string encode_heatmap_pgm(const LocalizationMap& map, std::uint32_t width, std::uint32_t height);

void write_heatmap_pgm(const LocalizationMap& map, std::uint32_t width, std::uint32_t height,
                       const std::filesystem::path& path);

}  // namespace msrd

#endif  // MSRD_HEATMAP_HPP_

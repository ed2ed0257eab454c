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

#ifndef MSRD_TENSOR_IO_HPP_
#define MSRD_TENSOR_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "msrd/tensor.hpp"

namespace msrd {

// MSRD container layout (all integers little-endian):
//   [0..3]  magic "MSRD"
//   [4]     version (1)
//   [5]     dtype (1 = float32 LE)
//   [6]     rank (2 or 3)
//   [7..]   rank x uint32 dims, outermost first
//   then    product(dims) float32 values, row-major; no trailing bytes.
inline constexpr std::uint8_t kContainerMagic[4] = {0x4D, 0x53, 0x52, 0x44};
inline constexpr std::uint8_t kContainerVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 1;

std::size_t encoded_size(const Shape& shape);

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

/// Parses only the header; throws the same format errors as decode_tensor and
/// a truncation error if `total_size` disagrees with the declared shape.
Shape decode_shape(std::span<const std::uint8_t> header, std::uint64_t total_size);

Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(const Tensor& t, const std::filesystem::path& path);

/// Reads and validates the header of a tensor file without loading the payload.
Shape read_tensor_shape(const std::filesystem::path& path);

}  // namespace msrd

#endif  // MSRD_TENSOR_IO_HPP_

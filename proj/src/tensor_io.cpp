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

#include "msrd/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

#include "msrd/error.hpp"

namespace msrd {

namespace {

constexpr std::size_t kFixedHeader = 7;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t off) {
  return std::uint32_t{in[off]} | (std::uint32_t{in[off + 1]} << 8) | (std::uint32_t{in[off + 2]} << 16) |
         (std::uint32_t{in[off + 3]} << 24);
}

std::string hex_byte(std::uint8_t b) {
  static const char* digits = "0123456789ABCDEF";
  return std::string("0x") + digits[b >> 4] + digits[b & 0xF];
}

}  // namespace

std::size_t encoded_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return kFixedHeader + 4 * shape.size() + 4 * n;
}

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
  if (t.rank() != 2 && t.rank() != 3) throw Error(ErrorCode::kInvalidArgument, "cannot encode an empty tensor");
  t.check_finite();
  std::vector<std::uint8_t> out;
  out.reserve(encoded_size(t.shape()));
  for (auto b : kContainerMagic) out.push_back(b);
  out.push_back(kContainerVersion);
  out.push_back(kDtypeFloat32);
  out.push_back(static_cast<std::uint8_t>(t.rank()));
  for (auto d : t.shape()) put_u32(out, d);
  for (float v : t.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Shape decode_shape(std::span<const std::uint8_t> header, std::uint64_t total_size) {
  for (std::size_t i = 0; i < 4; ++i) {
    if (i >= header.size()) throw Error(ErrorCode::kTruncation, "file ends inside magic", i);
    if (header[i] != kContainerMagic[i]) {
      throw Error(ErrorCode::kFormat, "bad magic byte " + hex_byte(header[i]) + " at offset " + std::to_string(i), i);
    }
  }
  if (header.size() < kFixedHeader) throw Error(ErrorCode::kTruncation, "file ends inside header", header.size());
  if (header[4] != kContainerVersion) {
    throw Error(ErrorCode::kFormat, "unsupported version " + std::to_string(header[4]) + " at offset 4", 4);
  }
  if (header[5] != kDtypeFloat32) {
    throw Error(ErrorCode::kFormat, "unsupported dtype code " + std::to_string(header[5]) + " at offset 5", 5);
  }
  const std::uint8_t rank = header[6];
  if (rank != 2 && rank != 3) {
    throw Error(ErrorCode::kFormat, "rank must be 2 or 3, got " + std::to_string(rank) + " at offset 6", 6);
  }
  const std::size_t dims_end = kFixedHeader + 4 * std::size_t{rank};
  if (header.size() < dims_end) throw Error(ErrorCode::kTruncation, "file ends inside dimension list", header.size());
  Shape shape(rank);
  std::uint64_t count = 1;
  for (std::size_t r = 0; r < rank; ++r) {
    const std::size_t off = kFixedHeader + 4 * r;
    shape[r] = get_u32(header, off);
    if (shape[r] == 0) throw Error(ErrorCode::kFormat, "zero dimension at offset " + std::to_string(off), off);
    count *= shape[r];
  }
  const std::uint64_t expected = dims_end + 4 * count;
  if (total_size != expected) {
    const std::uint64_t payload = total_size > dims_end ? total_size - dims_end : 0;
    throw Error(ErrorCode::kTruncation,
                "shape " + shape_string(shape) + " needs " + std::to_string(4 * count) + " payload bytes, found " +
                    std::to_string(payload),
                std::min<std::uint64_t>(total_size, expected));
  }
  return shape;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
  Shape shape = decode_shape(bytes, bytes.size());
  const std::size_t base = kFixedHeader + 4 * shape.size();
  std::vector<float> data((bytes.size() - base) / 4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<float>(get_u32(bytes, base + 4 * i));
    if (!std::isfinite(data[i])) {
      throw Error(ErrorCode::kValidation, "non-finite payload value at offset " + std::to_string(base + 4 * i),
                  base + 4 * i);
    }
  }
  return Tensor(std::move(shape), std::move(data));
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open tensor file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIo, "read failed: " + path.string());
  try {
    return decode_tensor(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what(), e.byte_offset());
  }
}

void write_tensor(const Tensor& t, const std::filesystem::path& path) {
  const auto bytes = encode_tensor(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

Shape read_tensor_shape(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open tensor file " + path.string());
  std::vector<std::uint8_t> header(kFixedHeader + 12);
  in.read(reinterpret_cast<char*>(header.data()), static_cast<std::streamsize>(header.size()));
  header.resize(static_cast<std::size_t>(in.gcount()));
  std::error_code ec;
  const auto total = std::filesystem::file_size(path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot stat " + path.string());
  try {
    return decode_shape(header, total);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what(), e.byte_offset());
  }
}

}  // namespace msrd

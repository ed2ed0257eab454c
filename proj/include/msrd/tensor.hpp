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

#ifndef MSRD_TENSOR_HPP_
#define MSRD_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace msrd {

using Shape = std::vector<std::uint32_t>;

std::string shape_string(const Shape& shape);

/// Dense row-major float32 array of rank 2 (H x W) or rank 3 (K x H x W).
///
/// Construction validates the shape and that every element is finite. The
/// mutable accessors exist for building results in place; code that writes
/// through them is responsible for keeping values finite.
class Tensor {
 public:
  Tensor() = default;
  /// Zero-filled tensor.
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<float> data);

  static Tensor map(std::uint32_t height, std::uint32_t width) { return Tensor({height, width}); }
  static Tensor stack(std::uint32_t channels, std::uint32_t height, std::uint32_t width) {
    return Tensor({channels, height, width});
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  // Trailing two dimensions; channels() is 1 for rank-2 tensors.
  std::uint32_t height() const noexcept { return shape_.empty() ? 0 : shape_[rank() - 2]; }
  std::uint32_t width() const noexcept { return shape_.empty() ? 0 : shape_[rank() - 1]; }
  std::uint32_t channels() const noexcept { return rank() == 3 ? shape_[0] : 1; }

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> mutable_data() noexcept { return data_; }

  /// View of one H x W plane of a rank-3 tensor (or the whole rank-2 map).
  std::span<const float> channel(std::size_t k) const;
  std::span<float> mutable_channel(std::size_t k);

  float at(std::size_t i, std::size_t j) const { return data_[i * width() + j]; }
  float at(std::size_t k, std::size_t i, std::size_t j) const {
    return data_[(k * height() + i) * width() + j];
  }
  float& at(std::size_t i, std::size_t j) { return data_[i * width() + j]; }
  float& at(std::size_t k, std::size_t i, std::size_t j) {
    return data_[(k * height() + i) * width() + j];
  }

  /// Extracts channel k of a rank-3 tensor as a rank-2 tensor.
  Tensor plane(std::size_t k) const;

  /// Throws ErrorCode::kValidation if any element is NaN or infinite.
  void check_finite() const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  std::vector<float> data_;
};

/// Bitwise equality (distinguishes -0.0f from 0.0f).
bool bit_identical(const Tensor& a, const Tensor& b) noexcept;

/// Returns a copy with every element multiplied by `factor`.
Tensor scaled(const Tensor& t, float factor);

}  // namespace msrd

#endif  // MSRD_TENSOR_HPP_

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

#include "msrd/tensor.hpp"

#include <cmath>
#include <cstring>
#include <iostream>
#include <mutex>

#include "msrd/error.hpp"

namespace msrd {

namespace {

std::size_t checked_element_count(const Shape& shape) {
  if (shape.size() != 2 && shape.size() != 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "tensor rank must be 2 or 3, got " + std::to_string(shape.size()));
  }
  std::size_t n = 1;
  for (auto d : shape) {
    if (d == 0) throw Error(ErrorCode::kInvalidArgument, "tensor dimensions must be positive: " + shape_string(shape));
    n *= d;
  }
  return n;
}

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

WarningSink& sink() {
  static WarningSink s = default_warning_sink();
  return s;
}

}  // namespace

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kFormat: return "format error";
    case ErrorCode::kTruncation: return "truncation error";
    case ErrorCode::kValidation: return "validation error";
    case ErrorCode::kSchema: return "schema error";
    case ErrorCode::kShape: return "shape mismatch";
    case ErrorCode::kIo: return "I/O error";
  }
  return "unknown error";
}

WarningSink default_warning_sink() {
  return [](std::string_view msg) { std::cerr << "msrd: warning: " << msg << '\n'; };
}

void set_warning_sink(WarningSink s) {
  std::lock_guard lock(sink_mutex());
  sink() = std::move(s);
}

void warn(std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (sink()) sink()(message);
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += 'x';
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  data_.assign(checked_element_count(shape_), 0.0f);
}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
  const auto n = checked_element_count(shape_);
  if (data_.size() != n) {
    throw Error(ErrorCode::kShape, "tensor of shape " + shape_string(shape_) + " needs " + std::to_string(n) +
                                       " elements, got " + std::to_string(data_.size()));
  }
  check_finite();
}

std::span<const float> Tensor::channel(std::size_t k) const {
  const std::size_t plane = std::size_t{height()} * width();
  if (k >= channels()) throw Error(ErrorCode::kInvalidArgument, "channel index out of range");
  return std::span<const float>(data_).subspan(k * plane, plane);
}

std::span<float> Tensor::mutable_channel(std::size_t k) {
  const std::size_t plane = std::size_t{height()} * width();
  if (k >= channels()) throw Error(ErrorCode::kInvalidArgument, "channel index out of range");
  return std::span<float>(data_).subspan(k * plane, plane);
}

Tensor Tensor::plane(std::size_t k) const {
  auto src = channel(k);
  return Tensor({height(), width()}, std::vector<float>(src.begin(), src.end()));
}

void Tensor::check_finite() const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw Error(ErrorCode::kValidation, "non-finite value at element " + std::to_string(i));
    }
  }
}

bool bit_identical(const Tensor& a, const Tensor& b) noexcept {
  return a.shape() == b.shape() &&
         std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(float)) == 0;
}

Tensor scaled(const Tensor& t, float factor) {
  Tensor out = t;
  for (auto& v : out.mutable_data()) v *= factor;
  out.check_finite();
  return out;
}

}  // namespace msrd

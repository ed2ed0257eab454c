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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "msrd/error.hpp"
#include "temp_dir.hpp"

namespace msrd {
namespace {

using testing::TempDir;

template <typename Fn>
Error capture(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "expected msrd::Error";
  return Error(ErrorCode::kIo, "none");
}

std::vector<std::uint8_t> bytes_of(std::initializer_list<int> v) { return {v.begin(), v.end()}; }

TEST(Tensor, RejectsBadShapes) {
  EXPECT_THROW(Tensor({4}), Error);
  EXPECT_THROW(Tensor({1, 2, 3, 4}), Error);
  EXPECT_THROW(Tensor({2, 0}), Error);
  EXPECT_THROW(Tensor({2, 2}, {1, 2, 3}), Error);
}

TEST(Tensor, RejectsNonFinite) {
  const auto e = capture([] { Tensor({1, 2}, {1.0f, std::numeric_limits<float>::quiet_NaN()}); });
  EXPECT_EQ(e.code(), ErrorCode::kValidation);
  EXPECT_THROW(Tensor({1, 1}, {std::numeric_limits<float>::infinity()}), Error);
}

TEST(Tensor, Accessors) {
  Tensor t({2, 2, 3}, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
  EXPECT_EQ(t.channels(), 2u);
  EXPECT_EQ(t.height(), 2u);
  EXPECT_EQ(t.width(), 3u);
  EXPECT_EQ(t.at(1, 1, 2), 11.0f);
  EXPECT_EQ(t.plane(1), Tensor({2, 3}, {6, 7, 8, 9, 10, 11}));
  EXPECT_EQ(t.channel(0).size(), 6u);
}

TEST(TensorIo, MinimalContainerIs19Bytes) {
  const auto bytes = encode_tensor(Tensor({1, 1}, {1.0f}));
  // 4 magic + version + dtype + rank + 2 dims * 4 + 1 float * 4.
  EXPECT_EQ(bytes.size(), 19u);
  EXPECT_EQ(encoded_size({1, 1}), 19u);
  EXPECT_EQ(bytes, bytes_of({'M', 'S', 'R', 'D', 1, 1, 2, 1, 0, 0, 0, 1, 0, 0, 0, 0x00, 0x00, 0x80, 0x3F}));
}

TEST(TensorIo, DecodesMinimalZeroTensor) {
  const auto t = decode_tensor(bytes_of({'M', 'S', 'R', 'D', 1, 1, 2, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0}));
  EXPECT_EQ(t, Tensor({1, 1}, {0.0f}));
}

TEST(TensorIo, DimsOutermostFirst) {
  const auto bytes = encode_tensor(Tensor({2, 3}, {1, 2, 3, 4, 5, 6}));
  std::uint32_t d0, d1;
  std::memcpy(&d0, bytes.data() + 7, 4);
  std::memcpy(&d1, bytes.data() + 11, 4);
  EXPECT_EQ(d0, 2u);
  EXPECT_EQ(d1, 3u);
  float first;
  std::memcpy(&first, bytes.data() + 15, 4);
  EXPECT_EQ(first, 1.0f);
}

TEST(TensorIo, FileRoundTripAndDeterminism) {
  TempDir dir;
  std::mt19937_64 rng(3);
  std::normal_distribution<float> n;
  Tensor t({3, 5, 7});
  for (auto& v : t.mutable_data()) v = n(rng);
  t.mutable_data()[0] = -0.0f;
  write_tensor(t, dir / "a.msrd");
  write_tensor(t, dir / "b.msrd");
  EXPECT_EQ(testing::read_bytes(dir / "a.msrd"), testing::read_bytes(dir / "b.msrd"));
  EXPECT_TRUE(bit_identical(read_tensor(dir / "a.msrd"), t));
  EXPECT_EQ(read_tensor_shape(dir / "a.msrd"), (Shape{3, 5, 7}));
}

TEST(TensorIo, TruncatedPayload) {
  auto bytes = encode_tensor(Tensor({2, 2}, {1, 2, 3, 4}));
  bytes.resize(bytes.size() - 4);  // three floats for a 2x2 shape
  const auto e = capture([&] { decode_tensor(bytes); });
  EXPECT_EQ(e.code(), ErrorCode::kTruncation);
}

TEST(TensorIo, TrailingBytes) {
  auto bytes = encode_tensor(Tensor({1, 1}, {1}));
  bytes.push_back(0);
  EXPECT_EQ(capture([&] { decode_tensor(bytes); }).code(), ErrorCode::kTruncation);
}

TEST(TensorIo, HeaderErrorsCarryOffsets) {
  const auto good = encode_tensor(Tensor({1, 1}, {1}));
  struct Case {
    std::size_t at;
    std::uint8_t value;
    ErrorCode code;
    std::uint64_t offset;
  };
  for (const auto& c : {Case{0, 'X', ErrorCode::kFormat, 0}, Case{3, 'Q', ErrorCode::kFormat, 3},
                        Case{4, 2, ErrorCode::kFormat, 4}, Case{5, 7, ErrorCode::kFormat, 5},
                        Case{6, 4, ErrorCode::kFormat, 6}, Case{7, 0, ErrorCode::kFormat, 7}}) {
    auto bytes = good;
    bytes[c.at] = c.value;
    const auto e = capture([&] { decode_tensor(bytes); });
    EXPECT_EQ(e.code(), c.code) << "byte " << c.at;
    ASSERT_TRUE(e.byte_offset().has_value());
    EXPECT_EQ(*e.byte_offset(), c.offset) << "byte " << c.at;
  }
}

TEST(TensorIo, ShortHeaderIsTruncation) {
  EXPECT_EQ(capture([] { decode_tensor(bytes_of({'M', 'S'})); }).code(), ErrorCode::kTruncation);
  EXPECT_EQ(capture([] { decode_tensor(bytes_of({'M', 'S', 'R', 'D', 1, 1, 3, 1, 0})); }).code(),
            ErrorCode::kTruncation);
}

TEST(TensorIo, NonFinitePayloadIsValidationError) {
  auto bytes = encode_tensor(Tensor({1, 2}, {1, 2}));
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(bytes.data() + 19, &nan, 4);
  const auto e = capture([&] { decode_tensor(bytes); });
  EXPECT_EQ(e.code(), ErrorCode::kValidation);
  EXPECT_EQ(e.byte_offset().value_or(0), 19u);
}

TEST(TensorIo, ReadErrorsNameTheFile) {
  TempDir dir;
  testing::write_bytes(dir / "bad.msrd", {'N', 'O', 'P', 'E', 1, 1, 2});
  const auto e = capture([&] { read_tensor(dir / "bad.msrd"); });
  EXPECT_EQ(e.code(), ErrorCode::kFormat);
  EXPECT_NE(std::string(e.what()).find("bad.msrd"), std::string::npos);
  EXPECT_EQ(capture([&] { read_tensor(dir / "missing.msrd"); }).code(), ErrorCode::kIo);
}

}  // namespace
}  // namespace msrd

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

#include "msrd/grad_weights.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "msrd/error.hpp"
#include "oracles.hpp"

namespace msrd {
namespace {

Tensor random_stack(std::mt19937_64& rng, std::uint32_t k, std::uint32_t h, std::uint32_t w, float lo, float hi) {
  std::uniform_real_distribution<float> u(lo, hi);
  Tensor t({k, h, w});
  for (auto& v : t.mutable_data()) v = u(rng);
  return t;
}

TEST(GradcamWeights, ChannelMeans) {
  const auto w = gradcam_weights(Tensor({3, 2, 2}, {1, 2, 3, 4, 5, 5, 5, 5, -1, 1, -1, 1}));
  EXPECT_EQ(w, (std::vector<float>{2.5f, 5.0f, 0.0f}));
}

TEST(GradcamWeights, MeanTimesCountIsSum) {
  std::mt19937_64 rng(11);
  const auto g = random_stack(rng, 4, 9, 13, -1, 1);
  const auto w = gradcam_weights(g);
  for (std::size_t k = 0; k < 4; ++k) {
    double sum = 0;
    for (float v : g.channel(k)) sum += v;
    EXPECT_NEAR(w[k] * 117.0, sum, 1e-6 * std::max(1.0, std::abs(sum)));
  }
}

TEST(AlphaMaps, ZeroGradientsGiveZero) {
  const auto r = alpha_maps(Tensor({2, 3, 3}), Tensor({2, 3, 3}));
  for (float v : r.alpha.data()) EXPECT_EQ(v, 0.0f);
  EXPECT_EQ(r.diagnostics.zero_denominators, 18u);
}

TEST(AlphaMaps, SinglePixel) {
  const auto r = alpha_maps(Tensor({1, 1, 1}, {1}), Tensor({1, 1, 1}, {1}));
  EXPECT_FLOAT_EQ(r.alpha.data()[0], 1.0f / 3.0f);
  EXPECT_NEAR(r.alpha.data()[0], oracle::scalar_alpha(Tensor({1, 1, 1}, {1}), Tensor({1, 1, 1}, {1}), 0, 0, 0), 1e-7);
}

TEST(AlphaMaps, UniformChannelMatchesSymbolicForm) {
  const float c = 0.3f, a = 2.0f;
  const std::uint32_t h = 4, w = 5;
  Tensor A({1, h, w}), G({1, h, w});
  for (auto& v : A.mutable_data()) v = a;
  for (auto& v : G.mutable_data()) v = c;
  const double z = h * w;
  const double expected = double{c} * c / (2.0 * c * c + z * a * c * c * c);
  const auto r = alpha_maps(A, G);
  for (float v : r.alpha.data()) EXPECT_NEAR(v, expected, 1e-6 * expected);
}

TEST(AlphaMaps, MatchesScalarOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto A = random_stack(rng, 3, 6, 7, 0, 2);
    const auto G = random_stack(rng, 3, 6, 7, -0.5f, 1);
    const auto r = alpha_maps(A, G);
    for (std::size_t k = 0; k < 3; ++k) {
      for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 7; ++j) {
          const double want = oracle::scalar_alpha(A, G, k, i, j);
          EXPECT_NEAR(r.alpha.at(k, i, j), want, 1e-6 * std::max(1e-3, want));
          EXPECT_GE(r.alpha.at(k, i, j), 0.0f);
        }
      }
    }
  }
}

TEST(AlphaMaps, NegativeDenominatorClampsAndCounts) {
  // Denominator 2 * 1 + (5 * -1 + 5 * -1) = -8.
  const auto r = alpha_maps(Tensor({1, 1, 2}, {5, 5}), Tensor({1, 1, 2}, {-1, -1}));
  EXPECT_EQ(r.alpha.data()[0], 0.0f);
  EXPECT_EQ(r.diagnostics.negative_denominators, 2u);
}

TEST(AlphaMaps, NegativeActivationsWarnButSucceed) {
  std::vector<std::string> seen;
  set_warning_sink([&](std::string_view m) { seen.emplace_back(m); });
  const auto r = alpha_maps(Tensor({1, 1, 2}, {-1, 1}), Tensor({1, 1, 2}, {1, 1}));
  set_warning_sink(default_warning_sink());
  EXPECT_EQ(r.diagnostics.negative_activations, 1u);
  EXPECT_FALSE(seen.empty());
}

TEST(AlphaMaps, ShapeMismatchNamesBothShapes) {
  try {
    alpha_maps(Tensor({1, 2, 2}), Tensor({1, 2, 3}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShape);
    EXPECT_NE(std::string(e.what()).find("1x2x2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("1x2x3"), std::string::npos) << e.what();
  }
}

TEST(RectifiedGradients, Relu) {
  EXPECT_EQ(rectified_gradients(Tensor({1, 2}, {-1, 2})), Tensor({1, 2}, {0, 2}));
  std::mt19937_64 rng(2);
  const auto t = oracle::random_map(rng, 5, 5, -1, 1);
  const auto once = rectified_gradients(t);
  EXPECT_EQ(rectified_gradients(once), once);
  for (float v : once.data()) EXPECT_GE(v, 0.0f);
}

TEST(AlphaReluWeights, Examples) {
  EXPECT_FLOAT_EQ(alpha_relu_weights(Tensor({1, 1, 1}, {1}), Tensor({1, 1, 1}, {1}))[0], 1.0f / 3.0f);
  const auto w = alpha_relu_weights(Tensor({2, 2, 2}, {1, 1, 1, 1, 1, 1, 1, 1}),
                                    Tensor({2, 2, 2}, {-1, -2, 0, -1, -3, -1, -1, 0}));
  EXPECT_EQ(w, (std::vector<float>{0.0f, 0.0f}));
}

TEST(AlphaReluWeights, MatchesNaiveLoop) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const auto A = random_stack(rng, 8, 16, 16, 0, 1);
    const auto G = random_stack(rng, 8, 16, 16, -0.2f, 1);
    const auto got = alpha_relu_weights(A, G);
    const auto want = oracle::naive_alpha_relu_weights(A, G);
    for (std::size_t k = 0; k < 8; ++k) EXPECT_NEAR(got[k], want[k], 1e-6 * std::abs(want[k]));
  }
}

}  // namespace
}  // namespace msrd

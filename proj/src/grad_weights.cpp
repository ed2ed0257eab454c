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

#include <algorithm>

#include "msrd/error.hpp"

namespace msrd {

namespace {

void require_stack(const Tensor& t, const char* what) {
  if (t.rank() != 3) {
    throw Error(ErrorCode::kShape, std::string(what) + " must be K x H x W, got " + shape_string(t.shape()));
  }
}

void require_same(const Tensor& activations, const Tensor& gradients) {
  require_stack(activations, "activations");
  require_stack(gradients, "gradients");
  if (activations.shape() != gradients.shape()) {
    throw Error(ErrorCode::kShape, "activations " + shape_string(activations.shape()) + " vs gradients " +
                                       shape_string(gradients.shape()));
  }
}

}  // namespace

std::vector<float> gradcam_weights(const Tensor& gradients) {
  require_stack(gradients, "gradients");
  std::vector<float> w(gradients.channels());
  for (std::size_t k = 0; k < w.size(); ++k) {
    double sum = 0.0;
    for (float g : gradients.channel(k)) sum += g;
    w[k] = static_cast<float>(sum / static_cast<double>(gradients.channel(k).size()));
  }
  return w;
}

GradientWeightMap alpha_maps(const Tensor& activations, const Tensor& gradients) {
  require_same(activations, gradients);
  GradientWeightMap out{Tensor(gradients.shape()), {}};
  for (std::size_t k = 0; k < gradients.channels(); ++k) {
    const auto a = activations.channel(k);
    const auto g = gradients.channel(k);
    auto alpha = out.alpha.mutable_channel(k);

    double cubic = 0.0;  // sum A * g^3, fixed row-major order
    for (std::size_t p = 0; p < g.size(); ++p) {
      const double gp = g[p];
      cubic += static_cast<double>(a[p]) * gp * gp * gp;
      if (a[p] < 0.0f) ++out.diagnostics.negative_activations;
    }
    for (std::size_t p = 0; p < g.size(); ++p) {
      const double g2 = static_cast<double>(g[p]) * g[p];
      const double denom = 2.0 * g2 + cubic;
      if (denom == 0.0) {
        ++out.diagnostics.zero_denominators;
        alpha[p] = 0.0f;
      } else if (denom < 0.0) {
        ++out.diagnostics.negative_denominators;
        alpha[p] = 0.0f;
      } else {
        alpha[p] = static_cast<float>(g2 / denom);
      }
    }
  }
  if (out.diagnostics.negative_activations > 0) {
    warn(std::to_string(out.diagnostics.negative_activations) +
         " negative activation values; gradient weights assume rectified layers");
  }
  return out;
}

Tensor rectified_gradients(const Tensor& gradients) {
  Tensor out = gradients;
  for (auto& v : out.mutable_data()) v = std::max(v, 0.0f);
  return out;
}

std::vector<float> alpha_relu_weights(const Tensor& activations, const Tensor& gradients) {
  const auto alpha = alpha_maps(activations, gradients).alpha;
  std::vector<float> w(gradients.channels());
  for (std::size_t k = 0; k < w.size(); ++k) {
    const auto al = alpha.channel(k);
    const auto g = gradients.channel(k);
    double sum = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) sum += static_cast<double>(al[p]) * std::max(g[p], 0.0f);
    w[k] = static_cast<float>(sum);
  }
  return w;
}

}  // namespace msrd

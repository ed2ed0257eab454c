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

#ifndef MSRD_GRAD_WEIGHTS_HPP_
#define MSRD_GRAD_WEIGHTS_HPP_

#include <cstdint>
#include <vector>

#include "msrd/tensor.hpp"

namespace msrd {

/// Counts of degenerate cases met while computing alpha maps.
struct AlphaDiagnostics {
  std::uint64_t zero_denominators = 0;      // alpha forced to 0 (0/0)
  std::uint64_t negative_denominators = 0;  // alpha clamped to 0
  std::uint64_t negative_activations = 0;   // activations expected >= 0

  AlphaDiagnostics& operator+=(const AlphaDiagnostics& o) {
    zero_denominators += o.zero_denominators;
    negative_denominators += o.negative_denominators;
    negative_activations += o.negative_activations;
    return *this;
  }
};

/// Per-pixel gradient weights (alpha), K x H x W, every entry finite and >= 0.
struct GradientWeightMap {
  Tensor alpha;
  AlphaDiagnostics diagnostics;
};

/// Global-average-pooled gradients, one signed weight per channel.
std::vector<float> gradcam_weights(const Tensor& gradients);

/// Closed-form alpha for an exponential class score:
///
///   alpha[k,i,j] = g^2 / (2 g^2 + sum_{a,b} A[k,a,b] g[k,a,b]^3)
///
/// with g = gradients[k,i,j]. Entries whose denominator is zero or negative
/// are set to 0 and counted. Negative activations are counted and reported
/// through msrd::warn but do not fail the call.
GradientWeightMap alpha_maps(const Tensor& activations, const Tensor& gradients);

/// Elementwise max(x, 0).
Tensor rectified_gradients(const Tensor& gradients);

/// sum_ij alpha[k,i,j] * relu(g[k,i,j]) per channel.
std::vector<float> alpha_relu_weights(const Tensor& activations, const Tensor& gradients);

}  // namespace msrd

#endif  // MSRD_GRAD_WEIGHTS_HPP_

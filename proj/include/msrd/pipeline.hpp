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

#ifndef MSRD_PIPELINE_HPP_
#define MSRD_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msrd/evaluation.hpp"
#include "msrd/grad_weights.hpp"
#include "msrd/localization.hpp"
#include "msrd/manifest.hpp"
#include "msrd/region_discovery.hpp"
#include "msrd/segmentation.hpp"

namespace msrd {

struct RunConfig {
  std::vector<std::string> layers = {"conv4", "conv5"};
  DiscoveryConfig discovery;
  SegmentationConfig segmentation;
  FusionMode fusion = FusionMode::kNormalizeEach;
  float delta = 0.25f;
  unsigned workers = 1;

  void validate() const;
  EvalMeta meta() const;
};

/// Gradient weights -> local-maximum channel weights -> rectified weighted
/// sum of activations, for one layer.
LocalizationMap layer_map_from_weight_maps(const Tensor& activations, const Tensor& weight_maps,
                                           const DiscoveryConfig& cfg, std::string scale_tag = {});

/// Same, starting from raw class-score gradients.
LocalizationMap layer_map_from_gradients(const Tensor& activations, const Tensor& gradients,
                                         const DiscoveryConfig& cfg, std::string scale_tag = {},
                                         AlphaDiagnostics* diagnostics = nullptr);

/// Normalized final map: a single layer is normalized directly; several are
/// fused at the largest grid (ties: first in list) and then normalized.
LocalizationMap combine_layers(std::span<const LocalizationMap> layer_maps, FusionMode mode);

struct ClassLocalization {
  std::int32_t class_index = 0;
  std::vector<LocalizationMap> layer_maps;  // raw, in RunConfig::layers order
  LocalizationMap final_map;                // normalized
  AlphaDiagnostics diagnostics;
};

/// True when every configured layer has gradients for `class_index`.
bool can_localize(const SampleManifest& sample, std::int32_t class_index, const RunConfig& cfg);

/// Loads tensors and runs the full per-class localization. Throws
/// ErrorCode::kSchema naming the sample when a layer or gradient is missing.
ClassLocalization localize(const SampleManifest& sample, std::int32_t class_index, const RunConfig& cfg);

/// Localization for the rank-1 predicted class.
ClassLocalization localize_top1(const SampleManifest& sample, const RunConfig& cfg);

struct EvalOptions {
  /// When set, the rank-1 map of each sample is read from
  /// `<maps_dir>/<image_id>.msrd` instead of being recomputed.
  std::optional<std::filesystem::path> maps_dir;
};

EvalRecord evaluate_sample(const SampleManifest& sample, const RunConfig& cfg, const EvalOptions& options = {});

/// Evaluates samples on `cfg.workers` threads; records come back in input
/// order, so the result does not depend on the worker count.
std::vector<EvalRecord> evaluate_samples(const std::vector<SampleManifest>& samples, const RunConfig& cfg,
                                         const EvalOptions& options = {});

EvalSummary evaluate(const std::vector<SampleManifest>& samples, const RunConfig& cfg,
                     const EvalOptions& options = {});

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The exception of the
/// lowest failing index is rethrown after all work stops.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

std::string map_file_name(const std::string& image_id, const std::string& layer = {});

}  // namespace msrd

#endif  // MSRD_PIPELINE_HPP_

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

#ifndef MSRD_EVALUATION_HPP_
#define MSRD_EVALUATION_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "msrd/localization.hpp"
#include "msrd/manifest.hpp"

namespace msrd {

/// IoU over inclusive pixel areas.
double iou(const BoundingBox& a, const BoundingBox& b);

/// A localization counts as correct only when IoU is strictly above this.
inline constexpr double kIouThreshold = 0.5;

using BoxesByClass = std::map<std::int32_t, std::vector<BoundingBox>>;

/// True when some prediction of rank <= k names a true label and one of its
/// boxes overlaps a ground-truth box of that class with IoU > 0.5.
/// Returns nullopt when the sample carries no predictions.
std::optional<bool> topk_localization(const SampleManifest& sample, const BoxesByClass& boxes, std::size_t k);

/// inside / (outside + area) where `area` is the pixel area of the union of
/// `gt_boxes`, `inside`/`outside` count mask pixels in/out of that union.
/// The mask must be at image resolution. nullopt when there is no box.
std::optional<double> voc_loc(const Mask& mask, const std::vector<BoundingBox>& gt_boxes);

struct PredictionOutcome {
  std::int32_t class_index = 0;
  bool class_correct = false;
  std::optional<double> best_iou;  // absent when no box was produced
};

struct EvalRecord {
  std::string image_id;
  bool skipped = false;
  std::vector<PredictionOutcome> predictions;
  bool top1_hit = false;
  bool top5_hit = false;
  bool top5_complete = false;  // a map was available for every ranked class
  std::vector<std::pair<std::int32_t, double>> voc_loc;  // per true label
};

struct EvalMeta {
  std::uint32_t window = 3;
  std::uint32_t stride = 1;
  float min_value = 0.0f;
  float tau = 0.2f;
  std::string mode = "largest";
  std::vector<std::string> layers;
  bool fuse_raw = false;
  float delta = 0.25f;
};

struct EvalSummary {
  EvalMeta meta;
  std::size_t n_images = 0;  // evaluated, excluding skipped
  std::size_t skipped = 0;
  std::size_t top5_complete = 0;
  double top1_error = 0.0;  // percent
  double top5_error = 0.0;  // percent
  std::optional<double> mean_voc_loc;
  std::size_t voc_pairs = 0;
};

/// Folds records in the given order. Throws when `records` is empty.
EvalSummary aggregate(const std::vector<EvalRecord>& records, const EvalMeta& meta);

/// Deterministic JSON report; floats carry six decimals.
std::string report_json(const EvalSummary& summary);

/// Fixed-width text table, one row per (label, summary).
std::string report_table(const std::vector<std::pair<std::string, EvalSummary>>& rows);

}  // namespace msrd

#endif  // MSRD_EVALUATION_HPP_

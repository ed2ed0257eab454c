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

#ifndef MSRD_MANIFEST_HPP_
#define MSRD_MANIFEST_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace msrd {

/// Inclusive pixel rectangle in original-image coordinates.
struct BoundingBox {
  std::int32_t x_min = 0;
  std::int32_t y_min = 0;
  std::int32_t x_max = 0;
  std::int32_t y_max = 0;

  std::int64_t width() const noexcept { return std::int64_t{x_max} - x_min + 1; }
  std::int64_t height() const noexcept { return std::int64_t{y_max} - y_min + 1; }
  std::int64_t area() const noexcept { return width() * height(); }
  bool valid() const noexcept { return x_min <= x_max && y_min <= y_max; }
  bool inside(std::int64_t image_width, std::int64_t image_height) const noexcept {
    return valid() && x_min >= 0 && y_min >= 0 && x_max < image_width && y_max < image_height;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct GroundTruthBox {
  std::int32_t class_index = 0;
  BoundingBox box;
  friend bool operator==(const GroundTruthBox&, const GroundTruthBox&) = default;
};

/// Tensor files for one layer. `gradients` holds the class-score gradients for
/// the rank-1 predicted class; `class_gradients` optionally adds gradients for
/// further classes (needed for top-5 evaluation).
struct LayerFiles {
  std::filesystem::path activations;
  std::filesystem::path gradients;
  std::map<std::int32_t, std::filesystem::path> class_gradients;
};

struct SampleManifest {
  std::string image_id;
  std::uint32_t image_width = 0;
  std::uint32_t image_height = 0;
  std::vector<std::int32_t> true_labels;
  std::vector<std::int32_t> predicted_classes;  // most confident first, at most 5
  std::vector<GroundTruthBox> gt_boxes;
  std::map<std::string, LayerFiles> layers;
  /// Free-form exporter metadata, kept as serialized JSON ("{}" when absent).
  std::string meta_json = "{}";

  std::vector<BoundingBox> gt_boxes_of(std::int32_t class_index) const;
  bool has_label(std::int32_t class_index) const;
  /// Gradient file for `class_index` at `layer`, if one is available.
  std::optional<std::filesystem::path> gradients_for(const std::string& layer, std::int32_t class_index) const;
};

struct ManifestOptions {
  /// Open every referenced tensor header and check that activations and
  /// gradients of a layer agree in shape. When false, only JSON-level
  /// validation happens and files are checked on first use.
  bool check_tensors = true;
};

/// Parses a manifest JSON document. Relative tensor paths resolve against
/// `base_dir`.
std::vector<SampleManifest> parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir,
                                           const ManifestOptions& options = {});

std::vector<SampleManifest> read_manifest(const std::filesystem::path& path, const ManifestOptions& options = {});

/// Serializes samples; paths are written relative to `base_dir` when they lie
/// beneath it. Output is deterministic.
std::string serialize_manifest(const std::vector<SampleManifest>& samples, const std::filesystem::path& base_dir);

}  // namespace msrd

#endif  // MSRD_MANIFEST_HPP_

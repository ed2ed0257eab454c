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

#ifndef MSRD_SYNTH_HPP_
#define MSRD_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "msrd/manifest.hpp"
#include "msrd/tensor.hpp"

namespace msrd {

struct SynthLayer {
  std::string name;
  std::uint32_t grid = 14;      // square H = W
  std::uint32_t channels = 8;
  float blur_cells = 1.0f;      // receptive-field blur, in cells of this grid
  float small_object_gain = 0;  // amplitude change for the smallest objects
};

/// Synthetic fixture description. Object scale is the box area as a fraction
/// of the image area.
struct SynthSpec {
  std::uint64_t seed = 1;
  std::uint32_t n_images = 1;
  std::uint32_t image_width = 224;
  std::uint32_t image_height = 224;
  std::vector<SynthLayer> layers = {
      {"conv4", 28, 8, 0.5f, +0.5f},
      {"conv5", 14, 8, 1.0f, -0.5f},
  };
  std::uint32_t min_objects = 1;
  std::uint32_t max_objects = 3;
  float min_scale = 0.05f;
  float max_scale = 0.5f;
  /// Minimum gap between objects: 5% of the image side plus this fraction of
  /// the mean of the two objects' longer sides.
  float separation = 0.35f;
  float noise = 0.02f;
  /// Gradient = gradient_gain * (activation + noise/2 * N(0, 1)).
  float gradient_gain = 0.1f;
  std::uint32_t num_classes = 1000;

  void validate() const;
};

struct PlantedObject {
  BoundingBox box;
  double scale = 0.0;  // box area / image area
  std::vector<std::uint32_t> channels;
};

struct SynthLayerTensors {
  Tensor activations;
  Tensor gradients;
};

struct SynthImage {
  SampleManifest sample;  // tensor paths left empty
  std::vector<PlantedObject> objects;
  std::vector<SynthLayerTensors> layers;  // SynthSpec::layers order
};

/// In-memory generation; deterministic for a given spec.
std::vector<SynthImage> synthesize(const SynthSpec& spec);

struct SynthResult {
  std::filesystem::path manifest_path;
  std::vector<SynthImage> images;  // tensors dropped, planted metadata kept
};

/// Writes `<out_dir>/manifest.json` and `<out_dir>/tensors/*.msrd`.
SynthResult generate(const SynthSpec& spec, const std::filesystem::path& out_dir);

}  // namespace msrd

#endif  // MSRD_SYNTH_HPP_

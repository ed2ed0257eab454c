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

#include "msrd/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "msrd/error.hpp"
#include "msrd/tensor_io.hpp"

namespace msrd {

void RunConfig::validate() const {
  if (layers.empty()) throw Error(ErrorCode::kInvalidArgument, "at least one layer is required");
  std::set<std::string> seen;
  for (const auto& l : layers) {
    if (!seen.insert(l).second) throw Error(ErrorCode::kInvalidArgument, "layer listed twice: " + l);
  }
  discovery.validate();
  segmentation.validate();
  if (!(delta >= 0.0f && delta < 1.0f)) throw Error(ErrorCode::kInvalidArgument, "delta must lie in [0, 1)");
  if (workers == 0) throw Error(ErrorCode::kInvalidArgument, "workers must be >= 1");
}

EvalMeta RunConfig::meta() const {
  EvalMeta m;
  m.window = discovery.window;
  m.stride = discovery.stride;
  m.min_value = discovery.min_value;
  m.tau = segmentation.tau;
  m.mode = segmentation.mode == BoxMode::kAll ? "all" : "largest";
  m.layers = layers;
  m.fuse_raw = fusion == FusionMode::kRaw;
  m.delta = delta;
  return m;
}

LocalizationMap layer_map_from_weight_maps(const Tensor& activations, const Tensor& weight_maps,
                                           const DiscoveryConfig& cfg, std::string scale_tag) {
  if (activations.shape() != weight_maps.shape()) {
    throw Error(ErrorCode::kShape, "activations " + shape_string(activations.shape()) + " vs gradient weights " +
                                       shape_string(weight_maps.shape()));
  }
  const auto weights = channel_weights(weight_maps, cfg);
  return layer_locmap(activations, weights, std::move(scale_tag));
}

LocalizationMap layer_map_from_gradients(const Tensor& activations, const Tensor& gradients,
                                         const DiscoveryConfig& cfg, std::string scale_tag,
                                         AlphaDiagnostics* diagnostics) {
  auto gwm = alpha_maps(activations, gradients);
  if (diagnostics) *diagnostics += gwm.diagnostics;
  return layer_map_from_weight_maps(activations, gwm.alpha, cfg, std::move(scale_tag));
}

LocalizationMap combine_layers(std::span<const LocalizationMap> layer_maps, FusionMode mode) {
  if (layer_maps.empty()) throw Error(ErrorCode::kInvalidArgument, "no layer maps to combine");
  if (layer_maps.size() == 1) return normalize01(layer_maps.front());
  const auto largest = std::max_element(layer_maps.begin(), layer_maps.end(), [](const auto& a, const auto& b) {
    return a.map.size() < b.map.size();
  });
  return normalize01(fuse(layer_maps, largest->map.height(), largest->map.width(), mode));
}

bool can_localize(const SampleManifest& sample, std::int32_t class_index, const RunConfig& cfg) {
  return std::all_of(cfg.layers.begin(), cfg.layers.end(),
                     [&](const auto& layer) { return sample.gradients_for(layer, class_index).has_value(); });
}

ClassLocalization localize(const SampleManifest& sample, std::int32_t class_index, const RunConfig& cfg) {
  ClassLocalization out;
  out.class_index = class_index;
  for (const auto& layer : cfg.layers) {
    auto it = sample.layers.find(layer);
    if (it == sample.layers.end()) {
      throw Error(ErrorCode::kSchema, "sample " + sample.image_id + " has no layer '" + layer + "'");
    }
    const auto grad_path = sample.gradients_for(layer, class_index);
    if (!grad_path) {
      throw Error(ErrorCode::kSchema, "sample " + sample.image_id + " has no " + layer + " gradients for class " +
                                          std::to_string(class_index));
    }
    const Tensor activations = read_tensor(it->second.activations);
    const Tensor gradients = read_tensor(*grad_path);
    out.layer_maps.push_back(layer_map_from_gradients(activations, gradients, cfg.discovery, layer, &out.diagnostics));
  }
  out.final_map = combine_layers(out.layer_maps, cfg.fusion);
  return out;
}

ClassLocalization localize_top1(const SampleManifest& sample, const RunConfig& cfg) {
  if (sample.predicted_classes.empty()) {
    throw Error(ErrorCode::kSchema, "sample " + sample.image_id + " has no predicted classes");
  }
  return localize(sample, sample.predicted_classes.front(), cfg);
}

EvalRecord evaluate_sample(const SampleManifest& sample, const RunConfig& cfg, const EvalOptions& options) {
  EvalRecord rec;
  rec.image_id = sample.image_id;
  if (sample.predicted_classes.empty()) {
    warn("sample " + sample.image_id + " has no predictions; skipped");
    rec.skipped = true;
    return rec;
  }

  std::map<std::int32_t, LocalizationMap> final_maps;
  auto map_for = [&](std::int32_t cls) -> const LocalizationMap* {
    if (auto it = final_maps.find(cls); it != final_maps.end()) return &it->second;
    const bool top1 = cls == sample.predicted_classes.front();
    if (top1 && options.maps_dir) {
      const auto path = *options.maps_dir / map_file_name(sample.image_id);
      if (!std::filesystem::exists(path)) throw Error(ErrorCode::kIo, "missing localization map " + path.string());
      LocalizationMap m{read_tensor(path), "file", true};
      return &final_maps.emplace(cls, std::move(m)).first->second;
    }
    if (!can_localize(sample, cls, cfg)) return nullptr;
    auto loc = localize(sample, cls, cfg);
    if (loc.diagnostics.negative_denominators > 0) {
      warn("sample " + sample.image_id + ": " + std::to_string(loc.diagnostics.negative_denominators) +
           " gradient weights clamped from a negative denominator");
    }
    return &final_maps.emplace(cls, std::move(loc.final_map)).first->second;
  };

  BoxesByClass boxes;
  rec.top5_complete = true;
  const std::size_t ranks = std::min<std::size_t>(5, sample.predicted_classes.size());
  for (std::size_t r = 0; r < ranks; ++r) {
    const auto cls = sample.predicted_classes[r];
    PredictionOutcome outcome{cls, sample.has_label(cls), std::nullopt};
    const LocalizationMap* map = map_for(cls);
    if (!map) {
      rec.top5_complete = false;
    } else {
      auto& b = boxes[cls];
      b = boxes_from_map(*map, cfg.segmentation, sample.image_width, sample.image_height);
      for (const auto& gt : sample.gt_boxes_of(cls)) {
        for (const auto& box : b) outcome.best_iou = std::max(outcome.best_iou.value_or(0.0), iou(box, gt));
      }
    }
    rec.predictions.push_back(outcome);
  }
  rec.top1_hit = topk_localization(sample, boxes, 1).value_or(false);
  rec.top5_hit = topk_localization(sample, boxes, 5).value_or(false);

  std::set<std::int32_t> labels(sample.true_labels.begin(), sample.true_labels.end());
  for (auto label : labels) {
    const auto gts = sample.gt_boxes_of(label);
    if (gts.empty()) continue;
    const LocalizationMap* map = map_for(label);
    if (!map) continue;
    const Mask mask =
        upsample_nearest(binarize_for_explanation(*map, cfg.delta), sample.image_height, sample.image_width);
    if (auto v = voc_loc(mask, gts)) rec.voc_loc.emplace_back(label, *v);
  }
  return rec;
}

std::vector<EvalRecord> evaluate_samples(const std::vector<SampleManifest>& samples, const RunConfig& cfg,
                                         const EvalOptions& options) {
  cfg.validate();
  std::vector<EvalRecord> records(samples.size());
  parallel_for(samples.size(), cfg.workers,
               [&](std::size_t i) { records[i] = evaluate_sample(samples[i], cfg, options); });
  return records;
}

EvalSummary evaluate(const std::vector<SampleManifest>& samples, const RunConfig& cfg, const EvalOptions& options) {
  return aggregate(evaluate_samples(samples, cfg, options), cfg.meta());
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> failed_index{n};
  std::mutex m;
  std::exception_ptr failure;
  // Indices are handed out in increasing order, so every index below a
  // failure has already been claimed and still runs to completion.
  auto run = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n && i < failed_index.load();) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(m);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string map_file_name(const std::string& image_id, const std::string& layer) {
  return layer.empty() ? image_id + ".msrd" : image_id + "." + layer + ".msrd";
}

}  // namespace msrd

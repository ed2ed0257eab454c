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

#include "msrd/msrd.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "msrd/error.hpp"
#include "msrd/heatmap.hpp"
#include "msrd/pipeline.hpp"
#include "msrd/synth.hpp"
#include "msrd/tensor_io.hpp"

struct msrd_tensor {
  msrd::Tensor tensor;
};

struct msrd_manifest {
  std::vector<msrd::SampleManifest> samples;
};

struct msrd_config {
  msrd::RunConfig run;
};

struct msrd_report {
  msrd::EvalSummary summary;
  std::string json;
  std::string table;
};

namespace {

thread_local std::string last_error;
thread_local std::int64_t last_offset = -1;

msrd_status status_of(msrd::ErrorCode code) {
  switch (code) {
    case msrd::ErrorCode::kInvalidArgument: return MSRD_ERR_INVALID_ARGUMENT;
    case msrd::ErrorCode::kFormat: return MSRD_ERR_FORMAT;
    case msrd::ErrorCode::kTruncation: return MSRD_ERR_TRUNCATION;
    case msrd::ErrorCode::kValidation: return MSRD_ERR_VALIDATION;
    case msrd::ErrorCode::kSchema: return MSRD_ERR_SCHEMA;
    case msrd::ErrorCode::kShape: return MSRD_ERR_SHAPE;
    case msrd::ErrorCode::kIo: return MSRD_ERR_IO;
  }
  return MSRD_ERR_INTERNAL;
}

msrd_status fail(msrd_status status, std::string message, std::int64_t offset = -1) {
  last_error = std::move(message);
  last_offset = offset;
  return status;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
msrd_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    return MSRD_OK;
  } catch (const msrd::Error& e) {
    const auto off = e.byte_offset();
    return fail(status_of(e.code()), e.what(), off ? static_cast<std::int64_t>(*off) : -1);
  } catch (const std::bad_alloc&) {
    return fail(MSRD_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MSRD_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MSRD_ERR_INTERNAL, "unknown error");
  }
}

msrd_status null_arg(const char* name) {
  return fail(MSRD_ERR_INVALID_ARGUMENT, std::string(name) + " must not be NULL");
}

const msrd::SampleManifest& sample_at(const msrd_manifest* m, size_t index) {
  if (index >= m->samples.size()) {
    throw msrd::Error(msrd::ErrorCode::kInvalidArgument,
                      "sample index " + std::to_string(index) + " out of range (" +
                          std::to_string(m->samples.size()) + " samples)");
  }
  return m->samples[index];
}

msrd_tensor* wrap(msrd::Tensor t) { return new msrd_tensor{std::move(t)}; }

msrd::LocalizationMap as_map(const msrd_tensor* t, bool normalized) {
  if (t->tensor.rank() != 2) {
    throw msrd::Error(msrd::ErrorCode::kShape, "expected a rank-2 map, got " + msrd::shape_string(t->tensor.shape()));
  }
  return {t->tensor, {}, normalized};
}

std::string joined(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : sep) + p;
  return out;
}

// Applies a change to a copy and commits it only if the result validates.
template <typename Fn>
msrd_status update(msrd_config* c, Fn&& change) {
  if (!c) return null_arg("config");
  return guarded([&] {
    msrd::RunConfig next = c->run;
    change(next);
    next.validate();
    c->run = std::move(next);
  });
}

}  // namespace

extern "C" {

const char* msrd_version(void) { return "0.1.0"; }

const char* msrd_status_name(int status) {
  switch (status) {
    case MSRD_OK: return "ok";
    case MSRD_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case MSRD_ERR_FORMAT: return "format";
    case MSRD_ERR_TRUNCATION: return "truncation";
    case MSRD_ERR_VALIDATION: return "validation";
    case MSRD_ERR_SCHEMA: return "schema";
    case MSRD_ERR_SHAPE: return "shape";
    case MSRD_ERR_IO: return "io";
    case MSRD_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* msrd_last_error(void) { return last_error.c_str(); }

int64_t msrd_last_error_offset(void) { return last_offset; }

void msrd_set_warning_handler(msrd_warning_fn fn, void* user) {
  if (!fn) {
    msrd::set_warning_sink(msrd::default_warning_sink());
    return;
  }
  msrd::set_warning_sink([fn, user](std::string_view msg) { fn(std::string(msg).c_str(), user); });
}

// ---- tensors

msrd_status msrd_tensor_create(const uint32_t* dims, size_t rank, const float* data, msrd_tensor** out) {
  if (!dims) return null_arg("dims");
  if (!out) return null_arg("out");
  return guarded([&] {
    if (rank != 2 && rank != 3) throw msrd::Error(msrd::ErrorCode::kInvalidArgument, "rank must be 2 or 3");
    msrd::Shape shape(dims, dims + rank);
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    if (n > 0 && !data) throw msrd::Error(msrd::ErrorCode::kInvalidArgument, "data must not be NULL");
    std::vector<float> values(data, data + n);
    *out = wrap(msrd::Tensor(std::move(shape), std::move(values)));
  });
}

msrd_status msrd_tensor_read(const char* path, msrd_tensor** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] { *out = wrap(msrd::read_tensor(path)); });
}

msrd_status msrd_tensor_write(const msrd_tensor* t, const char* path) {
  if (!t) return null_arg("tensor");
  if (!path) return null_arg("path");
  return guarded([&] { msrd::write_tensor(t->tensor, path); });
}

size_t msrd_tensor_rank(const msrd_tensor* t) { return t ? t->tensor.rank() : 0; }

uint32_t msrd_tensor_dim(const msrd_tensor* t, size_t axis) {
  return t && axis < t->tensor.rank() ? t->tensor.shape()[axis] : 0;
}

size_t msrd_tensor_size(const msrd_tensor* t) { return t ? t->tensor.size() : 0; }

const float* msrd_tensor_data(const msrd_tensor* t) { return t ? t->tensor.data().data() : nullptr; }

void msrd_tensor_destroy(msrd_tensor* t) { delete t; }

// ---- manifests

msrd_status msrd_manifest_load(const char* path, msrd_manifest** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new msrd_manifest{msrd::read_manifest(path)}; });
}

size_t msrd_manifest_size(const msrd_manifest* m) { return m ? m->samples.size() : 0; }

const char* msrd_manifest_image_id(const msrd_manifest* m, size_t index) {
  return m && index < m->samples.size() ? m->samples[index].image_id.c_str() : nullptr;
}

msrd_status msrd_manifest_image_size(const msrd_manifest* m, size_t index, uint32_t* width, uint32_t* height) {
  if (!m) return null_arg("manifest");
  return guarded([&] {
    const auto& s = sample_at(m, index);
    if (width) *width = s.image_width;
    if (height) *height = s.image_height;
  });
}

size_t msrd_manifest_prediction_count(const msrd_manifest* m, size_t index) {
  return m && index < m->samples.size() ? m->samples[index].predicted_classes.size() : 0;
}

msrd_status msrd_manifest_prediction(const msrd_manifest* m, size_t index, size_t rank, int32_t* class_index) {
  if (!m) return null_arg("manifest");
  if (!class_index) return null_arg("class_index");
  return guarded([&] {
    const auto& s = sample_at(m, index);
    if (rank >= s.predicted_classes.size()) {
      throw msrd::Error(msrd::ErrorCode::kInvalidArgument,
                        "sample " + s.image_id + " has no prediction at rank " + std::to_string(rank));
    }
    *class_index = s.predicted_classes[rank];
  });
}

int msrd_manifest_has_layer(const msrd_manifest* m, size_t index, const char* layer) {
  if (!m || !layer || index >= m->samples.size()) return 0;
  return m->samples[index].layers.count(layer) ? 1 : 0;
}

void msrd_manifest_destroy(msrd_manifest* m) { delete m; }

// ---- configuration

msrd_status msrd_config_create(msrd_config** out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = new msrd_config{}; });
}

void msrd_config_destroy(msrd_config* c) { delete c; }

msrd_status msrd_config_set_layers(msrd_config* c, const char* layers) {
  if (!c) return null_arg("config");
  if (!layers) return null_arg("layers");
  return guarded([&] {
    msrd::RunConfig next = c->run;
    next.layers.clear();
    std::string list = layers;
    std::size_t start = 0;
    while (start <= list.size()) {
      const auto end = std::min(list.find(',', start), list.size());
      auto name = list.substr(start, end - start);
      if (name.empty()) throw msrd::Error(msrd::ErrorCode::kInvalidArgument, "empty layer name in '" + list + "'");
      next.layers.push_back(std::move(name));
      start = end + 1;
    }
    next.validate();
    c->run = std::move(next);
  });
}

size_t msrd_config_layer_count(const msrd_config* c) { return c ? c->run.layers.size() : 0; }

const char* msrd_config_layer(const msrd_config* c, size_t index) {
  return c && index < c->run.layers.size() ? c->run.layers[index].c_str() : nullptr;
}

msrd_status msrd_config_set_window(msrd_config* c, uint32_t window) {
  return update(c, [&](msrd::RunConfig& r) { r.discovery.window = window; });
}

msrd_status msrd_config_set_stride(msrd_config* c, uint32_t stride) {
  return update(c, [&](msrd::RunConfig& r) { r.discovery.stride = stride; });
}

msrd_status msrd_config_set_min_value(msrd_config* c, float min_value) {
  return update(c, [&](msrd::RunConfig& r) { r.discovery.min_value = min_value; });
}

msrd_status msrd_config_set_tau(msrd_config* c, float tau) {
  return update(c, [&](msrd::RunConfig& r) { r.segmentation.tau = tau; });
}

msrd_status msrd_config_set_mode(msrd_config* c, const char* mode) {
  if (!mode) return null_arg("mode");
  return update(c, [&](msrd::RunConfig& r) {
    const std::string m = mode;
    if (m == "largest") {
      r.segmentation.mode = msrd::BoxMode::kLargest;
    } else if (m == "all") {
      r.segmentation.mode = msrd::BoxMode::kAll;
    } else {
      throw msrd::Error(msrd::ErrorCode::kInvalidArgument, "mode must be 'largest' or 'all', got '" + m + "'");
    }
  });
}

msrd_status msrd_config_set_delta(msrd_config* c, float delta) {
  return update(c, [&](msrd::RunConfig& r) { r.delta = delta; });
}

msrd_status msrd_config_set_fuse_raw(msrd_config* c, int fuse_raw) {
  return update(c, [&](msrd::RunConfig& r) {
    r.fusion = fuse_raw ? msrd::FusionMode::kRaw : msrd::FusionMode::kNormalizeEach;
  });
}

msrd_status msrd_config_set_workers(msrd_config* c, uint32_t workers) {
  return update(c, [&](msrd::RunConfig& r) { r.workers = workers; });
}

// ---- pipeline

msrd_status msrd_localize(const msrd_manifest* m, size_t index, const msrd_config* c, msrd_tensor** final_map,
                          msrd_tensor** layer_maps) {
  if (!m) return null_arg("manifest");
  if (!c) return null_arg("config");
  if (!final_map) return null_arg("final_map");
  return guarded([&] {
    auto loc = msrd::localize_top1(sample_at(m, index), c->run);
    std::vector<std::unique_ptr<msrd_tensor>> layers;
    if (layer_maps) {
      for (auto& lm : loc.layer_maps) layers.emplace_back(wrap(std::move(lm.map)));
    }
    *final_map = wrap(std::move(loc.final_map.map));
    for (std::size_t i = 0; i < layers.size(); ++i) layer_maps[i] = layers[i].release();
  });
}

msrd_status msrd_fuse_maps(const msrd_tensor* const* maps, size_t count, const msrd_config* c, msrd_tensor** out) {
  if (!maps) return null_arg("maps");
  if (!c) return null_arg("config");
  if (!out) return null_arg("out");
  return guarded([&] {
    std::vector<msrd::LocalizationMap> inputs;
    for (size_t i = 0; i < count; ++i) {
      if (!maps[i]) throw msrd::Error(msrd::ErrorCode::kInvalidArgument, "maps[" + std::to_string(i) + "] is NULL");
      inputs.push_back(as_map(maps[i], false));
    }
    *out = wrap(msrd::combine_layers(inputs, c->run.fusion).map);
  });
}

msrd_status msrd_boxes_from_map(const msrd_tensor* map, const msrd_config* c, uint32_t image_width,
                                uint32_t image_height, msrd_box* boxes, size_t capacity, size_t* count) {
  if (!map) return null_arg("map");
  if (!c) return null_arg("config");
  if (!count) return null_arg("count");
  if (capacity > 0 && !boxes) return null_arg("boxes");
  return guarded([&] {
    if (image_width == 0 || image_height == 0) {
      throw msrd::Error(msrd::ErrorCode::kInvalidArgument, "image size must be positive");
    }
    const auto found = msrd::boxes_from_map(as_map(map, true), c->run.segmentation, image_width, image_height);
    *count = found.size();
    for (size_t i = 0; i < found.size() && i < capacity; ++i) {
      boxes[i] = {found[i].x_min, found[i].y_min, found[i].x_max, found[i].y_max};
    }
  });
}

msrd_status msrd_evaluate(const msrd_manifest* m, const msrd_config* c, const char* maps_dir, msrd_report** out) {
  if (!m) return null_arg("manifest");
  if (!c) return null_arg("config");
  if (!out) return null_arg("out");
  return guarded([&] {
    msrd::EvalOptions options;
    if (maps_dir) options.maps_dir = maps_dir;
    auto report = std::make_unique<msrd_report>();
    report->summary = msrd::evaluate(m->samples, c->run, options);
    report->json = msrd::report_json(report->summary);
    report->table = msrd::report_table({{joined(c->run.layers, "+"), report->summary}});
    *out = report.release();
  });
}

const char* msrd_report_json(const msrd_report* r) { return r ? r->json.c_str() : nullptr; }

const char* msrd_report_table(const msrd_report* r) { return r ? r->table.c_str() : nullptr; }

msrd_status msrd_report_summary(const msrd_report* r, msrd_summary* out) {
  if (!r) return null_arg("report");
  if (!out) return null_arg("out");
  const auto& s = r->summary;
  *out = msrd_summary{s.n_images,        s.skipped,     s.top5_complete, s.top1_error, s.top5_error,
                      s.mean_voc_loc ? 1 : 0, s.mean_voc_loc.value_or(0.0), s.voc_pairs};
  return MSRD_OK;
}

void msrd_report_destroy(msrd_report* r) { delete r; }

// ---- synthetic fixtures

void msrd_synth_spec_defaults(msrd_synth_spec* spec) {
  if (!spec) return;
  const msrd::SynthSpec d;
  *spec = msrd_synth_spec{d.seed,        d.n_images,  d.image_width, d.image_height, d.min_objects,
                          d.max_objects, d.min_scale, d.max_scale,   d.noise};
}

msrd_status msrd_synth_generate(const msrd_synth_spec* spec, const char* out_dir) {
  if (!spec) return null_arg("spec");
  if (!out_dir) return null_arg("out_dir");
  return guarded([&] {
    msrd::SynthSpec s;
    s.seed = spec->seed;
    s.n_images = spec->n_images;
    s.image_width = spec->image_width;
    s.image_height = spec->image_height;
    s.min_objects = spec->min_objects;
    s.max_objects = spec->max_objects;
    s.min_scale = spec->min_scale;
    s.max_scale = spec->max_scale;
    s.noise = spec->noise;
    msrd::generate(s, out_dir);
  });
}

// ---- heatmaps

msrd_status msrd_heatmap_write(const msrd_tensor* map, uint32_t width, uint32_t height, const char* path) {
  if (!map) return null_arg("map");
  if (!path) return null_arg("path");
  return guarded([&] { msrd::write_heatmap_pgm(as_map(map, false), width, height, path); });
}

}  // extern "C"

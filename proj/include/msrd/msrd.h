/* Copyright 2026 The MSRD Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the msrd localization library.
 *
 * Every fallible call returns an msrd_status. On failure the message of the
 * calling thread's last error is available from msrd_last_error() until the
 * next failing call on that thread. Objects are opaque and released with the
 * matching *_destroy function; destroy functions accept NULL.
 */

#ifndef MSRD_MSRD_H_
#define MSRD_MSRD_H_

#include <stddef.h>
#include <stdint.h>

#if defined(MSRD_BUILDING_LIBRARY)
#define MSRD_API __attribute__((visibility("default")))
#else
#define MSRD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum msrd_status {
  MSRD_OK = 0,
  MSRD_ERR_INVALID_ARGUMENT = 1,
  MSRD_ERR_FORMAT = 2,     /* malformed tensor container header */
  MSRD_ERR_TRUNCATION = 3, /* payload length disagrees with the shape */
  MSRD_ERR_VALIDATION = 4, /* value invariant violated (non-finite, box out of image) */
  MSRD_ERR_SCHEMA = 5,     /* manifest field missing or mistyped */
  MSRD_ERR_SHAPE = 6,      /* tensor shapes disagree */
  MSRD_ERR_IO = 7,
  MSRD_ERR_INTERNAL = 8
} msrd_status;

typedef struct msrd_tensor msrd_tensor;
typedef struct msrd_manifest msrd_manifest;
typedef struct msrd_config msrd_config;
typedef struct msrd_report msrd_report;

MSRD_API const char* msrd_version(void);
MSRD_API const char* msrd_status_name(int status);

/* Message of the last failure on this thread, "" if none. */
MSRD_API const char* msrd_last_error(void);
/* Byte offset of the last container format error on this thread, or -1. */
MSRD_API int64_t msrd_last_error_offset(void);

/* Receives library warnings. NULL restores the default (stderr). The handler
 * may be called from worker threads, one call at a time. */
typedef void (*msrd_warning_fn)(const char* message, void* user);
MSRD_API void msrd_set_warning_handler(msrd_warning_fn fn, void* user);

/* ---- tensors ---------------------------------------------------------- */

/* rank is 2 (H, W) or 3 (K, H, W); data holds the product of dims floats. */
MSRD_API msrd_status msrd_tensor_create(const uint32_t* dims, size_t rank, const float* data, msrd_tensor** out);
MSRD_API msrd_status msrd_tensor_read(const char* path, msrd_tensor** out);
MSRD_API msrd_status msrd_tensor_write(const msrd_tensor* t, const char* path);
MSRD_API size_t msrd_tensor_rank(const msrd_tensor* t);
/* 0 when axis is out of range. */
MSRD_API uint32_t msrd_tensor_dim(const msrd_tensor* t, size_t axis);
MSRD_API size_t msrd_tensor_size(const msrd_tensor* t);
MSRD_API const float* msrd_tensor_data(const msrd_tensor* t);
MSRD_API void msrd_tensor_destroy(msrd_tensor* t);

/* ---- manifests -------------------------------------------------------- */

/* Parses and validates the manifest, including every referenced tensor
 * header. */
MSRD_API msrd_status msrd_manifest_load(const char* path, msrd_manifest** out);
MSRD_API size_t msrd_manifest_size(const msrd_manifest* m);
/* NULL when index is out of range. */
MSRD_API const char* msrd_manifest_image_id(const msrd_manifest* m, size_t index);
MSRD_API msrd_status msrd_manifest_image_size(const msrd_manifest* m, size_t index, uint32_t* width,
                                              uint32_t* height);
MSRD_API size_t msrd_manifest_prediction_count(const msrd_manifest* m, size_t index);
MSRD_API msrd_status msrd_manifest_prediction(const msrd_manifest* m, size_t index, size_t rank, int32_t* class_index);
/* 1 if the sample lists the layer, 0 otherwise. */
MSRD_API int msrd_manifest_has_layer(const msrd_manifest* m, size_t index, const char* layer);
MSRD_API void msrd_manifest_destroy(msrd_manifest* m);

/* ---- run configuration ------------------------------------------------ */

/* Defaults: layers conv4,conv5; window 3; stride 1; min value 0; tau 0.2;
 * mode largest; delta 0.25; per-map normalized fusion; 1 worker. */
MSRD_API msrd_status msrd_config_create(msrd_config** out);
MSRD_API void msrd_config_destroy(msrd_config* c);
/* Comma-separated layer names, e.g. "conv4,conv5". */
MSRD_API msrd_status msrd_config_set_layers(msrd_config* c, const char* layers);
MSRD_API size_t msrd_config_layer_count(const msrd_config* c);
MSRD_API const char* msrd_config_layer(const msrd_config* c, size_t index);
MSRD_API msrd_status msrd_config_set_window(msrd_config* c, uint32_t window);
MSRD_API msrd_status msrd_config_set_stride(msrd_config* c, uint32_t stride);
MSRD_API msrd_status msrd_config_set_min_value(msrd_config* c, float min_value);
MSRD_API msrd_status msrd_config_set_tau(msrd_config* c, float tau);
/* "largest" or "all". */
MSRD_API msrd_status msrd_config_set_mode(msrd_config* c, const char* mode);
MSRD_API msrd_status msrd_config_set_delta(msrd_config* c, float delta);
MSRD_API msrd_status msrd_config_set_fuse_raw(msrd_config* c, int fuse_raw);
MSRD_API msrd_status msrd_config_set_workers(msrd_config* c, uint32_t workers);

/* ---- pipeline --------------------------------------------------------- */

/* Localization for the rank-1 predicted class of sample `index`. `final_map`
 * receives the normalized combined map. If `layer_maps` is not NULL it must
 * have room for msrd_config_layer_count() entries and receives the raw
 * per-layer maps in configured order. */
MSRD_API msrd_status msrd_localize(const msrd_manifest* m, size_t index, const msrd_config* c,
                                   msrd_tensor** final_map, msrd_tensor** layer_maps);

/* Combines raw layer maps (rank 2) as msrd_localize does: fused at the
 * largest grid using the configured fusion mode, then normalized. */
MSRD_API msrd_status msrd_fuse_maps(const msrd_tensor* const* maps, size_t count, const msrd_config* c,
                                    msrd_tensor** out);

typedef struct msrd_box {
  int32_t x_min;
  int32_t y_min;
  int32_t x_max;
  int32_t y_max;
} msrd_box;

/* Boxes in image pixels from a normalized map. `*count` always receives the
 * number of boxes; at most `capacity` are written to `boxes` (which may be
 * NULL when capacity is 0). */
MSRD_API msrd_status msrd_boxes_from_map(const msrd_tensor* map, const msrd_config* c, uint32_t image_width,
                                         uint32_t image_height, msrd_box* boxes, size_t capacity, size_t* count);

/* Evaluates every sample. When `maps_dir` is not NULL the rank-1 map of each
 * sample is read from <maps_dir>/<image_id>.msrd. */
MSRD_API msrd_status msrd_evaluate(const msrd_manifest* m, const msrd_config* c, const char* maps_dir,
                                   msrd_report** out);

typedef struct msrd_summary {
  size_t n_images;
  size_t skipped;
  size_t top5_complete;
  double top1_error; /* percent */
  double top5_error; /* percent */
  int has_voc_loc;
  double mean_voc_loc;
  size_t voc_pairs;
} msrd_summary;

MSRD_API const char* msrd_report_json(const msrd_report* r);
MSRD_API const char* msrd_report_table(const msrd_report* r);
MSRD_API msrd_status msrd_report_summary(const msrd_report* r, msrd_summary* out);
MSRD_API void msrd_report_destroy(msrd_report* r);

/* ---- synthetic fixtures ---------------------------------------------- */

typedef struct msrd_synth_spec {
  uint64_t seed;
  uint32_t n_images;
  uint32_t image_width;
  uint32_t image_height;
  uint32_t min_objects;
  uint32_t max_objects;
  float min_scale; /* object box area as a fraction of the image */
  float max_scale;
  float noise;
} msrd_synth_spec;

MSRD_API void msrd_synth_spec_defaults(msrd_synth_spec* spec);
/* Writes <out_dir>/manifest.json and <out_dir>/tensors/. */
MSRD_API msrd_status msrd_synth_generate(const msrd_synth_spec* spec, const char* out_dir);

/* ---- heatmaps --------------------------------------------------------- */

/* 8-bit PGM of the normalized map resized to width x height. */
MSRD_API msrd_status msrd_heatmap_write(const msrd_tensor* map, uint32_t width, uint32_t height, const char* path);

#ifdef __cplusplus
}
#endif

#endif /* MSRD_MSRD_H_ */

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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "msrd/error.hpp"
#include "msrd/evaluation.hpp"
#include "msrd/grad_weights.hpp"
#include "msrd/pipeline.hpp"
#include "msrd/region_discovery.hpp"
#include "msrd/segmentation.hpp"
#include "msrd/synth.hpp"
#include "msrd/tensor_io.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"

namespace {

using namespace msrd;
using Clock = std::chrono::steady_clock;

// Pinned tolerances and budgets.
constexpr int kMaximaMaps = 1000;
constexpr std::uint32_t kMaximaMaxSide = 64;
constexpr double kMaximaBudgetSeconds = 10.0;
constexpr int kComponentMasks = 500;
constexpr double kWeightRelTol = 1e-6;
constexpr int kScaleImages = 20;
constexpr std::uint64_t kScaleSeed = 5;
constexpr std::uint64_t kEndToEndSeed = 20261019;
constexpr int kEndToEndImages = 200;
constexpr double kMaxFusedTop1Error = 5.0;
constexpr double kSmallObjectScale = 0.15;
constexpr double kEndToEndBudgetSeconds = 60.0;
constexpr int kRoundTripTensors = 100;

/// Collects failure reasons for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    failed_ = failed_ || !ok;
  }
  bool failed() const { return failed_; }
  const std::vector<std::string>& failures() const { return failures_; }

 private:
  bool failed_ = false;
  std::vector<std::string> failures_;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool report(const char* name, const Check& check, const std::string& detail) {
  std::printf("%s %s: %s\n", check.failed() ? "FAIL" : "PASS", name, detail.c_str());
  for (const auto& f : check.failures()) std::printf("    %s\n", f.c_str());
  std::fflush(stdout);
  return !check.failed();
}

bool same_peaks(const LocalMaxima& a, const LocalMaxima& b) {
  if (a.peaks.size() != b.peaks.size()) return false;
  for (std::size_t i = 0; i < a.peaks.size(); ++i) {
    const auto &p = a.peaks[i], &q = b.peaks[i];
    if (p.row != q.row || p.col != q.col || std::bit_cast<std::uint32_t>(p.value) != std::bit_cast<std::uint32_t>(q.value)) {
      return false;
    }
  }
  return std::bit_cast<std::uint32_t>(a.weight) == std::bit_cast<std::uint32_t>(b.weight);
}

bool local_maxima_oracle() {
  Check check;
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::uint32_t> side(1, kMaximaMaxSide);
  const std::uint32_t windows[] = {1, 3, 5, 7};
  const std::uint32_t strides[] = {1, 2};
  const float mins[] = {0.0f, 0.1f};
  std::size_t peaks = 0;
  const auto t0 = Clock::now();
  for (int n = 0; n < kMaximaMaps; ++n) {
    const std::uint32_t h = side(rng), w = side(rng);
    // Every third map is quantized so plateaus and ties are common.
    const Tensor map = oracle::random_map(rng, h, w, -0.5f, 1.0f, n % 3 == 0 ? 8 : 0);
    DiscoveryConfig cfg;
    cfg.window = windows[n % 4];
    cfg.stride = strides[(n / 4) % 2];
    cfg.min_value = mins[(n / 8) % 2];
    const auto got = find_local_maxima(map, cfg);
    const auto want = oracle::brute_force_maxima(map, cfg);
    peaks += want.peaks.size();
    check.expect(same_peaks(got, want), "map " + std::to_string(n) + " (" + std::to_string(h) + "x" +
                                            std::to_string(w) + ", W=" + std::to_string(cfg.window) + ") differs");
  }
  const double elapsed = seconds_since(t0);
  check.expect(elapsed < kMaximaBudgetSeconds, "runtime over budget");
  char detail[160];
  std::snprintf(detail, sizeof detail, "%d maps, %zu peaks, %.2f s (limit %.0f s)", kMaximaMaps, peaks, elapsed,
                kMaximaBudgetSeconds);
  return report("local-maxima oracle equivalence", check, detail);
}

bool connected_components_oracle() {
  Check check;
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> density(0.05, 0.75);
  std::size_t total = 0;
  for (int n = 0; n < kComponentMasks; ++n) {
    const Mask mask = oracle::random_mask(rng, 32, 32, density(rng));
    const auto got = connected_components(mask);
    const auto want = oracle::flood_fill_components(mask);
    total += want.size();
    bool same = got.size() == want.size();
    for (std::size_t c = 0; same && c < got.size(); ++c) same = got[c].pixels == want[c];
    check.expect(same, "mask " + std::to_string(n) + " differs");
  }
  return report("connected-components oracle", check,
                std::to_string(kComponentMasks) + " masks, " + std::to_string(total) + " components");
}

bool weight_consistency() {
  Check check;
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<std::uint32_t> side(1, 20), chans(1, 8);
  std::uniform_real_distribution<float> level(1e-3f, 10.0f);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::uint32_t k = chans(rng), h = side(rng), w = side(rng);
    Tensor grads = Tensor::stack(k, h, w);
    std::vector<float> constants(k);
    for (std::uint32_t c = 0; c < k; ++c) {
      constants[c] = level(rng);
      for (auto& v : grads.mutable_channel(c)) v = constants[c];
    }
    DiscoveryConfig cfg;
    cfg.window = 2 * std::max(h, w) + 1;  // any centre's window covers the map
    const auto discovered = channel_weights(rectified_gradients(grads), cfg);
    const auto averaged = gradcam_weights(grads);
    for (std::uint32_t c = 0; c < k; ++c) {
      const double ref = constants[c];
      const double e1 = std::abs(discovered[c] - ref) / ref;
      const double e2 = std::abs(averaged[c] - ref) / ref;
      const double e3 = std::abs(double{discovered[c]} - averaged[c]) / ref;
      worst = std::max({worst, e1, e2, e3});
      check.expect(e1 <= kWeightRelTol && e2 <= kWeightRelTol && e3 <= kWeightRelTol,
                   "trial " + std::to_string(trial) + " channel " + std::to_string(c));
    }
  }
  char detail[120];
  std::snprintf(detail, sizeof detail, "50 stacks, worst relative error %.3g (limit %.0e)", worst, kWeightRelTol);
  return report("discovered weights equal global-average weights", check, detail);
}

struct Outcome {
  std::vector<Tensor> maps;
  std::vector<std::vector<BoundingBox>> boxes;
};

/// Runs the default two-layer pipeline on in-memory fixtures. `weights` turns
/// (activations, gradients) into per-pixel weight maps.
Outcome run_pipeline(const std::vector<SynthImage>& images,
                     const std::function<Tensor(const Tensor&, const Tensor&)>& weights) {
  const RunConfig cfg;
  Outcome out;
  for (const auto& img : images) {
    std::vector<LocalizationMap> layer_maps;
    for (const auto& t : img.layers) {
      layer_maps.push_back(layer_map_from_weight_maps(t.activations, weights(t.activations, t.gradients),
                                                      cfg.discovery));
    }
    auto final_map = combine_layers(layer_maps, cfg.fusion);
    out.boxes.push_back(
        boxes_from_map(final_map, cfg.segmentation, img.sample.image_width, img.sample.image_height));
    out.maps.push_back(std::move(final_map.map));
  }
  return out;
}

struct Diff {
  std::size_t map_pixels = 0;
  std::size_t images_with_box_change = 0;
};

Diff compare(const Outcome& a, const Outcome& b) {
  Diff d;
  for (std::size_t i = 0; i < a.maps.size(); ++i) {
    for (std::size_t p = 0; p < a.maps[i].size(); ++p) {
      d.map_pixels += std::bit_cast<std::uint32_t>(a.maps[i].data()[p]) !=
                      std::bit_cast<std::uint32_t>(b.maps[i].data()[p]);
    }
    d.images_with_box_change += a.boxes[i] != b.boxes[i];
  }
  return d;
}

bool scale_invariance() {
  Check check;
  SynthSpec spec;
  spec.seed = kScaleSeed;
  spec.n_images = kScaleImages;
  const auto images = synthesize(spec);
  const auto alpha = [](const Tensor& a, const Tensor& g) { return alpha_maps(a, g).alpha; };
  const auto base = run_pipeline(images, alpha);
  std::size_t pixels = 0;
  for (const auto& m : base.maps) pixels += m.size();
  std::ostringstream detail;
  detail << kScaleImages << " images, " << pixels << " map pixels;";
  for (float lambda : {0.5f, 3.0f}) {
    const auto scaled_run =
        run_pipeline(images, [&](const Tensor& a, const Tensor& g) { return alpha(a, scaled(g, lambda)); });
    const auto d = compare(base, scaled_run);
    std::ostringstream tag;
    tag << "gradients x" << lambda << ": ";
    check.expect(d.map_pixels == 0, tag.str() + std::to_string(d.map_pixels) + " map pixels differ");
    check.expect(d.images_with_box_change == 0,
                 tag.str() + std::to_string(d.images_with_box_change) + " images with different boxes");
    detail << " lambda " << lambda << ": " << d.map_pixels << " pixels, " << d.images_with_box_change
           << " box sets differ;";
  }
  // Reference only: scaling the per-pixel weight maps instead of the gradients.
  for (float lambda : {0.5f, 3.0f}) {
    const auto d = compare(base, run_pipeline(images, [&](const Tensor& a, const Tensor& g) {
                             return scaled(alpha(a, g), lambda);
                           }));
    detail << " weight maps x" << lambda << ": " << d.map_pixels << " pixels, " << d.images_with_box_change
           << " box sets differ;";
  }
  return report("pipeline scale invariance", check, detail.str());
}

bool end_to_end() {
  Check check;
  const auto t0 = Clock::now();
  testing::TempDir dir("msrd-acceptance");
  SynthSpec spec;
  spec.seed = kEndToEndSeed;
  spec.n_images = kEndToEndImages;
  const auto fixture = generate(spec, dir.path());
  const auto samples = read_manifest(fixture.manifest_path);

  RunConfig fused;
  fused.workers = 1;
  RunConfig conv5 = fused;
  conv5.layers = {"conv5"};
  const auto fused_records = evaluate_samples(samples, fused);
  const auto conv5_records = evaluate_samples(samples, conv5);

  std::vector<EvalRecord> fused_small, conv5_small;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    bool small = !fixture.images[i].objects.empty();
    for (const auto& o : fixture.images[i].objects) small = small && o.scale < kSmallObjectScale;
    if (!small) continue;
    fused_small.push_back(fused_records[i]);
    conv5_small.push_back(conv5_records[i]);
  }
  const auto fused_all = aggregate(fused_records, fused.meta());
  const auto conv5_all = aggregate(conv5_records, conv5.meta());
  check.expect(!fused_small.empty(), "no small-object images in fixture");
  double fused_small_err = 0.0, conv5_small_err = 0.0;
  if (!fused_small.empty()) {
    fused_small_err = aggregate(fused_small, fused.meta()).top1_error;
    conv5_small_err = aggregate(conv5_small, conv5.meta()).top1_error;
  }
  const double elapsed = seconds_since(t0);
  check.expect(fused_all.top1_error <= kMaxFusedTop1Error, "fused top-1 error above limit");
  check.expect(conv5_small_err > fused_all.top1_error, "conv5-only small-object error not above fused error");
  check.expect(elapsed < kEndToEndBudgetSeconds, "runtime over budget");
  char detail[320];
  std::snprintf(detail, sizeof detail,
                "fused top-1 error %.2f%% (limit %.1f%%); small-object subset n=%zu: conv5-only %.2f%%, fused "
                "%.2f%%; conv5-only overall %.2f%%; %.1f s (limit %.0f s)",
                fused_all.top1_error, kMaxFusedTop1Error, fused_small.size(), conv5_small_err, fused_small_err,
                conv5_all.top1_error, elapsed, kEndToEndBudgetSeconds);
  return report("synthetic end-to-end localization", check, detail);
}

SampleManifest metric_sample(std::vector<std::int32_t> predicted) {
  SampleManifest s;
  s.image_id = "fixture";
  s.image_width = 40;
  s.image_height = 40;
  s.true_labels = {1};
  s.predicted_classes = std::move(predicted);
  s.gt_boxes = {{1, {0, 0, 9, 9}}};
  return s;
}

Mask paint(std::uint32_t w, std::uint32_t h, const std::vector<BoundingBox>& boxes) {
  Mask m(h, w);
  for (const auto& b : boxes) {
    for (auto y = b.y_min; y <= b.y_max; ++y) {
      for (auto x = b.x_min; x <= b.x_max; ++x) m.at(y, x) = 1;
    }
  }
  return m;
}

bool metric_fixtures() {
  Check check;
  const BoundingBox gt{0, 0, 9, 9};
  // IoU.
  const BoundingBox b{3, 4, 20, 9};
  check.expect(iou(b, b) == 1.0, "iou(b, b) != 1");
  check.expect(iou({0, 0, 4, 4}, {5, 5, 9, 9}) == 0.0, "disjoint iou != 0");
  check.expect(iou({0, 0, 9, 9}, {5, 0, 14, 9}) == 50.0 / 150.0, "shifted iou != 1/3");

  // Top-k. Boxes sharing the ground-truth top-left corner with heights 5, 6, 7
  // give IoU 50/100, 60/100, 70/100.
  const BoundingBox half{0, 0, 9, 4}, sixty{0, 0, 9, 5}, seventy{0, 0, 9, 6};
  check.expect(iou(half, gt) == 0.5 && iou(sixty, gt) == 0.6 && iou(seventy, gt) == 0.7, "fixture IoUs");
  const auto one = metric_sample({1});
  check.expect(topk_localization(one, {{1, {sixty}}}, 1) == std::optional<bool>(true), "IoU 0.6 not a hit");
  check.expect(topk_localization(one, {{1, {half}}}, 1) == std::optional<bool>(false), "IoU 0.5 counted as hit");
  check.expect(topk_localization(one, {{1, {half}}}, 5) == std::optional<bool>(false), "IoU 0.5 top-5 hit");
  const auto third = metric_sample({5, 6, 1});
  const BoxesByClass ranked = {{5, {gt}}, {6, {gt}}, {1, {seventy}}};
  check.expect(topk_localization(third, ranked, 1) == std::optional<bool>(false), "rank-3 match hit top-1");
  check.expect(topk_localization(third, ranked, 5) == std::optional<bool>(true), "rank-3 match missed top-5");
  check.expect(!topk_localization(metric_sample({}), {}, 1).has_value(), "sample without predictions not skipped");

  // VOC-style localization ratio.
  check.expect(voc_loc(paint(40, 40, {gt}), {gt}) == std::optional<double>(1.0), "exact fill != 1");
  check.expect(voc_loc(paint(40, 40, {{20, 20, 29, 29}}), {gt}) == std::optional<double>(0.0), "outside != 0");
  // 50 pixels inside the 100-pixel box, 25 outside.
  const auto mixed = paint(40, 40, {half, {20, 20, 24, 24}});
  check.expect(mixed.count() == 75, "mixed mask count");
  check.expect(voc_loc(mixed, {gt}) == std::optional<double>(0.4), "50/(25+100) != 0.4");
  check.expect(!voc_loc(mixed, {}).has_value(), "no box gave a value");

  // Aggregation.
  EvalRecord hit, top5_only;
  hit.top1_hit = hit.top5_hit = true;
  top5_only.top5_hit = true;
  const auto s = aggregate({hit, top5_only}, {});
  check.expect(s.top1_error == 50.0 && s.top5_error == 0.0, "2-image errors");
  EvalRecord v1, v2, v3;
  v1.voc_loc = {{1, 1.0}};
  v2.voc_loc = {{1, 0.4}};
  v3.voc_loc = {{1, 0.0}};
  const auto m = aggregate({v1, v2, v3}, {});
  check.expect(m.mean_voc_loc.has_value() && std::abs(*m.mean_voc_loc - 1.4 / 3.0) < 1e-15, "voc mean");
  check.expect(report_json(m).find("\"mean_voc_loc\": 0.466667,") != std::string::npos,
               "voc mean not serialized as 0.466667");
  return report("metric fixtures", check, "iou, top-k (IoU 0.5 is a miss), voc_loc, aggregate");
}

std::optional<Error> decode_error(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_tensor(bytes);
  } catch (const Error& e) {
    return e;
  }
  return std::nullopt;
}

bool format_conformance() {
  Check check;
  testing::TempDir dir("msrd-format");
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<std::uint32_t> side(1, 64), chans(1, 8), bits;
  std::size_t floats = 0;
  for (int n = 0; n < kRoundTripTensors; ++n) {
    Shape shape = n % 2 ? Shape{chans(rng), side(rng), side(rng)} : Shape{side(rng), side(rng)};
    std::size_t count = 1;
    for (auto d : shape) count *= d;
    std::vector<float> data(count);
    for (auto& v : data) {
      // Arbitrary finite bit patterns, including subnormals and -0.
      do v = std::bit_cast<float>(bits(rng)); while (!std::isfinite(v));
    }
    floats += count;
    const Tensor t(shape, data);
    const auto path = dir / ("t" + std::to_string(n) + ".msrd");
    write_tensor(t, path);
    check.expect(bit_identical(read_tensor(path), t), "tensor " + std::to_string(n) + " round trip");
    const auto file = testing::read_bytes(path);
    check.expect(file == encode_tensor(t) && file == encode_tensor(read_tensor(path)),
                 "tensor " + std::to_string(n) + " encoding not canonical");
    check.expect(file.size() == 7 + 4 * shape.size() + 4 * count, "tensor " + std::to_string(n) + " size");
  }

  // Minimal container, spelled out byte by byte.
  const std::vector<std::uint8_t> one = {'M', 'S', 'R', 'D', 1, 1, 2, 1, 0, 0, 0, 1, 0, 0, 0, 0x00, 0x00, 0x80, 0x3F};
  check.expect(encode_tensor(Tensor({1, 1}, {1.0f})) == one, "[1,1] encoding bytes");
  const auto two_by_three = encode_tensor(Tensor({2, 3}));
  check.expect(two_by_three[7] == 2 && two_by_three[11] == 3, "dims not outermost first");

  auto expect_error = [&](const std::string& name, std::vector<std::uint8_t> bytes, ErrorCode code,
                          std::optional<std::uint64_t> offset) {
    const auto e = decode_error(bytes);
    check.expect(e.has_value() && e->code() == code && (!offset || e->byte_offset() == offset), name);
  };
  for (std::size_t i = 0; i < 4; ++i) {
    auto bad = one;
    bad[i] ^= 0x20;
    expect_error("magic byte " + std::to_string(i), bad, ErrorCode::kFormat, i);
  }
  auto bad = one;
  bad[4] = 2;
  expect_error("version", bad, ErrorCode::kFormat, 4);
  bad = one;
  bad[5] = 0;
  expect_error("dtype", bad, ErrorCode::kFormat, 5);
  bad = one;
  bad[6] = 4;
  expect_error("rank", bad, ErrorCode::kFormat, 6);
  bad = one;
  bad[11] = 0;
  expect_error("zero dim", bad, ErrorCode::kFormat, 11);
  expect_error("short header", {'M', 'S', 'R', 'D', 1}, ErrorCode::kTruncation, std::nullopt);
  expect_error("empty file", {}, ErrorCode::kTruncation, std::nullopt);
  auto short_payload = encode_tensor(Tensor({2, 2}));
  short_payload.resize(short_payload.size() - 4);
  expect_error("[2,2] with 3 floats", short_payload, ErrorCode::kTruncation, std::nullopt);
  auto trailing = one;
  trailing.push_back(0);
  expect_error("trailing byte", trailing, ErrorCode::kTruncation, std::nullopt);
  auto nan = one;
  nan[17] = 0xC0;
  nan[18] = 0x7F;
  expect_error("NaN payload", nan, ErrorCode::kValidation, 15);

  return report("format conformance", check,
                std::to_string(kRoundTripTensors) + " tensors (" + std::to_string(floats) +
                    " floats) bit-exact; canonical encoding; error taxonomy");
}

}  // namespace

int main() {
  set_warning_sink({});
  using Criterion = bool (*)();
  const Criterion criteria[] = {local_maxima_oracle, connected_components_oracle, weight_consistency,
                                scale_invariance,    end_to_end,                  metric_fixtures,
                                format_conformance};
  int failed = 0;
  for (auto criterion : criteria) {
    try {
      failed += !criterion();
    } catch (const std::exception& e) {
      std::printf("FAIL (exception) %s\n", e.what());
      ++failed;
    }
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}

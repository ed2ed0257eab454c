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

#include "msrd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "msrd/error.hpp"
#include "msrd/tensor_io.hpp"

namespace msrd {

namespace {

// Distributions are written out by hand: the std:: ones are
// implementation-defined, and fixtures must be identical across toolchains.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint32_t below(std::uint32_t n) { return static_cast<std::uint32_t>(uniform() * n); }
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(static_cast<std::uint32_t>(i))]);
  }

 private:
  std::mt19937_64 engine_;
};

// Half-width of a unit Gaussian at 0.2 of its peak, in units of sigma.
const double kEdgeSigmas = std::sqrt(2.0 * std::log(5.0));

struct Placement {
  double x0, y0, w, h;
  double scale;
};

// Objects keep a gap that grows with their size so their responses stay
// distinct components after thresholding.
bool separated(const Placement& a, const Placement& b, double min_gap, double gap_ratio) {
  const double gap = min_gap + gap_ratio * 0.5 * (std::max(a.w, a.h) + std::max(b.w, b.h));
  return a.x0 + a.w + gap <= b.x0 || b.x0 + b.w + gap <= a.x0 || a.y0 + a.h + gap <= b.y0 ||
         b.y0 + b.h + gap <= a.y0;
}

std::vector<Placement> place_objects(const SynthSpec& spec, Stream& rng) {
  const double W = spec.image_width, H = spec.image_height;
  const auto wanted = spec.min_objects + rng.below(spec.max_objects - spec.min_objects + 1);
  const double min_gap = 0.05 * std::min(W, H);
  std::vector<Placement> out;
  for (int attempt = 0; attempt < 200 && out.size() < wanted; ++attempt) {
    const double scale = rng.uniform(spec.min_scale, spec.max_scale);
    const double aspect = std::exp(rng.uniform(-std::log(1.5), std::log(1.5)));
    const double area = scale * W * H;
    const double w = std::min(W, std::sqrt(area * aspect));
    const double h = std::min(H, area / w);
    Placement p{rng.uniform(0.0, W - w), rng.uniform(0.0, H - h), w, h, 0.0};
    if (std::all_of(out.begin(), out.end(), [&](const Placement& q) { return separated(p, q, min_gap, spec.separation); })) {
      out.push_back(p);
    }
  }
  return out;
}

BoundingBox to_box(const Placement& p, std::uint32_t W, std::uint32_t H) {
  auto clampi = [](double v, std::uint32_t hi) { return static_cast<std::int32_t>(std::clamp(v, 0.0, hi - 1.0)); };
  BoundingBox b{clampi(std::round(p.x0), W), clampi(std::round(p.y0), H), clampi(std::round(p.x0 + p.w) - 1, W),
                clampi(std::round(p.y0 + p.h) - 1, H)};
  return b;
}

}  // namespace

void SynthSpec::validate() const {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::kInvalidArgument, "synth: " + m); };
  if (n_images == 0) bad("n_images must be >= 1");
  if (image_width == 0 || image_height == 0) bad("image size must be positive");
  if (layers.empty()) bad("at least one layer is required");
  for (const auto& l : layers) {
    if (l.grid == 0 || l.channels == 0) bad("layer " + l.name + " needs a positive grid and channel count");
    if (image_width % l.grid || image_height % l.grid) bad("grid of " + l.name + " must divide the image size");
  }
  if (min_objects == 0 || min_objects > max_objects) bad("object count range must satisfy 1 <= min <= max");
  if (!(min_scale > 0.0f && min_scale <= max_scale && max_scale < 1.0f)) bad("scales must satisfy 0 < min <= max < 1");
  if (!(noise >= 0.0f) || !(gradient_gain > 0.0f)) bad("noise must be >= 0 and gradient_gain > 0");
  if (num_classes < 5) bad("num_classes must be >= 5");
}

std::vector<SynthImage> synthesize(const SynthSpec& spec) {
  spec.validate();
  Stream rng(spec.seed);
  std::vector<SynthImage> images;
  images.reserve(spec.n_images);
  const double W = spec.image_width, H = spec.image_height;

  for (std::uint32_t n = 0; n < spec.n_images; ++n) {
    SynthImage img;
    char id[32];
    std::snprintf(id, sizeof id, "synth_%06u", n);
    auto& s = img.sample;
    s.image_id = id;
    s.image_width = spec.image_width;
    s.image_height = spec.image_height;

    const auto label = static_cast<std::int32_t>(rng.below(spec.num_classes));
    s.true_labels = {label};
    s.predicted_classes = {label};
    while (s.predicted_classes.size() < 5) {
      const auto c = static_cast<std::int32_t>(rng.below(spec.num_classes));
      if (std::find(s.predicted_classes.begin(), s.predicted_classes.end(), c) == s.predicted_classes.end()) {
        s.predicted_classes.push_back(c);
      }
    }

    auto placements = place_objects(spec, rng);
    const std::uint32_t K = spec.layers.front().channels;
    // Channel subsets: a shuffled round-robin guarantees every channel carries
    // some object, then each object picks up extra channels at random.
    std::vector<std::uint32_t> order(K);
    std::iota(order.begin(), order.end(), 0u);
    rng.shuffle(order);
    std::vector<std::vector<bool>> owns(placements.size(), std::vector<bool>(K, false));
    for (std::uint32_t c = 0; c < K; ++c) owns[c % placements.size()][order[c]] = true;
    for (auto& o : owns) {
      for (std::uint32_t c = 0; c < K; ++c) o[c] = o[c] || rng.uniform() < 0.25;
    }

    for (std::size_t o = 0; o < placements.size(); ++o) {
      PlantedObject obj;
      obj.box = to_box(placements[o], spec.image_width, spec.image_height);
      obj.scale = static_cast<double>(obj.box.area()) / (W * H);
      placements[o].scale = obj.scale;
      for (std::uint32_t c = 0; c < K; ++c) {
        if (owns[o][c]) obj.channels.push_back(c);
      }
      s.gt_boxes.push_back({label, obj.box});
      img.objects.push_back(std::move(obj));
    }

    const double scale_span = std::max(1e-9, static_cast<double>(spec.max_scale - spec.min_scale));
    for (const auto& layer : spec.layers) {
      const std::uint32_t G = layer.grid, C = layer.channels;
      const double cell_x = W / G, cell_y = H / G;
      Tensor act({C, G, G});
      for (auto& v : act.mutable_data()) v = static_cast<float>(spec.noise * rng.uniform());
      for (std::size_t o = 0; o < placements.size(); ++o) {
        const auto& p = placements[o];
        const double smallness = std::clamp((spec.max_scale - p.scale) / scale_span, 0.0, 1.0);
        const double amplitude = std::max(0.05, 1.0 + layer.small_object_gain * smallness);
        const double blur_x = layer.blur_cells * cell_x, blur_y = layer.blur_cells * cell_y;
        const double sx = std::hypot(p.w / (2.0 * kEdgeSigmas), blur_x);
        const double sy = std::hypot(p.h / (2.0 * kEdgeSigmas), blur_y);
        const double cx = p.x0 + p.w / 2.0, cy = p.y0 + p.h / 2.0;
        for (std::uint32_t c = 0; c < C; ++c) {
          if (!owns[o][c % K]) continue;
          for (std::uint32_t i = 0; i < G; ++i) {
            const double dy = ((i + 0.5) * cell_y - cy) / sy;
            for (std::uint32_t j = 0; j < G; ++j) {
              const double dx = ((j + 0.5) * cell_x - cx) / sx;
              act.at(c, i, j) += static_cast<float>(amplitude * std::exp(-0.5 * (dx * dx + dy * dy)));
            }
          }
        }
      }
      Tensor grad({C, G, G});
      const auto a = act.data();
      auto g = grad.mutable_data();
      for (std::size_t q = 0; q < a.size(); ++q) {
        g[q] = static_cast<float>(spec.gradient_gain * (a[q] + 0.5 * spec.noise * rng.normal()));
      }
      img.layers.push_back({std::move(act), std::move(grad)});
    }

    nlohmann::json meta = {{"generator", "msrd synth"}, {"score_convention", "synthetic"}, {"seed", spec.seed}};
    nlohmann::json objects = nlohmann::json::array();
    for (const auto& obj : img.objects) objects.push_back({{"scale", obj.scale}, {"channels", obj.channels}});
    meta["objects"] = std::move(objects);
    s.meta_json = meta.dump();
    images.push_back(std::move(img));
  }
  return images;
}

SynthResult generate(const SynthSpec& spec, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  auto images = synthesize(spec);
  std::error_code ec;
  fs::create_directories(out_dir / "tensors", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + (out_dir / "tensors").string() + ": " + ec.message());

  SynthResult result;
  std::vector<SampleManifest> samples;
  for (auto& img : images) {
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
      const auto& name = spec.layers[l].name;
      const fs::path act = out_dir / "tensors" / (img.sample.image_id + "." + name + ".act.msrd");
      const fs::path grad = out_dir / "tensors" / (img.sample.image_id + "." + name + ".grad.msrd");
      write_tensor(img.layers[l].activations, act);
      write_tensor(img.layers[l].gradients, grad);
      img.sample.layers[name] = LayerFiles{act, grad, {}};
    }
    img.layers.clear();
    samples.push_back(img.sample);
  }
  result.manifest_path = out_dir / "manifest.json";
  std::ofstream out(result.manifest_path, std::ios::binary | std::ios::trunc);
  out << serialize_manifest(samples, out_dir);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + result.manifest_path.string());
  result.images = std::move(images);
  return result;
}

}  // namespace msrd

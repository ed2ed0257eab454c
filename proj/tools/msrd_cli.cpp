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

// msrd command-line tool. Exit codes: 0 ok, 1 runtime or data error, 2 usage.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "msrd/msrd.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Thrown on a failing library call; carries the message to print.
struct Failure {
  std::string message;
  bool usage = false;
};

void check(msrd_status s, const std::string& context = {}) {
  if (s == MSRD_OK) return;
  std::string msg = msrd_last_error();
  if (!context.empty()) msg = context + ": " + msg;
  throw Failure{msg};
}

// Flag values rejected by the library are usage errors.
void check_flag(msrd_status s, const std::string& flag) {
  if (s == MSRD_OK) return;
  throw Failure{flag + ": " + msrd_last_error(), true};
}

template <typename T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using TensorPtr = std::unique_ptr<msrd_tensor, Deleter<msrd_tensor, msrd_tensor_destroy>>;
using ManifestPtr = std::unique_ptr<msrd_manifest, Deleter<msrd_manifest, msrd_manifest_destroy>>;
using ConfigPtr = std::unique_ptr<msrd_config, Deleter<msrd_config, msrd_config_destroy>>;
using ReportPtr = std::unique_ptr<msrd_report, Deleter<msrd_report, msrd_report_destroy>>;

struct RunFlags {
  std::string manifest;
  std::string layers = "conv4,conv5";
  uint32_t window = 3;
  uint32_t stride = 1;
  float min_grad = 0.0f;
  float tau = 0.2f;
  std::string mode = "largest";
  float delta = 0.25f;
  bool fuse_raw = false;
  uint32_t workers = 1;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool segmentation, bool metric) {
  cmd->add_option("--manifest", f.manifest, "Manifest JSON")->required()->check(CLI::ExistingFile);
  cmd->add_option("--layers", f.layers, "Comma-separated layers, fused in order")->capture_default_str();
  cmd->add_option("--window", f.window, "Local-maximum window (odd)")->capture_default_str();
  cmd->add_option("--stride", f.stride, "Visit stride")->capture_default_str();
  cmd->add_option("--min-grad", f.min_grad, "Local maxima must exceed this value")->capture_default_str();
  cmd->add_flag("--fuse-raw", f.fuse_raw, "Sum layer maps without normalizing each first");
  if (segmentation) {
    cmd->add_option("--tau", f.tau, "Segmentation threshold, fraction of the map max")->capture_default_str();
    cmd->add_option("--mode", f.mode, "Box selection")->check(CLI::IsMember({"largest", "all"}))->capture_default_str();
  }
  if (metric) cmd->add_option("--delta", f.delta, "Binarization threshold for the pixel metric")->capture_default_str();
  cmd->add_option("--workers", f.workers, "Worker threads")->capture_default_str();
}

ConfigPtr make_config(const RunFlags& f) {
  msrd_config* raw = nullptr;
  check(msrd_config_create(&raw));
  ConfigPtr c(raw);
  check_flag(msrd_config_set_layers(c.get(), f.layers.c_str()), "--layers");
  check_flag(msrd_config_set_window(c.get(), f.window), "--window");
  check_flag(msrd_config_set_stride(c.get(), f.stride), "--stride");
  check_flag(msrd_config_set_min_value(c.get(), f.min_grad), "--min-grad");
  check_flag(msrd_config_set_tau(c.get(), f.tau), "--tau");
  check_flag(msrd_config_set_mode(c.get(), f.mode.c_str()), "--mode");
  check_flag(msrd_config_set_delta(c.get(), f.delta), "--delta");
  check_flag(msrd_config_set_fuse_raw(c.get(), f.fuse_raw ? 1 : 0), "--fuse-raw");
  check_flag(msrd_config_set_workers(c.get(), f.workers), "--workers");
  return c;
}

ManifestPtr load_manifest(const std::string& path) {
  msrd_manifest* raw = nullptr;
  check(msrd_manifest_load(path.c_str(), &raw));
  return ManifestPtr(raw);
}

TensorPtr read_map(const fs::path& path) {
  if (!fs::exists(path)) throw Failure{"missing map file " + path.string()};
  msrd_tensor* raw = nullptr;
  check(msrd_tensor_read(path.string().c_str(), &raw));
  return TensorPtr(raw);
}

void write_map(const msrd_tensor* t, const fs::path& path) { check(msrd_tensor_write(t, path.string().c_str())); }

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure{"cannot create " + dir.string() + ": " + ec.message()};
}

std::string map_name(const std::string& id, const std::string& layer = {}) {
  return layer.empty() ? id + ".msrd" : id + "." + layer + ".msrd";
}

std::vector<std::string> config_layers(const msrd_config* c) {
  std::vector<std::string> out;
  for (size_t i = 0; i < msrd_config_layer_count(c); ++i) out.emplace_back(msrd_config_layer(c, i));
  return out;
}

bool has_prediction(const msrd_manifest* m, size_t i) {
  if (msrd_manifest_prediction_count(m, i) > 0) return true;
  std::cerr << "msrd: warning: sample " << msrd_manifest_image_id(m, i) << " has no predictions; skipped\n";
  return false;
}

// Rank-1 normalized map, read from `maps_dir` when given, otherwise computed.
TensorPtr final_map(const msrd_manifest* m, size_t i, const msrd_config* c, const std::string& maps_dir) {
  if (!maps_dir.empty()) return read_map(fs::path(maps_dir) / map_name(msrd_manifest_image_id(m, i)));
  msrd_tensor* raw = nullptr;
  check(msrd_localize(m, i, c, &raw, nullptr));
  return TensorPtr(raw);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Failure{"cannot write " + path.string()};
}

// ---- subcommands

struct SynthFlags {
  std::string out;
  msrd_synth_spec spec{};
};

int cmd_synth(const SynthFlags& f) {
  check(msrd_synth_generate(&f.spec, f.out.c_str()));
  std::cout << (fs::path(f.out) / "manifest.json").string() << "\n";
  return 0;
}

int cmd_locmap(const RunFlags& rf, const std::string& out) {
  auto c = make_config(rf);
  auto m = load_manifest(rf.manifest);
  make_dir(out);
  const auto layers = config_layers(c.get());
  for (size_t i = 0; i < msrd_manifest_size(m.get()); ++i) {
    if (!has_prediction(m.get(), i)) continue;
    const std::string id = msrd_manifest_image_id(m.get(), i);
    msrd_tensor* fin = nullptr;
    std::vector<msrd_tensor*> per_layer(layers.size(), nullptr);
    check(msrd_localize(m.get(), i, c.get(), &fin, per_layer.data()));
    TensorPtr final_ptr(fin);
    std::vector<TensorPtr> owned;
    for (auto* t : per_layer) owned.emplace_back(t);
    write_map(final_ptr.get(), fs::path(out) / map_name(id));
    if (layers.size() > 1) {
      for (size_t l = 0; l < layers.size(); ++l) write_map(owned[l].get(), fs::path(out) / map_name(id, layers[l]));
    }
  }
  return 0;
}

int cmd_fuse(const RunFlags& rf, const std::string& maps_dir, const std::string& out) {
  auto c = make_config(rf);
  auto m = load_manifest(rf.manifest);
  make_dir(out);
  const auto layers = config_layers(c.get());
  for (size_t i = 0; i < msrd_manifest_size(m.get()); ++i) {
    if (!has_prediction(m.get(), i)) continue;
    const std::string id = msrd_manifest_image_id(m.get(), i);
    std::vector<TensorPtr> inputs;
    std::vector<const msrd_tensor*> views;
    for (const auto& layer : layers) {
      inputs.push_back(read_map(fs::path(maps_dir) / map_name(id, layer)));
      views.push_back(inputs.back().get());
    }
    msrd_tensor* fused = nullptr;
    check(msrd_fuse_maps(views.data(), views.size(), c.get(), &fused), "sample " + id);
    TensorPtr fused_ptr(fused);
    write_map(fused_ptr.get(), fs::path(out) / map_name(id));
  }
  return 0;
}

int cmd_boxes(const RunFlags& rf, const std::string& maps_dir, const std::string& out) {
  auto c = make_config(rf);
  auto m = load_manifest(rf.manifest);
  nlohmann::json doc = nlohmann::json::array();
  for (size_t i = 0; i < msrd_manifest_size(m.get()); ++i) {
    if (!has_prediction(m.get(), i)) continue;
    const std::string id = msrd_manifest_image_id(m.get(), i);
    uint32_t w = 0, h = 0;
    int32_t cls = 0;
    check(msrd_manifest_image_size(m.get(), i, &w, &h));
    check(msrd_manifest_prediction(m.get(), i, 0, &cls));
    auto map = final_map(m.get(), i, c.get(), maps_dir);
    size_t count = 0;
    check(msrd_boxes_from_map(map.get(), c.get(), w, h, nullptr, 0, &count), "sample " + id);
    std::vector<msrd_box> boxes(count);
    check(msrd_boxes_from_map(map.get(), c.get(), w, h, boxes.data(), boxes.size(), &count), "sample " + id);
    nlohmann::json list = nlohmann::json::array();
    for (const auto& b : boxes) {
      list.push_back({{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max}, {"y_max", b.y_max}});
    }
    doc.push_back({{"image_id", id}, {"class", cls}, {"boxes", std::move(list)}});
  }
  write_text(out, doc.dump(2) + "\n");
  return 0;
}

int cmd_eval(const RunFlags& rf, const std::string& maps_dir, const std::string& out) {
  auto c = make_config(rf);
  auto m = load_manifest(rf.manifest);
  msrd_report* raw = nullptr;
  check(msrd_evaluate(m.get(), c.get(), maps_dir.empty() ? nullptr : maps_dir.c_str(), &raw));
  ReportPtr report(raw);
  if (out.empty()) {
    std::cout << msrd_report_json(report.get());
  } else {
    write_text(out, msrd_report_json(report.get()));
    std::cout << msrd_report_table(report.get());
  }
  return 0;
}

struct HeatmapFlags {
  std::string map;
  uint32_t width = 0;
  uint32_t height = 0;
  std::string maps_dir;
  std::string out;
};

int cmd_heatmap(const RunFlags& rf, const HeatmapFlags& f) {
  if (!f.map.empty()) {
    if (f.width == 0 || f.height == 0) throw Failure{"--map needs --width and --height", true};
    auto map = read_map(f.map);
    check(msrd_heatmap_write(map.get(), f.width, f.height, f.out.c_str()));
    return 0;
  }
  if (rf.manifest.empty()) throw Failure{"heatmap needs --map or --manifest", true};
  auto c = make_config(rf);
  auto m = load_manifest(rf.manifest);
  make_dir(f.out);
  for (size_t i = 0; i < msrd_manifest_size(m.get()); ++i) {
    if (!has_prediction(m.get(), i)) continue;
    const std::string id = msrd_manifest_image_id(m.get(), i);
    uint32_t w = 0, h = 0;
    check(msrd_manifest_image_size(m.get(), i, &w, &h));
    auto map = final_map(m.get(), i, c.get(), f.maps_dir);
    check(msrd_heatmap_write(map.get(), w, h, (fs::path(f.out) / (id + ".pgm")).string().c_str()));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-scale discriminative region discovery for weakly-supervised localization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", msrd_version());

  SynthFlags sf;
  msrd_synth_spec_defaults(&sf.spec);
  auto* synth = app.add_subcommand("synth", "Generate synthetic activation/gradient fixtures");
  synth->add_option("--out", sf.out, "Output directory")->required();
  synth->add_option("--images", sf.spec.n_images, "Number of images")->capture_default_str();
  synth->add_option("--seed", sf.spec.seed, "Random seed")->capture_default_str();
  synth->add_option("--width", sf.spec.image_width, "Image width")->capture_default_str();
  synth->add_option("--height", sf.spec.image_height, "Image height")->capture_default_str();
  synth->add_option("--min-objects", sf.spec.min_objects, "Fewest objects per image")->capture_default_str();
  synth->add_option("--max-objects", sf.spec.max_objects, "Most objects per image")->capture_default_str();
  synth->add_option("--min-scale", sf.spec.min_scale, "Smallest object area fraction")->capture_default_str();
  synth->add_option("--max-scale", sf.spec.max_scale, "Largest object area fraction")->capture_default_str();
  synth->add_option("--noise", sf.spec.noise, "Background noise amplitude")->capture_default_str();

  RunFlags lf;
  std::string locmap_out;
  auto* locmap = app.add_subcommand("locmap", "Write localization maps for the top-1 class");
  add_run_flags(locmap, lf, false, false);
  locmap->add_option("--out", locmap_out, "Output directory")->required();

  RunFlags ff;
  std::string fuse_maps, fuse_out;
  auto* fuse = app.add_subcommand("fuse", "Fuse per-layer maps written by locmap");
  add_run_flags(fuse, ff, false, false);
  fuse->add_option("--maps", fuse_maps, "Directory with <id>.<layer>.msrd maps")->required()->check(CLI::ExistingDirectory);
  fuse->add_option("--out", fuse_out, "Output directory")->required();

  RunFlags bf;
  std::string boxes_maps, boxes_out;
  auto* boxes = app.add_subcommand("boxes", "Boxes for the top-1 class as JSON");
  add_run_flags(boxes, bf, true, false);
  boxes->add_option("--maps", boxes_maps, "Read <id>.msrd maps instead of computing them")->check(CLI::ExistingDirectory);
  boxes->add_option("--out", boxes_out, "Output JSON file")->required();

  RunFlags ef;
  std::string eval_maps, eval_out;
  auto* eval = app.add_subcommand("eval", "Localization error and pixel-ratio metric report");
  add_run_flags(eval, ef, true, true);
  eval->add_option("--maps", eval_maps, "Read top-1 <id>.msrd maps instead of computing them")->check(CLI::ExistingDirectory);
  eval->add_option("--out", eval_out, "Write the JSON report here and print a table (default: JSON to stdout)");

  RunFlags hf;
  HeatmapFlags hm;
  auto* heatmap = app.add_subcommand("heatmap", "8-bit PGM heatmaps at image size");
  heatmap->add_option("--manifest", hf.manifest, "Manifest JSON")->check(CLI::ExistingFile);
  heatmap->add_option("--layers", hf.layers, "Comma-separated layers")->capture_default_str();
  heatmap->add_option("--window", hf.window, "Local-maximum window (odd)")->capture_default_str();
  heatmap->add_option("--stride", hf.stride, "Visit stride")->capture_default_str();
  heatmap->add_option("--min-grad", hf.min_grad, "Local maxima must exceed this value")->capture_default_str();
  heatmap->add_flag("--fuse-raw", hf.fuse_raw, "Sum layer maps without normalizing each first");
  heatmap->add_option("--workers", hf.workers, "Worker threads")->capture_default_str();
  heatmap->add_option("--maps", hm.maps_dir, "Read <id>.msrd maps instead of computing them")->check(CLI::ExistingDirectory);
  auto* single = heatmap->add_option("--map", hm.map, "Single map file")->check(CLI::ExistingFile);
  heatmap->add_option("--width", hm.width, "Output width for --map")->needs(single);
  heatmap->add_option("--height", hm.height, "Output height for --map")->needs(single);
  heatmap->add_option("--out", hm.out, "Output .pgm file for --map, directory otherwise")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << sub->help();
    return kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(sf);
    if (*locmap) return cmd_locmap(lf, locmap_out);
    if (*fuse) return cmd_fuse(ff, fuse_maps, fuse_out);
    if (*boxes) return cmd_boxes(bf, boxes_maps, boxes_out);
    if (*eval) return cmd_eval(ef, eval_maps, eval_out);
    if (*heatmap) return cmd_heatmap(hf, hm);
  } catch (const Failure& f) {
    std::cerr << "msrd: error: " << f.message << "\n";
    return f.usage ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "msrd: error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

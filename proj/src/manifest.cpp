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

#include "msrd/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "msrd/error.hpp"
#include "msrd/tensor_io.hpp"

namespace msrd {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class SampleParser {
 public:
  SampleParser(const json& obj, std::size_t index, const fs::path& base) : obj_(obj), index_(index), base_(base) {}

  SampleManifest parse() {
    if (!obj_.is_object()) fail_schema("sample is not a JSON object");
    SampleManifest s;
    s.image_id = require(obj_, "image_id", json::value_t::string).get<std::string>();
    id_ = s.image_id;
    s.image_width = positive(obj_, "image_width");
    s.image_height = positive(obj_, "image_height");
    s.true_labels = int_list(obj_, "true_labels");
    s.predicted_classes = int_list(obj_, "predicted_classes");
    if (s.predicted_classes.size() > 5) fail_schema("'predicted_classes' holds more than 5 entries");

    const auto& boxes = require(obj_, "gt_boxes", json::value_t::array);
    for (std::size_t b = 0; b < boxes.size(); ++b) {
      const auto& jb = boxes[b];
      if (!jb.is_object()) fail_schema("gt_boxes[" + std::to_string(b) + "] is not an object");
      GroundTruthBox gt;
      gt.class_index = integer(jb, "class");
      gt.box = {integer(jb, "x_min"), integer(jb, "y_min"), integer(jb, "x_max"), integer(jb, "y_max")};
      if (!gt.box.inside(s.image_width, s.image_height)) {
        throw Error(ErrorCode::kValidation, prefix() + "gt_boxes[" + std::to_string(b) +
                                                "] violates 0 <= min <= max < image size (" +
                                                std::to_string(s.image_width) + "x" +
                                                std::to_string(s.image_height) + ")");
      }
      s.gt_boxes.push_back(gt);
    }

    const auto& layers = require(obj_, "layers", json::value_t::object);
    for (const auto& [name, jl] : layers.items()) {
      if (!jl.is_object()) fail_schema("layers." + name + " is not an object");
      LayerFiles files;
      files.activations = resolve(require(jl, "activations", json::value_t::string, "layers." + name + "."));
      files.gradients = resolve(require(jl, "gradients", json::value_t::string, "layers." + name + "."));
      if (auto it = jl.find("class_gradients"); it != jl.end()) {
        if (!it->is_object()) fail_schema("layers." + name + ".class_gradients is not an object");
        for (const auto& [cls, path] : it->items()) {
          if (!path.is_string()) fail_schema("layers." + name + ".class_gradients." + cls + " is not a string");
          std::int32_t c = 0;
          try {
            std::size_t used = 0;
            c = std::stoi(cls, &used);
            if (used != cls.size()) throw std::invalid_argument(cls);
          } catch (const std::exception&) {
            fail_schema("layers." + name + ".class_gradients key '" + cls + "' is not a class index");
          }
          files.class_gradients[c] = resolve(path);
        }
      }
      s.layers.emplace(name, std::move(files));
    }
    if (auto it = obj_.find("meta"); it != obj_.end()) {
      if (!it->is_object()) fail_schema("'meta' is not an object");
      s.meta_json = it->dump();
    }
    return s;
  }

 private:
  [[noreturn]] void fail_schema(const std::string& msg) const { throw Error(ErrorCode::kSchema, prefix() + msg); }

  std::string prefix() const {
    return "manifest sample " + std::to_string(index_) + (id_.empty() ? "" : " (" + id_ + ")") + ": ";
  }

  const json& require(const json& o, const char* key, json::value_t type, const std::string& ctx = "") const {
    auto it = o.find(key);
    if (it == o.end()) fail_schema("missing required field '" + ctx + key + "'");
    const bool ok = type == json::value_t::number_integer ? it->is_number_integer() : it->type() == type;
    if (!ok) fail_schema("field '" + ctx + key + "' has the wrong type");
    return *it;
  }

  std::int32_t integer(const json& o, const char* key) const {
    return require(o, key, json::value_t::number_integer).get<std::int32_t>();
  }

  std::uint32_t positive(const json& o, const char* key) const {
    const auto v = require(o, key, json::value_t::number_integer).get<std::int64_t>();
    if (v <= 0 || v > 1'000'000) fail_schema("field '" + std::string(key) + "' must be a positive pixel count");
    return static_cast<std::uint32_t>(v);
  }

  std::vector<std::int32_t> int_list(const json& o, const char* key) const {
    const auto& arr = require(o, key, json::value_t::array);
    std::vector<std::int32_t> out;
    for (const auto& v : arr) {
      if (!v.is_number_integer()) fail_schema("field '" + std::string(key) + "' must hold integers");
      out.push_back(v.get<std::int32_t>());
    }
    return out;
  }

  fs::path resolve(const json& v) const {
    fs::path p = v.get<std::string>();
    return p.is_absolute() ? p : base_ / p;
  }

  const json& obj_;
  std::size_t index_;
  const fs::path& base_;
  std::string id_;
};

void check_sample_tensors(const SampleManifest& s, std::size_t index) {
  const std::string prefix = "manifest sample " + std::to_string(index) + " (" + s.image_id + "): ";
  for (const auto& [name, files] : s.layers) {
    auto shape_of = [&](const fs::path& p) {
      if (!fs::exists(p)) throw Error(ErrorCode::kIo, prefix + "missing tensor file " + p.string());
      auto shape = read_tensor_shape(p);
      if (shape.size() != 3) {
        throw Error(ErrorCode::kShape, prefix + "layer " + name + " tensor " + p.string() + " must be K x H x W");
      }
      return shape;
    };
    const auto a = shape_of(files.activations);
    const auto g = shape_of(files.gradients);
    if (a != g) {
      throw Error(ErrorCode::kShape, prefix + "layer " + name + " activations " + shape_string(a) +
                                         " vs gradients " + shape_string(g));
    }
    for (const auto& [cls, path] : files.class_gradients) {
      if (shape_of(path) != a) {
        throw Error(ErrorCode::kShape, prefix + "layer " + name + " class " + std::to_string(cls) +
                                           " gradients disagree with activations " + shape_string(a));
      }
    }
  }
}

std::string relative_string(const fs::path& p, const fs::path& base) {
  if (base.empty()) return p.generic_string();
  auto rel = p.lexically_relative(base);
  if (rel.empty() || *rel.begin() == "..") return p.generic_string();
  return rel.generic_string();
}

}  // namespace

std::vector<BoundingBox> SampleManifest::gt_boxes_of(std::int32_t class_index) const {
  std::vector<BoundingBox> out;
  for (const auto& gt : gt_boxes) {
    if (gt.class_index == class_index) out.push_back(gt.box);
  }
  return out;
}

bool SampleManifest::has_label(std::int32_t class_index) const {
  return std::find(true_labels.begin(), true_labels.end(), class_index) != true_labels.end();
}

std::optional<fs::path> SampleManifest::gradients_for(const std::string& layer, std::int32_t class_index) const {
  auto it = layers.find(layer);
  if (it == layers.end()) return std::nullopt;
  if (auto c = it->second.class_gradients.find(class_index); c != it->second.class_gradients.end()) return c->second;
  if (!predicted_classes.empty() && predicted_classes.front() == class_index) return it->second.gradients;
  return std::nullopt;
}

std::vector<SampleManifest> parse_manifest(const std::string& json_text, const fs::path& base_dir,
                                           const ManifestOptions& options) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchema, std::string("manifest is not valid JSON: ") + e.what(), e.byte);
  }
  if (!doc.is_array()) throw Error(ErrorCode::kSchema, "manifest root must be a JSON array");
  std::vector<SampleManifest> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    out.push_back(SampleParser(doc[i], i, base_dir).parse());
    if (options.check_tensors) check_sample_tensors(out.back(), i);
  }
  return out;
}

std::vector<SampleManifest> read_manifest(const fs::path& path, const ManifestOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.parent_path(), options);
}

std::string serialize_manifest(const std::vector<SampleManifest>& samples, const fs::path& base_dir) {
  json doc = json::array();
  for (const auto& s : samples) {
    json o;
    o["image_id"] = s.image_id;
    o["image_width"] = s.image_width;
    o["image_height"] = s.image_height;
    o["true_labels"] = s.true_labels;
    o["predicted_classes"] = s.predicted_classes;
    json boxes = json::array();
    for (const auto& gt : s.gt_boxes) {
      boxes.push_back({{"class", gt.class_index},
                       {"x_min", gt.box.x_min},
                       {"y_min", gt.box.y_min},
                       {"x_max", gt.box.x_max},
                       {"y_max", gt.box.y_max}});
    }
    o["gt_boxes"] = std::move(boxes);
    json layers = json::object();
    for (const auto& [name, files] : s.layers) {
      json l = {{"activations", relative_string(files.activations, base_dir)},
                {"gradients", relative_string(files.gradients, base_dir)}};
      if (!files.class_gradients.empty()) {
        json cg = json::object();
        for (const auto& [cls, p] : files.class_gradients) cg[std::to_string(cls)] = relative_string(p, base_dir);
        l["class_gradients"] = std::move(cg);
      }
      layers[name] = std::move(l);
    }
    o["layers"] = std::move(layers);
    if (s.meta_json != "{}") o["meta"] = json::parse(s.meta_json);
    doc.push_back(std::move(o));
  }
  return doc.dump(2) + "\n";
}

}  // namespace msrd

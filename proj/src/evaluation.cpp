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

#include "msrd/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "msrd/error.hpp"

namespace msrd {

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

double iou(const BoundingBox& a, const BoundingBox& b) {
  const std::int64_t ix = std::min<std::int64_t>(a.x_max, b.x_max) - std::max<std::int64_t>(a.x_min, b.x_min) + 1;
  const std::int64_t iy = std::min<std::int64_t>(a.y_max, b.y_max) - std::max<std::int64_t>(a.y_min, b.y_min) + 1;
  if (ix <= 0 || iy <= 0) return 0.0;
  const std::int64_t inter = ix * iy;
  return static_cast<double>(inter) / static_cast<double>(a.area() + b.area() - inter);
}

std::optional<bool> topk_localization(const SampleManifest& sample, const BoxesByClass& boxes, std::size_t k) {
  if (sample.predicted_classes.empty()) return std::nullopt;
  const std::size_t ranks = std::min(k, sample.predicted_classes.size());
  for (std::size_t r = 0; r < ranks; ++r) {
    const auto cls = sample.predicted_classes[r];
    if (!sample.has_label(cls)) continue;
    auto it = boxes.find(cls);
    if (it == boxes.end()) continue;
    for (const auto& gt : sample.gt_boxes_of(cls)) {
      for (const auto& b : it->second) {
        if (iou(b, gt) > kIouThreshold) return true;
      }
    }
  }
  return false;
}

std::optional<double> voc_loc(const Mask& mask, const std::vector<BoundingBox>& gt_boxes) {
  if (gt_boxes.empty()) return std::nullopt;
  std::vector<std::uint8_t> in_union(mask.bits.size(), 0);
  for (const auto& b : gt_boxes) {
    const auto x0 = std::max<std::int64_t>(b.x_min, 0), x1 = std::min<std::int64_t>(b.x_max, mask.width - 1);
    const auto y0 = std::max<std::int64_t>(b.y_min, 0), y1 = std::min<std::int64_t>(b.y_max, mask.height - 1);
    for (auto y = y0; y <= y1; ++y) {
      for (auto x = x0; x <= x1; ++x) in_union[static_cast<std::size_t>(y) * mask.width + x] = 1;
    }
  }
  std::uint64_t inside = 0, outside = 0, area = 0;
  for (std::size_t p = 0; p < in_union.size(); ++p) {
    area += in_union[p];
    if (mask.bits[p]) (in_union[p] ? inside : outside) += 1;
  }
  if (area == 0) return std::nullopt;
  return static_cast<double>(inside) / static_cast<double>(outside + area);
}

EvalSummary aggregate(const std::vector<EvalRecord>& records, const EvalMeta& meta) {
  if (records.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot aggregate an empty record set");
  EvalSummary s;
  s.meta = meta;
  std::size_t top1 = 0, top5 = 0;
  double voc_sum = 0.0;
  for (const auto& r : records) {
    if (r.skipped) {
      ++s.skipped;
      continue;
    }
    ++s.n_images;
    top1 += r.top1_hit;
    top5 += r.top5_hit;
    s.top5_complete += r.top5_complete;
    for (const auto& [label, v] : r.voc_loc) {
      voc_sum += v;
      ++s.voc_pairs;
    }
  }
  if (s.n_images > 0) {
    const double n = static_cast<double>(s.n_images);
    s.top1_error = 100.0 * (1.0 - static_cast<double>(top1) / n);
    s.top5_error = 100.0 * (1.0 - static_cast<double>(top5) / n);
  }
  if (s.voc_pairs > 0) s.mean_voc_loc = voc_sum / static_cast<double>(s.voc_pairs);
  return s;
}

std::string report_json(const EvalSummary& s) {
  std::ostringstream o;
  const auto& m = s.meta;
  o << "{\n  \"meta\": {\n";
  o << "    \"delta\": " << fixed6(m.delta) << ",\n";
  o << "    \"fuse_raw\": " << (m.fuse_raw ? "true" : "false") << ",\n";
  o << "    \"layers\": [";
  for (std::size_t i = 0; i < m.layers.size(); ++i) o << (i ? ", " : "") << quoted(m.layers[i]);
  o << "],\n";
  o << "    \"min_value\": " << fixed6(m.min_value) << ",\n";
  o << "    \"mode\": " << quoted(m.mode) << ",\n";
  o << "    \"stride\": " << m.stride << ",\n";
  o << "    \"tau\": " << fixed6(m.tau) << ",\n";
  o << "    \"window\": " << m.window << "\n  },\n";
  o << "  \"n_images\": " << s.n_images << ",\n";
  o << "  \"top1_error\": " << fixed6(s.top1_error) << ",\n";
  o << "  \"top5_error\": " << fixed6(s.top5_error) << ",\n";
  o << "  \"mean_voc_loc\": " << (s.mean_voc_loc ? fixed6(*s.mean_voc_loc) : "null") << ",\n";
  o << "  \"voc_pairs\": " << s.voc_pairs << ",\n";
  o << "  \"top5_complete\": " << s.top5_complete << ",\n";
  o << "  \"skipped\": " << s.skipped << "\n}\n";
  return o.str();
}

std::string report_table(const std::vector<std::pair<std::string, EvalSummary>>& rows) {
  std::size_t name_w = 6;
  for (const auto& [name, s] : rows) name_w = std::max(name_w, name.size());
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };
  std::ostringstream o;
  o << pad("config", name_w) << " | window | top-1 error | top-5 error | VOC loc  | images\n";
  o << std::string(name_w, '-') << "-+--------+-------------+-------------+----------+-------\n";
  for (const auto& [name, s] : rows) {
    char line[160];
    std::snprintf(line, sizeof line, " | %6u | %11.2f | %11.2f | %8s | %6zu\n", s.meta.window, s.top1_error,
                  s.top5_error, s.mean_voc_loc ? fixed6(*s.mean_voc_loc).substr(0, 6).c_str() : "-", s.n_images);
    o << pad(name, name_w) << line;
  }
  return o.str();
}

}  // namespace msrd

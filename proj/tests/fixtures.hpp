// Copyright 2026 The cactusdet authors
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

// Hand-audited fixture datasets shared by the unit and acceptance suites.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "cactusdet/dataset.hpp"
#include "cactusdet/metrics.hpp"

namespace cactusdet::testing {

/// Five images, six classes, 100x100 pixels, with detections that produce
/// (at IoU .5, confidence .5, all_point):
///   per-class (tp, fp, fn): c0 (1,0,0) c1 (1,0,0) c2 (0,1,1) c3 (0,1,0)
///                           c4 (1,1,0) c5 (1,0,1)
///   aggregate precision 4/7, recall 4/6
///   AP@.5 per class: 1, 1, 0, (none: c3 has no GT), 1, 0.5 -> mAP@.5 = 0.7
///   per-threshold mAP: 0.7 for thr <= .75 (c1 overlap 0.75), 0.5 above
///   -> mAP@.5:.95 = (6*0.7 + 4*0.5)/10 = 0.62
///   confusion: diagonal (0,0),(1,1),(4,4),(5,5); cell (2,3); ghost c2,c4;
///   missed c5.
struct GoldenFixture {
  DatasetManifest manifest;
  PredictionMap predictions;
};

inline GoldenFixture golden_fixture() {
  GoldenFixture fx;
  auto add = [&](const std::string& id, std::vector<Annotation> annotations) {
    fx.manifest.records.push_back({id, id + ".jpg", 100, 100, std::move(annotations)});
  };
  add("i1", {{0, {10, 10, 30, 30}}});
  add("i2", {{1, {20, 20, 60, 60}}});
  add("i3", {{2, {0, 0, 50, 50}}});
  add("i4", {{4, {10, 10, 90, 90}}});
  add("i5", {{5, {40, 40, 80, 80}}, {5, {0, 0, 20, 20}}});

  fx.predictions["i1"] = {{0, {10, 10, 30, 30}, 0.9}};
  fx.predictions["i2"] = {{1, {20, 20, 60, 50}, 0.8}};  // IoU 0.75
  fx.predictions["i3"] = {{2, {60, 60, 90, 90}, 0.7},   // disjoint from GT -> FP/ghost
                          {3, {0, 0, 40, 40}, 0.6}};    // overlaps c2 GT at 0.64
  fx.predictions["i4"] = {{4, {10, 10, 90, 90}, 0.95},
                          {4, {12, 12, 88, 88}, 0.85}};  // second hit on a taken GT
  fx.predictions["i5"] = {{5, {40, 40, 80, 80}, 0.5}};
  return fx;
}

/// Rotates the whole golden fixture (dims, ground truth, detections) 90
/// degrees clockwise.
inline GoldenFixture golden_fixture_rotated_90() {
  GoldenFixture fx = golden_fixture();
  for (ImageRecord& record : fx.manifest.records) {
    const ImageDims dims = record.dims();
    ImageDims rotated_dims{dims.height, dims.width};
    for (Annotation& annotation : record.annotations) {
      annotation.box = rotate_box(annotation.box, 90, dims).first;
    }
    record.width = rotated_dims.width;
    record.height = rotated_dims.height;
    auto it = fx.predictions.find(record.image_id);
    if (it != fx.predictions.end()) {
      for (Detection& det : it->second) {
        det.box = rotate_box(det.box, 90, dims).first;
      }
    }
  }
  return fx;
}

/// Six classes on a coordinate grid; per-class AP@.5 of
/// {1, 1, 1, 1, 14/16, 603/625} whose mean is exactly 0.9733. Perfect
/// detections echo a prefix of each class's ground truth; the rest go
/// undetected.
inline GoldenFixture reference_map_fixture() {
  GoldenFixture fx;
  const struct {
    int gt;
    int found;
  } plan[] = {{4, 4}, {4, 4}, {4, 4}, {4, 4}, {16, 14}, {625, 603}};

  for (int c = 0; c < 6; ++c) {
    const std::string id = "grid" + std::to_string(c);
    ImageRecord record{id, id + ".jpg", 10000, 10000, {}};
    std::vector<Detection> detections;
    for (int i = 0; i < plan[c].gt; ++i) {
      const double x = 10.0 + 300.0 * (i % 32);
      const double y = 10.0 + 300.0 * (i / 32);
      const BoundingBox box{x, y, x + 200, y + 200};
      record.annotations.push_back({c, box});
      if (i < plan[c].found) {
        detections.push_back({c, box, 0.5 + 0.4 * (1.0 - static_cast<double>(i) / plan[c].gt)});
      }
    }
    fx.manifest.records.push_back(std::move(record));
    fx.predictions[id] = std::move(detections);
  }
  return fx;
}

/// One image per class; every detection overlaps its ground truth with IoU
/// exactly 70/100, so per-threshold mAP is 1 through 0.70 and 0 above:
/// mAP@.5:.95 = 0.5 exactly.
inline GoldenFixture iou_070_fixture() {
  GoldenFixture fx;
  for (int c = 0; c < 6; ++c) {
    const std::string id = "iou" + std::to_string(c);
    // GT 10x10; detection trims height to 7: intersection 70, union 100.
    fx.manifest.records.push_back({id, "", 100, 100, {{c, {20, 20, 30, 30}}}});
    fx.predictions[id] = {{c, {20, 20, 30, 27}, 0.9}};
  }
  return fx;
}

}  // namespace cactusdet::testing

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

#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cactusdet/annotations.hpp"
#include "cactusdet/dataset.hpp"

namespace cactusdet {

/// The 10 IoU thresholds 0.50, 0.55, ..., 0.95. Generated from integers so
/// a box pair whose IoU is an exact decimal (e.g. 70/100) compares equal at
/// the matching threshold.
std::array<double, 10> standard_iou_thresholds();

/// One image's ground truth paired with the detections to score against it.
struct ImageSample {
  std::string image_id;
  std::vector<Annotation> ground_truth;
  std::vector<Detection> detections;
};

/// Pairs every manifest record with its detections (empty when the map has
/// none), ordered by image_id. Throws when a prediction names an image_id
/// absent from the manifest.
using PredictionMap = std::map<std::string, std::vector<Detection>>;
std::vector<ImageSample> make_samples(const DatasetManifest& manifest,
                                      const PredictionMap& predictions);

/// Per-detection verdict after greedy matching, in descending-confidence
/// order (ties keep input order).
struct DetectionMatch {
  std::size_t detection_index = 0;  // index into the input detections
  int class_id = 0;
  double confidence = 0;
  bool is_tp = false;
  std::optional<std::size_t> ground_truth_index;
};

struct MatchOutcome {
  std::vector<DetectionMatch> detections;
  std::size_t tp_count = 0;
  std::size_t fn_count = 0;  // ground truths never matched
};

/// Greedy class-aware matching inside one image. A detection is a true
/// positive iff some unmatched same-class ground truth overlaps it with
/// IoU >= threshold; it takes the highest-IoU such ground truth (ties:
/// lowest index). Each ground truth matches at most once.
MatchOutcome match_detections(const std::vector<Annotation>& ground_truth,
                              const std::vector<Detection>& detections, double iou_threshold);

/// Match counts for one class at one operating point. tn_images is
/// image-level: images with neither ground truth nor detections of the
/// class above the confidence threshold (a box-level true negative is
/// ill-defined).
struct CountsPerClass {
  int class_id = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn_images = 0;
};

/// tp / (tp + fp); 1.0 when nothing was predicted (no chance of a false
/// alarm).
double precision(const CountsPerClass& counts);

/// tp / (tp + fn); 1.0 when there was no ground truth to find.
double recall(const CountsPerClass& counts);

struct PrPoint {
  double recall = 0;
  double precision = 0;
  double confidence = 0;  // of the detection that produced this point
};

/// Cumulative precision/recall swept over descending confidence, pooled
/// across images. recall is non-decreasing along the sweep.
struct PRCurve {
  int class_id = 0;
  double iou_threshold = 0;
  std::size_t gt_count = 0;  // recall denominator
  std::vector<PrPoint> points;
};

/// Pools the class's detections across images (order: confidence
/// descending, then image_id, then input order), matches greedily per
/// image, and emits one point per detection.
PRCurve pr_curve(const std::vector<ImageSample>& samples, int class_id, double iou_threshold);

enum class Interpolation {
  kAllPoint,  // exact area under the precision envelope
  k101Point,  // envelope sampled at recall 0, 0.01, ..., 1
};

Interpolation interpolation_from_name(std::string_view name);
std::string_view interpolation_name(Interpolation interpolation);

/// Area under the interpolated precision envelope. Returns nullopt when the
/// class has no ground truth (such classes are excluded from mAP averages);
/// 0.0 for an empty curve with ground truth present.
std::optional<double> average_precision(const PRCurve& curve, Interpolation interpolation);

/// Mean per-class AP over classes with at least one ground truth object.
/// Throws when no class has any ground truth (mAP undefined).
double map_at(const std::vector<ImageSample>& samples, const ClassTaxonomy& taxonomy,
              double iou_threshold, Interpolation interpolation = Interpolation::kAllPoint);

struct MapRange {
  double map50_95 = 0;                   // arithmetic mean of per_threshold
  std::array<double, 10> per_threshold{};
  std::array<double, 10> thresholds{};
};

MapRange map_range(const std::vector<ImageSample>& samples, const ClassTaxonomy& taxonomy,
                   Interpolation interpolation = Interpolation::kAllPoint);

/// K x K matrix of (true class, predicted class) pairs from class-agnostic
/// greedy matching at fixed confidence and IoU thresholds, plus a missed
/// column (unmatched ground truth per true class) and a ghost row
/// (unmatched detections per predicted class).
struct ConfusionMatrix {
  std::size_t num_classes = 0;
  double iou_threshold = 0;
  double confidence_threshold = 0;
  std::vector<std::vector<std::size_t>> cells;  // [true][predicted]
  std::vector<std::size_t> missed;              // per true class
  std::vector<std::size_t> ghost;               // per predicted class
};

ConfusionMatrix confusion_matrix(const std::vector<ImageSample>& samples,
                                 const ClassTaxonomy& taxonomy, double iou_threshold,
                                 double confidence_threshold);

struct MetricConfig {
  double iou_threshold = 0.5;         // operating point for counts/confusion
  double confidence_threshold = 0.5;  // detections below are dropped for counts
  Interpolation interpolation = Interpolation::kAllPoint;
};

/// Everything the evaluation produces for one prediction set.
struct EvalReport {
  struct ClassEntry {
    int class_id = 0;
    std::string name;
    std::size_t gt_count = 0;
    CountsPerClass counts;                                // at the operating point
    std::optional<double> ap50;                           // absent when gt_count == 0
    std::vector<std::optional<double>> ap_per_threshold;  // one per standard threshold
  };

  MetricConfig config;
  std::vector<ClassEntry> classes;
  double precision = 0;  // from summed per-class counts
  double recall = 0;
  double map50 = 0;
  double map50_95 = 0;
  std::array<double, 10> per_threshold{};
  std::array<double, 10> thresholds{};
  ConfusionMatrix confusion;
};

/// Runs the full evaluation: operating-point counts and aggregate
/// precision/recall, AP per class per IoU threshold, mAP@.5 and
/// mAP@.5:.95, and the confusion matrix.
EvalReport evaluate(const DatasetManifest& manifest, const PredictionMap& predictions,
                    const ClassTaxonomy& taxonomy, const MetricConfig& config = {});

/// Structured report, stable key order, suitable for byte-for-byte
/// comparison of reruns.
std::string serialize_eval_report(const EvalReport& report);

/// Flat per-class CSV (one row per class).
std::string eval_report_csv(const EvalReport& report);

/// Aligned per-class text table plus headline precision/recall/mAP lines.
std::string render_eval_report_text(const EvalReport& report);

/// Confusion matrix as CSV: one row per true class plus a ghost row; one
/// column per predicted class plus a missed column.
std::string confusion_csv(const ConfusionMatrix& matrix, const ClassTaxonomy& taxonomy);

}  // namespace cactusdet

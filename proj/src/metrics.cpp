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

#include "cactusdet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "cactusdet/error.hpp"
#include "cactusdet/version.hpp"

namespace cactusdet {

namespace {

using nlohmann::json;

void validate_threshold(double value, const char* what) {
  if (!(value > 0) || value > 1) {
    throw UsageError(std::string(what) + " must be in (0, 1], got " +
                     format_double_shortest(value));
  }
}

/// Indices of detections in descending-confidence order, ties keeping input
/// order.
std::vector<std::size_t> confidence_order(const std::vector<Detection>& detections) {
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].confidence > detections[b].confidence;
  });
  return order;
}

/// Precision envelope: envelope[i] = max precision at any point with index
/// >= i. Points are in non-decreasing recall order, so this is the usual
/// "max precision at recall >= r" interpolation.
std::vector<double> precision_envelope(const PRCurve& curve) {
  std::vector<double> envelope(curve.points.size());
  double running = 0;
  for (std::size_t i = curve.points.size(); i > 0; --i) {
    running = std::max(running, curve.points[i - 1].precision);
    envelope[i - 1] = running;
  }
  return envelope;
}

struct PooledDetection {
  double confidence;
  std::string image_id;
  std::size_t order_in_image;
  bool is_tp;
};

}  // namespace

std::array<double, 10> standard_iou_thresholds() {
  std::array<double, 10> thresholds{};
  for (int i = 0; i < 10; ++i) {
    thresholds[static_cast<std::size_t>(i)] = static_cast<double>(50 + 5 * i) / 100.0;
  }
  return thresholds;
}

std::vector<ImageSample> make_samples(const DatasetManifest& manifest,
                                      const PredictionMap& predictions) {
  std::map<std::string, const ImageRecord*> by_id;
  for (const ImageRecord& record : manifest.records) by_id[record.image_id] = &record;
  for (const auto& [image_id, dets] : predictions) {
    if (!by_id.count(image_id)) {
      throw ValidationError("predictions name unknown image_id '" + image_id + "'");
    }
  }
  std::vector<ImageSample> samples;
  samples.reserve(by_id.size());
  for (const auto& [image_id, record] : by_id) {
    ImageSample sample;
    sample.image_id = image_id;
    sample.ground_truth = record->annotations;
    const auto it = predictions.find(image_id);
    if (it != predictions.end()) sample.detections = it->second;
    samples.push_back(std::move(sample));
  }
  return samples;
}

MatchOutcome match_detections(const std::vector<Annotation>& ground_truth,
                              const std::vector<Detection>& detections, double iou_threshold) {
  validate_threshold(iou_threshold, "iou_threshold");

  MatchOutcome outcome;
  std::vector<bool> taken(ground_truth.size(), false);
  for (std::size_t index : confidence_order(detections)) {
    const Detection& det = detections[index];
    DetectionMatch match;
    match.detection_index = index;
    match.class_id = det.class_id;
    match.confidence = det.confidence;

    double best_iou = 0;
    std::optional<std::size_t> best;
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (taken[g] || ground_truth[g].class_id != det.class_id) continue;
      const double overlap = iou(det.box, ground_truth[g].box);
      if (overlap < iou_threshold) continue;
      if (!best || overlap > best_iou) {  // ties keep the lowest index
        best = g;
        best_iou = overlap;
      }
    }
    if (best) {
      taken[*best] = true;
      match.is_tp = true;
      match.ground_truth_index = best;
      ++outcome.tp_count;
    }
    outcome.detections.push_back(std::move(match));
  }
  outcome.fn_count = ground_truth.size() - outcome.tp_count;
  return outcome;
}

double precision(const CountsPerClass& counts) {
  const std::size_t predicted = counts.tp + counts.fp;
  if (predicted == 0) return 1.0;
  return static_cast<double>(counts.tp) / static_cast<double>(predicted);
}

double recall(const CountsPerClass& counts) {
  const std::size_t actual = counts.tp + counts.fn;
  if (actual == 0) return 1.0;
  return static_cast<double>(counts.tp) / static_cast<double>(actual);
}

PRCurve pr_curve(const std::vector<ImageSample>& samples, int class_id, double iou_threshold) {
  validate_threshold(iou_threshold, "iou_threshold");

  PRCurve curve;
  curve.class_id = class_id;
  curve.iou_threshold = iou_threshold;

  std::vector<PooledDetection> pooled;
  for (const ImageSample& sample : samples) {
    std::vector<Annotation> gt;
    for (const Annotation& a : sample.ground_truth) {
      if (a.class_id == class_id) gt.push_back(a);
    }
    std::vector<Detection> dets;
    for (const Detection& d : sample.detections) {
      if (d.class_id == class_id) dets.push_back(d);
    }
    curve.gt_count += gt.size();
    const MatchOutcome outcome = match_detections(gt, dets, iou_threshold);
    for (std::size_t i = 0; i < outcome.detections.size(); ++i) {
      pooled.push_back({outcome.detections[i].confidence, sample.image_id, i,
                        outcome.detections[i].is_tp});
    }
  }

  // Fixed pooled order: confidence descending, then image_id, then the
  // per-image match order. Results are identical however images were fed in.
  std::sort(pooled.begin(), pooled.end(), [](const PooledDetection& a, const PooledDetection& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.image_id != b.image_id) return a.image_id < b.image_id;
    return a.order_in_image < b.order_in_image;
  });

  std::size_t tp = 0;
  std::size_t fp = 0;
  for (const PooledDetection& det : pooled) {
    if (det.is_tp) {
      ++tp;
    } else {
      ++fp;
    }
    PrPoint point;
    point.confidence = det.confidence;
    point.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    point.recall = curve.gt_count == 0
                       ? 0.0
                       : static_cast<double>(tp) / static_cast<double>(curve.gt_count);
    curve.points.push_back(point);
  }
  return curve;
}

Interpolation interpolation_from_name(std::string_view name) {
  if (name == "all_point") return Interpolation::kAllPoint;
  if (name == "101_point") return Interpolation::k101Point;
  throw UsageError("unknown interpolation '" + std::string(name) +
                   "' (expected all_point or 101_point)");
}

std::string_view interpolation_name(Interpolation interpolation) {
  return interpolation == Interpolation::kAllPoint ? "all_point" : "101_point";
}

std::optional<double> average_precision(const PRCurve& curve, Interpolation interpolation) {
  if (curve.gt_count == 0) return std::nullopt;
  if (curve.points.empty()) return 0.0;

  const std::vector<double> envelope = precision_envelope(curve);
  if (interpolation == Interpolation::kAllPoint) {
    double ap = 0;
    double prev_recall = 0;
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
      ap += (curve.points[i].recall - prev_recall) * envelope[i];
      prev_recall = curve.points[i].recall;
    }
    return ap;
  }

  // 101-point: mean of the envelope sampled at recall 0, 0.01, ..., 1;
  // samples beyond the highest reached recall contribute 0.
  double sum = 0;
  std::size_t cursor = 0;
  for (int s = 0; s <= 100; ++s) {
    const double r = static_cast<double>(s) / 100.0;
    while (cursor < curve.points.size() && curve.points[cursor].recall < r) ++cursor;
    if (cursor < curve.points.size()) sum += envelope[cursor];
  }
  return sum / 101.0;
}

double map_at(const std::vector<ImageSample>& samples, const ClassTaxonomy& taxonomy,
              double iou_threshold, Interpolation interpolation) {
  double sum = 0;
  std::size_t counted = 0;
  for (const DiseaseClass& c : taxonomy.classes()) {
    const PRCurve curve = pr_curve(samples, c.id, iou_threshold);
    if (const auto ap = average_precision(curve, interpolation)) {
      sum += *ap;
      ++counted;
    }
  }
  if (counted == 0) {
    throw ValidationError("mAP undefined: no class has any ground truth");
  }
  return sum / static_cast<double>(counted);
}

MapRange map_range(const std::vector<ImageSample>& samples, const ClassTaxonomy& taxonomy,
                   Interpolation interpolation) {
  MapRange result;
  result.thresholds = standard_iou_thresholds();
  double sum = 0;
  for (std::size_t i = 0; i < result.thresholds.size(); ++i) {
    result.per_threshold[i] = map_at(samples, taxonomy, result.thresholds[i], interpolation);
    sum += result.per_threshold[i];
  }
  result.map50_95 = sum / static_cast<double>(result.thresholds.size());
  return result;
}

ConfusionMatrix confusion_matrix(const std::vector<ImageSample>& samples,
                                 const ClassTaxonomy& taxonomy, double iou_threshold,
                                 double confidence_threshold) {
  validate_threshold(iou_threshold, "iou_threshold");
  validate_threshold(confidence_threshold, "confidence_threshold");

  ConfusionMatrix matrix;
  matrix.num_classes = taxonomy.size();
  matrix.iou_threshold = iou_threshold;
  matrix.confidence_threshold = confidence_threshold;
  matrix.cells.assign(matrix.num_classes, std::vector<std::size_t>(matrix.num_classes, 0));
  matrix.missed.assign(matrix.num_classes, 0);
  matrix.ghost.assign(matrix.num_classes, 0);

  for (const ImageSample& sample : samples) {
    std::vector<Detection> dets;
    for (const Detection& d : sample.detections) {
      if (d.confidence >= confidence_threshold) dets.push_back(d);
    }
    for (const Detection& d : dets) {
      if (!taxonomy.contains(d.class_id)) {
        throw ValidationError("detection in '" + sample.image_id + "' has unknown class " +
                              std::to_string(d.class_id));
      }
    }
    // Class-agnostic greedy pairing: without it every off-diagonal cell
    // would be structurally impossible.
    std::vector<bool> taken(sample.ground_truth.size(), false);
    for (std::size_t index : confidence_order(dets)) {
      const Detection& det = dets[index];
      double best_iou = 0;
      std::optional<std::size_t> best;
      for (std::size_t g = 0; g < sample.ground_truth.size(); ++g) {
        if (taken[g]) continue;
        const double overlap = iou(det.box, sample.ground_truth[g].box);
        if (overlap < iou_threshold) continue;
        if (!best || overlap > best_iou) {
          best = g;
          best_iou = overlap;
        }
      }
      if (best) {
        taken[*best] = true;
        const int true_class = sample.ground_truth[*best].class_id;
        ++matrix.cells[static_cast<std::size_t>(taxonomy.by_id(true_class).id)]
                      [static_cast<std::size_t>(det.class_id)];
      } else {
        ++matrix.ghost[static_cast<std::size_t>(det.class_id)];
      }
    }
    for (std::size_t g = 0; g < sample.ground_truth.size(); ++g) {
      if (!taken[g]) {
        ++matrix.missed[static_cast<std::size_t>(taxonomy.by_id(sample.ground_truth[g].class_id).id)];
      }
    }
  }
  return matrix;
}

EvalReport evaluate(const DatasetManifest& manifest, const PredictionMap& predictions,
                    const ClassTaxonomy& taxonomy, const MetricConfig& config) {
  validate_threshold(config.iou_threshold, "iou_threshold");
  validate_threshold(config.confidence_threshold, "confidence_threshold");

  const std::vector<ImageSample> samples = make_samples(manifest, predictions);

  EvalReport report;
  report.config = config;
  report.thresholds = standard_iou_thresholds();

  // Operating-point counts: detections below the confidence threshold are
  // dropped, then matched per class at the configured IoU threshold.
  std::map<int, CountsPerClass> counts;
  for (const DiseaseClass& c : taxonomy.classes()) {
    counts[c.id].class_id = c.id;
  }
  for (const ImageSample& sample : samples) {
    for (const Detection& d : sample.detections) {
      if (!taxonomy.contains(d.class_id)) {
        throw ValidationError("detection in '" + sample.image_id + "' has unknown class " +
                              std::to_string(d.class_id));
      }
    }
    for (const Annotation& a : sample.ground_truth) {
      if (!taxonomy.contains(a.class_id)) {
        throw ValidationError("annotation in '" + sample.image_id + "' has unknown class " +
                              std::to_string(a.class_id));
      }
    }
    for (const DiseaseClass& c : taxonomy.classes()) {
      std::vector<Annotation> gt;
      for (const Annotation& a : sample.ground_truth) {
        if (a.class_id == c.id) gt.push_back(a);
      }
      std::vector<Detection> dets;
      for (const Detection& d : sample.detections) {
        if (d.class_id == c.id && d.confidence >= config.confidence_threshold) dets.push_back(d);
      }
      if (gt.empty() && dets.empty()) {
        ++counts[c.id].tn_images;
        continue;
      }
      const MatchOutcome outcome = match_detections(gt, dets, config.iou_threshold);
      counts[c.id].tp += outcome.tp_count;
      counts[c.id].fp += outcome.detections.size() - outcome.tp_count;
      counts[c.id].fn += outcome.fn_count;
    }
  }

  // AP per class per IoU threshold, over all detections (the confidence
  // sweep is what the curve is).
  std::array<double, 10> map_sums{};
  std::array<std::size_t, 10> map_counts{};
  for (const DiseaseClass& c : taxonomy.classes()) {
    EvalReport::ClassEntry entry;
    entry.class_id = c.id;
    entry.name = c.name;
    entry.counts = counts[c.id];
    for (std::size_t t = 0; t < report.thresholds.size(); ++t) {
      const PRCurve curve = pr_curve(samples, c.id, report.thresholds[t]);
      entry.gt_count = curve.gt_count;
      const auto ap = average_precision(curve, config.interpolation);
      entry.ap_per_threshold.push_back(ap);
      if (ap) {
        map_sums[t] += *ap;
        ++map_counts[t];
      }
    }
    entry.ap50 = entry.ap_per_threshold[0];
    report.classes.push_back(std::move(entry));
  }

  if (map_counts[0] == 0) {
    throw ValidationError("mAP undefined: no class has any ground truth");
  }
  double sum = 0;
  for (std::size_t t = 0; t < report.per_threshold.size(); ++t) {
    report.per_threshold[t] = map_sums[t] / static_cast<double>(map_counts[t]);
    sum += report.per_threshold[t];
  }
  report.map50 = report.per_threshold[0];
  report.map50_95 = sum / static_cast<double>(report.per_threshold.size());

  CountsPerClass aggregate;
  for (const auto& [class_id, c] : counts) {
    aggregate.tp += c.tp;
    aggregate.fp += c.fp;
    aggregate.fn += c.fn;
  }
  report.precision = precision(aggregate);
  report.recall = recall(aggregate);

  report.confusion =
      confusion_matrix(samples, taxonomy, config.iou_threshold, config.confidence_threshold);
  return report;
}

std::string serialize_eval_report(const EvalReport& report) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["config"] = {{"iou_threshold", report.config.iou_threshold},
                 {"confidence_threshold", report.config.confidence_threshold},
                 {"interpolation", std::string(interpolation_name(report.config.interpolation))}};
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  j["map50"] = report.map50;
  j["map50_95"] = report.map50_95;
  j["iou_thresholds"] = report.thresholds;
  j["per_threshold"] = report.per_threshold;

  json classes = json::array();
  for (const EvalReport::ClassEntry& entry : report.classes) {
    json c;
    c["class_id"] = entry.class_id;
    c["name"] = entry.name;
    c["gt_count"] = entry.gt_count;
    c["tp"] = entry.counts.tp;
    c["fp"] = entry.counts.fp;
    c["fn"] = entry.counts.fn;
    c["tn_images"] = entry.counts.tn_images;
    c["precision"] = precision(entry.counts);
    c["recall"] = recall(entry.counts);
    c["ap50"] = entry.ap50 ? json(*entry.ap50) : json(nullptr);
    json aps = json::array();
    for (const auto& ap : entry.ap_per_threshold) aps.push_back(ap ? json(*ap) : json(nullptr));
    c["ap_per_threshold"] = std::move(aps);
    classes.push_back(std::move(c));
  }
  j["classes"] = std::move(classes);

  j["confusion"] = {{"cells", report.confusion.cells},
                    {"missed", report.confusion.missed},
                    {"ghost", report.confusion.ghost}};
  j["notes"] = {"precision falls back to 1.0 when nothing was predicted",
                "recall falls back to 1.0 when there is no ground truth",
                "tn_images counts images with neither ground truth nor detections of the class",
                "classes without ground truth are excluded from mAP averages"};
  return j.dump(2) + "\n";
}

std::string eval_report_csv(const EvalReport& report) {
  std::string out = "class_id,name,gt_count,tp,fp,fn,tn_images,precision,recall,ap50\n";
  for (const EvalReport::ClassEntry& entry : report.classes) {
    out += std::to_string(entry.class_id) + ',' + entry.name + ',' +
           std::to_string(entry.gt_count) + ',' + std::to_string(entry.counts.tp) + ',' +
           std::to_string(entry.counts.fp) + ',' + std::to_string(entry.counts.fn) + ',' +
           std::to_string(entry.counts.tn_images) + ',' +
           format_double_shortest(precision(entry.counts)) + ',' +
           format_double_shortest(recall(entry.counts)) + ',' +
           (entry.ap50 ? format_double_shortest(*entry.ap50) : std::string()) + '\n';
  }
  return out;
}

std::string render_eval_report_text(const EvalReport& report) {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof(line), "precision %.4f  recall %.4f  mAP@.5 %.4f  mAP@.5:.95 %.4f\n",
                report.precision, report.recall, report.map50, report.map50_95);
  out += line;
  out += '\n';

  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Class", "GT", "TP", "FP", "FN", "P", "R", "AP@.5"});
  for (const EvalReport::ClassEntry& entry : report.classes) {
    char p[32], r[32], ap[32];
    std::snprintf(p, sizeof(p), "%.4f", precision(entry.counts));
    std::snprintf(r, sizeof(r), "%.4f", recall(entry.counts));
    if (entry.ap50) {
      std::snprintf(ap, sizeof(ap), "%.4f", *entry.ap50);
    } else {
      std::snprintf(ap, sizeof(ap), "-");
    }
    rows.push_back({entry.name, std::to_string(entry.gt_count), std::to_string(entry.counts.tp),
                    std::to_string(entry.counts.fp), std::to_string(entry.counts.fn), p, r, ap});
  }
  std::vector<std::size_t> widths(rows[0].size(), 0);
  for (const auto& cells : rows) {
    for (std::size_t c = 0; c < cells.size(); ++c) widths[c] = std::max(widths[c], cells[c].size());
  }
  for (const auto& cells : rows) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == 0) {
        out += cells[c];
        out.append(widths[c] - cells[c].size(), ' ');
      } else {
        out += "  ";
        out.append(widths[c] - cells[c].size(), ' ');
        out += cells[c];
      }
    }
    out += '\n';
  }
  return out;
}

std::string confusion_csv(const ConfusionMatrix& matrix, const ClassTaxonomy& taxonomy) {
  if (matrix.num_classes != taxonomy.size()) {
    throw UsageError("confusion matrix size does not match the taxonomy");
  }
  std::string out = "true\\predicted";
  for (const DiseaseClass& c : taxonomy.classes()) out += ',' + c.name;
  out += ",missed\n";
  for (std::size_t g = 0; g < matrix.num_classes; ++g) {
    out += taxonomy.classes()[g].name;
    for (std::size_t p = 0; p < matrix.num_classes; ++p) {
      out += ',' + std::to_string(matrix.cells[g][p]);
    }
    out += ',' + std::to_string(matrix.missed[g]) + '\n';
  }
  out += "ghost";
  for (std::size_t p = 0; p < matrix.num_classes; ++p) {
    out += ',' + std::to_string(matrix.ghost[p]);
  }
  out += ",0\n";
  return out;
}

}  // namespace cactusdet

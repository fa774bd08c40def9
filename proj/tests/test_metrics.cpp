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

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "cactusdet/error.hpp"
#include "cactusdet/metrics.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cactusdet;

namespace {

std::vector<ImageSample> one_image(std::vector<Annotation> gt, std::vector<Detection> dets) {
  return {{"only", std::move(gt), std::move(dets)}};
}

DatasetManifest manifest_of(const std::vector<ImageSample>& samples) {
  DatasetManifest manifest;
  for (const ImageSample& sample : samples) {
    manifest.records.push_back({sample.image_id, "", 1000, 1000, sample.ground_truth});
  }
  return manifest;
}

}  // namespace

TEST_CASE("standard thresholds are the exact decimal grid") {
  const auto thresholds = standard_iou_thresholds();
  CHECK(thresholds.front() == 0.5);
  CHECK(thresholds.back() == 0.95);
  CHECK(thresholds[4] == 70.0 / 100.0);
}

TEST_CASE("match_detections: greedy trace with a stolen ground truth") {
  const std::vector<Annotation> gt = {{0, {0, 0, 10, 10}}, {0, {20, 20, 30, 30}}};
  const std::vector<Detection> dets = {{0, {1, 1, 10, 10}, 0.9},
                                       {0, {0, 0, 10, 10}, 0.8},
                                       {0, {21, 21, 30, 30}, 0.7}};
  // IoUs against A: 81/100 and 1.0; against B: 81/100 for the last one.
  CHECK(iou(dets[0].box, gt[0].box) == doctest::Approx(0.81).epsilon(1e-12));

  const MatchOutcome outcome = match_detections(gt, dets, 0.5);
  REQUIRE(outcome.detections.size() == 3);
  CHECK(outcome.detections[0].is_tp);
  CHECK(outcome.detections[0].ground_truth_index == 0);
  CHECK_FALSE(outcome.detections[1].is_tp);  // A already taken
  CHECK(outcome.detections[2].is_tp);
  CHECK(outcome.detections[2].ground_truth_index == 1);
  CHECK(outcome.tp_count == 2);
  CHECK(outcome.fn_count == 0);
}

TEST_CASE("match_detections: no detections means every ground truth is missed") {
  const std::vector<Annotation> gt = {{0, {0, 0, 1, 1}}, {1, {2, 2, 3, 3}}, {2, {4, 4, 5, 5}}};
  const MatchOutcome outcome = match_detections(gt, {}, 0.5);
  CHECK(outcome.detections.empty());
  CHECK(outcome.fn_count == 3);
}

TEST_CASE("match_detections: perfect detections match at every threshold") {
  const std::vector<Annotation> gt = {{0, {0, 0, 10, 10}}, {3, {20, 20, 40, 44}}};
  std::vector<Detection> dets;
  for (const Annotation& a : gt) dets.push_back({a.class_id, a.box, 1.0});
  for (double threshold : standard_iou_thresholds()) {
    const MatchOutcome outcome = match_detections(gt, dets, threshold);
    CHECK(outcome.tp_count == 2);
    CHECK(outcome.fn_count == 0);
  }
  const MatchOutcome at_one = match_detections(gt, dets, 1.0);
  CHECK(at_one.tp_count == 2);
  CHECK_THROWS_AS(match_detections(gt, dets, 0.0), UsageError);
  CHECK_THROWS_AS(match_detections(gt, dets, 1.5), UsageError);
}

TEST_CASE("match_detections is class-aware") {
  const std::vector<Annotation> gt = {{0, {0, 0, 10, 10}}};
  const std::vector<Detection> dets = {{1, {0, 0, 10, 10}, 0.9}};
  const MatchOutcome outcome = match_detections(gt, dets, 0.5);
  CHECK_FALSE(outcome.detections[0].is_tp);
  CHECK(outcome.fn_count == 1);
}

TEST_CASE("precision and recall conventions") {
  CHECK(precision({0, 3, 1, 0, 0}) == 0.75);
  CHECK(precision({0, 0, 0, 0, 0}) == 1.0);
  CHECK(precision({0, 0, 5, 0, 0}) == 0.0);
  CHECK(recall({0, 4, 0, 1, 0}) == 0.8);
  CHECK(recall({0, 0, 0, 0, 0}) == 1.0);
}

TEST_CASE("pr_curve: FP then TP over one ground truth") {
  const auto samples =
      one_image({{0, {0, 0, 10, 10}}},
                {{0, {50, 50, 60, 60}, 0.9}, {0, {0, 0, 10, 10}, 0.8}});
  const PRCurve curve = pr_curve(samples, 0, 0.5);
  CHECK(curve.gt_count == 1);
  REQUIRE(curve.points.size() == 2);
  CHECK(curve.points[0].recall == 0.0);
  CHECK(curve.points[0].precision == 0.0);
  CHECK(curve.points[1].recall == 1.0);
  CHECK(curve.points[1].precision == 0.5);
}

TEST_CASE("pr_curve: perfect detections reach (1, 1); absent class is empty") {
  const auto samples = one_image({{2, {0, 0, 10, 10}}}, {{2, {0, 0, 10, 10}, 1.0}});
  const PRCurve curve = pr_curve(samples, 2, 0.5);
  REQUIRE(curve.points.size() == 1);
  CHECK(curve.points[0].recall == 1.0);
  CHECK(curve.points[0].precision == 1.0);

  const PRCurve missing = pr_curve(samples, 4, 0.5);
  CHECK(missing.points.empty());
  CHECK(missing.gt_count == 0);
}

TEST_CASE("pr_curve recall is non-decreasing along the sweep") {
  for (int i = 0; i < 50; ++i) {
    std::vector<ImageSample> samples;
    for (int img = 0; img < 3; ++img) {
      const auto scene = testing::make_random_scene(5000 + i * 3 + img);
      samples.push_back({"img" + std::to_string(img), scene.ground_truth, scene.detections});
    }
    for (int class_id = 0; class_id < 3; ++class_id) {
      const PRCurve curve = pr_curve(samples, class_id, 0.5);
      for (std::size_t p = 1; p < curve.points.size(); ++p) {
        CHECK(curve.points[p].recall >= curve.points[p - 1].recall);
        CHECK(curve.points[p].precision >= 0.0);
        CHECK(curve.points[p].precision <= 1.0);
      }
    }
  }
}

TEST_CASE("average_precision on the derived curves") {
  const auto fp_then_tp =
      one_image({{0, {0, 0, 10, 10}}},
                {{0, {50, 50, 60, 60}, 0.9}, {0, {0, 0, 10, 10}, 0.8}});
  const PRCurve curve = pr_curve(fp_then_tp, 0, 0.5);
  CHECK(average_precision(curve, Interpolation::kAllPoint) == 0.5);

  const auto perfect = one_image({{0, {0, 0, 10, 10}}}, {{0, {0, 0, 10, 10}, 1.0}});
  CHECK(average_precision(pr_curve(perfect, 0, 0.5), Interpolation::kAllPoint) == 1.0);
  CHECK(average_precision(pr_curve(perfect, 0, 0.5), Interpolation::k101Point) == 1.0);

  const auto silent = one_image({{0, {0, 0, 10, 10}}, {0, {20, 20, 30, 30}}}, {});
  CHECK(average_precision(pr_curve(silent, 0, 0.5), Interpolation::kAllPoint) == 0.0);

  const auto no_gt = one_image({}, {});
  CHECK_FALSE(average_precision(pr_curve(no_gt, 0, 0.5), Interpolation::kAllPoint).has_value());
}

TEST_CASE("map_at identities") {
  testing::GoldenFixture perfect;
  for (int c = 0; c < 6; ++c) {
    const std::string id = "p" + std::to_string(c);
    perfect.manifest.records.push_back({id, "", 100, 100, {{c, {10, 10, 50, 50}}}});
    perfect.predictions[id] = {{c, {10, 10, 50, 50}, 1.0}};
  }
  const auto samples = make_samples(perfect.manifest, perfect.predictions);
  CHECK(map_at(samples, ClassTaxonomy::default_taxonomy(), 0.5) == 1.0);

  // Silent on three of six classes: mean of {1,1,1,0,0,0}.
  PredictionMap half = perfect.predictions;
  half["p3"].clear();
  half["p4"].clear();
  half["p5"].clear();
  const auto half_samples = make_samples(perfect.manifest, half);
  CHECK(map_at(half_samples, ClassTaxonomy::default_taxonomy(), 0.5) == 0.5);

  // No ground truth anywhere: undefined.
  DatasetManifest empty;
  empty.records.push_back({"x", "", 10, 10, {}});
  CHECK_THROWS_AS(map_at(make_samples(empty, {}), ClassTaxonomy::default_taxonomy(), 0.5),
                  ValidationError);
}

TEST_CASE("reference fixture reproduces mAP@.5 = 0.9733") {
  const auto fx = testing::reference_map_fixture();
  const auto samples = make_samples(fx.manifest, fx.predictions);
  const double map50 = map_at(samples, ClassTaxonomy::default_taxonomy(), 0.5);
  CHECK(std::abs(map50 - 0.9733) <= 1e-9);
}

TEST_CASE("map_range on the exact IoU-0.7 fixture is 0.5") {
  const auto fx = testing::iou_070_fixture();
  const auto samples = make_samples(fx.manifest, fx.predictions);
  const MapRange range = map_range(samples, ClassTaxonomy::default_taxonomy());
  for (int t = 0; t < 5; ++t) CHECK(range.per_threshold[t] == 1.0);
  for (int t = 5; t < 10; ++t) CHECK(range.per_threshold[t] == 0.0);
  CHECK(range.map50_95 == 0.5);
}

TEST_CASE("map50_95 equals the independent mean of per-threshold values") {
  for (int i = 0; i < 10; ++i) {
    std::vector<ImageSample> samples;
    DatasetManifest manifest;
    PredictionMap predictions;
    bool any_gt = false;
    for (int img = 0; img < 4; ++img) {
      const auto scene = testing::make_random_scene(9000 + i * 7 + img);
      const std::string id = "img" + std::to_string(img);
      manifest.records.push_back({id, "", scene.dims.width, scene.dims.height,
                                  scene.ground_truth});
      predictions[id] = scene.detections;
      any_gt = any_gt || !scene.ground_truth.empty();
    }
    if (!any_gt) continue;
    const auto s = make_samples(manifest, predictions);
    const MapRange range = map_range(s, ClassTaxonomy::default_taxonomy());
    double mean = 0;
    for (double v : range.per_threshold) mean += v;
    mean /= 10.0;
    CHECK(std::abs(range.map50_95 - mean) <= 1e-12);
  }
}

TEST_CASE("AP per class is non-increasing in the IoU threshold") {
  for (int i = 0; i < 40; ++i) {
    std::vector<ImageSample> samples;
    for (int img = 0; img < 3; ++img) {
      const auto scene = testing::make_random_scene(12000 + i * 5 + img);
      samples.push_back({"img" + std::to_string(img), scene.ground_truth, scene.detections});
    }
    for (int class_id = 0; class_id < 3; ++class_id) {
      std::optional<double> previous;
      for (double threshold : standard_iou_thresholds()) {
        const auto ap = average_precision(pr_curve(samples, class_id, threshold),
                                          Interpolation::kAllPoint);
        if (!ap) break;  // class absent from the scene set
        if (previous) CHECK(*ap <= *previous + 1e-15);
        previous = ap;
      }
    }
  }
}

TEST_CASE("greedy matching never beats the exhaustive matching oracle") {
  for (int i = 0; i < 200; ++i) {
    const auto scene = testing::make_random_scene(33000 + i);
    const MatchOutcome outcome = match_detections(scene.ground_truth, scene.detections, 0.5);
    CHECK(outcome.tp_count <= testing::max_matching_tp(scene.ground_truth, scene.detections, 0.5));
    CHECK(outcome.tp_count + outcome.fn_count == scene.ground_truth.size());
    std::size_t tp = 0, fp = 0;
    for (const DetectionMatch& m : outcome.detections) {
      (m.is_tp ? tp : fp) += 1;
    }
    CHECK(tp == outcome.tp_count);
    CHECK(tp + fp == scene.detections.size());
  }
}

TEST_CASE("confusion matrix: perfect, silent and cross-class cases") {
  const ClassTaxonomy taxonomy = ClassTaxonomy::default_taxonomy();

  testing::GoldenFixture perfect;
  for (int c = 0; c < 6; ++c) {
    const std::string id = "p" + std::to_string(c);
    perfect.manifest.records.push_back({id, "", 100, 100, {{c, {10, 10, 50, 50}}}});
    perfect.predictions[id] = {{c, {10, 10, 50, 50}, 1.0}};
  }
  const ConfusionMatrix diag =
      confusion_matrix(make_samples(perfect.manifest, perfect.predictions), taxonomy, 0.5, 0.5);
  for (int g = 0; g < 6; ++g) {
    for (int p = 0; p < 6; ++p) CHECK(diag.cells[g][p] == (g == p ? 1u : 0u));
    CHECK(diag.missed[g] == 0);
    CHECK(diag.ghost[g] == 0);
  }

  const ConfusionMatrix silent =
      confusion_matrix(make_samples(perfect.manifest, {}), taxonomy, 0.5, 0.5);
  for (int g = 0; g < 6; ++g) CHECK(silent.missed[g] == 1);

  // True class 1, predicted class 4, overlapping: class-agnostic matching
  // books it as confusion cell (1, 4).
  DatasetManifest cross;
  cross.records.push_back({"x", "", 100, 100, {{1, {10, 10, 50, 50}}}});
  PredictionMap cross_pred{{"x", {{4, {12, 12, 50, 50}, 0.9}}}};
  const ConfusionMatrix crossed =
      confusion_matrix(make_samples(cross, cross_pred), taxonomy, 0.5, 0.5);
  CHECK(crossed.cells[1][4] == 1);
  CHECK(crossed.missed[1] == 0);
  CHECK(crossed.ghost[4] == 0);
}

TEST_CASE("confusion matrix row sums equal per-class ground-truth counts") {
  const auto fx = testing::golden_fixture();
  const auto samples = make_samples(fx.manifest, fx.predictions);
  const ClassTaxonomy taxonomy = ClassTaxonomy::default_taxonomy();
  const ConfusionMatrix matrix = confusion_matrix(samples, taxonomy, 0.5, 0.5);

  std::vector<std::size_t> gt_per_class(6, 0);
  for (const ImageSample& sample : samples) {
    for (const Annotation& a : sample.ground_truth) ++gt_per_class[a.class_id];
  }
  for (int g = 0; g < 6; ++g) {
    std::size_t row = matrix.missed[g];
    for (int p = 0; p < 6; ++p) row += matrix.cells[g][p];
    CHECK(row == gt_per_class[g]);
  }
}

TEST_CASE("evaluate: identity and empty-prediction limits") {
  const ClassTaxonomy taxonomy = ClassTaxonomy::default_taxonomy();
  const auto fx = testing::golden_fixture();

  // Ground truth replayed as predictions: everything is 1.
  PredictionMap replay;
  for (const ImageRecord& record : fx.manifest.records) {
    for (const Annotation& a : record.annotations) {
      replay[record.image_id].push_back({a.class_id, a.box, 1.0});
    }
  }
  const EvalReport perfect = evaluate(fx.manifest, replay, taxonomy);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.map50 == 1.0);
  CHECK(perfect.map50_95 == 1.0);

  const EvalReport empty = evaluate(fx.manifest, {}, taxonomy);
  CHECK(empty.recall == 0.0);
  CHECK(empty.map50 == 0.0);
  CHECK(empty.map50_95 == 0.0);
  CHECK(empty.precision == 1.0);  // nothing predicted, nothing wrong
}

TEST_CASE("evaluate rejects predictions for unknown images") {
  const auto fx = testing::golden_fixture();
  PredictionMap bad = fx.predictions;
  bad["nonexistent"] = {{0, {0, 0, 1, 1}, 0.5}};
  CHECK_THROWS_WITH_AS(evaluate(fx.manifest, bad, ClassTaxonomy::default_taxonomy()),
                       doctest::Contains("nonexistent"), ValidationError);
}

TEST_CASE("evaluate reproduces the hand-audited golden fixture") {
  const auto fx = testing::golden_fixture();
  const EvalReport report = evaluate(fx.manifest, fx.predictions, ClassTaxonomy::default_taxonomy());

  CHECK(report.precision == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
  CHECK(report.recall == doctest::Approx(4.0 / 6.0).epsilon(1e-12));
  CHECK(report.map50 == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(report.map50_95 == doctest::Approx(0.62).epsilon(1e-12));

  const struct {
    std::size_t tp, fp, fn, gt;
  } expected[] = {{1, 0, 0, 1}, {1, 0, 0, 1}, {0, 1, 1, 1}, {0, 1, 0, 0}, {1, 1, 0, 1}, {1, 0, 1, 2}};
  for (int c = 0; c < 6; ++c) {
    CHECK(report.classes[c].counts.tp == expected[c].tp);
    CHECK(report.classes[c].counts.fp == expected[c].fp);
    CHECK(report.classes[c].counts.fn == expected[c].fn);
    CHECK(report.classes[c].gt_count == expected[c].gt);
    CHECK(report.classes[c].counts.tn_images == 4);
  }
  CHECK_FALSE(report.classes[3].ap50.has_value());  // class 3 has no ground truth
  CHECK(*report.classes[5].ap50 == 0.5);

  // Confusion: diagonal hits, the (2,3) cross-class cell, ghosts for the
  // disjoint c2 detection and the duplicate c4 detection, one missed c5.
  CHECK(report.confusion.cells[0][0] == 1);
  CHECK(report.confusion.cells[1][1] == 1);
  CHECK(report.confusion.cells[2][3] == 1);
  CHECK(report.confusion.cells[4][4] == 1);
  CHECK(report.confusion.cells[5][5] == 1);
  CHECK(report.confusion.ghost[2] == 1);
  CHECK(report.confusion.ghost[4] == 1);
  CHECK(report.confusion.missed[5] == 1);
}

TEST_CASE("evaluate golden report serialization is frozen") {
  const auto fx = testing::golden_fixture();
  const EvalReport report = evaluate(fx.manifest, fx.predictions, ClassTaxonomy::default_taxonomy());
  const std::string serialized = serialize_eval_report(report);

  std::ifstream golden(std::string(CACTUSDET_TEST_DATA_DIR) + "/golden_eval.json",
                       std::ios::binary);
  REQUIRE(golden.good());
  std::stringstream buffer;
  buffer << golden.rdbuf();
  CHECK(serialized == buffer.str());

  // Round-trip through the CSV shape as a sanity check on the header.
  const std::string csv = eval_report_csv(report);
  CHECK(csv.find("class_id,name,gt_count,tp,fp,fn,tn_images,precision,recall,ap50") == 0);
}

TEST_CASE("rotating the whole dataset by 90 degrees changes nothing") {
  const auto fx = testing::golden_fixture();
  const auto rotated = testing::golden_fixture_rotated_90();
  const ClassTaxonomy taxonomy = ClassTaxonomy::default_taxonomy();

  const EvalReport a = evaluate(fx.manifest, fx.predictions, taxonomy);
  const EvalReport b = evaluate(rotated.manifest, rotated.predictions, taxonomy);

  CHECK(a.precision == b.precision);
  CHECK(a.recall == b.recall);
  CHECK(a.map50 == b.map50);
  CHECK(a.map50_95 == b.map50_95);
  for (int t = 0; t < 10; ++t) CHECK(a.per_threshold[t] == b.per_threshold[t]);
  for (int c = 0; c < 6; ++c) {
    CHECK(a.classes[c].counts.tp == b.classes[c].counts.tp);
    CHECK(a.classes[c].counts.fp == b.classes[c].counts.fp);
    CHECK(a.classes[c].counts.fn == b.classes[c].counts.fn);
    CHECK(a.classes[c].ap50 == b.classes[c].ap50);
  }
  CHECK(a.confusion.cells == b.confusion.cells);
  CHECK(a.confusion.missed == b.confusion.missed);
  CHECK(a.confusion.ghost == b.confusion.ghost);
}

TEST_CASE("scaling boxes and dims by an integer factor changes nothing") {
  const auto fx = testing::golden_fixture();
  testing::GoldenFixture scaled = fx;
  const double k = 3;
  for (ImageRecord& record : scaled.manifest.records) {
    record.width = static_cast<int>(record.width * k);
    record.height = static_cast<int>(record.height * k);
    for (Annotation& a : record.annotations) {
      a.box = {a.box.x_min * k, a.box.y_min * k, a.box.x_max * k, a.box.y_max * k};
    }
  }
  for (auto& [id, dets] : scaled.predictions) {
    for (Detection& d : dets) {
      d.box = {d.box.x_min * k, d.box.y_min * k, d.box.x_max * k, d.box.y_max * k};
    }
  }
  const ClassTaxonomy taxonomy = ClassTaxonomy::default_taxonomy();
  const EvalReport a = evaluate(fx.manifest, fx.predictions, taxonomy);
  const EvalReport b = evaluate(scaled.manifest, scaled.predictions, taxonomy);
  CHECK(a.precision == b.precision);
  CHECK(a.recall == b.recall);
  CHECK(a.map50 == b.map50);
  CHECK(a.map50_95 == b.map50_95);
}

TEST_CASE("threshold-sweep consistency: counts at confidence t match the curve point") {
  const auto fx = testing::golden_fixture();
  const auto samples = make_samples(fx.manifest, fx.predictions);

  for (int class_id = 0; class_id < 6; ++class_id) {
    const PRCurve curve = pr_curve(samples, class_id, 0.5);
    for (const PrPoint& point : curve.points) {
      // Recompute counts at this confidence threshold from scratch.
      CountsPerClass counts;
      counts.class_id = class_id;
      for (const ImageSample& sample : samples) {
        std::vector<Annotation> gt;
        for (const Annotation& a : sample.ground_truth) {
          if (a.class_id == class_id) gt.push_back(a);
        }
        std::vector<Detection> dets;
        for (const Detection& d : sample.detections) {
          if (d.class_id == class_id && d.confidence >= point.confidence) dets.push_back(d);
        }
        const MatchOutcome outcome = match_detections(gt, dets, 0.5);
        counts.tp += outcome.tp_count;
        counts.fp += outcome.detections.size() - outcome.tp_count;
        counts.fn += outcome.fn_count;
      }
      CHECK(precision(counts) == point.precision);
      if (curve.gt_count > 0) {
        CHECK(static_cast<double>(counts.tp) / static_cast<double>(curve.gt_count) ==
              point.recall);
      }
    }
  }
}

TEST_CASE("confusion CSV shape") {
  const auto fx = testing::golden_fixture();
  const auto samples = make_samples(fx.manifest, fx.predictions);
  const ClassTaxonomy taxonomy = ClassTaxonomy::default_taxonomy();
  const std::string csv = confusion_csv(confusion_matrix(samples, taxonomy, 0.5, 0.5), taxonomy);
  std::istringstream lines(csv);
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) ++count;
  CHECK(count == 8);  // header + 6 classes + ghost
  CHECK(csv.find("true\\predicted,anthracnose") == 0);
}

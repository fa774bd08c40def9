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

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "cactusdet/detector.hpp"
#include "cactusdet/error.hpp"
#include "cactusdet/metrics.hpp"
#include "oracles.hpp"

using namespace cactusdet;
namespace fs = std::filesystem;

namespace {

DatasetManifest tiny_manifest(int images) {
  DatasetManifest manifest;
  for (int i = 0; i < images; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "t%03d", i);
    manifest.records.push_back(
        {id, "", 200, 100, {{i % 6, {10, 10, 60, 60}}, {(i + 1) % 6, {100, 20, 180, 80}}}});
  }
  return manifest;
}

}  // namespace

TEST_CASE("nms suppresses duplicates and keeps disjoint boxes") {
  const std::vector<Detection> duplicates = {{0, {0, 0, 10, 10}, 0.9}, {0, {0, 0, 10, 10}, 0.8}};
  const auto kept = nms(duplicates, 0.5, true);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].confidence == 0.9);

  const std::vector<Detection> disjoint = {{0, {0, 0, 10, 10}, 0.9}, {0, {50, 50, 60, 60}, 0.8}};
  CHECK(nms(disjoint, 0.5, true).size() == 2);
  CHECK_THROWS_AS(nms(disjoint, 0.0, true), UsageError);
}

TEST_CASE("nms chain: B suppressed by A, C survives") {
  // A and B overlap at 0.6, B and C at 0.6, A and C at ~0.1. Widths solved
  // by hand on 10-tall boxes: IoU(x-overlap w) = w / (40 - w) = 0.6 -> w = 15.
  const BoundingBox a{0, 0, 20, 10};
  const BoundingBox b{5, 0, 25, 10};
  const BoundingBox c{10, 0, 30, 10};
  CHECK(iou(a, b) == 0.6);
  CHECK(iou(b, c) == 0.6);
  CHECK(iou(a, c) == doctest::Approx(10.0 / 30.0).epsilon(1e-12));

  const std::vector<Detection> chain = {{0, a, 0.9}, {0, b, 0.8}, {0, c, 0.7}};
  const auto kept = nms(chain, 0.5, true);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].box == a);
  CHECK(kept[1].box == c);
}

TEST_CASE("nms is idempotent, sorted and threshold-respecting") {
  for (int i = 0; i < 60; ++i) {
    const auto scene = testing::make_random_scene(41000 + i, 0, 8);
    for (bool class_aware : {true, false}) {
      const auto once = nms(scene.detections, 0.5, class_aware);
      const auto twice = nms(once, 0.5, class_aware);
      CHECK(once.size() == twice.size());
      for (std::size_t k = 0; k + 1 < once.size(); ++k) {
        CHECK(once[k].confidence >= once[k + 1].confidence);
        for (std::size_t j = k + 1; j < once.size(); ++j) {
          if (class_aware && once[k].class_id != once[j].class_id) continue;
          CHECK(iou(once[k].box, once[j].box) < 0.5);
        }
      }
    }
  }
}

TEST_CASE("nms class_aware=false suppresses across classes") {
  const std::vector<Detection> mixed = {{0, {0, 0, 10, 10}, 0.9}, {1, {0, 0, 10, 10}, 0.8}};
  CHECK(nms(mixed, 0.5, true).size() == 2);
  CHECK(nms(mixed, 0.5, false).size() == 1);
}

TEST_CASE("oracle with the identity config echoes the annotations") {
  const DatasetManifest manifest = tiny_manifest(4);
  OracleConfig config;  // zero noise, confidence floor 1
  for (const ImageRecord& record : manifest.records) {
    const auto detections = oracle_detect(record, config, 6);
    REQUIRE(detections.size() == record.annotations.size());
    for (std::size_t i = 0; i < detections.size(); ++i) {
      CHECK(detections[i].class_id == record.annotations[i].class_id);
      CHECK(detections[i].box == record.annotations[i].box);
      CHECK(detections[i].confidence == 1.0);
    }
  }
}

TEST_CASE("oracle is deterministic per (seed, image)") {
  const DatasetManifest manifest = tiny_manifest(3);
  OracleConfig config;
  config.jitter_px = 3;
  config.drop_rate = 0.2;
  config.ghost_rate = 0.5;
  config.misclass_rate = 0.3;
  config.confidence_floor = 0.4;
  config.seed = 77;

  const auto first = oracle_detect(manifest.records[1], config, 6);
  const auto second = oracle_detect(manifest.records[1], config, 6);
  CHECK(first == second);

  config.seed = 78;
  const auto reseeded = oracle_detect(manifest.records[1], config, 6);
  CHECK(first != reseeded);
}

TEST_CASE("oracle jitter obeys the stated uniform law") {
  OracleConfig config;
  config.jitter_px = 2.0;
  config.confidence_floor = 0.5;
  config.seed = 5;

  // Boxes far from the borders so clamping never bites.
  double max_abs = 0, sum = 0;
  std::size_t n = 0;
  for (int i = 0; i < 2500; ++i) {
    ImageRecord record;
    record.image_id = "jitter" + std::to_string(i);
    record.width = 1000;
    record.height = 1000;
    record.annotations = {{0, {400, 400, 600, 600}}};
    const auto detections = oracle_detect(record, config, 6);
    REQUIRE(detections.size() == 1);
    const double deltas[] = {detections[0].box.x_min - 400, detections[0].box.y_min - 400,
                             detections[0].box.x_max - 600, detections[0].box.y_max - 600};
    for (double d : deltas) {
      max_abs = std::max(max_abs, std::abs(d));
      sum += d;
      ++n;
    }
  }
  CHECK(n == 10000);
  CHECK(max_abs <= 2.0);
  CHECK(std::abs(sum / static_cast<double>(n)) <= 0.1);
}

TEST_CASE("oracle ghosts stay below the median emitted confidence") {
  OracleConfig config;
  config.ghost_rate = 1.0;
  config.confidence_floor = 0.6;
  config.seed = 11;
  ImageRecord record{"ghosty", "", 300, 300,
                     {{0, {10, 10, 50, 50}}, {1, {100, 100, 150, 150}}, {2, {200, 200, 250, 250}}}};
  const auto detections = oracle_detect(record, config, 6);
  REQUIRE(detections.size() == 6);  // 3 real + 3 ghosts at rate 1
  std::vector<double> real_conf;
  for (int i = 0; i < 3; ++i) real_conf.push_back(detections[i].confidence);
  std::sort(real_conf.begin(), real_conf.end());
  const double median = real_conf[1];
  for (int i = 3; i < 6; ++i) {
    CHECK(detections[i].confidence < median);
    CHECK(detections[i].box.x_max <= 300);
    CHECK(detections[i].box.x_max - detections[i].box.x_min >= 1);
  }
}

TEST_CASE("zero-noise oracle composed with evaluate scores 1.0 everywhere") {
  const DatasetManifest manifest = tiny_manifest(6);
  OracleDetector backend(OracleConfig{}, 6);
  const DetectorRun run = run_detector(backend, manifest);
  const EvalReport report =
      evaluate(manifest, run.predictions.by_image, ClassTaxonomy::default_taxonomy());
  CHECK(report.precision == 1.0);
  CHECK(report.recall == 1.0);
  CHECK(report.map50 == 1.0);
  CHECK(report.map50_95 == 1.0);
}

TEST_CASE("prediction files parse, validate and round-trip") {
  const DatasetManifest manifest = tiny_manifest(2);
  CHECK(parse_predictions("").by_image.empty());

  const std::string text =
      "t000 0 0.9 10 10 60 60\n"
      "t000 1 0.8 100 20 180 80\n"
      "t001 2 0.7 10 10 60 60\n";
  const PredictionSet set =
      parse_predictions(text, std::vector<std::string>{"t000", "t001"});
  CHECK(set.by_image.at("t000").size() == 2);
  CHECK(set.by_image.at("t001").size() == 1);

  CHECK_THROWS_WITH_AS(parse_predictions("t000 0 1.5 0 0 1 1\n"), doctest::Contains("line 1"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(
      parse_predictions("zz 0 0.5 0 0 1 1\n", std::vector<std::string>{"t000"}),
      doctest::Contains("zz"), ValidationError);
  CHECK_THROWS_AS(parse_predictions("t0 0 0.5 0 0 1\n"), ParseError);

  const std::string serialized = serialize_predictions(set);
  const PredictionSet reparsed = parse_predictions(serialized);
  CHECK(reparsed.by_image == set.by_image);
}

TEST_CASE("run_detector visits records in image_id order and times each call") {
  DatasetManifest manifest = tiny_manifest(10);
  std::reverse(manifest.records.begin(), manifest.records.end());
  OracleDetector backend(OracleConfig{}, 6);
  const DetectorRun run = run_detector(backend, manifest);
  REQUIRE(run.timings.size() == 10);
  for (std::size_t i = 0; i + 1 < run.timings.size(); ++i) {
    CHECK(run.timings[i].image_id < run.timings[i + 1].image_id);
  }
  CHECK(run.predictions.by_image.size() == 10);
}

TEST_CASE("run_detector with a split filter and an empty split") {
  DatasetManifest manifest = tiny_manifest(4);
  manifest.assignments["t000"] = Split::kTest;
  manifest.assignments["t001"] = Split::kTrain;
  OracleDetector backend(OracleConfig{}, 6);
  const DetectorRun test_only = run_detector(backend, manifest, Split::kTest);
  CHECK(test_only.timings.size() == 1);
  const DetectorRun val_only = run_detector(backend, manifest, Split::kVal);
  CHECK(val_only.timings.empty());
  CHECK(val_only.predictions.by_image.empty());
}

TEST_CASE("run_detector names the failing image") {
  class FailingBackend : public DetectorBackend {
   public:
    std::string name() const override { return "failing"; }
    std::vector<Detection> detect(const ImageRecord& record) override {
      if (record.image_id == "t002") throw std::runtime_error("boom");
      return {};
    }
  };
  DatasetManifest manifest = tiny_manifest(4);
  FailingBackend backend;
  CHECK_THROWS_WITH_AS(run_detector(backend, manifest), doctest::Contains("t002"), IoError);
}

TEST_CASE("file replay backend echoes recorded predictions") {
  const DatasetManifest manifest = tiny_manifest(2);
  PredictionSet recorded;
  recorded.provenance = "memory";
  recorded.by_image["t000"] = {{0, {10, 10, 60, 60}, 0.5}};
  FileReplayBackend backend(recorded);
  CHECK(backend.detect(manifest.records[0]).size() == 1);
  CHECK(backend.detect(manifest.records[1]).empty());
}

TEST_CASE("external process backend speaks the slice protocol") {
  const DatasetManifest manifest = tiny_manifest(1);

  // The command reads the manifest slice and emits one fixed detection for
  // the image id it finds there.
  const fs::path script = fs::temp_directory_path() /
                          ("cactusdet_backend_" + std::to_string(::getpid()) + ".sh");
  {
    std::ofstream out(script);
    out << "#!/bin/sh\n"
        << "sed -n 's/.*\"image_id\":\"\\([^\"]*\\)\".*/\\1 0 0.75 10 10 60 60/p' \"$1\"\n";
  }
  fs::permissions(script, fs::perms::owner_all);

  ExternalProcessBackend backend(script.string());
  const auto detections = backend.detect(manifest.records[0]);
  REQUIRE(detections.size() == 1);
  CHECK(detections[0].confidence == 0.75);
  CHECK(detections[0].box == BoundingBox{10, 10, 60, 60});

  ExternalProcessBackend failing("false");
  CHECK_THROWS_AS(failing.detect(manifest.records[0]), IoError);
  fs::remove(script);
}

TEST_CASE("make_backend parses specs") {
  const DatasetManifest manifest = tiny_manifest(1);
  OracleConfig config;
  CHECK(make_backend("oracle", manifest, config, 6)->name() == "oracle");
  CHECK(make_backend("sleep:2.5", manifest, config, 6)->name() == "sleep:2.5");
  CHECK(make_backend("exec:cat", manifest, config, 6)->name() == "exec:cat");
  CHECK_THROWS_AS(make_backend("nonsense", manifest, config, 6), UsageError);
  CHECK_THROWS_AS(make_backend("sleep:-1", manifest, config, 6), UsageError);
}

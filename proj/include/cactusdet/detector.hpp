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

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cactusdet/annotations.hpp"
#include "cactusdet/dataset.hpp"
#include "cactusdet/metrics.hpp"

namespace cactusdet {

/// Behavioral contract for anything that produces detections for an image.
/// Deterministic backends must return identical output for identical input
/// and seed.
class DetectorBackend {
 public:
  virtual ~DetectorBackend() = default;
  virtual std::string name() const = 0;
  virtual std::vector<Detection> detect(const ImageRecord& record) = 0;
  /// Whether detect may be invoked concurrently from several threads.
  virtual bool concurrency_safe() const { return false; }
};

/// Greedy non-maximum suppression: keep the highest-confidence detection,
/// drop every (same-class when class_aware) detection overlapping it with
/// IoU >= threshold, repeat. Output is a subset of the input sorted by
/// descending confidence.
std::vector<Detection> nms(const std::vector<Detection>& detections, double iou_threshold,
                           bool class_aware = true);

/// Conventional default suppression threshold for detector outputs.
inline constexpr double kDefaultNmsIouThreshold = 0.45;

/// Controls for the synthetic oracle detector.
struct OracleConfig {
  double jitter_px = 0;         // max per-coordinate perturbation
  double drop_rate = 0;         // P(ground truth emitted no detection)
  double ghost_rate = 0;        // expected ghosts per ground-truth object
  double misclass_rate = 0;     // P(class flipped to another class)
  double confidence_floor = 1;  // emitted confidence is uniform in [floor, 1]
  std::uint64_t seed = 0;
};

/// Synthetic detections derived from the record's ground truth: per object,
/// drop with drop_rate, else jitter each coordinate uniformly within
/// +/- jitter_px (clamped to the image, minimum box extent 1px), flip the
/// class with misclass_rate, and draw confidence in [floor, 1]. Ghost
/// detections (random box and class, confidence below the median emitted
/// one) follow, one Bernoulli(ghost_rate) draw per ground-truth object.
/// Fully determined by (config, record); the stream is keyed on
/// (seed, image_id) so other images never perturb this one.
std::vector<Detection> oracle_detect(const ImageRecord& record, const OracleConfig& config,
                                     std::size_t num_classes);

class OracleDetector : public DetectorBackend {
 public:
  OracleDetector(OracleConfig config, std::size_t num_classes)
      : config_(config), num_classes_(num_classes) {}
  std::string name() const override { return "oracle"; }
  std::vector<Detection> detect(const ImageRecord& record) override {
    return oracle_detect(record, config_, num_classes_);
  }
  bool concurrency_safe() const override { return true; }

 private:
  OracleConfig config_;
  std::size_t num_classes_;
};

/// Latency-harness stub: busy-waits a programmed delay, then returns the
/// ground truth with confidence 1.
class SleepBackend : public DetectorBackend {
 public:
  explicit SleepBackend(double delay_ms) : delay_ms_(delay_ms) {}
  std::string name() const override;
  std::vector<Detection> detect(const ImageRecord& record) override;
  bool concurrency_safe() const override { return true; }

 private:
  double delay_ms_;
};

/// Recorded predictions keyed by image id.
struct PredictionSet {
  std::map<std::string, std::vector<Detection>> by_image;
  std::string provenance;  // file path or backend name
};

/// Parses prediction text: one detection per line,
/// "image_id class confidence x_min y_min x_max y_max" (corner pixels).
/// known_ids, when given, is the set of resolvable image ids; lines naming
/// anything else fail with the full offender list.
PredictionSet parse_predictions(const std::string& text,
                                const std::optional<std::vector<std::string>>& known_ids =
                                    std::nullopt);
PredictionSet load_predictions(const std::filesystem::path& path, const DatasetManifest& manifest);
std::string serialize_predictions(const PredictionSet& predictions);
void save_predictions(const PredictionSet& predictions, const std::filesystem::path& path);

/// Replays a recorded prediction set as a backend.
class FileReplayBackend : public DetectorBackend {
 public:
  explicit FileReplayBackend(PredictionSet predictions) : predictions_(std::move(predictions)) {}
  std::string name() const override { return "replay:" + predictions_.provenance; }
  std::vector<Detection> detect(const ImageRecord& record) override;
  bool concurrency_safe() const override { return true; }

 private:
  PredictionSet predictions_;
};

/// Runs an external command per batch: a manifest-slice file (JSONL) is
/// written, the command is invoked with the slice path appended, and its
/// standard output is parsed as prediction lines. Nonzero exit is a
/// failure. Invocations are serialized.
class ExternalProcessBackend : public DetectorBackend {
 public:
  explicit ExternalProcessBackend(std::string command) : command_(std::move(command)) {}
  std::string name() const override { return "exec:" + command_; }
  std::vector<Detection> detect(const ImageRecord& record) override;

 private:
  std::string command_;
};

struct TimingSample {
  std::string image_id;
  double ms = 0;
};

struct DetectorRun {
  PredictionSet predictions;
  std::vector<TimingSample> timings;  // one per detect call, in call order
};

/// Invokes the backend once per record in image_id order (optionally
/// restricted to one split) and captures per-call wall time. A backend
/// failure aborts the run with the image named; partial results are
/// discarded.
DetectorRun run_detector(DetectorBackend& backend, const DatasetManifest& manifest,
                         std::optional<Split> split_filter = std::nullopt);

/// Builds a backend from a CLI spec: "oracle", "sleep:<ms>",
/// "replay:<prediction file>" or "exec:<command>".
std::unique_ptr<DetectorBackend> make_backend(const std::string& spec,
                                              const DatasetManifest& manifest,
                                              const OracleConfig& oracle_config,
                                              std::size_t num_classes);

}  // namespace cactusdet

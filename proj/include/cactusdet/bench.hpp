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

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cactusdet/dataset.hpp"
#include "cactusdet/detector.hpp"

namespace cactusdet {

/// Per-image inference wall times and their summary statistics. Timing
/// covers the full detect call (pre/post-processing included). median of an
/// even count averages the middle two; p95 is nearest-rank
/// (ceil(0.95 n)-th smallest).
struct LatencyReport {
  std::string backend;
  std::size_t image_count = 0;
  std::size_t repeats = 0;
  std::size_t warmup_excluded = 0;

  struct Sample {
    std::string image_id;
    std::size_t repeat = 0;
    double ms = 0;
  };
  std::vector<Sample> samples;  // image-major, repeat-minor; never warmup

  double mean_ms = 0;
  double median_ms = 0;
  double p95_ms = 0;
  double min_ms = 0;
  double max_ms = 0;
};

/// Measures the backend over every (optionally split-filtered) record:
/// `warmup` untimed invocations first (cycling records in image_id order,
/// discarded), then `repeats` timed invocations per image. Invocations are
/// strictly serialized so contention never skews the numbers.
LatencyReport measure(DetectorBackend& backend, const DatasetManifest& manifest,
                      std::size_t warmup, std::size_t repeats,
                      std::optional<Split> split_filter = std::nullopt);

std::string serialize_latency_report(const LatencyReport& report);
LatencyReport parse_latency_report(const std::string& text);
std::string latency_samples_csv(const LatencyReport& report);
std::string render_latency_text(const LatencyReport& report);

/// One comparison row. Absent metrics stay absent; they are never rendered
/// as zero.
struct ComparisonEntry {
  std::string name;
  std::optional<double> map50;
  std::optional<double> loss;
  std::optional<double> training_time_hours;
  std::optional<double> test_time_ms;
};

struct ComparisonTable {
  std::vector<ComparisonEntry> entries;
};

/// Validates and assembles entries into a table: at least one entry, at
/// least one populated metric overall. Every populated cell comes from an
/// input entry; nothing is invented.
ComparisonTable compare(const std::vector<ComparisonEntry>& entries);

/// Aligned text table, metric rows x backend columns:
/// mAP@.5 / Loss / Training Time / Test Time per image.
std::string render_comparison_text(const ComparisonTable& table);
std::string comparison_csv(const ComparisonTable& table);
std::string serialize_comparison(const ComparisonTable& table);

}  // namespace cactusdet

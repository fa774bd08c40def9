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

#include <map>
#include <string>
#include <vector>

namespace cactusdet {

/// One epoch of a training log: three loss components plus the four
/// detection metrics. Metrics live in [0, 1], losses are non-negative.
struct TrainLogRow {
  int epoch = 0;
  double box_loss = 0;
  double obj_loss = 0;
  double cls_loss = 0;
  double precision = 0;
  double recall = 0;
  double map50 = 0;
  double map50_95 = 0;

  double total_loss() const { return box_loss + obj_loss + cls_loss; }

  friend bool operator==(const TrainLogRow&, const TrainLogRow&) = default;
};

/// The eight canonical column names, in canonical order.
const std::vector<std::string>& trainlog_columns();

/// alias -> canonical column name. The built-in table covers common
/// training-framework headers (e.g. "metrics/mAP_0.5" -> map50); user
/// adapters extend or override it.
using ColumnAdapter = std::map<std::string, std::string>;
ColumnAdapter builtin_column_adapter();

/// Adapter file: one "alias = canonical" line per mapping, '#' comments.
ColumnAdapter parse_column_adapter(const std::string& text);

/// Parses a training-log CSV. The header row must name all eight canonical
/// columns (order-insensitive, via the adapter); extra columns are ignored.
/// '#' comment lines are skipped. Rows come back sorted by epoch.
std::vector<TrainLogRow> parse_trainlog(const std::string& csv_text,
                                        const ColumnAdapter& extra_adapter = {});

enum class Criterion { kMap50, kMap5095, kPrecision, kRecall };
Criterion criterion_from_name(std::string_view name);
std::string_view criterion_name(Criterion criterion);

/// Row maximizing the criterion; ties go to the lower epoch.
const TrainLogRow& best_epoch(const std::vector<TrainLogRow>& rows, Criterion criterion);

struct TrainLogSummary {
  std::size_t row_count = 0;
  TrainLogRow final_row;
  TrainLogRow best_map50;
  TrainLogRow best_map50_95;
  TrainLogRow best_precision;
  TrainLogRow best_recall;
  std::vector<double> total_loss_series;  // per row, epoch order
};

TrainLogSummary summarize(const std::vector<TrainLogRow>& rows);
std::string serialize_trainlog_summary(const TrainLogSummary& summary);
TrainLogSummary parse_trainlog_summary(const std::string& text);
std::string render_trainlog_summary_text(const TrainLogSummary& summary);

/// Epoch-ordered CSV of the requested canonical columns. Requesting all
/// eight yields text that parse_trainlog accepts back unchanged.
std::string export_series(const std::vector<TrainLogRow>& rows,
                          const std::vector<std::string>& fields);

}  // namespace cactusdet

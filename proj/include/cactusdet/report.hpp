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

#include <filesystem>
#include <string>
#include <vector>

#include "cactusdet/bench.hpp"
#include "cactusdet/metrics.hpp"
#include "cactusdet/trainlog.hpp"

namespace cactusdet {

enum class ReportFormat { kText, kStructured, kCsv };
ReportFormat report_format_from_name(std::string_view name);

/// Everything one comparison document is built from: comparison rows plus
/// any full evaluation reports to detail per class.
struct ReportBundle {
  std::vector<ComparisonEntry> entries;
  std::vector<std::pair<std::string, EvalReport>> eval_reports;  // name -> report
};

/// One comparison column described by a `key = value` entry file. Literal
/// keys: name, map50, loss, training_time_hours, test_time_ms. Artifact
/// keys (paths resolved against the entry file's directory): eval_report
/// (fills map50), trainlog_summary (fills loss from the final row's total
/// loss), latency_report (fills test_time_ms from the mean). Literals win
/// over artifacts.
ComparisonEntry parse_report_entry(const std::string& text, const std::filesystem::path& base_dir);
ComparisonEntry load_report_entry(const std::filesystem::path& path);

/// Renders the bundle: a comparison table in Table-style layout (metric
/// rows, one column per backend), plus per-class detail for each attached
/// evaluation report in the text format. Deterministic output.
std::string generate_report(const ReportBundle& bundle, ReportFormat format);

/// Re-reads an evaluation report written by serialize_eval_report.
EvalReport parse_eval_report(const std::string& text);

}  // namespace cactusdet

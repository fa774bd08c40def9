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

#include "cactusdet/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "cactusdet/error.hpp"
#include "cactusdet/version.hpp"

namespace cactusdet {

namespace {

using nlohmann::json;

void fill_stats(LatencyReport& report) {
  std::vector<double> values;
  values.reserve(report.samples.size());
  for (const LatencyReport::Sample& s : report.samples) values.push_back(s.ms);
  std::sort(values.begin(), values.end());

  const std::size_t n = values.size();
  double sum = 0;
  for (double v : values) sum += v;
  report.mean_ms = sum / static_cast<double>(n);
  report.median_ms = n % 2 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2;
  const std::size_t rank = static_cast<std::size_t>(
      std::ceil(0.95 * static_cast<double>(n)));
  report.p95_ms = values[std::max<std::size_t>(rank, 1) - 1];
  report.min_ms = values.front();
  report.max_ms = values.back();
}

/// "1.5" -> "1.5", "19" -> "19", "0.02042" -> "0.02042"
std::string format_metric(double value) {
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%g", value);
  return buffer;
}

std::string format_map(double value) {
  char buffer[48];
  std::snprintf(buffer, sizeof(buffer), "%.4f", value);
  return buffer;
}

}  // namespace

LatencyReport measure(DetectorBackend& backend, const DatasetManifest& manifest,
                      std::size_t warmup, std::size_t repeats,
                      std::optional<Split> split_filter) {
  if (repeats < 1) throw UsageError("measure: repeats must be >= 1");

  std::vector<const ImageRecord*> records;
  for (const ImageRecord& record : manifest.records) {
    if (split_filter) {
      const auto assigned = manifest.assignment(record.image_id);
      if (!assigned || *assigned != *split_filter) continue;
    }
    records.push_back(&record);
  }
  if (records.empty()) throw ValidationError("measure: no records to measure");
  std::sort(records.begin(), records.end(),
            [](const ImageRecord* a, const ImageRecord* b) { return a->image_id < b->image_id; });

  LatencyReport report;
  report.backend = backend.name();
  report.image_count = records.size();
  report.repeats = repeats;
  report.warmup_excluded = warmup;

  for (std::size_t i = 0; i < warmup; ++i) {
    backend.detect(*records[i % records.size()]);
  }

  for (const ImageRecord* record : records) {
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto start = std::chrono::steady_clock::now();
      backend.detect(*record);
      const auto stop = std::chrono::steady_clock::now();
      report.samples.push_back(
          {record->image_id, r, std::chrono::duration<double, std::milli>(stop - start).count()});
    }
  }
  fill_stats(report);
  return report;
}

std::string serialize_latency_report(const LatencyReport& report) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["backend"] = report.backend;
  j["image_count"] = report.image_count;
  j["repeats"] = report.repeats;
  j["warmup_excluded"] = report.warmup_excluded;
  j["sample_count"] = report.samples.size();
  j["mean_ms"] = report.mean_ms;
  j["median_ms"] = report.median_ms;
  j["p95_ms"] = report.p95_ms;
  j["min_ms"] = report.min_ms;
  j["max_ms"] = report.max_ms;
  j["timing_scope"] = "full detect call per image, wall clock, serialized";
  json samples = json::array();
  for (const LatencyReport::Sample& s : report.samples) {
    samples.push_back({{"image_id", s.image_id}, {"repeat", s.repeat}, {"ms", s.ms}});
  }
  j["samples"] = std::move(samples);
  return j.dump(2) + "\n";
}

LatencyReport parse_latency_report(const std::string& text) {
  LatencyReport report;
  try {
    const json j = json::parse(text);
    report.backend = j.at("backend").get<std::string>();
    report.image_count = j.at("image_count").get<std::size_t>();
    report.repeats = j.at("repeats").get<std::size_t>();
    report.warmup_excluded = j.at("warmup_excluded").get<std::size_t>();
    report.mean_ms = j.at("mean_ms").get<double>();
    report.median_ms = j.at("median_ms").get<double>();
    report.p95_ms = j.at("p95_ms").get<double>();
    report.min_ms = j.at("min_ms").get<double>();
    report.max_ms = j.at("max_ms").get<double>();
    for (const json& s : j.value("samples", json::array())) {
      report.samples.push_back({s.at("image_id").get<std::string>(),
                                s.at("repeat").get<std::size_t>(), s.at("ms").get<double>()});
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("latency report: ") + e.what());
  }
  return report;
}

std::string latency_samples_csv(const LatencyReport& report) {
  std::string out = "image_id,repeat,ms\n";
  for (const LatencyReport::Sample& s : report.samples) {
    out += s.image_id + ',' + std::to_string(s.repeat) + ',' + format_double_shortest(s.ms) + '\n';
  }
  return out;
}

std::string render_latency_text(const LatencyReport& report) {
  char value[48];
  std::vector<std::pair<std::string, std::string>> rows;
  rows.emplace_back("Backend", report.backend);
  rows.emplace_back("Images", std::to_string(report.image_count));
  rows.emplace_back("Repeats", std::to_string(report.repeats));
  rows.emplace_back("Warmup excluded", std::to_string(report.warmup_excluded));
  rows.emplace_back("Samples", std::to_string(report.samples.size()));
  auto ms = [&](double v) {
    std::snprintf(value, sizeof(value), "%.3f ms", v);
    return std::string(value);
  };
  rows.emplace_back("Mean", ms(report.mean_ms));
  rows.emplace_back("Median", ms(report.median_ms));
  rows.emplace_back("p95", ms(report.p95_ms));
  rows.emplace_back("Min", ms(report.min_ms));
  rows.emplace_back("Max", ms(report.max_ms));

  std::size_t width = 0;
  for (const auto& [label, cell] : rows) width = std::max(width, label.size());
  std::string out;
  for (const auto& [label, cell] : rows) {
    out += label;
    out.append(width - label.size(), ' ');
    out += "  " + cell + "\n";
  }
  return out;
}

ComparisonTable compare(const std::vector<ComparisonEntry>& entries) {
  if (entries.empty()) throw UsageError("compare: at least one entry is required");
  bool any_metric = false;
  for (const ComparisonEntry& entry : entries) {
    if (entry.name.empty()) throw ValidationError("comparison entry without a name");
    any_metric = any_metric || entry.map50 || entry.loss || entry.training_time_hours ||
                 entry.test_time_ms;
  }
  if (!any_metric) throw ValidationError("comparison entries carry no metrics");
  return ComparisonTable{entries};
}

std::string render_comparison_text(const ComparisonTable& table) {
  std::vector<std::vector<std::string>> columns;
  std::vector<std::string> labels = {"Parameter", "mAP@.5", "Loss", "Training Time",
                                     "Test Time per image"};
  columns.push_back(labels);
  for (const ComparisonEntry& entry : table.entries) {
    std::vector<std::string> column;
    column.push_back(entry.name);
    column.push_back(entry.map50 ? format_map(*entry.map50) : "-");
    column.push_back(entry.loss ? format_metric(*entry.loss) : "-");
    column.push_back(entry.training_time_hours ? format_metric(*entry.training_time_hours) + " Hours"
                                               : "-");
    column.push_back(entry.test_time_ms ? format_metric(*entry.test_time_ms) + " milliseconds"
                                        : "-");
    columns.push_back(std::move(column));
  }

  std::vector<std::size_t> widths(columns.size(), 0);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    for (const std::string& cell : columns[c]) widths[c] = std::max(widths[c], cell.size());
  }

  std::string out;
  for (std::size_t row = 0; row < labels.size(); ++row) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const std::string& cell = columns[c][row];
      out += cell;
      if (c + 1 < columns.size()) {
        out.append(widths[c] - cell.size(), ' ');
        out += "  ";
      }
    }
    out += '\n';
  }
  return out;
}

std::string comparison_csv(const ComparisonTable& table) {
  std::string out = "name,map50,loss,training_time_hours,test_time_ms\n";
  for (const ComparisonEntry& entry : table.entries) {
    out += entry.name + ',';
    out += (entry.map50 ? format_double_shortest(*entry.map50) : std::string()) + ',';
    out += (entry.loss ? format_double_shortest(*entry.loss) : std::string()) + ',';
    out += (entry.training_time_hours ? format_double_shortest(*entry.training_time_hours)
                                      : std::string()) +
           ',';
    out += (entry.test_time_ms ? format_double_shortest(*entry.test_time_ms) : std::string()) + '\n';
  }
  return out;
}

std::string serialize_comparison(const ComparisonTable& table) {
  json entries = json::array();
  for (const ComparisonEntry& entry : table.entries) {
    json e;
    e["name"] = entry.name;
    e["map50"] = entry.map50 ? json(*entry.map50) : json(nullptr);
    e["loss"] = entry.loss ? json(*entry.loss) : json(nullptr);
    e["training_time_hours"] =
        entry.training_time_hours ? json(*entry.training_time_hours) : json(nullptr);
    e["test_time_ms"] = entry.test_time_ms ? json(*entry.test_time_ms) : json(nullptr);
    entries.push_back(std::move(e));
  }
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["entries"] = std::move(entries);
  return j.dump(2) + "\n";
}

}  // namespace cactusdet

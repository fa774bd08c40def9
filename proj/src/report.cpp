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

#include "cactusdet/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cactusdet/error.hpp"
#include "cactusdet/version.hpp"

namespace cactusdet {

namespace {

using nlohmann::json;

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r\n");
  return text.substr(begin, end - begin + 1);
}

double parse_number(const std::string& value, const std::string& key) {
  double parsed = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ParseError("entry key '" + key + "': non-numeric value '" + value + "'");
  }
  return parsed;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

ReportFormat report_format_from_name(std::string_view name) {
  if (name == "text") return ReportFormat::kText;
  if (name == "structured") return ReportFormat::kStructured;
  if (name == "csv") return ReportFormat::kCsv;
  throw UsageError("unknown report format '" + std::string(name) +
                   "' (expected text, structured or csv)");
}

ComparisonEntry parse_report_entry(const std::string& text, const std::filesystem::path& base_dir) {
  ComparisonEntry entry;
  std::optional<double> eval_map50;
  std::optional<double> summary_loss;
  std::optional<double> latency_mean;
  std::optional<double> literal_map50, literal_loss, literal_training_time, literal_test_time;

  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw ParseError("entry line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(trimmed.substr(0, eq));
    const std::string value = trim(trimmed.substr(eq + 1));
    auto resolve = [&](const std::string& p) {
      const std::filesystem::path path(p);
      return path.is_absolute() ? path : base_dir / path;
    };
    if (key == "name") {
      entry.name = value;
    } else if (key == "map50") {
      literal_map50 = parse_number(value, key);
    } else if (key == "loss") {
      literal_loss = parse_number(value, key);
    } else if (key == "training_time_hours") {
      literal_training_time = parse_number(value, key);
    } else if (key == "test_time_ms") {
      literal_test_time = parse_number(value, key);
    } else if (key == "eval_report") {
      eval_map50 = parse_eval_report(read_file(resolve(value))).map50;
    } else if (key == "trainlog_summary") {
      summary_loss = parse_trainlog_summary(read_file(resolve(value))).final_row.total_loss();
    } else if (key == "latency_report") {
      latency_mean = parse_latency_report(read_file(resolve(value))).mean_ms;
    } else {
      throw ParseError("entry line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  if (entry.name.empty()) throw ValidationError("report entry has no name");
  entry.map50 = literal_map50 ? literal_map50 : eval_map50;
  entry.loss = literal_loss ? literal_loss : summary_loss;
  entry.training_time_hours = literal_training_time;
  entry.test_time_ms = literal_test_time ? literal_test_time : latency_mean;
  return entry;
}

ComparisonEntry load_report_entry(const std::filesystem::path& path) {
  return parse_report_entry(read_file(path), path.parent_path());
}

std::string generate_report(const ReportBundle& bundle, ReportFormat format) {
  if (bundle.entries.empty() && bundle.eval_reports.empty()) {
    throw UsageError("generate_report: no inputs");
  }

  if (format == ReportFormat::kCsv) {
    if (bundle.entries.empty()) throw UsageError("csv report needs comparison entries");
    return comparison_csv(compare(bundle.entries));
  }

  if (format == ReportFormat::kStructured) {
    json j;
    j["schema_version"] = kReportSchemaVersion;
    if (!bundle.entries.empty()) {
      j["comparison"] = json::parse(serialize_comparison(compare(bundle.entries)));
    }
    json reports = json::object();
    for (const auto& [name, report] : bundle.eval_reports) {
      reports[name] = json::parse(serialize_eval_report(report));
    }
    if (!bundle.eval_reports.empty()) j["eval_reports"] = std::move(reports);
    return j.dump(2) + "\n";
  }

  std::string out;
  if (!bundle.entries.empty()) {
    out += render_comparison_text(compare(bundle.entries));
  }
  for (const auto& [name, report] : bundle.eval_reports) {
    if (!out.empty()) out += '\n';
    out += name + "\n";
    out += render_eval_report_text(report);
  }
  return out;
}

EvalReport parse_eval_report(const std::string& text) {
  EvalReport report;
  try {
    const json j = json::parse(text);
    const json& config = j.at("config");
    report.config.iou_threshold = config.at("iou_threshold").get<double>();
    report.config.confidence_threshold = config.at("confidence_threshold").get<double>();
    report.config.interpolation =
        interpolation_from_name(config.at("interpolation").get<std::string>());
    report.precision = j.at("precision").get<double>();
    report.recall = j.at("recall").get<double>();
    report.map50 = j.at("map50").get<double>();
    report.map50_95 = j.at("map50_95").get<double>();
    const auto thresholds = j.at("iou_thresholds").get<std::vector<double>>();
    const auto per_threshold = j.at("per_threshold").get<std::vector<double>>();
    if (thresholds.size() != report.thresholds.size() ||
        per_threshold.size() != report.per_threshold.size()) {
      throw ParseError("eval report: expected 10 IoU thresholds");
    }
    std::copy(thresholds.begin(), thresholds.end(), report.thresholds.begin());
    std::copy(per_threshold.begin(), per_threshold.end(), report.per_threshold.begin());

    for (const json& c : j.at("classes")) {
      EvalReport::ClassEntry entry;
      entry.class_id = c.at("class_id").get<int>();
      entry.name = c.at("name").get<std::string>();
      entry.gt_count = c.at("gt_count").get<std::size_t>();
      entry.counts.class_id = entry.class_id;
      entry.counts.tp = c.at("tp").get<std::size_t>();
      entry.counts.fp = c.at("fp").get<std::size_t>();
      entry.counts.fn = c.at("fn").get<std::size_t>();
      entry.counts.tn_images = c.at("tn_images").get<std::size_t>();
      if (!c.at("ap50").is_null()) entry.ap50 = c.at("ap50").get<double>();
      for (const json& ap : c.at("ap_per_threshold")) {
        entry.ap_per_threshold.push_back(ap.is_null() ? std::nullopt
                                                      : std::optional(ap.get<double>()));
      }
      report.classes.push_back(std::move(entry));
    }

    const json& confusion = j.at("confusion");
    report.confusion.cells = confusion.at("cells").get<std::vector<std::vector<std::size_t>>>();
    report.confusion.missed = confusion.at("missed").get<std::vector<std::size_t>>();
    report.confusion.ghost = confusion.at("ghost").get<std::vector<std::size_t>>();
    report.confusion.num_classes = report.confusion.missed.size();
    report.confusion.iou_threshold = report.config.iou_threshold;
    report.confusion.confidence_threshold = report.config.confidence_threshold;
  } catch (const json::exception& e) {
    throw ParseError(std::string("eval report: ") + e.what());
  }
  return report;
}

}  // namespace cactusdet

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

#include "cactusdet/trainlog.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "cactusdet/annotations.hpp"
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

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

double parse_value(const std::string& field, int line_no, const std::string& column) {
  double value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": non-numeric " + column + " '" + field +
                     "'");
  }
  return value;
}

void set_field(TrainLogRow& row, const std::string& column, double value, int line_no) {
  auto range_check = [&](double lo, double hi) {
    if (value < lo || value > hi) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + column + " " +
                            format_double_shortest(value) + " outside [" +
                            format_double_shortest(lo) + ", " + format_double_shortest(hi) + "]");
    }
  };
  if (column == "epoch") {
    if (value < 0 || value != static_cast<double>(static_cast<long long>(value))) {
      throw ValidationError("line " + std::to_string(line_no) +
                            ": epoch must be a non-negative integer");
    }
    row.epoch = static_cast<int>(value);
  } else if (column == "box_loss" || column == "obj_loss" || column == "cls_loss") {
    if (value < 0) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + column +
                            " must be non-negative");
    }
    if (column == "box_loss") row.box_loss = value;
    if (column == "obj_loss") row.obj_loss = value;
    if (column == "cls_loss") row.cls_loss = value;
  } else if (column == "precision") {
    range_check(0, 1);
    row.precision = value;
  } else if (column == "recall") {
    range_check(0, 1);
    row.recall = value;
  } else if (column == "map50") {
    range_check(0, 1);
    row.map50 = value;
  } else if (column == "map50_95") {
    range_check(0, 1);
    row.map50_95 = value;
  } else {
    throw UsageError("unknown canonical column '" + column + "'");
  }
}

double get_field(const TrainLogRow& row, const std::string& column) {
  if (column == "epoch") return row.epoch;
  if (column == "box_loss") return row.box_loss;
  if (column == "obj_loss") return row.obj_loss;
  if (column == "cls_loss") return row.cls_loss;
  if (column == "precision") return row.precision;
  if (column == "recall") return row.recall;
  if (column == "map50") return row.map50;
  if (column == "map50_95") return row.map50_95;
  throw UsageError("unknown field '" + column + "'");
}

json row_to_json(const TrainLogRow& row) {
  return {{"epoch", row.epoch},         {"box_loss", row.box_loss},
          {"obj_loss", row.obj_loss},   {"cls_loss", row.cls_loss},
          {"precision", row.precision}, {"recall", row.recall},
          {"map50", row.map50},         {"map50_95", row.map50_95},
          {"total_loss", row.total_loss()}};
}

TrainLogRow row_from_json(const json& j) {
  TrainLogRow row;
  row.epoch = j.at("epoch").get<int>();
  row.box_loss = j.at("box_loss").get<double>();
  row.obj_loss = j.at("obj_loss").get<double>();
  row.cls_loss = j.at("cls_loss").get<double>();
  row.precision = j.at("precision").get<double>();
  row.recall = j.at("recall").get<double>();
  row.map50 = j.at("map50").get<double>();
  row.map50_95 = j.at("map50_95").get<double>();
  return row;
}

}  // namespace

const std::vector<std::string>& trainlog_columns() {
  static const std::vector<std::string> columns = {
      "epoch", "box_loss", "obj_loss", "cls_loss", "precision", "recall", "map50", "map50_95"};
  return columns;
}

ColumnAdapter builtin_column_adapter() {
  return {
      {"Epoch", "epoch"},
      {"Box loss", "box_loss"},
      {"Object loss", "obj_loss"},
      {"Class loss", "cls_loss"},
      {"P", "precision"},
      {"R", "recall"},
      {"mAP@.5", "map50"},
      {"mAP@.5:.95", "map50_95"},
      {"mAP@0.5", "map50"},
      {"mAP@0.5:0.95", "map50_95"},
      {"train/box_loss", "box_loss"},
      {"train/obj_loss", "obj_loss"},
      {"train/cls_loss", "cls_loss"},
      {"metrics/precision", "precision"},
      {"metrics/recall", "recall"},
      {"metrics/mAP_0.5", "map50"},
      {"metrics/mAP_0.5:0.95", "map50_95"},
  };
}

ColumnAdapter parse_column_adapter(const std::string& text) {
  ColumnAdapter adapter;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 'alias = canonical'");
    }
    const std::string alias = trim(trimmed.substr(0, eq));
    const std::string canonical = trim(trimmed.substr(eq + 1));
    if (std::find(trainlog_columns().begin(), trainlog_columns().end(), canonical) ==
        trainlog_columns().end()) {
      throw ParseError("line " + std::to_string(line_no) + ": '" + canonical +
                       "' is not a canonical column");
    }
    adapter[alias] = canonical;
  }
  return adapter;
}

std::vector<TrainLogRow> parse_trainlog(const std::string& csv_text,
                                        const ColumnAdapter& extra_adapter) {
  ColumnAdapter adapter = builtin_column_adapter();
  for (const auto& [alias, canonical] : extra_adapter) adapter[alias] = canonical;
  for (const std::string& canonical : trainlog_columns()) adapter[canonical] = canonical;

  std::istringstream stream(csv_text);
  std::string line;
  int line_no = 0;

  // Header: map each cell to a canonical column where the adapter knows it.
  std::vector<std::string> header;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    header = split_csv_line(trimmed);
    break;
  }
  if (header.empty()) throw ParseError("training log has no header row");

  std::vector<std::string> canonical_of_column(header.size());
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto it = adapter.find(header[i]);
    if (it == adapter.end()) continue;  // unknown extra column, ignored
    canonical_of_column[i] = it->second;
    position[it->second] = i;
  }
  for (const std::string& column : trainlog_columns()) {
    if (!position.count(column)) {
      throw ParseError("training log header is missing column '" + column + "'");
    }
  }

  std::vector<TrainLogRow> rows;
  while (std::getline(stream, line)) {
    ++line_no;
    const std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const auto fields = split_csv_line(trimmed);
    if (fields.size() != header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    TrainLogRow row;
    for (const std::string& column : trainlog_columns()) {
      const std::size_t i = position.at(column);
      set_field(row, column, parse_value(fields[i], line_no, column), line_no);
    }
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const TrainLogRow& a, const TrainLogRow& b) { return a.epoch < b.epoch; });
  return rows;
}

Criterion criterion_from_name(std::string_view name) {
  if (name == "map50") return Criterion::kMap50;
  if (name == "map50_95") return Criterion::kMap5095;
  if (name == "precision") return Criterion::kPrecision;
  if (name == "recall") return Criterion::kRecall;
  throw UsageError("unknown criterion '" + std::string(name) +
                   "' (expected map50, map50_95, precision or recall)");
}

std::string_view criterion_name(Criterion criterion) {
  switch (criterion) {
    case Criterion::kMap50: return "map50";
    case Criterion::kMap5095: return "map50_95";
    case Criterion::kPrecision: return "precision";
    case Criterion::kRecall: return "recall";
  }
  throw UsageError("invalid criterion value");
}

const TrainLogRow& best_epoch(const std::vector<TrainLogRow>& rows, Criterion criterion) {
  if (rows.empty()) throw UsageError("best_epoch: no rows");
  auto value = [&](const TrainLogRow& row) {
    switch (criterion) {
      case Criterion::kMap50: return row.map50;
      case Criterion::kMap5095: return row.map50_95;
      case Criterion::kPrecision: return row.precision;
      case Criterion::kRecall: return row.recall;
    }
    return 0.0;
  };
  const TrainLogRow* best = &rows.front();
  for (const TrainLogRow& row : rows) {
    // strict >: ties keep the earlier epoch (rows are epoch-sorted)
    const bool better = value(row) > value(*best) ||
                        (value(row) == value(*best) && row.epoch < best->epoch);
    if (better) best = &row;
  }
  return *best;
}

TrainLogSummary summarize(const std::vector<TrainLogRow>& rows) {
  if (rows.empty()) throw UsageError("summarize: no rows");
  std::vector<TrainLogRow> sorted = rows;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const TrainLogRow& a, const TrainLogRow& b) { return a.epoch < b.epoch; });
  TrainLogSummary summary;
  summary.row_count = sorted.size();
  summary.final_row = sorted.back();
  summary.best_map50 = best_epoch(sorted, Criterion::kMap50);
  summary.best_map50_95 = best_epoch(sorted, Criterion::kMap5095);
  summary.best_precision = best_epoch(sorted, Criterion::kPrecision);
  summary.best_recall = best_epoch(sorted, Criterion::kRecall);
  for (const TrainLogRow& row : sorted) summary.total_loss_series.push_back(row.total_loss());
  return summary;
}

std::string serialize_trainlog_summary(const TrainLogSummary& summary) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["row_count"] = summary.row_count;
  j["final"] = row_to_json(summary.final_row);
  j["best"] = {{"map50", row_to_json(summary.best_map50)},
               {"map50_95", row_to_json(summary.best_map50_95)},
               {"precision", row_to_json(summary.best_precision)},
               {"recall", row_to_json(summary.best_recall)}};
  j["total_loss_series"] = summary.total_loss_series;
  return j.dump(2) + "\n";
}

TrainLogSummary parse_trainlog_summary(const std::string& text) {
  TrainLogSummary summary;
  try {
    const json j = json::parse(text);
    summary.row_count = j.at("row_count").get<std::size_t>();
    summary.final_row = row_from_json(j.at("final"));
    summary.best_map50 = row_from_json(j.at("best").at("map50"));
    summary.best_map50_95 = row_from_json(j.at("best").at("map50_95"));
    summary.best_precision = row_from_json(j.at("best").at("precision"));
    summary.best_recall = row_from_json(j.at("best").at("recall"));
    summary.total_loss_series = j.value("total_loss_series", std::vector<double>{});
  } catch (const json::exception& e) {
    throw ParseError(std::string("trainlog summary: ") + e.what());
  }
  return summary;
}

std::string render_trainlog_summary_text(const TrainLogSummary& summary) {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof(line), "rows %zu, final epoch %d, final total loss %s\n",
                summary.row_count, summary.final_row.epoch,
                format_double_shortest(summary.final_row.total_loss()).c_str());
  out += line;
  auto best_line = [&](const char* label, const TrainLogRow& row, double value) {
    std::snprintf(line, sizeof(line), "best %-9s %s at epoch %d\n", label,
                  format_double_shortest(value).c_str(), row.epoch);
    out += line;
  };
  best_line("map50", summary.best_map50, summary.best_map50.map50);
  best_line("map50_95", summary.best_map50_95, summary.best_map50_95.map50_95);
  best_line("precision", summary.best_precision, summary.best_precision.precision);
  best_line("recall", summary.best_recall, summary.best_recall.recall);
  return out;
}

std::string export_series(const std::vector<TrainLogRow>& rows,
                          const std::vector<std::string>& fields) {
  if (fields.empty()) throw UsageError("export_series: field list is empty");
  for (const std::string& field : fields) {
    get_field(TrainLogRow{}, field);  // throws on unknown names
  }
  std::vector<TrainLogRow> sorted = rows;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const TrainLogRow& a, const TrainLogRow& b) { return a.epoch < b.epoch; });

  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  out += '\n';
  for (const TrainLogRow& row : sorted) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      if (fields[i] == "epoch") {
        out += std::to_string(row.epoch);
      } else {
        out += format_double_shortest(get_field(row, fields[i]));
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace cactusdet

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

#include "cactusdet/detector.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "cactusdet/error.hpp"
#include "cactusdet/rng.hpp"

namespace cactusdet {

namespace {

double parse_double(const std::string& field, int line_no, const char* what) {
  double value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": non-numeric " + what + " '" + field +
                     "'");
  }
  return value;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream stream(line);
  std::string field;
  while (stream >> field) fields.push_back(field);
  return fields;
}

}  // namespace

std::vector<Detection> nms(const std::vector<Detection>& detections, double iou_threshold,
                           bool class_aware) {
  if (!(iou_threshold > 0) || iou_threshold > 1) {
    throw UsageError("nms: iou_threshold must be in (0, 1]");
  }
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].confidence > detections[b].confidence;
  });

  std::vector<Detection> kept;
  std::vector<bool> suppressed(detections.size(), false);
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (suppressed[order[i]]) continue;
    const Detection& keep = detections[order[i]];
    kept.push_back(keep);
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (suppressed[order[j]]) continue;
      const Detection& other = detections[order[j]];
      if (class_aware && other.class_id != keep.class_id) continue;
      if (iou(keep.box, other.box) >= iou_threshold) suppressed[order[j]] = true;
    }
  }
  return kept;
}

std::vector<Detection> oracle_detect(const ImageRecord& record, const OracleConfig& config,
                                     std::size_t num_classes) {
  if (config.drop_rate < 0 || config.drop_rate > 1 || config.ghost_rate < 0 ||
      config.ghost_rate > 1 || config.misclass_rate < 0 || config.misclass_rate > 1) {
    throw UsageError("oracle rates must be in [0, 1]");
  }
  if (!(config.jitter_px >= 0) || !std::isfinite(config.jitter_px)) {
    throw UsageError("oracle jitter_px must be finite and non-negative");
  }
  if (config.confidence_floor < 0 || config.confidence_floor > 1) {
    throw UsageError("oracle confidence_floor must be in [0, 1]");
  }
  if (num_classes == 0) throw UsageError("oracle needs at least one class");

  RngStream rng = RngStream::from_keys({config.seed, fnv1a64(record.image_id)});
  const double w = record.width;
  const double h = record.height;

  std::vector<Detection> emitted;
  for (const Annotation& annotation : record.annotations) {
    if (rng.uniform_unit() < config.drop_rate) continue;
    Detection det;
    det.box = annotation.box;
    if (config.jitter_px > 0) {
      double lo_x = det.box.x_min + rng.uniform(-config.jitter_px, config.jitter_px);
      double lo_y = det.box.y_min + rng.uniform(-config.jitter_px, config.jitter_px);
      double hi_x = det.box.x_max + rng.uniform(-config.jitter_px, config.jitter_px);
      double hi_y = det.box.y_max + rng.uniform(-config.jitter_px, config.jitter_px);
      lo_x = std::clamp(lo_x, 0.0, w - 1);
      lo_y = std::clamp(lo_y, 0.0, h - 1);
      hi_x = std::clamp(hi_x, lo_x + 1, w);
      hi_y = std::clamp(hi_y, lo_y + 1, h);
      det.box = {lo_x, lo_y, hi_x, hi_y};
    }
    det.class_id = annotation.class_id;
    if (rng.uniform_unit() < config.misclass_rate && num_classes >= 2) {
      const auto offset = 1 + rng.uniform_int(num_classes - 1);
      det.class_id = static_cast<int>(
          (static_cast<std::size_t>(annotation.class_id) + offset) % num_classes);
    }
    det.confidence = rng.uniform(config.confidence_floor, 1.0);
    emitted.push_back(det);
  }

  // Ghost confidences sit below the median emitted confidence so a PR sweep
  // over a noisy oracle ranks real boxes first.
  double median = config.confidence_floor;
  if (!emitted.empty()) {
    std::vector<double> confidences;
    for (const Detection& d : emitted) confidences.push_back(d.confidence);
    std::sort(confidences.begin(), confidences.end());
    const std::size_t n = confidences.size();
    median = n % 2 ? confidences[n / 2] : (confidences[n / 2 - 1] + confidences[n / 2]) / 2;
  }

  std::vector<Detection> ghosts;
  for (std::size_t g = 0; g < record.annotations.size(); ++g) {
    if (rng.uniform_unit() >= config.ghost_rate) continue;
    const double x1 = rng.uniform(0, w);
    const double x2 = rng.uniform(0, w);
    const double y1 = rng.uniform(0, h);
    const double y2 = rng.uniform(0, h);
    double lo_x = std::clamp(std::min(x1, x2), 0.0, w - 1);
    double lo_y = std::clamp(std::min(y1, y2), 0.0, h - 1);
    double hi_x = std::clamp(std::max(x1, x2), lo_x + 1, w);
    double hi_y = std::clamp(std::max(y1, y2), lo_y + 1, h);
    Detection ghost;
    ghost.box = {lo_x, lo_y, hi_x, hi_y};
    ghost.class_id = static_cast<int>(rng.uniform_int(num_classes));
    ghost.confidence = rng.uniform_unit() * median;
    ghosts.push_back(ghost);
  }

  emitted.insert(emitted.end(), ghosts.begin(), ghosts.end());
  return emitted;
}

std::string SleepBackend::name() const {
  return "sleep:" + format_double_shortest(delay_ms_);
}

std::vector<Detection> SleepBackend::detect(const ImageRecord& record) {
  const auto start = std::chrono::steady_clock::now();
  const auto deadline = start + std::chrono::duration<double, std::milli>(delay_ms_);
  // Busy wait: sleep_for overshoots by scheduler quanta, which would blur
  // the programmed delay the harness tests assert on.
  while (std::chrono::steady_clock::now() < deadline) {
  }
  std::vector<Detection> detections;
  for (const Annotation& annotation : record.annotations) {
    detections.push_back({annotation.class_id, annotation.box, 1.0});
  }
  return detections;
}

PredictionSet parse_predictions(const std::string& text,
                                const std::optional<std::vector<std::string>>& known_ids) {
  PredictionSet set;
  std::set<std::string> known;
  if (known_ids) known.insert(known_ids->begin(), known_ids->end());
  std::set<std::string> unknown;

  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_fields(line);
    if (fields.size() != 7) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 7 fields, got " +
                       std::to_string(fields.size()));
    }
    Detection det;
    const std::string& image_id = fields[0];
    const double class_value = parse_double(fields[1], line_no, "class");
    if (class_value < 0 || class_value != std::floor(class_value)) {
      throw ParseError("line " + std::to_string(line_no) + ": class must be a non-negative integer");
    }
    det.class_id = static_cast<int>(class_value);
    det.confidence = parse_double(fields[2], line_no, "confidence");
    if (det.confidence < 0 || det.confidence > 1) {
      throw ValidationError("line " + std::to_string(line_no) + ": confidence " + fields[2] +
                            " outside [0, 1]");
    }
    det.box = {parse_double(fields[3], line_no, "x_min"), parse_double(fields[4], line_no, "y_min"),
               parse_double(fields[5], line_no, "x_max"), parse_double(fields[6], line_no, "y_max")};
    if (const auto why = box_violation(det.box)) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + *why);
    }
    if (known_ids && !known.count(image_id)) unknown.insert(image_id);
    set.by_image[image_id].push_back(det);
  }

  if (!unknown.empty()) {
    std::string offenders;
    for (const std::string& id : unknown) {
      if (!offenders.empty()) offenders += ", ";
      offenders += id;
    }
    throw ValidationError("predictions name unknown image ids: " + offenders);
  }
  return set;
}

PredictionSet load_predictions(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open predictions: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::vector<std::string> ids;
  for (const ImageRecord& record : manifest.records) ids.push_back(record.image_id);
  PredictionSet set = parse_predictions(buffer.str(), std::optional(ids));
  set.provenance = path.string();
  return set;
}

std::string serialize_predictions(const PredictionSet& predictions) {
  std::string out;
  for (const auto& [image_id, detections] : predictions.by_image) {
    for (const Detection& det : detections) {
      out += image_id + ' ' + std::to_string(det.class_id) + ' ' +
             format_double_shortest(det.confidence);
      const double coords[] = {det.box.x_min, det.box.y_min, det.box.x_max, det.box.y_max};
      for (double c : coords) {
        out += ' ';
        out += format_pixel_coord(c);
      }
      out += '\n';
    }
  }
  return out;
}

void save_predictions(const PredictionSet& predictions, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write predictions: " + path.string());
  out << serialize_predictions(predictions);
}

std::vector<Detection> FileReplayBackend::detect(const ImageRecord& record) {
  const auto it = predictions_.by_image.find(record.image_id);
  if (it == predictions_.by_image.end()) return {};
  return it->second;
}

std::vector<Detection> ExternalProcessBackend::detect(const ImageRecord& record) {
  namespace fs = std::filesystem;
  DatasetManifest slice;
  slice.records.push_back(record);

  const fs::path slice_path =
      fs::temp_directory_path() /
      ("cactusdet_slice_" + std::to_string(fnv1a64(record.image_id)) + ".jsonl");
  save_manifest(slice, slice_path);

  const std::string command = command_ + " " + slice_path.string();
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) {
    std::error_code ec;
    fs::remove(slice_path, ec);
    throw IoError("cannot spawn backend command: " + command);
  }
  std::string output;
  char buffer[4096];
  std::size_t got = 0;
  while ((got = std::fread(buffer, 1, sizeof(buffer), pipe)) > 0) {
    output.append(buffer, got);
  }
  const int status = ::pclose(pipe);
  std::error_code ec;
  fs::remove(slice_path, ec);
  if (status != 0) {
    throw IoError("backend command failed with status " + std::to_string(status) + ": " + command);
  }

  PredictionSet set = parse_predictions(output, std::vector<std::string>{record.image_id});
  const auto it = set.by_image.find(record.image_id);
  if (it == set.by_image.end()) return {};
  return it->second;
}

DetectorRun run_detector(DetectorBackend& backend, const DatasetManifest& manifest,
                         std::optional<Split> split_filter) {
  std::vector<const ImageRecord*> records;
  for (const ImageRecord& record : manifest.records) {
    if (split_filter) {
      const auto assigned = manifest.assignment(record.image_id);
      if (!assigned || *assigned != *split_filter) continue;
    }
    records.push_back(&record);
  }
  std::sort(records.begin(), records.end(),
            [](const ImageRecord* a, const ImageRecord* b) { return a->image_id < b->image_id; });

  DetectorRun run;
  run.predictions.provenance = backend.name();
  for (const ImageRecord* record : records) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<Detection> detections;
    try {
      detections = backend.detect(*record);
    } catch (const std::exception& e) {
      throw IoError("backend '" + backend.name() + "' failed on image '" + record->image_id +
                    "': " + e.what());
    }
    const auto stop = std::chrono::steady_clock::now();
    run.timings.push_back(
        {record->image_id, std::chrono::duration<double, std::milli>(stop - start).count()});
    run.predictions.by_image[record->image_id] = std::move(detections);
  }
  return run;
}

std::unique_ptr<DetectorBackend> make_backend(const std::string& spec,
                                              const DatasetManifest& manifest,
                                              const OracleConfig& oracle_config,
                                              std::size_t num_classes) {
  if (spec == "oracle") {
    return std::make_unique<OracleDetector>(oracle_config, num_classes);
  }
  if (spec.rfind("sleep:", 0) == 0) {
    const std::string arg = spec.substr(6);
    double delay_ms = 0;
    const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), delay_ms);
    if (ec != std::errc() || ptr != arg.data() + arg.size() || delay_ms < 0) {
      throw UsageError("bad sleep backend spec '" + spec + "' (expected sleep:<ms>)");
    }
    return std::make_unique<SleepBackend>(delay_ms);
  }
  if (spec.rfind("replay:", 0) == 0) {
    return std::make_unique<FileReplayBackend>(load_predictions(spec.substr(7), manifest));
  }
  if (spec.rfind("exec:", 0) == 0) {
    return std::make_unique<ExternalProcessBackend>(spec.substr(5));
  }
  throw UsageError("unknown backend spec '" + spec +
                   "' (expected oracle, sleep:<ms>, replay:<file> or exec:<command>)");
}

}  // namespace cactusdet

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

#include "cactusdet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cactusdet/error.hpp"
#include "cactusdet/rng.hpp"

namespace cactusdet {

namespace {

using nlohmann::json;

/// ceil(frac * n) with the binary-fraction noise stripped: 0.2 * 165 is
/// 33.000000000000007 in doubles and must ceil to 33, while a genuine 27.2
/// must still ceil to 28.
std::size_t ceil_count(double frac, std::size_t n) {
  const double x = frac * static_cast<double>(n);
  return static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
}

void validate_split_spec(const SplitSpec& spec) {
  if (!(spec.train_frac > 0) || !(spec.val_frac > 0) || !(spec.test_frac > 0)) {
    throw UsageError("split fractions must be positive");
  }
  const double sum = spec.train_frac + spec.val_frac + spec.test_frac;
  if (std::abs(sum - 1.0) > 1e-9) {
    throw UsageError("split fractions must sum to 1 (got " + format_double_shortest(sum) + ")");
  }
}

std::string rotated_path(const std::string& path, int angle) {
  if (path.empty()) return path;
  const std::filesystem::path p(path);
  std::filesystem::path out = p.parent_path();
  out /= p.stem().string() + "_r" + std::to_string(angle) + p.extension().string();
  return out.generic_string();
}

}  // namespace

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  throw UsageError("invalid split value");
}

Split split_from_name(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw UsageError("unknown split '" + std::string(name) + "' (expected train, val or test)");
}

const ImageRecord* DatasetManifest::find(const std::string& image_id) const {
  for (const ImageRecord& r : records) {
    if (r.image_id == image_id) return &r;
  }
  return nullptr;
}

std::optional<Split> DatasetManifest::assignment(const std::string& image_id) const {
  const auto it = assignments.find(image_id);
  if (it == assignments.end()) return std::nullopt;
  return it->second;
}

DatasetManifest split_dataset(const DatasetManifest& manifest, const SplitSpec& spec,
                              const ClassTaxonomy& taxonomy) {
  validate_split_spec(spec);

  // The unit being placed is either a record or, with group_augmented, the
  // group of one base image and all of its rotations.
  struct Unit {
    std::string key;                      // sort/shuffle key
    std::vector<const ImageRecord*> members;
  };
  std::map<std::string, Unit> units;
  std::map<std::string, const ImageRecord*> by_id;
  for (const ImageRecord& record : manifest.records) by_id[record.image_id] = &record;

  for (const ImageRecord& record : manifest.records) {
    std::string key = record.image_id;
    if (spec.group_augmented) {
      const auto it = manifest.lineage.find(record.image_id);
      if (it != manifest.lineage.end()) key = it->second.base_image_id;
    }
    units[key].key = key;
    units[key].members.push_back(&record);
  }

  // Stratum = class of the first annotation of the unit's defining record.
  std::map<int, std::vector<const Unit*>> strata;
  for (const auto& [key, unit] : units) {
    const ImageRecord* defining = by_id.count(key) ? by_id.at(key) : unit.members.front();
    if (defining->annotations.empty()) {
      throw ValidationError("record '" + defining->image_id +
                            "' has no annotations; cannot derive a stratum");
    }
    const int class_id = defining->annotations.front().class_id;
    if (!taxonomy.contains(class_id)) {
      throw ValidationError("record '" + defining->image_id + "' has unknown class " +
                            std::to_string(class_id));
    }
    strata[class_id].push_back(&unit);
  }

  DatasetManifest out = manifest;
  out.assignments.clear();

  for (auto& [class_id, class_units] : strata) {
    // Sorted before the seeded shuffle: assignments must not depend on the
    // record input order.
    std::sort(class_units.begin(), class_units.end(),
              [](const Unit* a, const Unit* b) { return a->key < b->key; });
    RngStream rng = RngStream::from_keys({spec.seed, static_cast<std::uint64_t>(class_id)});
    rng.shuffle(class_units);

    const std::size_t n = class_units.size();
    const std::size_t val_count = ceil_count(spec.val_frac, n);
    const std::size_t test_count = ceil_count(spec.test_frac, n);
    if (val_count + test_count > n) {
      throw ValidationError("class '" + taxonomy.by_id(class_id).name + "' has only " +
                            std::to_string(n) + " records; train count would be negative");
    }

    for (std::size_t i = 0; i < n; ++i) {
      Split split = Split::kTrain;
      if (i < val_count) {
        split = Split::kVal;
      } else if (i < val_count + test_count) {
        split = Split::kTest;
      }
      for (const ImageRecord* member : class_units[i]->members) {
        out.assignments[member->image_id] = split;
      }
    }
  }
  return out;
}

std::pair<BoundingBox, ImageDims> rotate_box(const BoundingBox& box, int angle_cw_degrees,
                                             ImageDims dims) {
  require_valid_box(box, "rotate_box");
  if (dims.width <= 0 || dims.height <= 0) {
    throw UsageError("rotate_box: image dimensions must be positive");
  }
  if (box.x_max > dims.width || box.y_max > dims.height) {
    throw ValidationError("rotate_box: box extends outside the image");
  }
  const double w = dims.width;
  const double h = dims.height;
  switch (angle_cw_degrees) {
    case 90:
      // (x, y) -> (H - y, x)
      return {{h - box.y_max, box.x_min, h - box.y_min, box.x_max}, {dims.height, dims.width}};
    case 180:
      // (x, y) -> (W - x, H - y)
      return {{w - box.x_max, h - box.y_max, w - box.x_min, h - box.y_min}, dims};
    case 270:
      // (x, y) -> (y, W - x)
      return {{box.y_min, w - box.x_max, box.y_max, w - box.x_min}, {dims.height, dims.width}};
    default:
      throw UsageError("rotate_box: angle must be 90, 180 or 270 (got " +
                       std::to_string(angle_cw_degrees) + ")");
  }
}

DatasetManifest augment_rotations(const DatasetManifest& manifest, const std::vector<int>& angles) {
  std::set<int> angle_set;
  for (int angle : angles) {
    if (angle != 90 && angle != 180 && angle != 270) {
      throw UsageError("augment_rotations: angle must be 90, 180 or 270 (got " +
                       std::to_string(angle) + ")");
    }
    angle_set.insert(angle);
  }
  for (const auto& [id, lineage] : manifest.lineage) {
    if (lineage.rotation_degrees != 0) {
      throw ValidationError("record '" + id + "' is already a rotation of '" +
                            lineage.base_image_id + "'; refusing to augment twice");
    }
  }

  DatasetManifest out;
  out.lineage = manifest.lineage;
  std::set<std::string> seen;
  for (const ImageRecord& base : manifest.records) {
    if (!seen.insert(base.image_id).second) {
      throw ValidationError("duplicate image_id '" + base.image_id + "'");
    }
    out.records.push_back(base);
    if (const auto split = manifest.assignment(base.image_id)) {
      out.assignments[base.image_id] = *split;
    }
    for (int angle : angle_set) {
      ImageRecord rotated;
      rotated.image_id = base.image_id + "_r" + std::to_string(angle);
      if (!seen.insert(rotated.image_id).second) {
        throw ValidationError("generated image_id '" + rotated.image_id + "' already exists");
      }
      rotated.relative_path = rotated_path(base.relative_path, angle);
      const ImageDims rotated_dims =
          (angle == 180) ? base.dims() : ImageDims{base.height, base.width};
      rotated.width = rotated_dims.width;
      rotated.height = rotated_dims.height;
      for (const Annotation& annotation : base.annotations) {
        rotated.annotations.push_back(
            {annotation.class_id, rotate_box(annotation.box, angle, base.dims()).first});
      }
      out.lineage[rotated.image_id] = {base.image_id, angle};
      if (const auto split = manifest.assignment(base.image_id)) {
        out.assignments[rotated.image_id] = *split;
      }
      out.records.push_back(std::move(rotated));
    }
  }
  return out;
}

std::size_t MaterializeSummary::total_labels() const {
  std::size_t total = 0;
  for (const auto& [split, count] : labels_written) total += count;
  return total;
}

MaterializeSummary materialize_layout(const DatasetManifest& manifest,
                                      const ClassTaxonomy& taxonomy,
                                      const std::filesystem::path& root,
                                      const MaterializeOptions& options) {
  namespace fs = std::filesystem;
  static constexpr Split kSplits[] = {Split::kTrain, Split::kVal, Split::kTest};

  for (const ImageRecord& record : manifest.records) {
    if (!manifest.assignment(record.image_id)) {
      throw ValidationError("record '" + record.image_id + "' has no split assignment");
    }
  }

  std::error_code ec;
  for (Split split : kSplits) {
    for (const char* kind : {"images", "labels"}) {
      fs::create_directories(root / kind / split_name(split), ec);
      if (ec) throw IoError("cannot create " + (root / kind).string() + ": " + ec.message());
    }
  }

  // image_id order keeps the summary and any collision report deterministic.
  std::vector<const ImageRecord*> ordered;
  for (const ImageRecord& record : manifest.records) ordered.push_back(&record);
  std::sort(ordered.begin(), ordered.end(),
            [](const ImageRecord* a, const ImageRecord* b) { return a->image_id < b->image_id; });

  MaterializeSummary summary;
  for (Split split : kSplits) summary.labels_written[split] = 0;
  std::set<std::string> used_stems;

  for (const ImageRecord* record : ordered) {
    const Split split = *manifest.assignment(record->image_id);
    const fs::path source(record->relative_path);
    std::string stem = source.stem().string();
    if (stem.empty()) stem = record->image_id;
    const std::string stem_key = std::string(split_name(split)) + "/" + stem;
    if (!used_stems.insert(stem_key).second) {
      throw ValidationError("label file name collision for stem '" + stem + "' in split " +
                            std::string(split_name(split)));
    }

    const fs::path label_path = root / "labels" / split_name(split) / (stem + ".txt");
    std::ofstream out(label_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + label_path.string());
    out << serialize_label_file(record->annotations, options.label_format, record->dims());
    out.close();
    ++summary.labels_written[split];

    bool copied = false;
    if (!options.images_root.empty() && !record->relative_path.empty()) {
      const fs::path image_source = options.images_root / source;
      if (fs::exists(image_source)) {
        fs::copy_file(image_source, root / "images" / split_name(split) / source.filename(),
                      fs::copy_options::overwrite_existing, ec);
        if (ec) throw IoError("cannot copy " + image_source.string() + ": " + ec.message());
        copied = true;
        ++summary.images_copied;
      }
    }
    if (!copied) summary.missing_images.push_back(record->image_id);
  }

  std::ofstream description(root / "dataset.yaml", std::ios::binary);
  if (!description) throw IoError("cannot write " + (root / "dataset.yaml").string());
  description << "train: images/train\n"
              << "val: images/val\n"
              << "test: images/test\n"
              << "nc: " << taxonomy.size() << "\n"
              << "names: [";
  for (std::size_t i = 0; i < taxonomy.classes().size(); ++i) {
    if (i) description << ", ";
    description << taxonomy.classes()[i].name;
  }
  description << "]\n";
  return summary;
}

SplitStats stats(const DatasetManifest& manifest, const ClassTaxonomy& taxonomy) {
  SplitStats result;
  for (const DiseaseClass& c : taxonomy.classes()) {
    SplitStats::Row row;
    row.class_id = c.id;
    row.name = c.name;
    result.per_class.push_back(row);
  }
  result.totals.name = "Total";

  for (const ImageRecord& record : manifest.records) {
    if (record.annotations.empty()) {
      throw ValidationError("record '" + record.image_id + "' has no annotations; no stratum");
    }
    const int class_id = record.annotations.front().class_id;
    SplitStats::Row& row = result.per_class.at(static_cast<std::size_t>(
        taxonomy.by_id(class_id).id));
    const auto split = manifest.assignment(record.image_id);
    if (!split) {
      ++row.unsplit;
    } else if (*split == Split::kTrain) {
      ++row.train;
    } else if (*split == Split::kVal) {
      ++row.val;
    } else {
      ++row.test;
    }
  }
  for (const SplitStats::Row& row : result.per_class) {
    result.totals.train += row.train;
    result.totals.val += row.val;
    result.totals.test += row.test;
    result.totals.unsplit += row.unsplit;
  }
  return result;
}

std::string render_stats_table(const SplitStats& stats) {
  const bool unsplit = stats.has_unsplit();
  std::vector<std::string> headers = {"Class", "Train", "Val", "Test"};
  if (unsplit) headers.push_back("Unsplit");
  headers.push_back("Total");

  std::vector<std::vector<std::string>> rows;
  auto add_row = [&](const SplitStats::Row& row) {
    std::vector<std::string> cells = {row.name, std::to_string(row.train),
                                      std::to_string(row.val), std::to_string(row.test)};
    if (unsplit) cells.push_back(std::to_string(row.unsplit));
    cells.push_back(std::to_string(row.total()));
    rows.push_back(std::move(cells));
  };
  for (const SplitStats::Row& row : stats.per_class) add_row(row);
  add_row(stats.totals);

  std::vector<std::size_t> widths(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) widths[c] = headers[c].size();
  for (const auto& cells : rows) {
    for (std::size_t c = 0; c < cells.size(); ++c) widths[c] = std::max(widths[c], cells[c].size());
  }

  std::string out;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == 0) {
        out += cells[c];
        if (cells.size() > 1) out.append(widths[c] - cells[c].size(), ' ');
      } else {
        out += "  ";
        out.append(widths[c] - cells[c].size(), ' ');
        out += cells[c];
      }
    }
    out += '\n';
  };
  emit(headers);
  for (const auto& cells : rows) emit(cells);
  return out;
}

std::string serialize_manifest(const DatasetManifest& manifest) {
  std::string out;
  for (const ImageRecord& record : manifest.records) {
    json j;
    j["image_id"] = record.image_id;
    j["path"] = record.relative_path;
    j["width"] = record.width;
    j["height"] = record.height;
    json annotations = json::array();
    for (const Annotation& a : record.annotations) {
      annotations.push_back(
          {{"class_id", a.class_id}, {"box", {a.box.x_min, a.box.y_min, a.box.x_max, a.box.y_max}}});
    }
    j["annotations"] = std::move(annotations);
    if (const auto split = manifest.assignment(record.image_id)) {
      j["split"] = std::string(split_name(*split));
    }
    const auto lineage_it = manifest.lineage.find(record.image_id);
    if (lineage_it != manifest.lineage.end()) {
      j["lineage"] = {{"base", lineage_it->second.base_image_id},
                      {"rotation", lineage_it->second.rotation_degrees}};
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

DatasetManifest parse_manifest(const std::string& text) {
  DatasetManifest manifest;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  std::set<std::string> seen;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      ImageRecord record;
      record.image_id = j.at("image_id").get<std::string>();
      record.relative_path = j.value("path", std::string());
      record.width = j.at("width").get<int>();
      record.height = j.at("height").get<int>();
      for (const json& a : j.value("annotations", json::array())) {
        const auto& box = a.at("box");
        if (!box.is_array() || box.size() != 4) {
          throw ValidationError("box must be an array of 4 coordinates");
        }
        record.annotations.push_back({a.at("class_id").get<int>(),
                                      {box[0].get<double>(), box[1].get<double>(),
                                       box[2].get<double>(), box[3].get<double>()}});
      }
      if (!seen.insert(record.image_id).second) {
        throw ValidationError("duplicate image_id '" + record.image_id + "'");
      }
      if (j.contains("split")) {
        manifest.assignments[record.image_id] = split_from_name(j.at("split").get<std::string>());
      }
      if (j.contains("lineage")) {
        Lineage lineage{j.at("lineage").at("base").get<std::string>(),
                        j.at("lineage").at("rotation").get<int>()};
        if (lineage.rotation_degrees != 0 && lineage.rotation_degrees != 90 &&
            lineage.rotation_degrees != 180 && lineage.rotation_degrees != 270) {
          throw ValidationError("lineage rotation must be 0, 90, 180 or 270");
        }
        manifest.lineage[record.image_id] = std::move(lineage);
      }
      manifest.records.push_back(std::move(record));
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const UsageError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  for (const auto& [id, lineage] : manifest.lineage) {
    if (!seen.count(lineage.base_image_id)) {
      throw ValidationError("lineage of '" + id + "' names missing base '" +
                            lineage.base_image_id + "'");
    }
  }
  return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest(buffer.str());
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  out << serialize_manifest(manifest);
}

}  // namespace cactusdet

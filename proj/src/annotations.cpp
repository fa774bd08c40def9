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

#include "cactusdet/annotations.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "cactusdet/error.hpp"

namespace cactusdet {

namespace {

std::string trim(std::string_view text) {
  const auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return "";
  const auto end = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(begin, end - begin + 1));
}

std::vector<std::string> split_whitespace(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) fields.emplace_back(line.substr(start, i - start));
  }
  return fields;
}

double parse_double_field(const std::string& field, int line_no, const char* what) {
  double value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": non-numeric " + what + " '" + field + "'");
  }
  return value;
}

int parse_class_field(const std::string& field, int line_no) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": non-numeric class '" + field + "'");
  }
  if (value < 0) {
    throw ParseError("line " + std::to_string(line_no) + ": negative class " + field);
  }
  return value;
}

void require_dims(const std::optional<ImageDims>& dims, const char* op) {
  if (!dims) {
    throw UsageError(std::string(op) + ": normalized_center requires image dimensions");
  }
  if (dims->width <= 0 || dims->height <= 0) {
    throw UsageError(std::string(op) + ": image dimensions must be positive");
  }
}

}  // namespace

std::optional<std::string> box_violation(const BoundingBox& box) {
  const double coords[] = {box.x_min, box.y_min, box.x_max, box.y_max};
  for (double c : coords) {
    if (!std::isfinite(c)) return "coordinate is not finite";
    if (c < 0) return "coordinate is negative";
  }
  if (!(box.x_min < box.x_max)) return "x_min must be < x_max (zero or negative width)";
  if (!(box.y_min < box.y_max)) return "y_min must be < y_max (zero or negative height)";
  return std::nullopt;
}

void require_valid_box(const BoundingBox& box, const std::string& context) {
  if (const auto why = box_violation(box)) {
    throw ValidationError(context.empty() ? *why : context + ": " + *why);
  }
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0 || ih <= 0) return 0.0;
  const double inter = iw * ih;
  return inter / (a.area() + b.area() - inter);
}

NormalizedBox to_normalized(const BoundingBox& box, ImageDims dims) {
  if (dims.width <= 0 || dims.height <= 0) {
    throw UsageError("to_normalized: image dimensions must be positive");
  }
  const double w = static_cast<double>(dims.width);
  const double h = static_cast<double>(dims.height);
  return {(box.x_min + box.x_max) / 2 / w, (box.y_min + box.y_max) / 2 / h,
          box.width() / w, box.height() / h};
}

BoundingBox to_corner(const NormalizedBox& box, ImageDims dims) {
  if (dims.width <= 0 || dims.height <= 0) {
    throw UsageError("to_corner: image dimensions must be positive");
  }
  const double w = static_cast<double>(dims.width);
  const double h = static_cast<double>(dims.height);
  return {box.cx * w - box.w * w / 2, box.cy * h - box.h * h / 2,
          box.cx * w + box.w * w / 2, box.cy * h + box.h * h / 2};
}

ClassTaxonomy::ClassTaxonomy(std::vector<DiseaseClass> classes) : classes_(std::move(classes)) {
  if (classes_.empty()) throw ValidationError("taxonomy must have at least one class");
  std::set<std::string> names;
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    const DiseaseClass& c = classes_[i];
    if (c.id != static_cast<int>(i)) {
      throw ValidationError("taxonomy ids must be contiguous from 0; got id " +
                            std::to_string(c.id) + " at position " + std::to_string(i));
    }
    if (c.name.empty()) throw ValidationError("class " + std::to_string(c.id) + ": empty name");
    if (c.name.find_first_of(" \t\r\n") != std::string::npos) {
      throw ValidationError("class name '" + c.name + "' contains whitespace");
    }
    if (!names.insert(c.name).second) {
      throw ValidationError("duplicate class name '" + c.name + "'");
    }
  }
}

ClassTaxonomy ClassTaxonomy::default_taxonomy() {
  return ClassTaxonomy({
      {0, "anthracnose", "Anthracnose",
       "Small dark spots that spread into sunken black lesions on the stem; "
       "wounds may weep dark latex."},
      {1, "canker", "Canker",
       "Small dots that swell into raised brown wounds and crack into rough, "
       "hard scabs with a yellow-orange rim."},
      {2, "lack_of_care", "Lack of care",
       "Wrinkled, soft or scarred skin, dull or browning color, and slowly "
       "growing small black spots."},
      {3, "aphid", "Aphid",
       "Small sap-feeding insects hiding in hard-to-see spots; the plant "
       "withers and growth stalls."},
      {4, "normal", "Normal", "Healthy plant with no visible disease symptoms."},
      {5, "plant_rusts", "Plant rusts",
       "Yellow-orange specks like iron rust, often starting near the trunk "
       "base; wounds may protrude and crack."},
  });
}

const DiseaseClass& ClassTaxonomy::by_id(int id) const {
  if (!contains(id)) throw ValidationError("unknown class id " + std::to_string(id));
  return classes_[static_cast<std::size_t>(id)];
}

const DiseaseClass* ClassTaxonomy::find_by_name(std::string_view name) const {
  for (const DiseaseClass& c : classes_) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

ClassTaxonomy parse_taxonomy(const std::string& text) {
  std::vector<DiseaseClass> classes;
  DiseaseClass current;
  bool in_block = false;
  bool has_id = false;

  auto flush = [&] {
    if (!in_block) return;
    if (!has_id) throw ParseError("taxonomy block missing 'id'");
    if (current.display_name.empty()) current.display_name = current.name;
    classes.push_back(current);
    current = {};
    in_block = false;
    has_id = false;
  };

  std::istringstream stream(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "id") {
      current.id = parse_class_field(value, line_no);
      has_id = true;
      in_block = true;
    } else if (key == "name") {
      current.name = value;
      in_block = true;
    } else if (key == "display_name") {
      current.display_name = value;
      in_block = true;
    } else if (key == "symptom_summary") {
      current.symptom_summary = value;
      in_block = true;
    } else {
      throw ParseError("line " + std::to_string(line_no) + ": unknown taxonomy key '" + key + "'");
    }
  }
  flush();
  return ClassTaxonomy(std::move(classes));
}

std::string serialize_taxonomy(const ClassTaxonomy& taxonomy) {
  std::string out;
  bool first = true;
  for (const DiseaseClass& c : taxonomy.classes()) {
    if (!first) out += "\n";
    first = false;
    out += "id = " + std::to_string(c.id) + "\n";
    out += "name = " + c.name + "\n";
    out += "display_name = " + c.display_name + "\n";
    out += "symptom_summary = " + c.symptom_summary + "\n";
  }
  return out;
}

ClassTaxonomy load_taxonomy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open taxonomy file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_taxonomy(buffer.str());
}

LabelFormat label_format_from_name(std::string_view name) {
  if (name == "corner_pixel") return LabelFormat::kCornerPixel;
  if (name == "normalized_center") return LabelFormat::kNormalizedCenter;
  throw UsageError("unknown label format '" + std::string(name) +
                   "' (expected corner_pixel or normalized_center)");
}

std::string_view label_format_name(LabelFormat format) {
  return format == LabelFormat::kCornerPixel ? "corner_pixel" : "normalized_center";
}

std::vector<Annotation> parse_label_file(const std::string& text, LabelFormat format,
                                         std::optional<ImageDims> dims) {
  if (format == LabelFormat::kNormalizedCenter) require_dims(dims, "parse_label_file");

  std::vector<Annotation> annotations;
  std::istringstream stream(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_whitespace(line);
    if (fields.size() != 5) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 5 fields, got " +
                       std::to_string(fields.size()));
    }
    Annotation annotation;
    annotation.class_id = parse_class_field(fields[0], line_no);
    double v[4];
    static constexpr const char* kCornerNames[] = {"x_min", "y_min", "x_max", "y_max"};
    static constexpr const char* kCenterNames[] = {"cx", "cy", "w", "h"};
    const auto names = format == LabelFormat::kCornerPixel ? kCornerNames : kCenterNames;
    for (int i = 0; i < 4; ++i) v[i] = parse_double_field(fields[i + 1], line_no, names[i]);

    if (format == LabelFormat::kCornerPixel) {
      annotation.box = {v[0], v[1], v[2], v[3]};
    } else {
      for (int i = 0; i < 4; ++i) {
        if (v[i] < 0 || v[i] > 1) {
          throw ValidationError("line " + std::to_string(line_no) + ": normalized " +
                                std::string(names[i]) + " " + fields[i + 1] + " outside [0, 1]");
        }
      }
      annotation.box = to_corner({v[0], v[1], v[2], v[3]}, *dims);
    }
    if (const auto why = box_violation(annotation.box)) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + *why);
    }
    annotations.push_back(annotation);
  }
  return annotations;
}

std::string serialize_label_file(const std::vector<Annotation>& annotations, LabelFormat format,
                                 std::optional<ImageDims> dims) {
  if (format == LabelFormat::kNormalizedCenter) require_dims(dims, "serialize_label_file");

  std::string out;
  for (const Annotation& annotation : annotations) {
    require_valid_box(annotation.box, "serialize_label_file");
    out += std::to_string(annotation.class_id);
    if (format == LabelFormat::kCornerPixel) {
      const double coords[] = {annotation.box.x_min, annotation.box.y_min, annotation.box.x_max,
                               annotation.box.y_max};
      for (double c : coords) {
        out += ' ';
        out += format_pixel_coord(c);
      }
    } else {
      const double w = dims->width;
      const double h = dims->height;
      if (annotation.box.x_min < 0 || annotation.box.y_min < 0 || annotation.box.x_max > w ||
          annotation.box.y_max > h) {
        throw ValidationError("serialize_label_file: box exceeds image bounds under normalized_center");
      }
      const NormalizedBox n = to_normalized(annotation.box, *dims);
      const double values[] = {n.cx, n.cy, n.w, n.h};
      for (double v : values) {
        out += ' ';
        out += format_double_shortest(v);
      }
    }
    out += '\n';
  }
  return out;
}

std::vector<Violation> validate_record(const ImageRecord& record, const ClassTaxonomy& taxonomy) {
  std::vector<Violation> violations;
  auto add = [&](const std::string& field, const std::string& message) {
    violations.push_back({record.image_id, field, message});
  };

  if (record.image_id.empty()) add("image_id", "must be non-empty");
  if (record.width <= 0) add("width", "must be a positive pixel count");
  if (record.height <= 0) add("height", "must be a positive pixel count");

  for (std::size_t i = 0; i < record.annotations.size(); ++i) {
    const Annotation& a = record.annotations[i];
    const std::string field = "annotations[" + std::to_string(i) + "]";
    if (!taxonomy.contains(a.class_id)) {
      add(field + ".class_id", "unknown class " + std::to_string(a.class_id) + " (taxonomy has " +
                                   std::to_string(taxonomy.size()) + " classes)");
    }
    if (const auto why = box_violation(a.box)) {
      add(field + ".box", *why);
    } else if (record.width > 0 && record.height > 0) {
      if (a.box.x_max > record.width || a.box.y_max > record.height) {
        add(field + ".box", "box extends outside the image");
      }
    }
  }
  return violations;
}

std::string format_double_shortest(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

std::string format_pixel_coord(double value) {
  if (std::isfinite(value) && value == std::floor(value) && std::abs(value) < 1e15) {
    return std::to_string(static_cast<long long>(value));
  }
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6f", value);
  return buffer;
}

}  // namespace cactusdet

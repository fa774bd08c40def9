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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cactusdet {

/// Image width/height in pixels. Always positive.
struct ImageDims {
  int width = 0;
  int height = 0;
};

/// Axis-aligned rectangle in pixel coordinates, corner form:
/// (left x, top y, right x, bottom y). Valid boxes have strictly positive
/// area and finite, non-negative coordinates.
struct BoundingBox {
  double x_min = 0;
  double y_min = 0;
  double x_max = 0;
  double y_max = 0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Reason the box breaks an invariant, or nullopt for a valid box.
std::optional<std::string> box_violation(const BoundingBox& box);

/// Throws ValidationError when the box is invalid.
void require_valid_box(const BoundingBox& box, const std::string& context = "");

/// Intersection over union of two valid boxes. Symmetric, in [0, 1];
/// 1 for identical boxes, 0 for boxes with disjoint interiors.
double iou(const BoundingBox& a, const BoundingBox& b);

/// Box in normalized center form: (center x, center y, width, height),
/// all relative to the image dimensions and in [0, 1] for in-bounds boxes.
struct NormalizedBox {
  double cx = 0;
  double cy = 0;
  double w = 0;
  double h = 0;
};

NormalizedBox to_normalized(const BoundingBox& box, ImageDims dims);
BoundingBox to_corner(const NormalizedBox& box, ImageDims dims);

/// A ground-truth object: class id plus box.
struct Annotation {
  int class_id = 0;
  BoundingBox box;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

/// A predicted object: class id, box and a confidence score in [0, 1].
struct Detection {
  int class_id = 0;
  BoundingBox box;
  double confidence = 0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// One image with its dimensions and ground-truth annotations. No pixel
/// data ever enters this module; relative_path is bookkeeping for tools
/// that materialize directory layouts.
struct ImageRecord {
  std::string image_id;
  std::string relative_path;
  int width = 0;
  int height = 0;
  std::vector<Annotation> annotations;

  ImageDims dims() const { return {width, height}; }

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

/// One disease class of the taxonomy. name is a whitespace-free identifier;
/// display_name and symptom_summary are free text.
struct DiseaseClass {
  int id = 0;
  std::string name;
  std::string display_name;
  std::string symptom_summary;
};

/// Ordered set of disease classes with ids 0..K-1.
class ClassTaxonomy {
 public:
  /// Validates: at least one class, ids contiguous from 0 in list order,
  /// names non-empty, whitespace-free and unique.
  explicit ClassTaxonomy(std::vector<DiseaseClass> classes);

  /// The built-in six-class cactus disease taxonomy:
  /// 0 anthracnose, 1 canker, 2 lack_of_care, 3 aphid, 4 normal,
  /// 5 plant_rusts.
  static ClassTaxonomy default_taxonomy();

  std::size_t size() const { return classes_.size(); }
  const std::vector<DiseaseClass>& classes() const { return classes_; }
  bool contains(int id) const {
    return id >= 0 && static_cast<std::size_t>(id) < classes_.size();
  }
  const DiseaseClass& by_id(int id) const;
  const DiseaseClass* find_by_name(std::string_view name) const;

 private:
  std::vector<DiseaseClass> classes_;
};

/// Taxonomy file: `key = value` lines, one class per blank-line-separated
/// block, '#' comments. Keys: id, name, display_name, symptom_summary.
ClassTaxonomy parse_taxonomy(const std::string& text);
std::string serialize_taxonomy(const ClassTaxonomy& taxonomy);
ClassTaxonomy load_taxonomy(const std::filesystem::path& path);

/// Label-file formats. Never auto-detected: a corner-pixel file whose values
/// all happen to be <= 1 is indistinguishable from a normalized one.
enum class LabelFormat {
  kCornerPixel,       // "class x_min y_min x_max y_max", pixels
  kNormalizedCenter,  // "class cx cy w h", all geometry in [0, 1]
};

LabelFormat label_format_from_name(std::string_view name);
std::string_view label_format_name(LabelFormat format);

/// Parses a label file: one object per line, five whitespace-separated
/// fields; blank lines and lines starting with '#' are skipped. dims is
/// required for kNormalizedCenter. Errors carry the offending line number.
std::vector<Annotation> parse_label_file(const std::string& text, LabelFormat format,
                                         std::optional<ImageDims> dims = std::nullopt);

/// Inverse of parse_label_file. Corner coordinates print as integers when
/// integral, else with 6 decimals; normalized values print with shortest
/// round-trip digits. kNormalizedCenter requires dims and rejects boxes
/// that extend outside them.
std::string serialize_label_file(const std::vector<Annotation>& annotations, LabelFormat format,
                                 std::optional<ImageDims> dims = std::nullopt);

/// One broken invariant found by validate_record.
struct Violation {
  std::string image_id;
  std::string field;    // e.g. "annotations[2].box", "width"
  std::string message;  // rule broken
};

/// Checks every ImageRecord invariant against the taxonomy. Violations are
/// data, not failures: a well-formed record yields an empty list.
std::vector<Violation> validate_record(const ImageRecord& record, const ClassTaxonomy& taxonomy);

// Shared numeric formatting for text outputs.
std::string format_double_shortest(double value);  // shortest round-trip digits
std::string format_pixel_coord(double value);      // integer if integral, else %.6f

}  // namespace cactusdet

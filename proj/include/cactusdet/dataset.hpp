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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cactusdet/annotations.hpp"

namespace cactusdet {

enum class Split { kTrain, kVal, kTest };

std::string_view split_name(Split split);
Split split_from_name(std::string_view name);

/// Provenance of an augmented record: which base image it was derived from
/// and by which clockwise rotation (0, 90, 180 or 270 degrees).
struct Lineage {
  std::string base_image_id;
  int rotation_degrees = 0;

  friend bool operator==(const Lineage&, const Lineage&) = default;
};

/// The dataset as records plus split assignments and augmentation lineage.
/// image_ids are unique; assignment and lineage keys always refer to records
/// in the manifest.
struct DatasetManifest {
  std::vector<ImageRecord> records;
  std::map<std::string, Split> assignments;
  std::map<std::string, Lineage> lineage;

  const ImageRecord* find(const std::string& image_id) const;
  std::optional<Split> assignment(const std::string& image_id) const;
};

/// Split fractions and reproducibility controls. Fractions must be positive
/// and sum to 1 within 1e-9. With group_augmented, all rotations of one base
/// image land in the same split (off by default: the reference counts were
/// produced by splitting after augmentation).
struct SplitSpec {
  double train_frac = 0.6;
  double val_frac = 0.2;
  double test_frac = 0.2;
  std::uint64_t seed = 0;
  bool group_augmented = false;
};

/// Stratified split. A record's stratum is the class of its first
/// annotation. Per class of size n: val = ceil(val_frac*n),
/// test = ceil(test_frac*n), train = n - val - test (error when negative,
/// naming the class). Selection is a seed-deterministic shuffle of the
/// class's image_ids sorted beforehand, so the result does not depend on
/// record input order.
DatasetManifest split_dataset(const DatasetManifest& manifest, const SplitSpec& spec,
                              const ClassTaxonomy& taxonomy);

/// Rotates a box clockwise by 90, 180 or 270 degrees inside an image of the
/// given dimensions. Returns the rotated box and the rotated image
/// dimensions (swapped for 90/270). Area is preserved and in-bounds boxes
/// stay in-bounds.
std::pair<BoundingBox, ImageDims> rotate_box(const BoundingBox& box, int angle_cw_degrees,
                                             ImageDims dims);

/// Expands the manifest with rotated copies of every record: image_id
/// base + "_r{angle}", rotated boxes, swapped dims for 90/270, and a lineage
/// entry. Refuses manifests that already contain rotated records.
DatasetManifest augment_rotations(const DatasetManifest& manifest, const std::vector<int>& angles);

struct MaterializeOptions {
  LabelFormat label_format = LabelFormat::kCornerPixel;
  /// Where record.relative_path is resolved when copying image files.
  /// Leave empty to skip copying; missing files become summary entries.
  std::filesystem::path images_root;
};

struct MaterializeSummary {
  std::map<Split, std::size_t> labels_written;
  std::size_t images_copied = 0;
  std::vector<std::string> missing_images;  // image_ids, sorted
  std::size_t total_labels() const;
};

/// Writes the training-tool directory layout under root:
/// images/{train,val,test}, labels/{train,val,test} with one label file per
/// record (stem of relative_path, or image_id, + ".txt"), plus dataset.yaml
/// naming the split directories and ordered class names. Every record must
/// be assigned.
MaterializeSummary materialize_layout(const DatasetManifest& manifest,
                                      const ClassTaxonomy& taxonomy,
                                      const std::filesystem::path& root,
                                      const MaterializeOptions& options = {});

/// Per-class x per-split count table, plus totals.
struct SplitStats {
  struct Row {
    int class_id = -1;  // -1 for the totals row
    std::string name;
    std::size_t train = 0;
    std::size_t val = 0;
    std::size_t test = 0;
    std::size_t unsplit = 0;
    std::size_t total() const { return train + val + test + unsplit; }
  };
  std::vector<Row> per_class;  // ordered by class id
  Row totals;
  bool has_unsplit() const { return totals.unsplit > 0; }
};

SplitStats stats(const DatasetManifest& manifest, const ClassTaxonomy& taxonomy);

/// Aligned text table: one row per class plus a Total row. The Unsplit
/// column appears only when some record is unassigned.
std::string render_stats_table(const SplitStats& stats);

/// Manifest file: line-delimited JSON, one record per line, keys sorted.
std::string serialize_manifest(const DatasetManifest& manifest);
DatasetManifest parse_manifest(const std::string& text);
DatasetManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

}  // namespace cactusdet

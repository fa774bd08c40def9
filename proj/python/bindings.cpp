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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cactusdet/annotations.hpp"
#include "cactusdet/bench.hpp"
#include "cactusdet/cli.hpp"
#include "cactusdet/error.hpp"
#include "cactusdet/dataset.hpp"
#include "cactusdet/detector.hpp"
#include "cactusdet/metrics.hpp"
#include "cactusdet/report.hpp"
#include "cactusdet/trainlog.hpp"
#include "cactusdet/version.hpp"

#include <sstream>

namespace py = pybind11;
using namespace cactusdet;

namespace {

LabelFormat format_arg(const std::string& name) { return label_format_from_name(name); }

std::optional<ImageDims> dims_arg(const std::optional<std::pair<int, int>>& dims) {
  if (!dims) return std::nullopt;
  return ImageDims{dims->first, dims->second};
}

}  // namespace

PYBIND11_MODULE(_cactusdet, m) {
  m.doc() = "cactus disease dataset management and detection evaluation";
  m.attr("__version__") = kVersion;

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<BoundingBox>(m, "BoundingBox")
      .def(py::init<double, double, double, double>(), py::arg("x_min"), py::arg("y_min"),
           py::arg("x_max"), py::arg("y_max"))
      .def_readwrite("x_min", &BoundingBox::x_min)
      .def_readwrite("y_min", &BoundingBox::y_min)
      .def_readwrite("x_max", &BoundingBox::x_max)
      .def_readwrite("y_max", &BoundingBox::y_max)
      .def("width", &BoundingBox::width)
      .def("height", &BoundingBox::height)
      .def("area", &BoundingBox::area)
      .def("__eq__", [](const BoundingBox& a, const BoundingBox& b) { return a == b; })
      .def("__repr__", [](const BoundingBox& b) {
        std::ostringstream s;
        s << "BoundingBox(" << b.x_min << ", " << b.y_min << ", " << b.x_max << ", " << b.y_max
          << ")";
        return s.str();
      });

  py::class_<Annotation>(m, "Annotation")
      .def(py::init<int, BoundingBox>(), py::arg("class_id"), py::arg("box"))
      .def_readwrite("class_id", &Annotation::class_id)
      .def_readwrite("box", &Annotation::box)
      .def("__eq__", [](const Annotation& a, const Annotation& b) { return a == b; });

  py::class_<Detection>(m, "Detection")
      .def(py::init<int, BoundingBox, double>(), py::arg("class_id"), py::arg("box"),
           py::arg("confidence"))
      .def_readwrite("class_id", &Detection::class_id)
      .def_readwrite("box", &Detection::box)
      .def_readwrite("confidence", &Detection::confidence);

  py::class_<ImageRecord>(m, "ImageRecord")
      .def(py::init([](std::string image_id, std::string path, int width, int height,
                       std::vector<Annotation> annotations) {
             ImageRecord r;
             r.image_id = std::move(image_id);
             r.relative_path = std::move(path);
             r.width = width;
             r.height = height;
             r.annotations = std::move(annotations);
             return r;
           }),
           py::arg("image_id"), py::arg("path"), py::arg("width"), py::arg("height"),
           py::arg("annotations") = std::vector<Annotation>{})
      .def_readwrite("image_id", &ImageRecord::image_id)
      .def_readwrite("relative_path", &ImageRecord::relative_path)
      .def_readwrite("width", &ImageRecord::width)
      .def_readwrite("height", &ImageRecord::height)
      .def_readwrite("annotations", &ImageRecord::annotations);

  py::class_<DiseaseClass>(m, "DiseaseClass")
      .def_readonly("id", &DiseaseClass::id)
      .def_readonly("name", &DiseaseClass::name)
      .def_readonly("display_name", &DiseaseClass::display_name)
      .def_readonly("symptom_summary", &DiseaseClass::symptom_summary);

  py::class_<ClassTaxonomy>(m, "ClassTaxonomy")
      .def_static("default", &ClassTaxonomy::default_taxonomy)
      .def("__len__", &ClassTaxonomy::size)
      .def("classes", &ClassTaxonomy::classes, py::return_value_policy::reference_internal)
      .def("contains", &ClassTaxonomy::contains)
      .def("by_id", &ClassTaxonomy::by_id, py::return_value_policy::reference_internal);
  m.def("parse_taxonomy", &parse_taxonomy);
  m.def("serialize_taxonomy", &serialize_taxonomy);
  m.def("load_taxonomy", &load_taxonomy);

  m.def("iou", &iou, py::arg("a"), py::arg("b"));
  m.def(
      "to_normalized",
      [](const BoundingBox& box, int width, int height) {
        const NormalizedBox n = to_normalized(box, {width, height});
        return py::make_tuple(n.cx, n.cy, n.w, n.h);
      },
      py::arg("box"), py::arg("width"), py::arg("height"));
  m.def(
      "to_corner",
      [](double cx, double cy, double w, double h, int width, int height) {
        return to_corner({cx, cy, w, h}, {width, height});
      },
      py::arg("cx"), py::arg("cy"), py::arg("w"), py::arg("h"), py::arg("width"),
      py::arg("height"));

  m.def(
      "parse_label_file",
      [](const std::string& text, const std::string& format,
         std::optional<std::pair<int, int>> dims) {
        return parse_label_file(text, format_arg(format), dims_arg(dims));
      },
      py::arg("text"), py::arg("format"), py::arg("dims") = std::nullopt);
  m.def(
      "serialize_label_file",
      [](const std::vector<Annotation>& annotations, const std::string& format,
         std::optional<std::pair<int, int>> dims) {
        return serialize_label_file(annotations, format_arg(format), dims_arg(dims));
      },
      py::arg("annotations"), py::arg("format"), py::arg("dims") = std::nullopt);

  py::class_<DatasetManifest>(m, "DatasetManifest")
      .def(py::init<>())
      .def_readwrite("records", &DatasetManifest::records)
      .def("assignment",
           [](const DatasetManifest& manifest, const std::string& image_id)
               -> std::optional<std::string> {
             const auto split = manifest.assignment(image_id);
             if (!split) return std::nullopt;
             return std::string(split_name(*split));
           })
      .def("assign", [](DatasetManifest& manifest, const std::string& image_id,
                        const std::string& split) {
        manifest.assignments[image_id] = split_from_name(split);
      });
  m.def("parse_manifest", &parse_manifest);
  m.def("serialize_manifest", &serialize_manifest);
  m.def("load_manifest", &load_manifest);
  m.def("save_manifest", &save_manifest);

  m.def(
      "split_dataset",
      [](const DatasetManifest& manifest, double train_frac, double val_frac, double test_frac,
         std::uint64_t seed, bool group_augmented, std::optional<ClassTaxonomy> taxonomy) {
        SplitSpec spec{train_frac, val_frac, test_frac, seed, group_augmented};
        return split_dataset(manifest, spec,
                             taxonomy ? *taxonomy : ClassTaxonomy::default_taxonomy());
      },
      py::arg("manifest"), py::arg("train_frac") = 0.6, py::arg("val_frac") = 0.2,
      py::arg("test_frac") = 0.2, py::arg("seed") = 0, py::arg("group_augmented") = false,
      py::arg("taxonomy") = std::nullopt);
  m.def(
      "rotate_box",
      [](const BoundingBox& box, int angle, int width, int height) {
        const auto [rotated, dims] = rotate_box(box, angle, {width, height});
        return py::make_tuple(rotated, py::make_tuple(dims.width, dims.height));
      },
      py::arg("box"), py::arg("angle"), py::arg("width"), py::arg("height"));
  m.def("augment_rotations", &augment_rotations, py::arg("manifest"),
        py::arg("angles") = std::vector<int>{90, 180, 270});
  m.def(
      "stats",
      [](const DatasetManifest& manifest, std::optional<ClassTaxonomy> taxonomy) {
        const SplitStats s =
            stats(manifest, taxonomy ? *taxonomy : ClassTaxonomy::default_taxonomy());
        py::list rows;
        auto row_dict = [](const SplitStats::Row& row) {
          py::dict d;
          d["name"] = row.name;
          d["train"] = row.train;
          d["val"] = row.val;
          d["test"] = row.test;
          d["unsplit"] = row.unsplit;
          d["total"] = row.total();
          return d;
        };
        for (const auto& row : s.per_class) rows.append(row_dict(row));
        py::dict result;
        result["per_class"] = rows;
        result["totals"] = row_dict(s.totals);
        return result;
      },
      py::arg("manifest"), py::arg("taxonomy") = std::nullopt);

  m.def("nms", &nms, py::arg("detections"), py::arg("iou_threshold") = kDefaultNmsIouThreshold,
        py::arg("class_aware") = true);

  py::class_<OracleConfig>(m, "OracleConfig")
      .def(py::init([](double jitter_px, double drop_rate, double ghost_rate, double misclass_rate,
                       double confidence_floor, std::uint64_t seed) {
             return OracleConfig{jitter_px, drop_rate, ghost_rate,
                                 misclass_rate, confidence_floor, seed};
           }),
           py::arg("jitter_px") = 0.0, py::arg("drop_rate") = 0.0, py::arg("ghost_rate") = 0.0,
           py::arg("misclass_rate") = 0.0, py::arg("confidence_floor") = 1.0, py::arg("seed") = 0)
      .def_readwrite("jitter_px", &OracleConfig::jitter_px)
      .def_readwrite("drop_rate", &OracleConfig::drop_rate)
      .def_readwrite("ghost_rate", &OracleConfig::ghost_rate)
      .def_readwrite("misclass_rate", &OracleConfig::misclass_rate)
      .def_readwrite("confidence_floor", &OracleConfig::confidence_floor)
      .def_readwrite("seed", &OracleConfig::seed);
  m.def("oracle_detect", &oracle_detect, py::arg("record"), py::arg("config"),
        py::arg("num_classes") = 6);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("precision", &EvalReport::precision)
      .def_readonly("recall", &EvalReport::recall)
      .def_readonly("map50", &EvalReport::map50)
      .def_readonly("map50_95", &EvalReport::map50_95)
      .def_property_readonly(
          "per_threshold",
          [](const EvalReport& r) {
            return std::vector<double>(r.per_threshold.begin(), r.per_threshold.end());
          })
      .def("to_json", &serialize_eval_report)
      .def("to_csv", &eval_report_csv)
      .def("to_text", &render_eval_report_text);

  m.def(
      "evaluate",
      [](const DatasetManifest& manifest, const PredictionMap& predictions,
         std::optional<ClassTaxonomy> taxonomy, double iou_threshold, double confidence_threshold,
         const std::string& interpolation) {
        MetricConfig config{iou_threshold, confidence_threshold,
                            interpolation_from_name(interpolation)};
        return evaluate(manifest, predictions,
                        taxonomy ? *taxonomy : ClassTaxonomy::default_taxonomy(), config);
      },
      py::arg("manifest"), py::arg("predictions"), py::arg("taxonomy") = std::nullopt,
      py::arg("iou_threshold") = 0.5, py::arg("confidence_threshold") = 0.5,
      py::arg("interpolation") = "all_point");

  py::class_<TrainLogRow>(m, "TrainLogRow")
      .def_readonly("epoch", &TrainLogRow::epoch)
      .def_readonly("box_loss", &TrainLogRow::box_loss)
      .def_readonly("obj_loss", &TrainLogRow::obj_loss)
      .def_readonly("cls_loss", &TrainLogRow::cls_loss)
      .def_readonly("precision", &TrainLogRow::precision)
      .def_readonly("recall", &TrainLogRow::recall)
      .def_readonly("map50", &TrainLogRow::map50)
      .def_readonly("map50_95", &TrainLogRow::map50_95)
      .def("total_loss", &TrainLogRow::total_loss);
  m.def("parse_trainlog", &parse_trainlog, py::arg("csv_text"),
        py::arg("adapter") = ColumnAdapter{});
  m.def(
      "best_epoch",
      [](const std::vector<TrainLogRow>& rows, const std::string& criterion) {
        return best_epoch(rows, criterion_from_name(criterion));
      },
      py::arg("rows"), py::arg("criterion") = "map50");
  m.def("export_series", &export_series, py::arg("rows"), py::arg("fields"));

  m.def(
      "run_command",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int status = run_command(args, out, err);
        return py::make_tuple(status, out.str(), err.str());
      },
      py::arg("args"), "Run a CLI invocation; returns (exit_status, stdout, stderr).");
}

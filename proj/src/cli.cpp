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

#include "cactusdet/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "cactusdet/annotations.hpp"
#include "cactusdet/bench.hpp"
#include "cactusdet/dataset.hpp"
#include "cactusdet/detector.hpp"
#include "cactusdet/error.hpp"
#include "cactusdet/metrics.hpp"
#include "cactusdet/report.hpp"
#include "cactusdet/trainlog.hpp"
#include "cactusdet/version.hpp"

namespace cactusdet {

namespace {

namespace fs = std::filesystem;

using ConfigMap = std::map<std::string, std::string>;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
}

/// stamp.txt is deterministic (config + seed + tool version); the wall
/// clock goes to stamp.time.txt so reruns stay byte-identical.
void write_stamp(const fs::path& out_dir, const std::string& subcommand, const ConfigMap& config) {
  std::string stamp = "tool = cactusdet " + std::string(kVersion) + "\n";
  stamp += "subcommand = " + subcommand + "\n";
  for (const auto& [key, value] : config) {
    stamp += key + " = " + value + "\n";
  }
  write_file(out_dir / "stamp.txt", stamp);

  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buffer[64];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  write_file(out_dir / "stamp.time.txt", std::string(buffer) + "\n");
}

fs::path resolve_out_dir(std::string flag_value) {
  if (flag_value.empty()) {
    if (const char* env = std::getenv("CACTUSDET_OUT")) flag_value = env;
  }
  if (flag_value.empty()) {
    throw UsageError("no output directory: pass --out or set CACTUSDET_OUT");
  }
  fs::path dir(flag_value);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

ClassTaxonomy resolve_taxonomy(const std::string& path) {
  if (path.empty()) return ClassTaxonomy::default_taxonomy();
  return load_taxonomy(path);
}

ImageDims parse_dims(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw UsageError("bad --dims '" + text + "' (expected WxH)");
  ImageDims dims{};
  const std::string w = text.substr(0, x);
  const std::string h = text.substr(x + 1);
  auto parse_int = [&](const std::string& s) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || value <= 0) {
      throw UsageError("bad --dims '" + text + "' (expected positive WxH)");
    }
    return value;
  };
  dims.width = parse_int(w);
  dims.height = parse_int(h);
  return dims;
}

std::vector<int> parse_angles(const std::string& text) {
  std::vector<int> angles;
  std::istringstream stream(text);
  std::string field;
  while (std::getline(stream, field, ',')) {
    if (field.empty()) continue;
    int angle = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), angle);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw UsageError("bad --angles entry '" + field + "'");
    }
    angles.push_back(angle);
  }
  return angles;
}

std::vector<std::string> parse_field_list(const std::string& text) {
  std::vector<std::string> fields;
  std::istringstream stream(text);
  std::string field;
  while (std::getline(stream, field, ',')) {
    if (!field.empty()) fields.push_back(field);
  }
  return fields;
}

std::string format_frac(double value) { return format_double_shortest(value); }

struct CommandContext {
  std::ostream& out;
  std::ostream& err;
  int exit_code = 0;
};

// ---------------------------------------------------------------------------
// Subcommand bodies. Each returns after writing its outputs; validation
// problems raise, and `validate` sets the exit code itself.

void cmd_validate(CommandContext& ctx, const std::string& manifest_path,
                  const std::string& taxonomy_path) {
  const DatasetManifest manifest = load_manifest(manifest_path);
  const ClassTaxonomy taxonomy = resolve_taxonomy(taxonomy_path);

  std::vector<Violation> violations;
  for (const ImageRecord& record : manifest.records) {
    const auto record_violations = validate_record(record, taxonomy);
    violations.insert(violations.end(), record_violations.begin(), record_violations.end());
  }
  std::sort(violations.begin(), violations.end(), [](const Violation& a, const Violation& b) {
    if (a.image_id != b.image_id) return a.image_id < b.image_id;
    return a.field < b.field;
  });
  for (const Violation& v : violations) {
    ctx.out << v.image_id << ": " << v.field << ": " << v.message << "\n";
  }
  ctx.out << violations.size() << " violation(s) in " << manifest.records.size() << " record(s)\n";
  ctx.exit_code = violations.empty() ? 0 : 1;
}

void cmd_split(CommandContext& ctx, const std::string& manifest_path, const std::string& out_flag,
               const std::string& taxonomy_path, const SplitSpec& spec) {
  const fs::path out_dir = resolve_out_dir(out_flag);
  const DatasetManifest manifest = load_manifest(manifest_path);
  const ClassTaxonomy taxonomy = resolve_taxonomy(taxonomy_path);

  const DatasetManifest assigned = split_dataset(manifest, spec, taxonomy);
  save_manifest(assigned, out_dir / "manifest.jsonl");
  const std::string table = render_stats_table(stats(assigned, taxonomy));
  write_file(out_dir / "stats.txt", table);
  ctx.out << table;

  write_stamp(out_dir, "split",
              {{"manifest", manifest_path},
               {"taxonomy", taxonomy_path.empty() ? "<builtin>" : taxonomy_path},
               {"train_frac", format_frac(spec.train_frac)},
               {"val_frac", format_frac(spec.val_frac)},
               {"test_frac", format_frac(spec.test_frac)},
               {"seed", std::to_string(spec.seed)},
               {"group_augmented", spec.group_augmented ? "true" : "false"}});
}

void cmd_augment(CommandContext& ctx, const std::string& manifest_path, const std::string& out_flag,
                 const std::string& angles_text) {
  const fs::path out_dir = resolve_out_dir(out_flag);
  const DatasetManifest manifest = load_manifest(manifest_path);
  const std::vector<int> angles = parse_angles(angles_text);

  const DatasetManifest augmented = augment_rotations(manifest, angles);
  save_manifest(augmented, out_dir / "manifest.jsonl");
  ctx.out << manifest.records.size() << " -> " << augmented.records.size() << " records\n";

  write_stamp(out_dir, "augment", {{"manifest", manifest_path}, {"angles", angles_text}});
}

void cmd_materialize(CommandContext& ctx, const std::string& manifest_path,
                     const std::string& out_flag, const std::string& taxonomy_path,
                     const std::string& images_root, const std::string& format_name) {
  const fs::path out_dir = resolve_out_dir(out_flag);
  const DatasetManifest manifest = load_manifest(manifest_path);
  const ClassTaxonomy taxonomy = resolve_taxonomy(taxonomy_path);

  MaterializeOptions options;
  options.label_format = label_format_from_name(format_name);
  options.images_root = images_root;
  const MaterializeSummary summary = materialize_layout(manifest, taxonomy, out_dir, options);

  std::string text;
  text += "labels written: " + std::to_string(summary.total_labels()) + "\n";
  for (const auto& [split, count] : summary.labels_written) {
    text += "  " + std::string(split_name(split)) + ": " + std::to_string(count) + "\n";
  }
  text += "images copied: " + std::to_string(summary.images_copied) + "\n";
  text += "images missing: " + std::to_string(summary.missing_images.size()) + "\n";
  for (const std::string& id : summary.missing_images) text += "  " + id + "\n";
  write_file(out_dir / "summary.txt", text);
  ctx.out << text;

  write_stamp(out_dir, "materialize",
              {{"manifest", manifest_path},
               {"taxonomy", taxonomy_path.empty() ? "<builtin>" : taxonomy_path},
               {"images_root", images_root},
               {"label_format", format_name}});
}

void cmd_convert(CommandContext& ctx, const std::string& in_path, const std::string& out_path,
                 const std::string& from_name, const std::string& to_name,
                 const std::string& dims_text, const std::string& manifest_path) {
  const LabelFormat from = label_format_from_name(from_name);
  const LabelFormat to = label_format_from_name(to_name);
  std::optional<ImageDims> dims;
  if (!dims_text.empty()) dims = parse_dims(dims_text);

  std::optional<DatasetManifest> manifest;
  if (!manifest_path.empty()) manifest = load_manifest(manifest_path);

  auto dims_for = [&](const std::string& stem) -> std::optional<ImageDims> {
    if (dims) return dims;
    if (manifest) {
      for (const ImageRecord& record : manifest->records) {
        const std::string record_stem = fs::path(record.relative_path).stem().string();
        if (record.image_id == stem || record_stem == stem) return record.dims();
      }
      throw ValidationError("no manifest record matches label stem '" + stem + "'");
    }
    return std::nullopt;
  };

  auto convert_one = [&](const fs::path& source, const fs::path& target) {
    const std::string stem = source.stem().string();
    const auto d = dims_for(stem);
    const auto annotations = parse_label_file(read_file(source), from, d);
    write_file(target, serialize_label_file(annotations, to, d));
  };

  std::error_code ec;
  if (fs::is_directory(in_path, ec)) {
    fs::create_directories(out_path, ec);
    if (ec) throw IoError("cannot create " + out_path + ": " + ec.message());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(in_path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& file : files) {
      convert_one(file, fs::path(out_path) / file.filename());
    }
    ctx.out << "converted " << files.size() << " label file(s)\n";
  } else {
    convert_one(in_path, out_path);
    ctx.out << "converted 1 label file\n";
  }
}

void cmd_eval(CommandContext& ctx, const std::string& manifest_path,
              const std::string& predictions_path, const std::string& out_flag,
              const std::string& taxonomy_path, const MetricConfig& config) {
  const fs::path out_dir = resolve_out_dir(out_flag);
  const DatasetManifest manifest = load_manifest(manifest_path);
  const ClassTaxonomy taxonomy = resolve_taxonomy(taxonomy_path);
  const PredictionSet predictions = load_predictions(predictions_path, manifest);

  const EvalReport report = evaluate(manifest, predictions.by_image, taxonomy, config);
  write_file(out_dir / "eval_report.json", serialize_eval_report(report));
  write_file(out_dir / "per_class.csv", eval_report_csv(report));
  write_file(out_dir / "confusion.csv", confusion_csv(report.confusion, taxonomy));
  ctx.out << render_eval_report_text(report);

  write_stamp(out_dir, "eval",
              {{"manifest", manifest_path},
               {"predictions", predictions_path},
               {"taxonomy", taxonomy_path.empty() ? "<builtin>" : taxonomy_path},
               {"iou_threshold", format_frac(config.iou_threshold)},
               {"confidence_threshold", format_frac(config.confidence_threshold)},
               {"interpolation", std::string(interpolation_name(config.interpolation))}});
}

void cmd_confusion(CommandContext& ctx, const std::string& manifest_path,
                   const std::string& predictions_path, const std::string& out_flag,
                   const std::string& taxonomy_path, double iou_threshold,
                   double confidence_threshold) {
  const fs::path out_dir = resolve_out_dir(out_flag);
  const DatasetManifest manifest = load_manifest(manifest_path);
  const ClassTaxonomy taxonomy = resolve_taxonomy(taxonomy_path);
  const PredictionSet predictions = load_predictions(predictions_path, manifest);

  const auto samples = make_samples(manifest, predictions.by_image);
  const ConfusionMatrix matrix =
      confusion_matrix(samples, taxonomy, iou_threshold, confidence_threshold);
  const std::string csv = confusion_csv(matrix, taxonomy);
  write_file(out_dir / "confusion.csv", csv);
  ctx.out << csv;

  write_stamp(out_dir, "confusion",
              {{"manifest", manifest_path},
               {"predictions", predictions_path},
               {"taxonomy", taxonomy_path.empty() ? "<builtin>" : taxonomy_path},
               {"iou_threshold", format_frac(iou_threshold)},
               {"confidence_threshold", format_frac(confidence_threshold)}});
}

void cmd_trainlog(CommandContext& ctx, const std::string& log_path, const std::string& out_flag,
                  const std::string& adapter_path, const std::string& export_fields) {
  const fs::path out_dir = resolve_out_dir(out_flag);
  ColumnAdapter adapter;
  if (!adapter_path.empty()) adapter = parse_column_adapter(read_file(adapter_path));
  const auto rows = parse_trainlog(read_file(log_path), adapter);

  const TrainLogSummary summary = summarize(rows);
  write_file(out_dir / "trainlog_summary.json", serialize_trainlog_summary(summary));
  ctx.out << render_trainlog_summary_text(summary);

  ConfigMap config = {{"log", log_path}, {"adapter", adapter_path}};
  if (!export_fields.empty()) {
    write_file(out_dir / "series.csv", export_series(rows, parse_field_list(export_fields)));
    config["export"] = export_fields;
  }
  write_stamp(out_dir, "trainlog", config);
}

void cmd_bench(CommandContext& ctx, const std::string& manifest_path, const std::string& out_flag,
               const std::string& backend_spec, std::size_t warmup, std::size_t repeats,
               const std::string& split_filter_name, const std::string& taxonomy_path,
               const OracleConfig& oracle_config) {
  const fs::path out_dir = resolve_out_dir(out_flag);
  const DatasetManifest manifest = load_manifest(manifest_path);
  const ClassTaxonomy taxonomy = resolve_taxonomy(taxonomy_path);

  std::optional<Split> split_filter;
  if (!split_filter_name.empty()) split_filter = split_from_name(split_filter_name);

  const auto backend = make_backend(backend_spec, manifest, oracle_config, taxonomy.size());
  const LatencyReport report = measure(*backend, manifest, warmup, repeats, split_filter);
  write_file(out_dir / "latency_report.json", serialize_latency_report(report));
  write_file(out_dir / "samples.csv", latency_samples_csv(report));

  ctx.out << render_latency_text(report);

  write_stamp(out_dir, "bench",
              {{"manifest", manifest_path},
               {"backend", backend_spec},
               {"warmup", std::to_string(warmup)},
               {"repeats", std::to_string(repeats)},
               {"split", split_filter_name},
               {"seed", std::to_string(oracle_config.seed)}});
}

void cmd_report(CommandContext& ctx, const std::vector<std::string>& entry_paths,
                const std::vector<std::string>& eval_specs, const std::string& out_flag,
                const std::string& format_name) {
  const fs::path out_dir = resolve_out_dir(out_flag);
  const ReportFormat format = report_format_from_name(format_name);

  ReportBundle bundle;
  for (const std::string& path : entry_paths) {
    bundle.entries.push_back(load_report_entry(path));
  }
  for (const std::string& spec : eval_specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) {
      throw UsageError("bad --eval '" + spec + "' (expected name=path)");
    }
    bundle.eval_reports.emplace_back(spec.substr(0, eq),
                                     parse_eval_report(read_file(spec.substr(eq + 1))));
  }

  const std::string document = generate_report(bundle, format);
  const char* filename = format == ReportFormat::kText
                             ? "report.txt"
                             : (format == ReportFormat::kStructured ? "report.json" : "report.csv");
  write_file(out_dir / filename, document);
  ctx.out << document;

  ConfigMap config = {{"format", format_name}};
  for (std::size_t i = 0; i < entry_paths.size(); ++i) {
    config["entry." + std::to_string(i)] = entry_paths[i];
  }
  for (std::size_t i = 0; i < eval_specs.size(); ++i) {
    config["eval." + std::to_string(i)] = eval_specs[i];
  }
  write_stamp(out_dir, "report", config);
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"cactus disease dataset and detection-evaluation toolkit"};
  app.set_version_flag("--version", std::string("cactusdet ") + kVersion);
  app.require_subcommand(1);
  app.set_config("--config", "", "INI config file; command-line flags win");

  CommandContext ctx{out, err};

  // validate
  std::string v_manifest, v_taxonomy;
  CLI::App* validate = app.add_subcommand("validate", "check manifest records against invariants");
  validate->add_option("--manifest", v_manifest)->required();
  validate->add_option("--taxonomy", v_taxonomy);
  validate->callback([&] { cmd_validate(ctx, v_manifest, v_taxonomy); });

  // split
  std::string s_manifest, s_out, s_taxonomy;
  SplitSpec s_spec;
  CLI::App* split = app.add_subcommand("split", "stratified train/val/test assignment");
  split->add_option("--manifest", s_manifest)->required();
  split->add_option("--out", s_out);
  split->add_option("--taxonomy", s_taxonomy);
  split->add_option("--train-frac", s_spec.train_frac);
  split->add_option("--val-frac", s_spec.val_frac);
  split->add_option("--test-frac", s_spec.test_frac);
  split->add_option("--seed", s_spec.seed);
  split->add_flag("--group-augmented", s_spec.group_augmented,
                  "keep all rotations of a base image in one split");
  split->callback([&] { cmd_split(ctx, s_manifest, s_out, s_taxonomy, s_spec); });

  // augment
  std::string a_manifest, a_out, a_angles = "90,180,270";
  CLI::App* augment = app.add_subcommand("augment", "add rotated copies of every record");
  augment->add_option("--manifest", a_manifest)->required();
  augment->add_option("--out", a_out);
  augment->add_option("--angles", a_angles, "comma-separated subset of 90,180,270");
  augment->callback([&] { cmd_augment(ctx, a_manifest, a_out, a_angles); });

  // materialize
  std::string m_manifest, m_out, m_taxonomy, m_images_root, m_format = "corner_pixel";
  CLI::App* materialize =
      app.add_subcommand("materialize", "write the images/labels directory tree");
  materialize->add_option("--manifest", m_manifest)->required();
  materialize->add_option("--out", m_out);
  materialize->add_option("--taxonomy", m_taxonomy);
  materialize->add_option("--images-root", m_images_root);
  materialize->add_option("--format", m_format);
  materialize->callback(
      [&] { cmd_materialize(ctx, m_manifest, m_out, m_taxonomy, m_images_root, m_format); });

  // convert
  std::string c_in, c_out, c_from, c_to, c_dims, c_manifest;
  CLI::App* convert = app.add_subcommand("convert", "convert label files between formats");
  convert->add_option("--in", c_in)->required();
  convert->add_option("--out", c_out)->required();
  convert->add_option("--from", c_from)->required();
  convert->add_option("--to", c_to)->required();
  convert->add_option("--dims", c_dims, "image dimensions WxH");
  convert->add_option("--manifest", c_manifest, "manifest to look dimensions up in");
  convert->callback([&] { cmd_convert(ctx, c_in, c_out, c_from, c_to, c_dims, c_manifest); });

  // eval
  std::string e_manifest, e_predictions, e_out, e_taxonomy, e_interp = "all_point";
  MetricConfig e_config;
  CLI::App* eval = app.add_subcommand("eval", "score predictions against the manifest");
  eval->add_option("--manifest", e_manifest)->required();
  eval->add_option("--predictions", e_predictions)->required();
  eval->add_option("--out", e_out);
  eval->add_option("--taxonomy", e_taxonomy);
  eval->add_option("--iou", e_config.iou_threshold);
  eval->add_option("--conf", e_config.confidence_threshold);
  eval->add_option("--interp", e_interp, "all_point or 101_point");
  eval->callback([&] {
    e_config.interpolation = interpolation_from_name(e_interp);
    cmd_eval(ctx, e_manifest, e_predictions, e_out, e_taxonomy, e_config);
  });

  // confusion
  std::string f_manifest, f_predictions, f_out, f_taxonomy;
  double f_iou = 0.5, f_conf = 0.5;
  CLI::App* confusion = app.add_subcommand("confusion", "class-agnostic confusion matrix");
  confusion->add_option("--manifest", f_manifest)->required();
  confusion->add_option("--predictions", f_predictions)->required();
  confusion->add_option("--out", f_out);
  confusion->add_option("--taxonomy", f_taxonomy);
  confusion->add_option("--iou", f_iou);
  confusion->add_option("--conf", f_conf);
  confusion->callback(
      [&] { cmd_confusion(ctx, f_manifest, f_predictions, f_out, f_taxonomy, f_iou, f_conf); });

  // trainlog
  std::string t_log, t_out, t_adapter, t_export;
  CLI::App* trainlog = app.add_subcommand("trainlog", "parse and summarize a training log");
  trainlog->add_option("--log", t_log)->required();
  trainlog->add_option("--out", t_out);
  trainlog->add_option("--adapter", t_adapter, "extra column-name adapter file");
  trainlog->add_option("--export", t_export, "comma-separated columns to export as CSV");
  trainlog->callback([&] { cmd_trainlog(ctx, t_log, t_out, t_adapter, t_export); });

  // bench
  std::string b_manifest, b_out, b_backend, b_split, b_taxonomy;
  std::size_t b_warmup = 0, b_repeats = 1;
  OracleConfig b_oracle;
  b_oracle.confidence_floor = 1.0;
  CLI::App* bench = app.add_subcommand("bench", "measure per-image inference latency");
  bench->add_option("--manifest", b_manifest)->required();
  bench->add_option("--out", b_out);
  bench->add_option("--backend", b_backend,
                    "oracle | sleep:<ms> | replay:<file> | exec:<command>")
      ->required();
  bench->add_option("--warmup", b_warmup);
  bench->add_option("--repeats", b_repeats);
  bench->add_option("--split", b_split, "restrict to one split (train/val/test)");
  bench->add_option("--taxonomy", b_taxonomy);
  bench->add_option("--seed", b_oracle.seed);
  bench->add_option("--jitter", b_oracle.jitter_px);
  bench->add_option("--drop-rate", b_oracle.drop_rate);
  bench->add_option("--ghost-rate", b_oracle.ghost_rate);
  bench->add_option("--misclass-rate", b_oracle.misclass_rate);
  bench->add_option("--confidence-floor", b_oracle.confidence_floor);
  bench->callback([&] {
    cmd_bench(ctx, b_manifest, b_out, b_backend, b_warmup, b_repeats, b_split, b_taxonomy,
              b_oracle);
  });

  // report
  std::vector<std::string> r_entries, r_evals;
  std::string r_out, r_format = "text";
  CLI::App* report = app.add_subcommand("report", "bundle metrics into a comparison document");
  report->add_option("--entry", r_entries, "entry file (repeatable)");
  report->add_option("--eval", r_evals, "name=eval_report.json to detail per class (repeatable)");
  report->add_option("--out", r_out);
  report->add_option("--format", r_format, "text, structured or csv");
  report->callback([&] { cmd_report(ctx, r_entries, r_evals, r_out, r_format); });

  std::vector<const char*> argv;
  argv.push_back("cactusdet");
  for (const std::string& arg : args) argv.push_back(arg.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << app.version() << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return ctx.exit_code;
}

}  // namespace cactusdet

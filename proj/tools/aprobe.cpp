#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "aprobe/ablation.hpp"
#include "aprobe/archive.hpp"
#include "aprobe/canonical.hpp"
#include "aprobe/config.hpp"
#include "aprobe/logistic.hpp"
#include "aprobe/pca.hpp"
#include "aprobe/report.hpp"
#include "aprobe/scoring.hpp"
#include "aprobe/steering.hpp"
#include "aprobe/sweep.hpp"
#include "aprobe/synth.hpp"

namespace fs = std::filesystem;
using namespace aprobe;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kNonConvergence = 2;

Json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_canonical(text);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

RunConfig config_or_default(const std::string& path) { return path.empty() ? RunConfig{} : load_config(path); }

int cmd_validate(const std::string& archive) {
  const auto report = validate_archive(archive);
  for (const auto& issue : report.issues) {
    fmt::print("{}\t{}\t{}\n", issue.kind, issue.location, issue.message);
  }
  if (report.ok()) {
    fmt::print("ok\n");
    return kOk;
  }
  fmt::print(stderr, "{} issue(s)\n", report.issues.size());
  return kFailure;
}

int cmd_sweep(const std::string& archive_path, const std::string& config_path, const std::string& out_dir,
              int workers) {
  RunConfig config = config_or_default(config_path);
  if (workers > 0) config.workers = workers;
  const Archive archive = read_archive(archive_path);
  if (auto report = validate_archive(archive); !report.ok()) {
    for (const auto& issue : report.issues) fmt::print(stderr, "{}\t{}\t{}\n", issue.kind, issue.location, issue.message);
    return kFailure;
  }
  SweepStats stats;
  const SweepResult result = temporal_sweep(archive, config, {}, &stats);
  fs::create_directories(out_dir);
  write_text(fs::path(out_dir) / "results.json", canonical_dump(sweep_result_json(result, config, archive_path)));

  for (const auto& name : config.ablations) {
    const auto ablation = run_ablation(archive, config, parse_ablation(name), &stats);
    write_text(fs::path(out_dir) / ("ablation_" + name + ".json"), canonical_dump(to_json(ablation)));
  }

  const std::vector<ModelReport> reports{result.report};
  const std::vector<Table> tables{detection_table(reports), layer_table(reports), significance_table(reports)};
  fmt::print("{}", render_all(tables, ReportFormat::human));
  fmt::print(stderr, "cells computed {}, loaded from checkpoint {}\n", stats.computed, stats.loaded);
  if (result.report.nonconverged_fits > 0) {
    fmt::print(stderr, "{} probe fit(s) did not converge\n", result.report.nonconverged_fits);
    return kNonConvergence;
  }
  return kOk;
}

int cmd_ablate(const std::string& archive_path, const std::string& spec, const std::string& config_path,
               const std::string& out, int workers) {
  RunConfig config = config_or_default(config_path);
  if (workers > 0) config.workers = workers;
  const Archive archive = read_archive(archive_path);
  const auto report = run_ablation(archive, config, parse_ablation(spec));
  const std::string text = canonical_dump(to_json(report));
  if (out.empty()) {
    fmt::print("{}", text);
  } else {
    write_text(out, text);
  }
  fmt::print(stderr, "{}: AUC spread {:.4f}, pattern {}\n", spec, report.auc_spread,
             report.pattern_invariant ? "invariant" : "changes");
  int nonconverged = 0;
  for (const auto& v : report.variants) nonconverged += v.report.nonconverged_fits;
  return nonconverged > 0 ? kNonConvergence : kOk;
}

int cmd_report(const std::vector<std::string>& results, const std::string& format, const std::string& out) {
  std::vector<ModelReport> reports;
  for (const auto& path : results) {
    const Json j = read_json(path);
    if (j.value("kind", "") != "sweep_result") throw std::runtime_error(path + ": not a sweep result");
    reports.push_back(model_report_from_json(j.at("report")));
  }
  const ReportFormat fmt_kind = parse_report_format(format);
  const auto files = emit_report(reports, fmt_kind);
  if (out.empty()) {
    for (const auto& f : files) fmt::print("{}", f.content);
  } else {
    write_report_files(files, out);
    for (const auto& f : files) fmt::print("{}\n", (fs::path(out) / f.name).string());
  }
  return kOk;
}

int cmd_synth(const std::string& regime, const std::string& out, std::uint64_t seed, std::size_t n, std::size_t dim,
              std::size_t layers, std::size_t signal_layer, bool correlated, const std::string& dtype) {
  RegimeSpec spec = regime_spec(parse_regime(regime), seed);
  if (n) spec.n_examples = n;
  if (dim) spec.hidden_dim = dim;
  if (layers) {
    spec.n_layers = layers;
    spec.signal_layer = std::min(spec.signal_layer, layers - 1);
  }
  if (signal_layer != static_cast<std::size_t>(-1)) spec.signal_layer = signal_layer;
  spec.correlated_noise = correlated;
  spec.dtype = parse_dtype(dtype);
  write_archive(generate_archive(spec), out);
  return kOk;
}

// Most frequent per-fold C; ties go to the smaller value.
double modal_C(const std::vector<double>& fold_C) {
  std::map<double, int> counts;
  for (double c : fold_C) ++counts[c];
  if (counts.empty()) throw std::runtime_error("no fold C values in results");
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

int cmd_steer_export(const std::string& results_path, std::vector<double> alpha_grid, std::string archive_path,
                     const std::string& orientation, const std::string& out) {
  const Json j = read_json(results_path);
  if (archive_path.empty()) archive_path = j.at("archive").get<std::string>();
  const Archive archive = read_archive(archive_path);
  const std::size_t layer = j.at("report").at("optimal_layer").get<std::size_t>();

  std::vector<double> fold_C;
  for (const auto& cell : j.at("grid").at("cells")) {
    if (cell.at("position").get<int>() == 0 && cell.at("layer").get<std::size_t>() == layer) {
      for (const auto& c : cell.at("fold_C")) fold_C.push_back(number_from_json(c));
    }
  }
  const double C = modal_C(fold_C);
  const auto& cfg = j.at("config");

  const Eigen::MatrixXd x = slice_cell(archive.header, archive.tensor, 0, layer);
  const auto labels = archive.labels();
  const PcaModel pca = pca_fit(x, cfg.at("pca_threshold").get<double>(), cfg.at("whiten").get<bool>());
  const LogisticProbe probe = logistic_fit(pca_transform(pca, x), labels, C);

  if (alpha_grid.empty()) alpha_grid = default_alpha_grid(mean_activation_sd(archive, layer));
  const auto v = export_steering(probe, pca, archive.header.model_name, layer, alpha_grid, parse_orientation(orientation));
  write_steering(v, out);
  fmt::print("layer {} C {} dim {} expected_logit_shift {:.6f}\n", layer, C, v.direction.size(), v.expected_logit_shift);
  return probe.converged ? kOk : kNonConvergence;
}

int cmd_correction_rate(const std::string& before, const std::string& after) {
  const Archive a = read_archive(before);
  const Archive b = read_archive(after);
  const auto s = correction_rate(a.records, b.records);
  Json j{{"n", s.n},
         {"incorrect_before", s.incorrect_before},
         {"corrected", s.corrected},
         {"correction_rate", s.correction_rate},
         {"correct_before", s.correct_before},
         {"regressed", s.regressed},
         {"regression_rate", s.regression_rate}};
  fmt::print("{}", canonical_dump(j));
  return kOk;
}

int cmd_accuracy(const std::string& archive) {
  fmt::print("{}", accuracy_table_csv(accuracy_table(read_archive(archive).records)));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal probing of activation archives"};
  app.require_subcommand(1);
  int code = kOk;

  std::string archive, config, out, spec, format = "text", regime, orientation = "toward_correct", dtype = "f32";
  std::string before, after;
  std::vector<std::string> results;
  std::vector<double> alpha_grid;
  int workers = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0, dim = 0, layers = 0, signal_layer = static_cast<std::size_t>(-1);
  bool correlated = false;

  auto* validate = app.add_subcommand("validate", "Check an archive for structural and value errors");
  validate->add_option("archive", archive)->required();
  validate->callback([&] { code = cmd_validate(archive); });

  auto* sweep = app.add_subcommand("sweep", "Nested-CV probe sweep over positions and layers");
  sweep->add_option("archive", archive)->required();
  sweep->add_option("--config", config);
  sweep->add_option("--out", out)->default_val("results");
  sweep->add_option("--workers", workers);
  sweep->callback([&] { code = cmd_sweep(archive, config, out, workers); });

  auto* ablate = app.add_subcommand("ablate", "Run one ablation");
  ablate->add_option("archive", archive)->required();
  ablate->add_option("--spec", spec)->required();
  ablate->add_option("--config", config);
  ablate->add_option("--out", out);
  ablate->add_option("--workers", workers);
  ablate->callback([&] { code = cmd_ablate(archive, spec, config, out, workers); });

  auto* report = app.add_subcommand("report", "Render tables from sweep results");
  report->add_option("results", results)->required();
  report->add_option("--format", format);
  report->add_option("--out", out);
  report->callback([&] { code = cmd_report(results, format, out); });

  auto* synth = app.add_subcommand("synth", "Generate a synthetic archive");
  synth->add_option("regime", regime)->required();
  synth->add_option("--out", out)->required();
  synth->add_option("--seed", seed);
  synth->add_option("--n", n);
  synth->add_option("--dim", dim);
  synth->add_option("--layers", layers);
  synth->add_option("--signal-layer", signal_layer);
  synth->add_flag("--correlated-noise", correlated);
  synth->add_option("--dtype", dtype);
  synth->callback([&] { code = cmd_synth(regime, out, seed, n, dim, layers, signal_layer, correlated, dtype); });

  auto* steer = app.add_subcommand("steer-export", "Export a steering direction from sweep results");
  steer->add_option("results", spec)->required();
  steer->add_option("--alpha-grid", alpha_grid)->delimiter(',');
  steer->add_option("--archive", archive);
  steer->add_option("--orientation", orientation);
  steer->add_option("--out", out)->required();
  steer->callback([&] { code = cmd_steer_export(spec, alpha_grid, archive, orientation, out); });

  auto* correction = app.add_subcommand("correction-rate", "Compare labels before and after steering");
  correction->add_option("before", before)->required();
  correction->add_option("after", after)->required();
  correction->callback([&] { code = cmd_correction_rate(before, after); });

  auto* accuracy = app.add_subcommand("accuracy", "Per-dataset accuracy as CSV");
  accuracy->add_option("archive", archive)->required();
  accuracy->callback([&] { code = cmd_accuracy(archive); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kFailure;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kFailure;
  }
  return code;
}

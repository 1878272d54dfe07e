#include "aprobe/sweep.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "aprobe/baselines.hpp"
#include "aprobe/nested_cv.hpp"
#include "aprobe/parallel.hpp"
#include "aprobe/random.hpp"

namespace aprobe {

namespace {

std::filesystem::path checkpoint_path(const RunConfig& config, std::uint64_t key) {
  return std::filesystem::path(config.checkpoint_dir) / ("cell-" + to_hex(key) + ".json");
}

std::optional<CVResult> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return cv_result_from_json(parse_canonical(ss.str()));
  } catch (const std::exception&) {
    return std::nullopt;  // partial write from an interrupted run; recompute
  }
}

void store_checkpoint(const std::filesystem::path& path, const CVResult& cv) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp.string());
    out << canonical_dump(to_json(cv));
  }
  std::filesystem::rename(tmp, path);
}

Json optional_number(const std::optional<double>& v) { return v ? number_to_json(*v) : Json(nullptr); }

std::optional<double> optional_number_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return number_from_json(j);
}

Json accuracy_to_json(const AccuracyTable& t) {
  auto row = [](const AccuracyRow& r) {
    return Json{{"dataset", r.dataset}, {"n", r.n}, {"n_correct", r.n_correct}, {"accuracy", r.accuracy}};
  };
  Json rows = Json::array();
  for (const auto& r : t.rows) rows.push_back(row(r));
  return Json{{"rows", rows}, {"overall", row(t.overall)}};
}

AccuracyTable accuracy_from_json(const Json& j) {
  auto row = [](const Json& r) {
    return AccuracyRow{r.at("dataset").get<std::string>(), r.at("n").get<std::size_t>(),
                       r.at("n_correct").get<std::size_t>(), r.at("accuracy").get<double>()};
  };
  AccuracyTable t;
  for (const auto& r : j.at("rows")) t.rows.push_back(row(r));
  t.overall = row(j.at("overall"));
  return t;
}

}  // namespace

std::uint64_t archive_fingerprint(const Archive& a) {
  Fnv1a h;
  h.add(static_cast<std::uint64_t>(a.header.n_examples));
  h.add(static_cast<std::uint64_t>(a.header.n_layers));
  h.add(static_cast<std::uint64_t>(a.header.hidden_dim));
  for (int p : a.header.positions) h.add(static_cast<std::uint64_t>(p));
  for (const auto& r : a.records) h.add(static_cast<std::uint64_t>(r.label));
  const auto values = a.tensor.values();
  h.add_bytes(values.data(), values.size() * sizeof(float));
  return h.digest();
}

std::vector<CVResult> evaluate_cells(const Archive& archive, const RunConfig& config, const FoldPlan& plan,
                                     std::span<const CellKey> cells, const SweepOptions& options, SweepStats* stats) {
  const std::vector<int> labels = archive.labels();
  NestedCvOptions base = nested_cv_options(config);
  base.probe = options.probe;

  const bool checkpointing = !config.checkpoint_dir.empty();
  std::uint64_t base_key = 0;
  if (checkpointing) {
    std::filesystem::create_directories(config.checkpoint_dir);
    Fnv1a h;
    h.add(archive_fingerprint(archive));
    Json cell_settings = config_to_json(config);
    for (const char* unrelated : {"positions", "layer_policy", "baselines", "confidence_mode"}) {
      cell_settings.erase(unrelated);
    }
    h.add(canonical_dump(cell_settings));
    h.add(static_cast<std::uint64_t>(options.probe));
    h.add(options.variant);
    base_key = h.digest();
  }

  std::vector<CVResult> results(cells.size());
  std::vector<char> loaded(cells.size(), 0);
  for_each_index(cells.size(), config.workers, [&](std::size_t i) {
    const CellKey cell = cells[i];
    std::filesystem::path ckpt;
    if (checkpointing) {
      ckpt = checkpoint_path(config, Fnv1a()
                                         .add(base_key)
                                         .add(static_cast<std::uint64_t>(cell.position))
                                         .add(static_cast<std::uint64_t>(cell.layer))
                                         .digest());
      if (auto cached = load_checkpoint(ckpt)) {
        results[i] = std::move(*cached);
        loaded[i] = 1;
        return;
      }
    }
    try {
      const Eigen::MatrixXd x = slice_cell(archive.header, archive.tensor, cell.position, cell.layer);
      NestedCvOptions opts = base;
      opts.model_seed = mix_seed(config.seed, static_cast<std::uint64_t>(cell.position), cell.layer);
      results[i] = nested_cv_probe(x, labels, plan, opts);
    } catch (const LeakageError&) {
      throw;
    } catch (const std::exception& e) {
      throw CellError(cell, e.what());
    }
    if (checkpointing) store_checkpoint(ckpt, results[i]);
  });

  if (stats) {
    for (char l : loaded) {
      if (l) ++stats->loaded;
      else ++stats->computed;
    }
  }
  return results;
}

namespace {

std::vector<int> evaluated_positions(const Archive& archive, const RunConfig& config) {
  std::vector<int> positions = config.positions.empty() ? archive.header.positions : config.positions;
  for (int p : positions) archive.header.position_index(p);
  std::sort(positions.begin(), positions.end());
  positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
  if (positions.empty() || positions.front() != 0) {
    throw std::invalid_argument("sweep needs position 0 among the evaluated positions");
  }
  return positions;
}

std::size_t argmax_layer(const std::vector<CVResult>& row) {
  std::size_t best = 0;
  for (std::size_t l = 1; l < row.size(); ++l)
    if (row[l].mean_auc > row[best].mean_auc) best = l;
  return best;
}

}  // namespace

std::size_t select_optimal_layer(const Archive& archive, const RunConfig& config, const SweepOptions& options,
                                 SweepStats* stats) {
  const FoldPlan plan = stratified_kfold(archive.labels(), config.k_outer, config.seed);
  std::vector<CellKey> cells;
  for (std::size_t l = 0; l < archive.header.n_layers; ++l) cells.push_back({0, l});
  return argmax_layer(evaluate_cells(archive, config, plan, cells, options, stats));
}

SweepResult temporal_sweep(const Archive& archive, const RunConfig& config, const SweepOptions& options,
                           SweepStats* stats) {
  const auto& h = archive.header;
  const std::vector<int> positions = evaluated_positions(archive, config);

  SweepResult result;
  result.plan = stratified_kfold(archive.labels(), config.k_outer, config.seed);
  SweepGrid& grid = result.grid;
  grid.positions = positions;
  grid.n_layers = h.n_layers;

  auto run = [&](const std::vector<CellKey>& cells) {
    std::vector<CellKey> todo;
    for (const auto& c : cells)
      if (!grid.cells.count(c)) todo.push_back(c);
    const auto out = evaluate_cells(archive, config, result.plan, todo, options, stats);
    for (std::size_t i = 0; i < todo.size(); ++i) grid.cells.emplace(todo[i], out[i]);
  };

  if (config.layer_policy == LayerPolicy::fixed) {
    if (config.fixed_layer >= h.n_layers) {
      throw std::invalid_argument("fixed layer " + std::to_string(config.fixed_layer) + " out of range");
    }
    grid.optimal_layer = config.fixed_layer;
  } else {
    std::vector<CellKey> row;
    for (std::size_t l = 0; l < h.n_layers; ++l) row.push_back({0, l});
    if (config.layer_policy == LayerPolicy::sweep_all) {
      for (int p : positions)
        for (std::size_t l = 0; l < h.n_layers; ++l) row.push_back({p, l});
    }
    run(row);
    std::vector<CVResult> pos0;
    for (std::size_t l = 0; l < h.n_layers; ++l) pos0.push_back(grid.cells.at({0, l}));
    grid.optimal_layer = argmax_layer(pos0);
  }

  std::vector<CellKey> at_opt;
  for (int p : positions) at_opt.push_back({p, grid.optimal_layer});
  run(at_opt);
  for (int p : positions) grid.at_optimal.push_back(grid.cells.at({p, grid.optimal_layer}));

  ModelReport& r = result.report;
  r.model_name = h.model_name;
  if (auto it = h.extras.find("params"); it != h.extras.end()) r.params = it->second;
  r.accuracy = accuracy_table(archive.records);
  r.n_layers = h.n_layers;
  r.optimal_layer = grid.optimal_layer;
  r.depth = static_cast<double>(grid.optimal_layer) / static_cast<double>(h.n_layers);
  r.layer_auc = grid.at_optimal.front().mean_auc;
  r.pos0_auc = grid.at_optimal.front().mean_auc;
  r.probe_auc = grid.at_optimal.front().mean_auc;
  r.best_position = positions.front();
  for (std::size_t i = 1; i < positions.size(); ++i) {
    if (grid.at_optimal[i].mean_auc > r.probe_auc) {
      r.probe_auc = grid.at_optimal[i].mean_auc;
      r.best_position = positions[i];
    }
  }
  if (auto it = std::find(positions.begin(), positions.end(), 4); it != positions.end()) {
    const CVResult& cv4 = grid.at_optimal[static_cast<std::size_t>(it - positions.begin())];
    r.pos4_auc = cv4.mean_auc;
    r.temporal = temporal_stats(grid.at_optimal.front().fold_auc, cv4.fold_auc);
  }
  if (config.baselines) {
    r.baseline_confidence = baseline_auc(archive.records, Baseline::confidence, result.plan, config.confidence_mode);
    r.baseline_entropy = baseline_auc(archive.records, Baseline::entropy, result.plan, config.confidence_mode);
  }
  for (const auto& [key, cv] : grid.cells) r.nonconverged_fits += cv.nonconverged_fits;
  r.fold_plan_fingerprint = to_hex(result.plan.fingerprint());
  return result;
}

Json to_json(const ModelReport& r) {
  Json j;
  j["model_name"] = r.model_name;
  j["params"] = r.params;
  j["accuracy"] = accuracy_to_json(r.accuracy);
  j["n_layers"] = r.n_layers;
  j["optimal_layer"] = r.optimal_layer;
  j["depth"] = number_to_json(r.depth);
  j["layer_auc"] = number_to_json(r.layer_auc);
  j["pos0_auc"] = optional_number(r.pos0_auc);
  j["pos4_auc"] = optional_number(r.pos4_auc);
  j["probe_auc"] = number_to_json(r.probe_auc);
  j["best_position"] = r.best_position;
  if (r.temporal) {
    const auto& t = *r.temporal;
    j["temporal"] = Json{{"delta", number_to_json(t.delta)},
                         {"t_statistic", number_to_json(t.t_statistic)},
                         {"p_value", number_to_json(t.p_value)},
                         {"degenerate_variance", t.degenerate_variance},
                         {"pattern", to_string(t.pattern)},
                         {"tier", to_string(t.tier)}};
  } else {
    j["temporal"] = nullptr;
  }
  j["baseline_confidence"] = r.baseline_confidence ? to_json(*r.baseline_confidence) : Json(nullptr);
  j["baseline_entropy"] = r.baseline_entropy ? to_json(*r.baseline_entropy) : Json(nullptr);
  j["nonconverged_fits"] = r.nonconverged_fits;
  j["fold_plan_fingerprint"] = r.fold_plan_fingerprint;
  return j;
}

ModelReport model_report_from_json(const Json& j) {
  ModelReport r;
  r.model_name = j.at("model_name").get<std::string>();
  r.params = j.at("params").get<std::string>();
  r.accuracy = accuracy_from_json(j.at("accuracy"));
  r.n_layers = j.at("n_layers").get<std::size_t>();
  r.optimal_layer = j.at("optimal_layer").get<std::size_t>();
  r.depth = number_from_json(j.at("depth"));
  r.layer_auc = number_from_json(j.at("layer_auc"));
  r.pos0_auc = optional_number_from(j.at("pos0_auc"));
  r.pos4_auc = optional_number_from(j.at("pos4_auc"));
  r.probe_auc = number_from_json(j.at("probe_auc"));
  r.best_position = j.at("best_position").get<int>();
  if (!j.at("temporal").is_null()) {
    const auto& t = j.at("temporal");
    TemporalStats s;
    s.delta = number_from_json(t.at("delta"));
    s.t_statistic = number_from_json(t.at("t_statistic"));
    s.p_value = number_from_json(t.at("p_value"));
    s.degenerate_variance = t.at("degenerate_variance").get<bool>();
    s.pattern = parse_pattern(t.at("pattern").get<std::string>());
    s.tier = parse_tier(t.at("tier").get<std::string>());
    r.temporal = s;
  }
  if (!j.at("baseline_confidence").is_null()) r.baseline_confidence = cv_result_from_json(j.at("baseline_confidence"));
  if (!j.at("baseline_entropy").is_null()) r.baseline_entropy = cv_result_from_json(j.at("baseline_entropy"));
  r.nonconverged_fits = j.at("nonconverged_fits").get<int>();
  r.fold_plan_fingerprint = j.at("fold_plan_fingerprint").get<std::string>();
  return r;
}

Json to_json(const SweepGrid& g) {
  Json cells = Json::array();
  for (const auto& [key, cv] : g.cells) {
    Json c = to_json(cv);
    c["position"] = key.position;
    c["layer"] = key.layer;
    cells.push_back(std::move(c));
  }
  // best layer per position over whatever layers were evaluated
  Json best = Json::array();
  for (int p : g.positions) {
    const CVResult* top = nullptr;
    std::size_t top_layer = 0;
    for (const auto& [key, cv] : g.cells) {
      if (key.position != p) continue;
      if (!top || cv.mean_auc > top->mean_auc) {
        top = &cv;
        top_layer = key.layer;
      }
    }
    if (top) best.push_back(Json{{"position", p}, {"layer", top_layer}, {"mean_auc", number_to_json(top->mean_auc)}});
  }
  Json at_opt = Json::array();
  for (std::size_t i = 0; i < g.positions.size() && i < g.at_optimal.size(); ++i) {
    at_opt.push_back(Json{{"position", g.positions[i]},
                          {"mean_auc", number_to_json(g.at_optimal[i].mean_auc)},
                          {"std_auc", number_to_json(g.at_optimal[i].std_auc)}});
  }
  return Json{{"positions", g.positions},  {"n_layers", g.n_layers},     {"optimal_layer", g.optimal_layer},
              {"cells", std::move(cells)}, {"at_optimal", std::move(at_opt)}, {"best_per_position", std::move(best)}};
}

Json sweep_result_json(const SweepResult& result, const RunConfig& config, const std::string& archive_path) {
  Json j;
  j["kind"] = "sweep_result";
  j["archive"] = archive_path;
  j["config"] = config_to_json(config);
  j["report"] = to_json(result.report);
  j["grid"] = to_json(result.grid);
  j["fold_plan"] = Json{{"k", result.plan.k}, {"seed", result.plan.seed}, {"assignment", result.plan.assignment}};
  return j;
}

}  // namespace aprobe

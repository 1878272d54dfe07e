#include "aprobe/report.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <stdexcept>

#include "aprobe/canonical.hpp"

namespace aprobe {

namespace {

const std::string kMissing = "n/a";

std::string display_name_of(const std::string& dataset) {
  if (dataset == "triviaqa") return "TriviaQA";
  if (dataset == "simple_facts") return "Simple Facts";
  if (dataset == "biography") return "Biography";
  if (dataset == "synthetic") return "Synthetic";
  return dataset;
}

std::string or_missing(const std::optional<double>& v, std::string (*fmt_fn)(double)) {
  return v ? fmt_fn(*v) : kMissing;
}

std::string params_of(const ModelReport& r) { return r.params.empty() ? "-" : r.params; }

std::size_t display_width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++w;
  return w;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

ReportFormat parse_report_format(const std::string& text) {
  if (text == "csv") return ReportFormat::csv;
  if (text == "json" || text == "structured" || text == "structured-text") return ReportFormat::structured_text;
  if (text == "text" || text == "human" || text == "table") return ReportFormat::human;
  throw std::invalid_argument("unknown report format '" + text + "' (expected csv, json, text)");
}

std::string format_auc(double v) { return fmt::format("{:.3f}", v); }

std::string format_signed(double v, int digits) {
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  // avoid "-0.000"
  const double scale = std::pow(10.0, digits);
  if (std::round(std::abs(v) * scale) == 0.0) v = 0.0;
  return fmt::format("{:+.{}f}", v, digits);
}

std::string format_percent(double fraction) { return fmt::format("{:.1f}%", 100.0 * fraction); }

std::string format_p(double p) { return fmt::format("{:.3f}", p) + marker(significance_tier(p)); }

Table detection_table(std::span<const ModelReport> reports) {
  Table t{"detection",
          "Detection results (probe AUC at the optimal layer)",
          {"Model", "Params", "Accuracy", "Pos-0 AUC", "Pos-4 AUC", "Probe AUC", "Δ (p4-p0)", "p-value", "Pattern"},
          {}};
  for (const auto& r : reports) {
    const auto& s = r.temporal;
    t.rows.push_back({r.model_name, params_of(r), format_percent(r.accuracy.overall.accuracy),
                      or_missing(r.pos0_auc, format_auc), or_missing(r.pos4_auc, format_auc), format_auc(r.probe_auc),
                      s ? format_signed(s->delta, 3) : kMissing, s ? format_p(s->p_value) : kMissing,
                      s ? display_name(s->pattern) : kMissing});
  }
  return t;
}

Table layer_table(std::span<const ModelReport> reports) {
  const bool conf = std::any_of(reports.begin(), reports.end(), [](const auto& r) { return r.baseline_confidence.has_value(); });
  const bool ent = std::any_of(reports.begin(), reports.end(), [](const auto& r) { return r.baseline_entropy.has_value(); });
  Table t{"layers", "Layer-wise analysis (position 0)",
          {"Model", "Params", "Total Layers", "Best Layer", "Layer Depth %", "Layer AUC"}, {}};
  if (conf) t.columns.push_back("BL-Confidence");
  if (ent) t.columns.push_back("BL-Entropy");
  for (const auto& r : reports) {
    std::vector<std::string> row = {r.model_name,
                                    params_of(r),
                                    std::to_string(r.n_layers),
                                    std::to_string(r.optimal_layer),
                                    format_percent(r.depth),
                                    format_auc(r.layer_auc)};
    if (conf) row.push_back(r.baseline_confidence ? format_auc(r.baseline_confidence->mean_auc) : kMissing);
    if (ent) row.push_back(r.baseline_entropy ? format_auc(r.baseline_entropy->mean_auc) : kMissing);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table significance_table(std::span<const ModelReport> reports) {
  Table t{"significance",
          "Significance of the temporal pattern (paired t-test on fold AUCs)",
          {"Model", "Params", "Pos-0 AUC", "Pos-4 AUC", "Δ (p4-p0)", "t-statistic", "p-value"},
          {}};
  for (const auto& r : reports) {
    const auto& s = r.temporal;
    t.rows.push_back({r.model_name, params_of(r), or_missing(r.pos0_auc, format_auc),
                      or_missing(r.pos4_auc, format_auc), s ? format_signed(s->delta, 3) : kMissing,
                      s ? format_signed(s->t_statistic, 2) : kMissing, s ? format_p(s->p_value) : kMissing});
  }
  return t;
}

Table dataset_accuracy_table(std::span<const ModelReport> reports) {
  // dataset order as first encountered; header n from the first report carrying it
  std::vector<std::string> datasets;
  std::map<std::string, std::size_t> header_n;
  for (const auto& r : reports) {
    for (const auto& row : r.accuracy.rows) {
      if (!header_n.count(row.dataset)) {
        datasets.push_back(row.dataset);
        header_n[row.dataset] = row.n;
      }
    }
  }
  Table t{"accuracy", "Per-dataset factual accuracy", {"Model", "Params"}, {}};
  for (const auto& ds : datasets) t.columns.push_back(fmt::format("{} (n={})", display_name_of(ds), header_n[ds]));
  const std::size_t overall_n = reports.empty() ? 0 : reports.front().accuracy.overall.n;
  t.columns.push_back(fmt::format("Overall (n={})", overall_n));
  for (const auto& r : reports) {
    std::vector<std::string> row = {r.model_name, params_of(r)};
    for (const auto& ds : datasets) {
      auto it = std::find_if(r.accuracy.rows.begin(), r.accuracy.rows.end(), [&](const auto& a) { return a.dataset == ds; });
      row.push_back(it == r.accuracy.rows.end() ? kMissing : format_percent(it->accuracy));
    }
    row.push_back(format_percent(r.accuracy.overall.accuracy));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string render(const Table& table, ReportFormat format) {
  switch (format) {
    case ReportFormat::csv: {
      std::string out;
      auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
          if (i) out.push_back(',');
          out += csv_field(cells[i]);
        }
        out.push_back('\n');
      };
      line(table.columns);
      for (const auto& r : table.rows) line(r);
      return out;
    }
    case ReportFormat::structured_text: {
      return canonical_dump(Json{{"name", table.name}, {"title", table.title}, {"columns", table.columns}, {"rows", table.rows}});
    }
    case ReportFormat::human: {
      std::vector<std::size_t> width(table.columns.size(), 0);
      for (std::size_t c = 0; c < table.columns.size(); ++c) width[c] = display_width(table.columns[c]);
      for (const auto& r : table.rows)
        for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], display_width(r[c]));
      std::string out = table.title + "\n";
      auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
          if (c) out += "  ";
          out += cells[c];
          if (c + 1 < cells.size()) out.append(width[c] - display_width(cells[c]), ' ');
        }
        out.push_back('\n');
      };
      line(table.columns);
      std::size_t total = 0;
      for (std::size_t c = 0; c < width.size(); ++c) total += width[c] + (c ? 2 : 0);
      out.append(total, '-');
      out.push_back('\n');
      for (const auto& r : table.rows) line(r);
      return out;
    }
  }
  return {};
}

std::string render_all(std::span<const Table> tables, ReportFormat format) {
  if (format == ReportFormat::structured_text) {
    Json all = Json::object();
    for (const auto& t : tables) all[t.name] = Json{{"title", t.title}, {"columns", t.columns}, {"rows", t.rows}};
    return canonical_dump(all);
  }
  std::string out;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (i) out.push_back('\n');
    out += render(tables[i], format);
  }
  return out;
}

std::vector<ReportFile> emit_report(std::span<const ModelReport> reports, ReportFormat format) {
  if (reports.empty()) throw std::invalid_argument("emit_report: no reports");
  const std::vector<Table> tables = {detection_table(reports), layer_table(reports), significance_table(reports),
                                     dataset_accuracy_table(reports)};
  std::vector<ReportFile> files;
  switch (format) {
    case ReportFormat::csv:
      for (const auto& t : tables) files.push_back({t.name + ".csv", render(t, format)});
      break;
    case ReportFormat::human:
      for (const auto& t : tables) files.push_back({t.name + ".txt", render(t, format)});
      break;
    case ReportFormat::structured_text:
      files.push_back({"tables.json", render_all(tables, format)});
      break;
  }
  return files;
}

void write_report_files(std::span<const ReportFile> files, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& f : files) {
    std::ofstream out(dir / f.name, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir / f.name).string());
    out << f.content;
  }
}

}  // namespace aprobe

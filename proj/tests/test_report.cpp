#include <algorithm>
#include <cmath>
#include <limits>

#include "aprobe/report.hpp"
#include "doctest.h"

using namespace aprobe;

namespace {

ModelReport sample_report(const std::string& name, double p0, double p4, double p, double t) {
  ModelReport r;
  r.model_name = name;
  r.params = "1.5B";
  r.accuracy.overall = {"overall", 552, 162, 162.0 / 552.0};
  r.accuracy.rows = {{"triviaqa", 500, 121, 0.242}, {"simple_facts", 32, 26, 26.0 / 32.0}, {"biography", 20, 15, 0.75}};
  r.n_layers = 48;
  r.optimal_layer = 28;
  r.depth = 28.0 / 48.0;
  r.layer_auc = p0;
  r.pos0_auc = p0;
  r.pos4_auc = p4;
  r.probe_auc = 0.705;
  TemporalStats s;
  s.delta = p4 - p0;
  s.t_statistic = t;
  s.p_value = p;
  std::tie(s.pattern, s.tier) = classify_pattern(s.delta, p);
  r.temporal = s;
  return r;
}

std::size_t column(const Table& t, const std::string& name) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  REQUIRE(it != t.columns.end());
  return static_cast<std::size_t>(it - t.columns.begin());
}

}  // namespace

TEST_CASE("report: significance markers") {
  CHECK(format_p(0.054) == "0.054†");
  CHECK(format_p(0.012) == "0.012*");
  CHECK(format_p(0.864) == "0.864");
  const std::vector<ModelReport> reports{sample_report("GPT-2 XL", 0.658, 0.592, 0.054, -2.70)};
  const auto t = detection_table(reports);
  CHECK(t.rows[0][column(t, "p-value")] == "0.054†");
  CHECK(t.rows[0][column(t, "Pattern")] == "Pos-0 peak");
  CHECK(t.rows[0][column(t, "Δ (p4-p0)")] == "-0.066");
  CHECK(t.rows[0][column(t, "Accuracy")] == "29.3%");
}

TEST_CASE("report: number formatting") {
  CHECK(format_auc(0.6189) == "0.619");
  CHECK(format_signed(0.013, 3) == "+0.013");
  CHECK(format_signed(-4.3504, 2) == "-4.35");
  CHECK(format_signed(-0.0001, 3) == "+0.000");
  CHECK(format_signed(std::numeric_limits<double>::infinity(), 2) == "+inf");
  CHECK(format_percent(0.132) == "13.2%");
}

TEST_CASE("report: absent baselines are absent columns") {
  const std::vector<ModelReport> reports{sample_report("m", 0.6, 0.6, 0.9, 0.1)};
  const auto t = layer_table(reports);
  CHECK(std::find(t.columns.begin(), t.columns.end(), "BL-Confidence") == t.columns.end());
  CHECK(t.rows[0][column(t, "Layer Depth %")] == "58.3%");

  auto with = reports;
  with[0].baseline_confidence = CVResult{{0.7, 0.8}, {NAN, NAN}, 0.75, 0.05, {}, 0};
  const auto t2 = layer_table(with);
  CHECK(t2.rows[0][column(t2, "BL-Confidence")] == "0.750");
}

TEST_CASE("report: per-dataset accuracy header carries counts") {
  const std::vector<ModelReport> reports{sample_report("m", 0.6, 0.6, 0.9, 0.1)};
  const auto t = dataset_accuracy_table(reports);
  CHECK(std::find(t.columns.begin(), t.columns.end(), "TriviaQA (n=500)") != t.columns.end());
  CHECK(t.rows[0].back() == "29.3%");
}

TEST_CASE("report: emit formats") {
  const std::vector<ModelReport> reports{sample_report("a", 0.663, 0.580, 0.012, -4.35),
                                         sample_report("b", 0.603, 0.604, 0.989, 0.02)};
  const auto csv = emit_report(reports, ReportFormat::csv);
  CHECK(csv.size() == 4);
  CHECK(csv[0].name == "detection.csv");
  CHECK(csv[0].content.rfind("Model,Params,Accuracy", 0) == 0);
  const auto json = emit_report(reports, ReportFormat::structured_text);
  REQUIRE(json.size() == 1);
  const Json parsed = parse_canonical(json[0].content);
  CHECK(parsed.is_object());
  const auto text = emit_report(reports, ReportFormat::human);
  CHECK(text[0].content.find("Flat") != std::string::npos);
  CHECK_THROWS(emit_report(std::vector<ModelReport>{}, ReportFormat::csv));
  CHECK(parse_report_format("json") == ReportFormat::structured_text);
  CHECK_THROWS(parse_report_format("xml"));
}

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "aprobe/sweep.hpp"

namespace aprobe {

enum class ReportFormat { csv, structured_text, human };

ReportFormat parse_report_format(const std::string& text);

struct Table {
  std::string name;  // file stem, e.g. "detection"
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

// Detection summary: Model, Params, Accuracy, Pos-0/Pos-4/Probe AUC, delta, p, Pattern.
Table detection_table(std::span<const ModelReport> reports);
// Layer analysis: Best Layer, Depth %, Layer AUC, confidence baseline.
Table layer_table(std::span<const ModelReport> reports);
// Significance: delta, t, p.
Table significance_table(std::span<const ModelReport> reports);
// Per-dataset accuracy.
Table dataset_accuracy_table(std::span<const ModelReport> reports);

std::string render(const Table& table, ReportFormat format);
std::string render_all(std::span<const Table> tables, ReportFormat format);

struct ReportFile {
  std::string name;
  std::string content;
};

// One file per table (csv, human) or one combined document (structured text).
std::vector<ReportFile> emit_report(std::span<const ModelReport> reports, ReportFormat format);
void write_report_files(std::span<const ReportFile> files, const std::filesystem::path& dir);

// Number formatting shared by the tables.
std::string format_auc(double v);                 // 0.619
std::string format_signed(double v, int digits);  // +0.013 / -4.35
std::string format_percent(double fraction);      // 13.2%
std::string format_p(double p);                   // 0.012* / 0.054† / 0.864

}  // namespace aprobe

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aprobe/archive.hpp"

namespace aprobe {

// NFKC, lowercase, non-alphanumerics replaced by spaces, whole-token
// articles ("a", "an", "the") dropped, whitespace collapsed and trimmed.
std::string normalize_answer(std::string_view text);

// True iff the normalised prediction equals some normalised gold answer.
bool exact_match(std::string_view prediction, std::span<const std::string> golds);

struct ScoredAnswer {
  std::string raw;
  std::string normalized;
  bool is_correct = false;
};

ScoredAnswer score_answer(std::string_view prediction, std::span<const std::string> golds);

struct AccuracyRow {
  std::string dataset;
  std::size_t n = 0;
  std::size_t n_correct = 0;
  double accuracy = 0.0;
};

struct AccuracyTable {
  std::vector<AccuracyRow> rows;  // datasets in enum order, only those present
  AccuracyRow overall;
};

// Counts use each record's stored label.
AccuracyTable accuracy_table(std::span<const ExampleRecord> records);

// CSV with columns dataset,n,n_correct,accuracy; overall row last.
std::string accuracy_table_csv(const AccuracyTable& table);

}  // namespace aprobe

#include "aprobe/scoring.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <array>
#include <fmt/format.h>
#include <stdexcept>

namespace aprobe {

namespace {

bool is_kept(UChar32 c) {
  const auto mask = U_GET_GC_MASK(c);
  return (mask & (U_GC_L_MASK | U_GC_M_MASK | U_GC_N_MASK)) != 0;
}

bool is_article(std::string_view token) { return token == "a" || token == "an" || token == "the"; }

}  // namespace

std::string normalize_answer(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfkc = icu::Normalizer2::getNFKCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFKC normaliser unavailable");

  icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  u = nfkc->normalize(u, status);
  if (U_FAILURE(status)) throw std::runtime_error("NFKC normalisation failed");
  u.toLower(icu::Locale::getRoot());

  icu::UnicodeString cleaned;
  for (int32_t i = 0; i < u.length();) {
    const UChar32 c = u.char32At(i);
    cleaned.append(is_kept(c) ? c : UChar32{' '});
    i += U16_LENGTH(c);
  }
  std::string utf8;
  cleaned.toUTF8String(utf8);

  std::string out;
  std::size_t i = 0;
  while (i < utf8.size()) {
    while (i < utf8.size() && utf8[i] == ' ') ++i;
    std::size_t j = i;
    while (j < utf8.size() && utf8[j] != ' ') ++j;
    if (j > i) {
      std::string_view token(utf8.data() + i, j - i);
      if (!is_article(token)) {
        if (!out.empty()) out.push_back(' ');
        out.append(token);
      }
    }
    i = j;
  }
  return out;
}

bool exact_match(std::string_view prediction, std::span<const std::string> golds) {
  if (golds.empty()) throw std::invalid_argument("exact_match: gold answer list is empty");
  const std::string pred = normalize_answer(prediction);
  for (const auto& g : golds) {
    if (normalize_answer(g) == pred) return true;
  }
  return false;
}

ScoredAnswer score_answer(std::string_view prediction, std::span<const std::string> golds) {
  return {std::string(prediction), normalize_answer(prediction), exact_match(prediction, golds)};
}

AccuracyTable accuracy_table(std::span<const ExampleRecord> records) {
  constexpr std::array kOrder = {Dataset::triviaqa, Dataset::simple_facts, Dataset::biography, Dataset::synthetic};
  AccuracyTable table;
  table.overall.dataset = "overall";
  for (Dataset ds : kOrder) {
    AccuracyRow row;
    row.dataset = to_string(ds);
    for (const auto& r : records) {
      if (r.dataset != ds) continue;
      ++row.n;
      if (r.label == 1) ++row.n_correct;
    }
    if (row.n == 0) continue;
    row.accuracy = static_cast<double>(row.n_correct) / static_cast<double>(row.n);
    table.overall.n += row.n;
    table.overall.n_correct += row.n_correct;
    table.rows.push_back(row);
  }
  if (table.overall.n > 0) {
    table.overall.accuracy = static_cast<double>(table.overall.n_correct) / static_cast<double>(table.overall.n);
  }
  return table;
}

std::string accuracy_table_csv(const AccuracyTable& table) {
  std::string out = "dataset,n,n_correct,accuracy\n";
  auto line = [&](const AccuracyRow& r) {
    out += fmt::format("{},{},{},{:.6f}\n", r.dataset, r.n, r.n_correct, r.accuracy);
  };
  for (const auto& r : table.rows) line(r);
  line(table.overall);
  return out;
}

}  // namespace aprobe

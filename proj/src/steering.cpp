#include "aprobe/steering.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <stdexcept>

#include "aprobe/canonical.hpp"
#include "aprobe/direction.hpp"
#include "aprobe/scoring.hpp"

namespace aprobe {

std::string to_string(Orientation o) { return o == Orientation::toward_correct ? "toward_correct" : "toward_hallucination"; }

Orientation parse_orientation(const std::string& text) {
  if (text == "toward_correct") return Orientation::toward_correct;
  if (text == "toward_hallucination") return Orientation::toward_hallucination;
  throw std::invalid_argument("unknown orientation: " + text);
}

Orientation flip(Orientation o) {
  return o == Orientation::toward_correct ? Orientation::toward_hallucination : Orientation::toward_correct;
}

SteeringVector export_steering(const LogisticProbe& probe, const PcaModel& pca, const std::string& model_name,
                               std::size_t layer, std::vector<double> alpha_grid, Orientation orientation) {
  const Eigen::VectorXd v = raw_weights(probe, pca);
  const double norm = v.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("export_steering: probe has zero weight vector");
  SteeringVector out;
  out.model_name = model_name;
  out.layer = layer;
  out.position = 0;
  out.alpha_grid = std::move(alpha_grid);
  out.orientation = orientation;
  const bool toward_positive = orientation == Orientation::toward_correct;
  out.direction = toward_positive ? Eigen::VectorXd(v / norm) : Eigen::VectorXd(-v / norm);
  out.expected_logit_shift = toward_positive ? norm : -norm;
  return out;
}

SteeringVector flipped(const SteeringVector& v) {
  SteeringVector out = v;
  out.orientation = flip(v.orientation);
  out.direction = -v.direction;
  out.expected_logit_shift = -v.expected_logit_shift;
  return out;
}

std::string encode_steering(const SteeringVector& v) {
  Json header;
  header["format_version"] = kSteeringFormatVersion;
  header["model_name"] = v.model_name;
  header["layer"] = v.layer;
  header["position"] = v.position;
  header["dim"] = v.direction.size();
  header["orientation"] = to_string(v.orientation);
  header["alpha_grid"] = v.alpha_grid;
  header["probe_positive_class"] = v.probe_positive_class;
  header["expected_logit_shift"] = number_to_json(v.expected_logit_shift);
  const std::string text = canonical_dump(header);

  std::string out(kSteeringMagic, sizeof(kSteeringMagic));
  const auto len = static_cast<std::uint32_t>(text.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((len >> (8 * i)) & 0xFF));
  out += text;
  for (Eigen::Index i = 0; i < v.direction.size(); ++i) {
    const float f = static_cast<float>(v.direction(i));
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
  }
  return out;
}

SteeringVector decode_steering(std::span<const char> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kSteeringMagic, 8) != 0) {
    throw std::runtime_error("not a steering vector file");
  }
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[8 + i])) << (8 * i);
  if (bytes.size() < 12 + static_cast<std::size_t>(len)) throw std::runtime_error("steering file: truncated header");
  const Json h = parse_canonical(std::string_view(bytes.data() + 12, len));
  if (h.at("format_version").get<int>() > kSteeringFormatVersion) throw std::runtime_error("steering file: unsupported version");

  SteeringVector v;
  v.model_name = h.at("model_name").get<std::string>();
  v.layer = h.at("layer").get<std::size_t>();
  v.position = h.at("position").get<int>();
  v.orientation = parse_orientation(h.at("orientation").get<std::string>());
  v.alpha_grid = h.at("alpha_grid").get<std::vector<double>>();
  v.probe_positive_class = h.at("probe_positive_class").get<std::string>();
  v.expected_logit_shift = number_from_json(h.at("expected_logit_shift"));
  const auto dim = h.at("dim").get<std::size_t>();
  const std::size_t payload = bytes.size() - 12 - len;
  if (payload != 4 * dim) {
    throw std::runtime_error("steering file: expected " + std::to_string(4 * dim) + " payload bytes, got " +
                             std::to_string(payload));
  }
  v.direction.resize(static_cast<Eigen::Index>(dim));
  const char* p = bytes.data() + 12 + len;
  for (std::size_t i = 0; i < dim; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[4 * i + b])) << (8 * b);
    float f;
    std::memcpy(&f, &bits, 4);
    v.direction(static_cast<Eigen::Index>(i)) = f;
  }
  return v;
}

void write_steering(const SteeringVector& v, const std::filesystem::path& path) {
  const std::string bytes = encode_steering(v);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

SteeringVector read_steering(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_steering(bytes);
}

double mean_activation_sd(const Archive& archive, std::size_t layer) {
  const Eigen::MatrixXd x = slice_cell(archive.header, archive.tensor, 0, layer);
  if (x.rows() < 2) throw std::invalid_argument("mean_activation_sd: need at least 2 examples");
  const Eigen::MatrixXd centred = x.rowwise() - x.colwise().mean();
  const Eigen::VectorXd var = centred.colwise().squaredNorm() / static_cast<double>(x.rows() - 1);
  return var.array().sqrt().mean();
}

std::vector<double> default_alpha_grid(double scale) {
  std::vector<double> grid;
  for (double a : {-5.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 5.0}) grid.push_back(a * scale);
  return grid;
}

std::vector<InterventionOutcome> intervention_outcomes(std::span<const ExampleRecord> before,
                                                       std::span<const ExampleRecord> after) {
  std::map<std::string, const ExampleRecord*> by_id;
  for (const auto& r : after) {
    if (!by_id.emplace(r.example_id, &r).second) throw std::invalid_argument("duplicate example_id " + r.example_id);
  }
  if (before.size() != after.size()) throw std::invalid_argument("before/after record counts differ");
  std::vector<InterventionOutcome> out;
  for (const auto& b : before) {
    auto it = by_id.find(b.example_id);
    if (it == by_id.end()) throw std::invalid_argument("example_id " + b.example_id + " has no steered counterpart");
    const ExampleRecord& a = *it->second;
    out.push_back({b.example_id, b.generated_answer, a.generated_answer,
                   exact_match(b.generated_answer, b.gold_answers) ? 1 : 0,
                   exact_match(a.generated_answer, b.gold_answers) ? 1 : 0});
  }
  return out;
}

CorrectionStats correction_rate(std::span<const InterventionOutcome> outcomes) {
  CorrectionStats s;
  s.n = outcomes.size();
  for (const auto& o : outcomes) {
    if (o.label_before == 0) {
      ++s.incorrect_before;
      if (o.label_after == 1) ++s.corrected;
    } else {
      ++s.correct_before;
      if (o.label_after == 0) ++s.regressed;
    }
  }
  if (s.incorrect_before) s.correction_rate = static_cast<double>(s.corrected) / static_cast<double>(s.incorrect_before);
  if (s.correct_before) s.regression_rate = static_cast<double>(s.regressed) / static_cast<double>(s.correct_before);
  return s;
}

CorrectionStats correction_rate(std::span<const ExampleRecord> before, std::span<const ExampleRecord> after) {
  const auto outcomes = intervention_outcomes(before, after);
  return correction_rate(outcomes);
}

}  // namespace aprobe

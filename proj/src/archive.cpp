#include "aprobe/archive.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "aprobe/canonical.hpp"

namespace aprobe {

namespace {

constexpr std::size_t kMagicSize = sizeof(kArchiveMagic);
constexpr std::size_t kLengthSize = 4;
constexpr std::size_t kMaxIssues = 1000;

void put_u32(std::string& out, std::uint32_t value) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

void put_f32(std::string& out, float value) {
  std::uint32_t bits;
  std::memcpy(&bits, &value, 4);
  put_u32(out, bits);
}

void put_f16(std::string& out, float value) {
  const std::uint16_t bits = Eigen::numext::bit_cast<std::uint16_t>(Eigen::half(value));
  out.push_back(static_cast<char>(bits & 0xFF));
  out.push_back(static_cast<char>(bits >> 8));
}

float get_f32(const char* p) {
  const std::uint32_t bits = get_u32(p);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

float get_f16(const char* p) {
  const auto bits = static_cast<std::uint16_t>(static_cast<unsigned char>(p[0]) |
                                               (static_cast<unsigned char>(p[1]) << 8));
  return static_cast<float>(Eigen::numext::bit_cast<Eigen::half>(bits));
}

Json header_to_json(const ArchiveHeader& h) {
  Json j;
  j["format_version"] = h.format_version;
  j["model_name"] = h.model_name;
  j["n_layers"] = h.n_layers;
  j["hidden_dim"] = h.hidden_dim;
  j["positions"] = h.positions;
  j["dtype"] = to_string(h.dtype);
  j["n_examples"] = h.n_examples;
  j["capture_point"] = h.capture_point;
  j["extras"] = h.extras;
  return j;
}

Json record_to_json(const ExampleRecord& r) {
  Json j;
  j["example_id"] = r.example_id;
  j["dataset"] = to_string(r.dataset);
  j["question"] = r.question;
  j["generated_answer"] = r.generated_answer;
  j["gold_answers"] = r.gold_answers;
  j["label"] = r.label;
  Json lp = Json::array();
  for (double v : r.token_logprobs) lp.push_back(number_to_json(v));
  Json ent = Json::array();
  for (double v : r.token_entropies) ent.push_back(number_to_json(v));
  j["token_logprobs"] = std::move(lp);
  j["token_entropies"] = std::move(ent);
  j["padded_positions"] = r.padded_positions;
  return j;
}

ArchiveHeader header_from_json(const Json& j) {
  ArchiveHeader h;
  h.format_version = j.at("format_version").get<int>();
  if (h.format_version > kArchiveFormatVersion) {
    throw ArchiveError(ArchiveError::Kind::unsupported_version,
                       "unsupported version: " + std::to_string(h.format_version));
  }
  h.model_name = j.at("model_name").get<std::string>();
  h.n_layers = j.at("n_layers").get<std::size_t>();
  h.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  h.positions = j.at("positions").get<std::vector<int>>();
  h.dtype = parse_dtype(j.at("dtype").get<std::string>());
  h.n_examples = j.at("n_examples").get<std::size_t>();
  h.capture_point = j.value("capture_point", std::string{});
  if (j.contains("extras")) h.extras = j.at("extras").get<std::map<std::string, std::string>>();
  return h;
}

ExampleRecord record_from_json(const Json& j) {
  ExampleRecord r;
  r.example_id = j.at("example_id").get<std::string>();
  r.dataset = parse_dataset(j.at("dataset").get<std::string>());
  r.question = j.at("question").get<std::string>();
  r.generated_answer = j.at("generated_answer").get<std::string>();
  r.gold_answers = j.at("gold_answers").get<std::vector<std::string>>();
  r.label = j.at("label").get<int>();
  for (const auto& v : j.at("token_logprobs")) r.token_logprobs.push_back(number_from_json(v));
  for (const auto& v : j.at("token_entropies")) r.token_entropies.push_back(number_from_json(v));
  if (j.contains("padded_positions")) r.padded_positions = j.at("padded_positions").get<std::vector<int>>();
  return r;
}

std::size_t expected_values(const ArchiveHeader& h) {
  return h.n_examples * h.positions.size() * h.n_layers * h.hidden_dim;
}

void check_shapes(const Archive& a) {
  const auto& h = a.header;
  if (a.records.size() != h.n_examples) {
    throw std::invalid_argument("shape mismatch: " + std::to_string(a.records.size()) +
                                " records for n_examples=" + std::to_string(h.n_examples));
  }
  const auto& t = a.tensor;
  if (t.n_examples() != h.n_examples || t.n_positions() != h.positions.size() ||
      t.n_layers() != h.n_layers || t.hidden_dim() != h.hidden_dim) {
    throw std::invalid_argument("shape mismatch: tensor shape does not match header");
  }
  if (h.n_layers < 1 || h.hidden_dim < 1 || h.n_examples < 1 || h.positions.empty()) {
    throw std::invalid_argument("shape mismatch: header counts must be >= 1");
  }
}

}  // namespace

std::string to_string(DType dtype) { return dtype == DType::f16 ? "f16" : "f32"; }

std::string to_string(Dataset dataset) {
  switch (dataset) {
    case Dataset::triviaqa: return "triviaqa";
    case Dataset::simple_facts: return "simple_facts";
    case Dataset::biography: return "biography";
    case Dataset::synthetic: return "synthetic";
  }
  return "synthetic";
}

DType parse_dtype(const std::string& text) {
  if (text == "f16") return DType::f16;
  if (text == "f32") return DType::f32;
  throw ArchiveError(ArchiveError::Kind::malformed_metadata, "unknown dtype: " + text);
}

Dataset parse_dataset(const std::string& text) {
  if (text == "triviaqa") return Dataset::triviaqa;
  if (text == "simple_facts") return Dataset::simple_facts;
  if (text == "biography") return Dataset::biography;
  if (text == "synthetic") return Dataset::synthetic;
  throw ArchiveError(ArchiveError::Kind::malformed_metadata, "unknown dataset: " + text);
}

std::size_t dtype_size(DType dtype) { return dtype == DType::f16 ? 2 : 4; }

std::size_t ArchiveHeader::position_index(int position) const {
  auto it = std::find(positions.begin(), positions.end(), position);
  if (it == positions.end()) {
    throw std::out_of_range("position " + std::to_string(position) + " not in archive");
  }
  return static_cast<std::size_t>(it - positions.begin());
}

ActivationTensor::ActivationTensor(std::size_t n_examples, std::size_t n_positions,
                                   std::size_t n_layers, std::size_t hidden_dim)
    : n_examples_(n_examples),
      n_positions_(n_positions),
      n_layers_(n_layers),
      hidden_dim_(hidden_dim),
      values_(n_examples * n_positions * n_layers * hidden_dim, 0.0f) {}

std::vector<int> Archive::labels() const {
  std::vector<int> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.label);
  return out;
}

std::string encode_archive(const Archive& archive) {
  check_shapes(archive);
  const auto& h = archive.header;
  const std::size_t per_example = h.positions.size() * h.n_layers * h.hidden_dim;
  const auto values = archive.tensor.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float v = values[i];
    const bool representable =
        std::isfinite(v) && (h.dtype == DType::f32 || std::isfinite(static_cast<float>(Eigen::half(v))));
    if (!representable) {
      throw std::invalid_argument("non-finite activation at example " + std::to_string(i / per_example));
    }
  }

  Json meta;
  meta["header"] = header_to_json(h);
  Json records = Json::array();
  for (const auto& r : archive.records) records.push_back(record_to_json(r));
  meta["records"] = std::move(records);
  const std::string text = canonical_dump(meta);
  if (text.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("metadata block exceeds 4 GiB");
  }

  std::string out;
  out.reserve(kMagicSize + kLengthSize + text.size() + values.size() * dtype_size(h.dtype));
  out.append(kArchiveMagic, kMagicSize);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.append(text);
  if (h.dtype == DType::f32) {
    for (float v : values) put_f32(out, v);
  } else {
    for (float v : values) put_f16(out, v);
  }
  return out;
}

Archive decode_archive(std::span<const char> bytes) {
  if (bytes.size() < kMagicSize || std::memcmp(bytes.data(), kArchiveMagic, kMagicSize) != 0) {
    throw ArchiveError(ArchiveError::Kind::not_an_archive, "not an archive");
  }
  if (bytes.size() < kMagicSize + kLengthSize) {
    throw ArchiveError(ArchiveError::Kind::corrupt_payload, "corrupt payload: missing header length");
  }
  const std::size_t meta_len = get_u32(bytes.data() + kMagicSize);
  const std::size_t meta_begin = kMagicSize + kLengthSize;
  if (bytes.size() < meta_begin + meta_len) {
    throw ArchiveError(ArchiveError::Kind::corrupt_payload,
                       "corrupt payload: metadata block needs " + std::to_string(meta_len) +
                           " bytes, file has " + std::to_string(bytes.size() - meta_begin));
  }

  Archive a;
  try {
    const Json meta = parse_canonical(std::string_view(bytes.data() + meta_begin, meta_len));
    a.header = header_from_json(meta.at("header"));
    for (const auto& r : meta.at("records")) a.records.push_back(record_from_json(r));
  } catch (const ArchiveError&) {
    throw;
  } catch (const std::exception& e) {
    throw ArchiveError(ArchiveError::Kind::malformed_metadata, std::string("malformed metadata: ") + e.what());
  }

  const auto& h = a.header;
  const std::size_t count = expected_values(h);
  const std::size_t width = dtype_size(h.dtype);
  const std::size_t expected = count * width;
  const std::size_t actual = bytes.size() - meta_begin - meta_len;
  if (actual != expected) {
    throw ArchiveError(ArchiveError::Kind::corrupt_payload,
                       "corrupt payload: expected " + std::to_string(expected) + " tensor bytes, got " +
                           std::to_string(actual));
  }

  a.tensor = ActivationTensor(h.n_examples, h.positions.size(), h.n_layers, h.hidden_dim);
  auto out = a.tensor.values();
  const char* p = bytes.data() + meta_begin + meta_len;
  if (h.dtype == DType::f32) {
    for (std::size_t i = 0; i < count; ++i) out[i] = get_f32(p + 4 * i);
  } else {
    for (std::size_t i = 0; i < count; ++i) out[i] = get_f16(p + 2 * i);
  }
  return a;
}

void write_archive(const Archive& archive, const std::filesystem::path& path) {
  const std::string bytes = encode_archive(archive);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ArchiveError(ArchiveError::Kind::io, "cannot open for writing: " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ArchiveError(ArchiveError::Kind::io, "write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Archive read_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArchiveError(ArchiveError::Kind::io, "cannot open: " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_archive(bytes);
}

Eigen::MatrixXd slice_cell(const ArchiveHeader& header, const ActivationTensor& tensor, int position,
                           std::size_t layer) {
  const std::size_t p = header.position_index(position);
  if (layer >= tensor.n_layers()) {
    throw std::out_of_range("layer " + std::to_string(layer) + " out of range");
  }
  const std::size_t n = tensor.n_examples();
  const std::size_t d = tensor.hidden_dim();
  Eigen::MatrixXd x(n, d);
  for (std::size_t e = 0; e < n; ++e) {
    const auto row = tensor.row(e, p, layer);
    for (std::size_t j = 0; j < d; ++j) x(e, j) = row[j];
  }
  return x;
}

ValidationReport validate_archive(const Archive& a) {
  ValidationReport report;
  auto add = [&](std::string kind, std::string location, std::string message) {
    if (report.issues.size() < kMaxIssues) {
      report.issues.push_back({std::move(kind), std::move(location), std::move(message)});
    } else if (report.issues.size() == kMaxIssues) {
      report.issues.push_back({"truncated", "", "further issues omitted"});
    }
  };

  const auto& h = a.header;
  if (h.positions.empty() || h.positions.front() != 0) {
    add("header", "positions", "positions must start at 0");
  }
  for (std::size_t i = 1; i < h.positions.size(); ++i) {
    if (h.positions[i] <= h.positions[i - 1]) {
      add("header", "positions", "positions must be strictly increasing");
      break;
    }
  }
  if (h.n_layers < 1) add("header", "n_layers", "n_layers must be >= 1");
  if (h.hidden_dim < 1) add("header", "hidden_dim", "hidden_dim must be >= 1");
  if (h.n_examples < 1) add("header", "n_examples", "n_examples must be >= 1");
  if (a.records.size() != h.n_examples) {
    add("shape", "records",
        std::to_string(a.records.size()) + " records, header says " + std::to_string(h.n_examples));
  }
  const auto& t = a.tensor;
  if (t.n_examples() != h.n_examples || t.n_positions() != h.positions.size() || t.n_layers() != h.n_layers ||
      t.hidden_dim() != h.hidden_dim) {
    add("shape", "tensor", "tensor shape does not match header");
  }

  std::map<std::string, std::size_t> seen_ids;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& r = a.records[i];
    const std::string where = "example=" + std::to_string(i) + " id=" + r.example_id;
    if (r.label != 0 && r.label != 1) {
      add("label_domain", where, "label " + std::to_string(r.label) + " not in {0,1}");
    }
    if (r.token_logprobs.empty()) add("length", where, "token_logprobs is empty");
    if (r.token_logprobs.size() != r.token_entropies.size()) {
      add("length", where,
          "token_logprobs has " + std::to_string(r.token_logprobs.size()) + " entries, token_entropies has " +
              std::to_string(r.token_entropies.size()));
    }
    for (std::size_t k = 0; k < r.token_logprobs.size(); ++k) {
      const double v = r.token_logprobs[k];
      if (!std::isfinite(v) || v > 0.0) add("logprob_domain", where + " token=" + std::to_string(k), "log-probability must be finite and <= 0");
    }
    for (std::size_t k = 0; k < r.token_entropies.size(); ++k) {
      const double v = r.token_entropies[k];
      if (!std::isfinite(v) || v < 0.0) add("entropy_domain", where + " token=" + std::to_string(k), "entropy must be finite and >= 0");
    }
    if (r.gold_answers.empty()) add("gold_answers", where, "no gold answers");
    if (auto [it, inserted] = seen_ids.emplace(r.example_id, i); !inserted) {
      add("duplicate_id", where, "example_id already used by example " + std::to_string(it->second));
    }
  }

  if (t.size() == expected_values(h)) {
    for (std::size_t e = 0; e < t.n_examples(); ++e) {
      for (std::size_t p = 0; p < t.n_positions(); ++p) {
        for (std::size_t l = 0; l < t.n_layers(); ++l) {
          const auto row = t.row(e, p, l);
          for (std::size_t d = 0; d < row.size(); ++d) {
            if (!std::isfinite(row[d])) {
              std::ostringstream loc;
              loc << "example=" << e << " position=" << h.positions[p] << " layer=" << l << " dim=" << d;
              add("non_finite", loc.str(), "activation is not finite");
            }
          }
        }
      }
    }
  }
  return report;
}

ValidationReport validate_archive(const std::filesystem::path& path) {
  try {
    return validate_archive(read_archive(path));
  } catch (const ArchiveError& e) {
    return ValidationReport{{{"format", path.string(), e.what()}}};
  } catch (const std::exception& e) {
    return ValidationReport{{{"format", path.string(), e.what()}}};
  }
}

}  // namespace aprobe

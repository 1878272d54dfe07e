#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace aprobe {

inline constexpr char kArchiveMagic[8] = {'A', 'P', 'R', 'O', 'B', 'E', '1', '\n'};
inline constexpr int kArchiveFormatVersion = 1;

enum class DType { f16, f32 };
enum class Dataset { triviaqa, simple_facts, biography, synthetic };

std::string to_string(DType dtype);
std::string to_string(Dataset dataset);
DType parse_dtype(const std::string& text);
Dataset parse_dataset(const std::string& text);
std::size_t dtype_size(DType dtype);

struct ArchiveHeader {
  int format_version = kArchiveFormatVersion;
  std::string model_name;
  std::size_t n_layers = 0;
  std::size_t hidden_dim = 0;
  // Generation positions, 0 = final prompt token before any output.
  std::vector<int> positions;
  DType dtype = DType::f32;
  std::size_t n_examples = 0;
  // Where in the block the residual was read; free-form, set by the producer.
  std::string capture_point;
  // Producer metadata (parameter count label, prompt template, ...).
  std::map<std::string, std::string> extras;

  // Index of `position` in `positions`, or throws std::out_of_range.
  std::size_t position_index(int position) const;
  bool operator==(const ArchiveHeader&) const = default;
};

struct ExampleRecord {
  std::string example_id;
  Dataset dataset = Dataset::synthetic;
  std::string question;
  std::string generated_answer;
  std::vector<std::string> gold_answers;
  int label = 0;  // 1 = correct, 0 = hallucinated
  std::vector<double> token_logprobs;
  std::vector<double> token_entropies;
  // Positions whose activations repeat the last generated token (short answers).
  std::vector<int> padded_positions;

  bool operator==(const ExampleRecord&) const = default;
};

// Dense [example, position, layer, dim] activations, dim fastest-varying.
class ActivationTensor {
 public:
  ActivationTensor() = default;
  ActivationTensor(std::size_t n_examples, std::size_t n_positions, std::size_t n_layers,
                   std::size_t hidden_dim);

  std::size_t n_examples() const { return n_examples_; }
  std::size_t n_positions() const { return n_positions_; }
  std::size_t n_layers() const { return n_layers_; }
  std::size_t hidden_dim() const { return hidden_dim_; }
  std::size_t size() const { return values_.size(); }

  std::size_t offset(std::size_t example, std::size_t position_index, std::size_t layer) const {
    return ((example * n_positions_ + position_index) * n_layers_ + layer) * hidden_dim_;
  }
  float& at(std::size_t e, std::size_t p, std::size_t l, std::size_t d) {
    return values_[offset(e, p, l) + d];
  }
  float at(std::size_t e, std::size_t p, std::size_t l, std::size_t d) const {
    return values_[offset(e, p, l) + d];
  }
  std::span<const float> row(std::size_t e, std::size_t p, std::size_t l) const {
    return {values_.data() + offset(e, p, l), hidden_dim_};
  }
  std::span<float> row(std::size_t e, std::size_t p, std::size_t l) {
    return {values_.data() + offset(e, p, l), hidden_dim_};
  }
  std::span<const float> values() const { return values_; }
  std::span<float> values() { return values_; }

  bool operator==(const ActivationTensor&) const = default;

 private:
  std::size_t n_examples_ = 0;
  std::size_t n_positions_ = 0;
  std::size_t n_layers_ = 0;
  std::size_t hidden_dim_ = 0;
  std::vector<float> values_;
};

struct Archive {
  ArchiveHeader header;
  std::vector<ExampleRecord> records;
  ActivationTensor tensor;

  std::vector<int> labels() const;
  bool operator==(const Archive&) const = default;
};

class ArchiveError : public std::runtime_error {
 public:
  enum class Kind { not_an_archive, corrupt_payload, unsupported_version, malformed_metadata, io };
  ArchiveError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Serialised bytes of an archive. Rejects shape mismatches and non-finite
// (or, for f16, unrepresentable) activations before producing anything.
std::string encode_archive(const Archive& archive);
Archive decode_archive(std::span<const char> bytes);

void write_archive(const Archive& archive, const std::filesystem::path& path);
Archive read_archive(const std::filesystem::path& path);

// Design matrix for one probing cell: rows = examples, cols = hidden dims.
Eigen::MatrixXd slice_cell(const ArchiveHeader& header, const ActivationTensor& tensor,
                           int position, std::size_t layer);

struct ValidationIssue {
  std::string kind;      // e.g. "shape", "non_finite", "label_domain"
  std::string location;  // e.g. "example=7 position=0 layer=3 dim=10"
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
};

ValidationReport validate_archive(const std::filesystem::path& path);
ValidationReport validate_archive(const Archive& archive);

}  // namespace aprobe

#include "aprobe/model_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aprobe {

Json vector_to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_to_json(v(i)));
  return out;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number_from_json(j[i]);
  return v;
}

Json to_json(const PcaModel& m) {
  Json j;
  j["kind"] = "pca";
  j["mean"] = vector_to_json(m.mean);
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.components.rows(); ++r) rows.push_back(vector_to_json(m.components.row(r).transpose()));
  j["components"] = std::move(rows);
  j["explained_variance"] = vector_to_json(m.explained_variance);
  j["total_variance"] = number_to_json(m.total_variance);
  j["variance_threshold"] = m.variance_threshold;
  j["whiten"] = m.whiten;
  return j;
}

PcaModel pca_from_json(const Json& j) {
  if (j.value("kind", "") != "pca") throw std::invalid_argument("not a PCA model");
  PcaModel m;
  m.mean = vector_from_json(j.at("mean"));
  const auto& rows = j.at("components");
  m.components.resize(static_cast<Eigen::Index>(rows.size()), m.mean.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Eigen::VectorXd row = vector_from_json(rows[r]);
    if (row.size() != m.mean.size()) throw std::invalid_argument("PCA component has wrong length");
    m.components.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  m.explained_variance = vector_from_json(j.at("explained_variance"));
  m.total_variance = number_from_json(j.at("total_variance"));
  m.variance_threshold = j.at("variance_threshold").get<double>();
  m.whiten = j.at("whiten").get<bool>();
  return m;
}

Json to_json(const LogisticProbe& p) {
  Json j;
  j["kind"] = "logistic";
  j["weights"] = vector_to_json(p.weights);
  j["bias"] = number_to_json(p.bias);
  j["C"] = p.C;
  j["converged"] = p.converged;
  j["iterations"] = p.iterations;
  j["gradient_norm"] = number_to_json(p.gradient_norm);
  return j;
}

LogisticProbe probe_from_json(const Json& j) {
  if (j.value("kind", "") != "logistic") throw std::invalid_argument("not a logistic probe");
  LogisticProbe p;
  p.weights = vector_from_json(j.at("weights"));
  p.bias = number_from_json(j.at("bias"));
  p.C = j.at("C").get<double>();
  p.converged = j.at("converged").get<bool>();
  p.iterations = j.at("iterations").get<int>();
  p.gradient_norm = number_from_json(j.at("gradient_norm"));
  return p;
}

std::uint64_t fingerprint(const PcaModel& m) {
  Fnv1a h;
  h.add(std::span<const double>(m.mean.data(), static_cast<std::size_t>(m.mean.size())));
  h.add(static_cast<std::uint64_t>(m.components.rows()));
  for (Eigen::Index i = 0; i < m.components.size(); ++i) h.add(m.components.data()[i]);
  h.add(std::span<const double>(m.explained_variance.data(), static_cast<std::size_t>(m.explained_variance.size())));
  return h.digest();
}

std::uint64_t fingerprint(const LogisticProbe& p) {
  Fnv1a h;
  h.add(std::span<const double>(p.weights.data(), static_cast<std::size_t>(p.weights.size())));
  h.add(p.bias);
  h.add(p.C);
  return h.digest();
}

void save_fitted(const FittedCell& cell, const std::filesystem::path& path) {
  Json j;
  j["pca"] = to_json(cell.pca);
  j["probe"] = to_json(cell.probe);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << canonical_dump(j);
}

FittedCell load_fitted(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const Json j = parse_canonical(ss.str());
  return {pca_from_json(j.at("pca")), probe_from_json(j.at("probe"))};
}

}  // namespace aprobe

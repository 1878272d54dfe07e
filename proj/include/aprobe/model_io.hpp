#pragma once

#include <filesystem>
#include <string>

#include "aprobe/canonical.hpp"
#include "aprobe/logistic.hpp"
#include "aprobe/pca.hpp"

namespace aprobe {

Json to_json(const PcaModel& model);
Json to_json(const LogisticProbe& probe);
PcaModel pca_from_json(const Json& j);
LogisticProbe probe_from_json(const Json& j);

Json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const Json& j);

// Fingerprint of fitted parameters; equal iff the parameters are bitwise equal.
std::uint64_t fingerprint(const PcaModel& model);
std::uint64_t fingerprint(const LogisticProbe& probe);

struct FittedCell {
  PcaModel pca;
  LogisticProbe probe;
};

void save_fitted(const FittedCell& cell, const std::filesystem::path& path);
FittedCell load_fitted(const std::filesystem::path& path);

}  // namespace aprobe

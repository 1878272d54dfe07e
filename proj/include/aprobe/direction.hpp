#pragma once

#include <Eigen/Core>

#include "aprobe/logistic.hpp"
#include "aprobe/pca.hpp"

namespace aprobe {

// Probe weights pulled back to raw activation space: projection()^T * w.
// The probe logit of a raw activation h is raw_weights.(h - mean) + bias.
Eigen::VectorXd raw_weights(const LogisticProbe& probe, const PcaModel& pca);

// Unit vector along raw_weights; moving h by alpha along it shifts the
// logit by exactly alpha * |raw_weights|.
Eigen::VectorXd probe_direction(const LogisticProbe& probe, const PcaModel& pca);

// Logit of raw (untransformed) activations, one per row.
Eigen::VectorXd raw_logit(const LogisticProbe& probe, const PcaModel& pca, const Eigen::MatrixXd& raw);

}  // namespace aprobe

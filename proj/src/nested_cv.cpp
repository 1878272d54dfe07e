#include "aprobe/nested_cv.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <unordered_map>

#include "aprobe/auc.hpp"
#include "aprobe/canonical.hpp"
#include "aprobe/model_io.hpp"
#include "aprobe/random.hpp"

namespace aprobe {

namespace {

std::uint64_t row_hash(const Eigen::MatrixXd& x, std::size_t r) {
  Fnv1a h;
  for (Eigen::Index c = 0; c < x.cols(); ++c) h.add(x(static_cast<Eigen::Index>(r), c));
  return h.digest();
}

struct FoldOutcome {
  double auc = 0.0;
  double C = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t fingerprint = 0;
  int nonconverged = 0;
  FoldModel model;
};

FoldOutcome run_fold(const Eigen::MatrixXd& x_raw, std::span<const int> labels, const FoldPlan& outer, std::size_t fold,
                     const NestedCvOptions& options) {
  const auto train = outer.train_indices(fold);
  const auto test = outer.test_indices(fold);
  if (options.leakage_check) {
    const auto shared = shared_rows(x_raw, train, test);
    if (!shared.empty()) {
      throw LeakageError("fold " + std::to_string(fold) + ": " + std::to_string(shared.size()) +
                         " training rows also appear in the test split (first: row " + std::to_string(shared.front()) +
                         ")");
    }
  }
  const Eigen::MatrixXd x_train = take_rows(x_raw, train);
  const Eigen::MatrixXd x_test = take_rows(x_raw, test);
  const std::vector<int> y_train = take(labels, train);
  const std::vector<int> y_test = take(labels, test);

  FoldOutcome out;
  out.model.pca = pca_fit(x_train, options.pca_threshold, options.whiten);
  const Eigen::MatrixXd z_train = pca_transform(out.model.pca, x_train);
  const Eigen::MatrixXd z_test = pca_transform(out.model.pca, x_test);

  Eigen::VectorXd test_logit;
  Fnv1a fp;
  fp.add(fingerprint(out.model.pca));
  if (options.probe == ProbeKind::mlp) {
    out.model.mlp = mlp_fit(z_train, y_train, mix_seed(options.model_seed, fold), options.mlp);
    test_logit = mlp_predict_logit(*out.model.mlp, z_test);
    const auto& m = *out.model.mlp;
    fp.add(std::span<const double>(m.hidden_weights.data(), static_cast<std::size_t>(m.hidden_weights.size())));
    fp.add(std::span<const double>(m.output_weights.data(), static_cast<std::size_t>(m.output_weights.size())));
  } else {
    const std::size_t best =
        select_C(x_train, y_train, out.model.pca, options, mix_seed(options.seed, fold, 0x696e6e6572ull), out.nonconverged);
    out.C = options.C_grid[best];
    out.model.probe = logistic_fit(z_train, y_train, out.C, options.logistic);
    if (!out.model.probe.converged) ++out.nonconverged;
    test_logit = predict_logit(out.model.probe, z_test);
    fp.add(fingerprint(out.model.probe));
  }
  out.fingerprint = fp.digest();
  out.auc = auc_roc(std::span<const double>(test_logit.data(), static_cast<std::size_t>(test_logit.size())), y_test);
  return out;
}

}  // namespace

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

std::vector<int> take(std::span<const int> values, std::span<const std::size_t> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(values[r]);
  return out;
}

std::vector<std::size_t> shared_rows(const Eigen::MatrixXd& x, std::span<const std::size_t> train,
                                     std::span<const std::size_t> test) {
  std::unordered_multimap<std::uint64_t, std::size_t> test_hashes;
  for (std::size_t r : test) test_hashes.emplace(row_hash(x, r), r);
  std::vector<std::size_t> shared;
  for (std::size_t r : train) {
    auto [lo, hi] = test_hashes.equal_range(row_hash(x, r));
    for (auto it = lo; it != hi; ++it) {
      if (x.row(static_cast<Eigen::Index>(r)) == x.row(static_cast<Eigen::Index>(it->second))) {
        shared.push_back(r);
        break;
      }
    }
  }
  return shared;
}

std::size_t select_C(const Eigen::MatrixXd& x_train_raw, std::span<const int> y_train, const PcaModel& outer_pca,
                     const NestedCvOptions& options, std::uint64_t inner_seed, int& nonconverged) {
  if (options.C_grid.empty()) throw std::invalid_argument("C grid is empty");
  if (options.C_grid.size() == 1) return 0;
  const FoldPlan inner = stratified_kfold(y_train, options.inner_k, inner_seed);
  std::vector<double> total(options.C_grid.size(), 0.0);
  for (std::size_t f = 0; f < inner.k; ++f) {
    const auto tr = inner.train_indices(f);
    const auto te = inner.test_indices(f);
    const Eigen::MatrixXd xa = take_rows(x_train_raw, tr);
    const Eigen::MatrixXd xb = take_rows(x_train_raw, te);
    const std::vector<int> ya = take(y_train, tr);
    const std::vector<int> yb = take(y_train, te);
    const PcaModel pca = options.inner_pca_refit ? pca_fit(xa, options.pca_threshold, options.whiten) : outer_pca;
    const Eigen::MatrixXd za = pca_transform(pca, xa);
    const Eigen::MatrixXd zb = pca_transform(pca, xb);
    LogisticProbe previous;
    bool have_previous = false;
    for (std::size_t c = 0; c < options.C_grid.size(); ++c) {
      LogisticProbe probe = logistic_fit(za, ya, options.C_grid[c], options.logistic, have_previous ? &previous : nullptr);
      if (!probe.converged) ++nonconverged;
      const Eigen::VectorXd logit = predict_logit(probe, zb);
      total[c] += auc_roc(std::span<const double>(logit.data(), static_cast<std::size_t>(logit.size())), yb);
      previous = std::move(probe);
      have_previous = true;
    }
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < total.size(); ++c)
    if (total[c] > total[best]) best = c;
  return best;
}

CVResult nested_cv_probe(const Eigen::MatrixXd& x_raw, std::span<const int> labels, const FoldPlan& outer,
                         const NestedCvOptions& options, std::vector<FoldModel>* fitted) {
  if (options.C_grid.empty()) throw std::invalid_argument("nested_cv_probe: C grid is empty");
  if (static_cast<std::size_t>(x_raw.rows()) != labels.size() || outer.assignment.size() != labels.size()) {
    throw std::invalid_argument("nested_cv_probe: rows, labels and fold plan differ in size");
  }
  const std::size_t k = outer.k;
  std::vector<FoldOutcome> outcomes(k);
  std::vector<std::exception_ptr> errors(k);

  const int workers = std::max(1, options.workers);
#pragma omp parallel for schedule(dynamic) num_threads(workers) if (workers > 1)
  for (std::size_t f = 0; f < k; ++f) {
    try {
      outcomes[f] = run_fold(x_raw, labels, outer, f, options);
    } catch (...) {
      errors[f] = std::current_exception();
    }
  }
  for (std::size_t f = 0; f < k; ++f) {
    if (!errors[f]) continue;
    try {
      std::rethrow_exception(errors[f]);
    } catch (const LeakageError&) {
      throw;
    } catch (const std::exception& e) {
      throw FoldError(f, e.what());
    }
  }

  CVResult cv;
  for (auto& o : outcomes) {
    cv.fold_auc.push_back(o.auc);
    cv.fold_C.push_back(o.C);
    cv.fold_fingerprints.push_back(o.fingerprint);
    cv.nonconverged_fits += o.nonconverged;
  }
  cv.finalize();
  if (fitted) {
    fitted->clear();
    for (auto& o : outcomes) fitted->push_back(std::move(o.model));
  }
  return cv;
}

}  // namespace aprobe

#include "aprobe/cv_result.hpp"

#include <cmath>

namespace aprobe {

void CVResult::finalize() {
  if (fold_auc.empty()) {
    mean_auc = std_auc = 0.0;
    return;
  }
  double sum = 0.0;
  for (double v : fold_auc) sum += v;
  mean_auc = sum / static_cast<double>(fold_auc.size());
  double ss = 0.0;
  for (double v : fold_auc) ss += (v - mean_auc) * (v - mean_auc);
  std_auc = std::sqrt(ss / static_cast<double>(fold_auc.size()));
}

Json to_json(const CVResult& cv) {
  Json j;
  Json aucs = Json::array(), cs = Json::array(), fps = Json::array();
  for (double v : cv.fold_auc) aucs.push_back(number_to_json(v));
  for (double v : cv.fold_C) cs.push_back(number_to_json(v));
  for (auto f : cv.fold_fingerprints) fps.push_back(to_hex(f));
  j["fold_auc"] = std::move(aucs);
  j["fold_C"] = std::move(cs);
  j["fold_fingerprints"] = std::move(fps);
  j["mean_auc"] = number_to_json(cv.mean_auc);
  j["std_auc"] = number_to_json(cv.std_auc);
  j["nonconverged_fits"] = cv.nonconverged_fits;
  return j;
}

CVResult cv_result_from_json(const Json& j) {
  CVResult cv;
  for (const auto& v : j.at("fold_auc")) cv.fold_auc.push_back(number_from_json(v));
  for (const auto& v : j.at("fold_C")) cv.fold_C.push_back(number_from_json(v));
  for (const auto& v : j.at("fold_fingerprints")) cv.fold_fingerprints.push_back(std::stoull(v.get<std::string>(), nullptr, 16));
  cv.mean_auc = number_from_json(j.at("mean_auc"));
  cv.std_auc = number_from_json(j.at("std_auc"));
  cv.nonconverged_fits = j.at("nonconverged_fits").get<int>();
  return cv;
}

}  // namespace aprobe

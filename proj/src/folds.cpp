#include "aprobe/folds.hpp"

#include <stdexcept>
#include <string>

#include "aprobe/canonical.hpp"
#include "aprobe/random.hpp"

namespace aprobe {

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] != fold) out.push_back(i);
  return out;
}

std::uint64_t FoldPlan::fingerprint() const {
  Fnv1a h;
  h.add(static_cast<std::uint64_t>(k));
  for (auto a : assignment) h.add(static_cast<std::uint64_t>(a));
  return h.digest();
}

FoldPlan stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("stratified_kfold: k must be at least 2");
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignment.assign(labels.size(), 0);

  std::size_t dealer = 0;
  for (int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != 0 && labels[i] != 1) throw std::invalid_argument("stratified_kfold: labels must be 0 or 1");
      if (labels[i] == cls) members.push_back(i);
    }
    if (members.size() < k) {
      throw std::invalid_argument("stratified_kfold: class " + std::to_string(cls) + " has " +
                                  std::to_string(members.size()) + " examples, fewer than k=" + std::to_string(k));
    }
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(cls)));
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t idx : members) {
      plan.assignment[idx] = dealer;
      dealer = (dealer + 1) % k;
    }
  }
  return plan;
}

}  // namespace aprobe

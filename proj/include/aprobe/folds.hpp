#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace aprobe {

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignment;  // fold index per example
  std::uint64_t seed = 0;

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
  std::uint64_t fingerprint() const;
};

// Each class is shuffled and dealt round-robin, continuing the dealer
// position across classes, so every fold holds floor or ceil of n_c / k
// examples of class c.
FoldPlan stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed);

}  // namespace aprobe

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace mcjesp {

/// Sparse Markov reward process in CSR form, used for exact policy
/// evaluation.  Rows are appended in state order.
struct MarkovRewardChain {
  std::vector<double> reward;
  std::vector<std::size_t> offsets{0};
  std::vector<int> targets;
  std::vector<double> probs;
  std::vector<std::pair<int, double>> initial;

  int num_states() const { return static_cast<int>(reward.size()); }

  /// Discounted value from `initial`, iterating V <- r + discount * P V until
  /// the sup-norm change is below tol * (1 - discount) / discount.
  double evaluate(double discount, double tol) const;
};

}  // namespace mcjesp

#pragma once

#include <optional>
#include <vector>

#include "robust_fusion/core.hpp"

namespace robust_fusion {

// t i.i.d. draws reduced to their count vectors (a sufficient statistic).
// Signals are count vectors in decreasing lexicographic order, labelled
// "[n_1,...,n_k]". t = 1 returns the base experiment.
Experiment iid_power(const Experiment& base, int t, std::size_t cap = kDefaultCap);

// Number of count vectors of t draws over k signals, saturating at SIZE_MAX.
std::size_t count_vectors(Index k, int t);

// Chernoff information between the two state rows:
//   -min_{s in [0,1]} log sum_y P(y|theta1)^(1-s) P(y|theta2)^s,
// +infinity when the rows have disjoint supports.
double chernoff_index(const Experiment& experiment);

struct SweepRow {
  int t;
  double joint_value;
  std::vector<double> single_values;
};

// Joint robust value and every single-source value for t = 1..t_max.
std::vector<SweepRow> power_sweep(const std::vector<Experiment>& experiments,
                                  const DecisionProblem& problem, int t_max,
                                  std::size_t cap = kDefaultCap);

// Smallest t <= t_max at which the first source's t-fold power strictly beats
// every other power in every canonical subproblem. The first source must have
// the strictly largest Chernoff index.
std::optional<int> dominance_threshold(const std::vector<Experiment>& experiments,
                                       const DecisionProblem& problem, int t_max = 64,
                                       std::size_t cap = kDefaultCap);

}  // namespace robust_fusion

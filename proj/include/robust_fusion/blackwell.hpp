#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "robust_fusion/core.hpp"

namespace robust_fusion {

// Feasible set of a binary-state experiment in the binary-action picture: the
// zonotope spanned by its likelihood vectors (P(y|theta1), P(y|theta2)). Only
// the upper boundary is stored; the lower one is its reflection through
// (1/2, 1/2).
struct Zonotope2 {
  std::vector<Eigen::Vector2d> upper_path;  // (0,0) -> (1,1)
  std::vector<Eigen::Vector2d> generators;  // strictly decreasing slope

  // Height of the upper boundary above abscissa x in [0, 1].
  double upper_height(double x) const;

  // True when `inner` lies inside this zonotope (up to `tolerance`).
  bool contains(const Zonotope2& inner, double tolerance = 1e-9) const;
};

// g(z|y): rows are source signals, columns target signals.
struct GarblingMatrix {
  Matrix matrix;
};

Zonotope2 feasible_zonotope(const Experiment& experiment);

// A garbling g with target = source * g, or nullopt when none exists.
std::optional<GarblingMatrix> is_garbling(const Experiment& target, const Experiment& source);

// Least informative experiment dominating every input (binary states only):
// one signal per edge of the concave envelope of the inputs' upper paths.
Experiment blackwell_supremum(const std::vector<Experiment>& experiments);

// Couples the inputs through their supremum: the joint draws z from the
// supremum and then each y_j independently from g_j(.|z).
JointExperiment supremum_joint(const std::vector<Experiment>& experiments,
                               std::size_t cap = kDefaultCap);

struct WorstCaseJoint {
  JointExperiment joint;
  double value;
};

// Nature's problem in epigraph form over the coupling polytope:
//   min sum_y t_y  s.t.  marginals fixed,  t_y >= sum_theta P(y|theta) u(theta, a).
WorstCaseJoint worst_case_joint(const std::vector<Experiment>& experiments,
                                const DecisionProblem& problem,
                                std::size_t cap = kDefaultCap);

// Action indices that are not weakly dominated by another single pure action
// (duplicates keep the lowest index). Valid for any state count.
std::vector<Index> undominated_pure_actions(const Matrix& utility);

}  // namespace robust_fusion

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "robust_fusion/core.hpp"

namespace robust_fusion {

// An action set with its (prior-weighted) utility, states x actions.
struct Subproblem {
  std::vector<std::string> actions;
  Matrix utility;
};

// Sum of subproblems over a shared state space; actions are tuples with the
// first subproblem varying slowest.
DecisionProblem compose(const std::vector<std::string>& states,
                        const std::vector<Subproblem>& subproblems);

// Binary-state problem after pruning weakly*-dominated actions: survivors
// sorted by increasing u(theta1) (hence decreasing u(theta2)) and shifted so
// the first one pays (0, 0).
struct NormalizedProblem {
  std::vector<Index> original_index;  // survivor -> action of the input problem
  Matrix payoffs;                     // 2 x n, shifted
  Vector offset;                      // payoff of the first survivor before shifting

  Index num_actions() const { return payoffs.cols(); }
};

NormalizedProblem remove_dominated(const DecisionProblem& problem);

enum class DecompositionKind { canonical, weak };

struct Decomposition {
  DecompositionKind kind = DecompositionKind::canonical;
  std::vector<Subproblem> subproblems;

  // canonical: increments u(a_{l+1}) - u(a_l) as columns, plus the pruning data.
  Matrix increments;
  std::optional<NormalizedProblem> normalized;

  // weak: per-source potentials phi_j(theta, y_j), the maxmin strategy and the
  // optimal value of the joint LP.
  std::vector<Matrix> potentials;
  std::optional<Strategy> strategy;
  double value = 0.0;
};

Decomposition canonical_decomposition(const DecisionProblem& problem);

// True when some mixed action pays at least `point` in every state.
bool polyhedron_contains(const DecisionProblem& problem, const Vector& point,
                         double tolerance = 1e-9);

// Mutual containment of every action payoff in the other problem's polyhedron.
bool equivalent(const DecisionProblem& a, const DecisionProblem& b, double tolerance = 1e-9);

// A mixed action paying at least `target` everywhere. Among those, maximizes
// the total slack, then the smallest per-state slack, then prefers low indices.
Vector dominating_mixed_action(const DecisionProblem& problem, const Vector& target,
                               double tolerance = 1e-9);

// Potentials from the joint maxmin LP over strategies and coupling duals.
Decomposition weak_decomposition(const std::vector<Experiment>& experiments,
                                 const DecisionProblem& problem,
                                 std::size_t cap = kLpCellLimit);

}  // namespace robust_fusion

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "robust_fusion/core.hpp"
#include "robust_fusion/decompose.hpp"

namespace robust_fusion {

enum class Method { binary_action, canonical_assembly, dual_lp };

std::string to_string(Method method);

struct RobustSolution {
  double value;
  Strategy strategy;
  // Nature's best response to `strategy`, solved independently.
  double certificate_value;
  Method method;
  std::optional<Decomposition> decomposition;
};

struct SourceChoice {
  Index index;
  double value;
};

struct NatureResponse {
  JointExperiment joint;
  double value;
};

struct Contribution {
  double value;
  // Canonical subproblems in which the source strictly beats every other one.
  std::vector<Index> wins;
};

// Maxmin value over all couplings of the marginals. Small product spaces go
// through Nature's LP; binary-state instances are cross-checked against (or,
// beyond the LP limit, computed from) the Blackwell supremum.
double robust_value(const std::vector<Experiment>& experiments, const DecisionProblem& problem,
                    std::size_t cap = kDefaultCap);

// Best single source by Bayes value; ties go to the lowest index.
SourceChoice best_single_source(const std::vector<Experiment>& experiments,
                                const DecisionProblem& problem);

RobustSolution robust_strategy(const std::vector<Experiment>& experiments,
                               const DecisionProblem& problem, std::size_t cap = kDefaultCap);

// Same, forcing the joint-LP construction regardless of the state count.
RobustSolution robust_strategy_dual(const std::vector<Experiment>& experiments,
                                    const DecisionProblem& problem,
                                    std::size_t cap = kLpCellLimit);

// Worst coupling against a fixed strategy. The problem separates by state.
NatureResponse nature_best_response(const Strategy& strategy,
                                    const std::vector<Experiment>& experiments,
                                    const DecisionProblem& problem,
                                    std::size_t cap = kDefaultCap);

// V(all) - V(all but `source`), with the canonical subproblems it wins.
Contribution marginal_contribution(Index source, const std::vector<Experiment>& experiments,
                                   const DecisionProblem& problem);

// Best source of every canonical subproblem (binary states).
std::vector<Index> select_support(const std::vector<Experiment>& experiments,
                                  const DecisionProblem& problem);

// Value identity for binary states: offset plus the best single-source value
// of every canonical subproblem.
double canonical_value(const std::vector<Experiment>& experiments,
                       const DecisionProblem& problem);

}  // namespace robust_fusion

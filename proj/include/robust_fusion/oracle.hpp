#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "robust_fusion/core.hpp"

namespace robust_fusion {

inline constexpr std::size_t kOracleCellLimit = 4096;

// Independent checks of the main solver.
struct OracleReport {
  std::string instance_id;
  double main_value;
  double oracle_value;
  double gap;
  double lower_bound;  // best deterministic strategy found
  double upper_bound;  // least Bayes value over sampled couplings
  bool pass;
};

// Maxmin through the joint strategy/potential LP (max form).
double oracle_value(const std::vector<Experiment>& experiments, const DecisionProblem& problem,
                    std::size_t cap = kOracleCellLimit);

// Largest guaranteed value among deterministic strategies: every strategy when
// there are at most `enumeration_limit`, otherwise single-source Bayes rules,
// best responses to reference couplings and `samples` random strategies.
double deterministic_bound(const std::vector<Experiment>& experiments,
                           const DecisionProblem& problem, std::uint64_t seed = 0,
                           std::size_t enumeration_limit = 4096, int samples = 200);

// Least Bayes value over the comonotone coupling in natural signal order, the
// independent coupling and `samples` random mixtures of permuted comonotone
// couplings (drawn per state).
double sampled_coupling_bound(const std::vector<Experiment>& experiments,
                              const DecisionProblem& problem, int samples = 200,
                              std::uint64_t seed = 0);

// Comonotone coupling of the marginals in one state, signals ordered by `orders`.
Vector comonotone_coupling(const std::vector<Experiment>& experiments, Index state,
                           const std::vector<std::vector<Index>>& orders);

OracleReport run_oracles(const std::vector<Experiment>& experiments,
                         const DecisionProblem& problem, std::uint64_t seed = 0,
                         std::string instance_id = "", double tolerance = kValueTolerance);

}  // namespace robust_fusion

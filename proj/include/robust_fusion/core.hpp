#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "robust_fusion/errors.hpp"

namespace robust_fusion {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Probability inputs are checked at kInputTolerance, objects produced by LPs or
// products at kComputedTolerance, and values compared at kValueTolerance.
inline constexpr double kInputTolerance = 1e-12;
inline constexpr double kComputedTolerance = 1e-8;
inline constexpr double kValueTolerance = 1e-6;
inline constexpr std::size_t kDefaultCap = 100000;
// Largest product space handed to the dense joint LPs.
inline constexpr std::size_t kLpCellLimit = 256;

// A finite-state, finite-signal stochastic kernel: kernel(state, signal).
class Experiment {
 public:
  Experiment(std::string name, std::vector<std::string> signals, Matrix kernel,
             double tolerance = kInputTolerance);

  static Experiment uninformative(Index num_states, std::string name = "uninformative");
  static Experiment fully_revealing(Index num_states, std::string name = "revealing");

  const std::string& name() const { return name_; }
  const std::vector<std::string>& signals() const { return signals_; }
  const Matrix& kernel() const { return kernel_; }
  Index num_states() const { return kernel_.rows(); }
  Index num_signals() const { return kernel_.cols(); }

 private:
  std::string name_;
  std::vector<std::string> signals_;
  Matrix kernel_;
};

// States, prior, actions and raw utilities rho(state, action). The engine works
// with the prior-weighted utility u = prior(state) * rho(state, action).
class DecisionProblem {
 public:
  DecisionProblem(std::vector<std::string> states, Vector prior,
                  std::vector<std::string> actions, Matrix raw_utility);

  // Builds a problem whose weighted utility is `weighted` under a uniform prior.
  static DecisionProblem from_weighted(std::vector<std::string> states,
                                       std::vector<std::string> actions,
                                       const Matrix& weighted);

  const std::vector<std::string>& states() const { return states_; }
  const Vector& prior() const { return prior_; }
  const std::vector<std::string>& actions() const { return actions_; }
  const Matrix& raw_utility() const { return raw_utility_; }
  // u(state, action); states x actions.
  const Matrix& utility() const { return weighted_; }
  Index num_states() const { return weighted_.rows(); }
  Index num_actions() const { return weighted_.cols(); }

 private:
  std::vector<std::string> states_;
  Vector prior_;
  std::vector<std::string> actions_;
  Matrix raw_utility_;
  Matrix weighted_;
};

// Per-source signal indices (y_1, ..., y_m).
using CompositeSignal = std::vector<Index>;

// Y_1 x ... x Y_m, enumerated with the first source varying slowest.
class ProductSpace {
 public:
  ProductSpace() = default;
  explicit ProductSpace(std::vector<Index> sizes);
  static ProductSpace of(const std::vector<Experiment>& experiments);

  const std::vector<Index>& sizes() const { return sizes_; }
  Index num_sources() const { return static_cast<Index>(sizes_.size()); }
  Index num_cells() const { return cells_; }
  Index stride(Index source) const { return strides_[source]; }

  CompositeSignal decode(Index cell) const;
  Index encode(const CompositeSignal& signal) const;
  Index coordinate(Index cell, Index source) const {
    return (cell / strides_[source]) % sizes_[source];
  }

  bool operator==(const ProductSpace& other) const { return sizes_ == other.sizes_; }

 private:
  std::vector<Index> sizes_;
  std::vector<Index> strides_;
  Index cells_ = 1;
};

// Number of composite cells, or instance-too-large when it exceeds `cap`.
Index checked_num_cells(const std::vector<Experiment>& experiments,
                        std::size_t cap = kDefaultCap);

// table(cell, action): a mixed action for every composite signal.
class Strategy {
 public:
  Strategy(ProductSpace space, std::vector<Index> sources_used, Matrix table);

  // A pure strategy from one action index per cell.
  static Strategy pure(ProductSpace space, std::vector<Index> sources_used,
                       const std::vector<Index>& actions, Index num_actions);

  const ProductSpace& space() const { return space_; }
  const std::vector<Index>& sources_used() const { return sources_used_; }
  const Matrix& table() const { return table_; }
  Index num_actions() const { return table_.cols(); }

 private:
  ProductSpace space_;
  std::vector<Index> sources_used_;
  Matrix table_;
};

// Sources the table actually varies with, in increasing order.
std::vector<Index> sources_in_use(const ProductSpace& space, const Matrix& table,
                                  double tolerance = kInputTolerance);

// Cells that every coupling assigns probability zero in every state: some
// source gives the cell's coordinate zero probability.
std::vector<bool> null_cells(const std::vector<Experiment>& experiments);

// A joint experiment on the product signal space together with the largest
// deviation between its marginals and the declared ones.
class JointExperiment {
 public:
  JointExperiment(std::vector<Experiment> marginals, Matrix joint_kernel,
                  std::string name = "joint");

  static JointExperiment independent(std::vector<Experiment> marginals);

  const std::vector<Experiment>& marginals() const { return marginals_; }
  const Experiment& joint() const { return joint_; }
  const ProductSpace& space() const { return space_; }
  double max_marginal_error() const { return max_marginal_error_; }

 private:
  std::vector<Experiment> marginals_;
  ProductSpace space_;
  Experiment joint_;
  double max_marginal_error_ = 0.0;
};

// Clamps tiny negative entries to zero and renormalizes every row to sum to one.
Matrix clean_stochastic_rows(const Matrix& rows);

// Sums a joint kernel (states x cells) over every source except `source`.
Matrix marginalize(const Matrix& joint_kernel, const ProductSpace& space, Index source);

std::string composite_label(const std::vector<Experiment>& experiments,
                            const CompositeSignal& signal);

void validate_instance(const DecisionProblem& problem,
                       const std::vector<Experiment>& experiments);

// sum_y max_a sum_theta kernel(theta, y) u(theta, a) for any dense expressions.
template <typename KernelDerived, typename UtilityDerived>
double bayes_value(const Eigen::MatrixBase<KernelDerived>& kernel,
                   const Eigen::MatrixBase<UtilityDerived>& utility) {
  if (kernel.rows() != utility.rows()) {
    throw Error(ErrorKind::dimension_mismatch,
                "kernel has " + std::to_string(kernel.rows()) +
                    " states but utility has " + std::to_string(utility.rows()));
  }
  return (kernel.transpose() * utility).rowwise().maxCoeff().sum();
}

double bayes_value(const Experiment& experiment, const DecisionProblem& problem);

// Value without any information: max_a sum_theta u(theta, a).
double no_information_value(const DecisionProblem& problem);

// Bayes-optimal action per signal; ties go to the lowest action index.
std::vector<Index> bayes_optimal_actions(const Experiment& experiment,
                                         const DecisionProblem& problem);

double evaluate_strategy(const Strategy& strategy, const JointExperiment& joint,
                         const DecisionProblem& problem);

// Same objective against a bare joint kernel (states x cells).
double evaluate_strategy(const Strategy& strategy, const Matrix& joint_kernel,
                         const DecisionProblem& problem);

}  // namespace robust_fusion

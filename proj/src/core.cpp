#include "robust_fusion/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace robust_fusion {

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

void check_stochastic_rows(const Matrix& kernel, double tolerance,
                           const std::string& what) {
  for (Index r = 0; r < kernel.rows(); ++r) {
    for (Index c = 0; c < kernel.cols(); ++c) {
      const double p = kernel(r, c);
      if (!(p >= -tolerance && p <= 1.0 + tolerance)) {
        throw Error(ErrorKind::non_stochastic_row,
                    what + " row " + std::to_string(r) + " column " +
                        std::to_string(c) + " has entry " + fmt(p) +
                        " outside [0, 1]");
      }
    }
    const double sum = kernel.row(r).sum();
    if (std::abs(sum - 1.0) > tolerance) {
      throw Error(ErrorKind::non_stochastic_row,
                  what + " row " + std::to_string(r) + " sums to " + fmt(sum));
    }
  }
}

std::vector<std::string> numbered(const std::string& prefix, Index n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (Index i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Experiment

Experiment::Experiment(std::string name, std::vector<std::string> signals,
                       Matrix kernel, double tolerance)
    : name_(std::move(name)), signals_(std::move(signals)), kernel_(std::move(kernel)) {
  if (kernel_.rows() < 1 || kernel_.cols() < 1) {
    throw Error(ErrorKind::dimension_mismatch,
                "experiment '" + name_ + "' needs at least one state and one signal");
  }
  if (static_cast<Index>(signals_.size()) != kernel_.cols()) {
    throw Error(ErrorKind::dimension_mismatch,
                "experiment '" + name_ + "' has " + std::to_string(signals_.size()) +
                    " signal labels but " + std::to_string(kernel_.cols()) +
                    " kernel columns");
  }
  check_stochastic_rows(kernel_, tolerance, "experiment '" + name_ + "'");
}

Experiment Experiment::uninformative(Index num_states, std::string name) {
  return Experiment(std::move(name), {"*"}, Matrix::Ones(num_states, 1));
}

Experiment Experiment::fully_revealing(Index num_states, std::string name) {
  return Experiment(std::move(name), numbered("s", num_states),
                    Matrix::Identity(num_states, num_states));
}

// ---------------------------------------------------------------------------
// DecisionProblem

DecisionProblem::DecisionProblem(std::vector<std::string> states, Vector prior,
                                 std::vector<std::string> actions, Matrix raw_utility)
    : states_(std::move(states)),
      prior_(std::move(prior)),
      actions_(std::move(actions)),
      raw_utility_(std::move(raw_utility)) {
  const Index n_states = static_cast<Index>(states_.size());
  if (n_states < 2) {
    throw Error(ErrorKind::dimension_mismatch, "a decision problem needs at least 2 states");
  }
  if (actions_.empty()) {
    throw Error(ErrorKind::dimension_mismatch, "a decision problem needs at least 1 action");
  }
  if (prior_.size() != n_states) {
    throw Error(ErrorKind::dimension_mismatch,
                "prior has " + std::to_string(prior_.size()) + " entries for " +
                    std::to_string(n_states) + " states");
  }
  if (raw_utility_.rows() != n_states ||
      raw_utility_.cols() != static_cast<Index>(actions_.size())) {
    throw Error(ErrorKind::dimension_mismatch,
                "utility must be " + std::to_string(n_states) + " x " +
                    std::to_string(actions_.size()));
  }
  for (Index s = 0; s < n_states; ++s) {
    if (!(prior_(s) >= 0.0)) {
      throw Error(ErrorKind::bad_prior,
                  "prior entry " + std::to_string(s) + " is " + fmt(prior_(s)));
    }
  }
  if (std::abs(prior_.sum() - 1.0) > kInputTolerance) {
    throw Error(ErrorKind::bad_prior, "prior sums to " + fmt(prior_.sum()));
  }
  if (!raw_utility_.allFinite()) {
    throw Error(ErrorKind::invalid_argument, "utilities must be finite");
  }
  weighted_ = prior_.asDiagonal() * raw_utility_;
}

DecisionProblem DecisionProblem::from_weighted(std::vector<std::string> states,
                                               std::vector<std::string> actions,
                                               const Matrix& weighted) {
  const Index n = weighted.rows();
  const Vector prior = Vector::Constant(n, 1.0 / static_cast<double>(n));
  return DecisionProblem(std::move(states), prior, std::move(actions),
                         weighted * static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// ProductSpace

ProductSpace::ProductSpace(std::vector<Index> sizes) : sizes_(std::move(sizes)) {
  strides_.assign(sizes_.size(), 1);
  cells_ = 1;
  for (Index j = num_sources() - 1; j >= 0; --j) {
    if (sizes_[j] < 1) {
      throw Error(ErrorKind::dimension_mismatch, "signal spaces must be nonempty");
    }
    strides_[j] = cells_;
    if (cells_ > std::numeric_limits<Index>::max() / sizes_[j]) {
      throw Error(ErrorKind::instance_too_large, "product signal space overflows");
    }
    cells_ *= sizes_[j];
  }
}

ProductSpace ProductSpace::of(const std::vector<Experiment>& experiments) {
  std::vector<Index> sizes;
  sizes.reserve(experiments.size());
  for (const Experiment& e : experiments) sizes.push_back(e.num_signals());
  return ProductSpace(std::move(sizes));
}

CompositeSignal ProductSpace::decode(Index cell) const {
  CompositeSignal out(sizes_.size());
  for (Index j = 0; j < num_sources(); ++j) out[j] = coordinate(cell, j);
  return out;
}

Index ProductSpace::encode(const CompositeSignal& signal) const {
  if (static_cast<Index>(signal.size()) != num_sources()) {
    throw Error(ErrorKind::dimension_mismatch, "composite signal has wrong arity");
  }
  Index cell = 0;
  for (Index j = 0; j < num_sources(); ++j) {
    if (signal[j] < 0 || signal[j] >= sizes_[j]) {
      throw Error(ErrorKind::dimension_mismatch,
                  "signal index out of range for source " + std::to_string(j));
    }
    cell += signal[j] * strides_[j];
  }
  return cell;
}

Index checked_num_cells(const std::vector<Experiment>& experiments, std::size_t cap) {
  Index cells = 1;
  for (const Experiment& e : experiments) {
    cells *= e.num_signals();
    if (static_cast<std::size_t>(cells) > cap) {
      throw Error(ErrorKind::instance_too_large,
                  "product signal space exceeds the cap of " + std::to_string(cap));
    }
  }
  return cells;
}

// ---------------------------------------------------------------------------
// Strategy

Strategy::Strategy(ProductSpace space, std::vector<Index> sources_used, Matrix table)
    : space_(std::move(space)), sources_used_(std::move(sources_used)), table_(std::move(table)) {
  std::sort(sources_used_.begin(), sources_used_.end());
  sources_used_.erase(std::unique(sources_used_.begin(), sources_used_.end()),
                      sources_used_.end());
  for (Index j : sources_used_) {
    if (j < 0 || j >= space_.num_sources()) {
      throw Error(ErrorKind::dimension_mismatch, "strategy uses unknown source " + std::to_string(j));
    }
  }
  if (table_.rows() != space_.num_cells() || table_.cols() < 1) {
    throw Error(ErrorKind::dimension_mismatch,
                "strategy table must have one row per composite signal");
  }
  check_stochastic_rows(table_, kInputTolerance, "strategy");

  // Measurability: each row equals the row at the projection that zeroes every
  // unused coordinate.
  std::vector<bool> used(space_.num_sources(), false);
  for (Index j : sources_used_) used[j] = true;
  for (Index cell = 0; cell < space_.num_cells(); ++cell) {
    Index projected = 0;
    for (Index j = 0; j < space_.num_sources(); ++j) {
      if (used[j]) projected += space_.coordinate(cell, j) * space_.stride(j);
    }
    if ((table_.row(cell) - table_.row(projected)).cwiseAbs().maxCoeff() > kInputTolerance) {
      throw Error(ErrorKind::invalid_argument,
                  "strategy row " + std::to_string(cell) +
                      " depends on a source outside sources_used");
    }
  }
}

std::vector<Index> sources_in_use(const ProductSpace& space, const Matrix& table,
                                  double tolerance) {
  std::vector<Index> used;
  for (Index j = 0; j < space.num_sources(); ++j) {
    for (Index cell = 0; cell < space.num_cells(); ++cell) {
      const Index base = cell - space.coordinate(cell, j) * space.stride(j);
      if ((table.row(cell) - table.row(base)).cwiseAbs().maxCoeff() > tolerance) {
        used.push_back(j);
        break;
      }
    }
  }
  return used;
}

std::vector<bool> null_cells(const std::vector<Experiment>& experiments) {
  const ProductSpace space = ProductSpace::of(experiments);
  const Index n_states = experiments.empty() ? 0 : experiments.front().num_states();
  std::vector<bool> out(space.num_cells(), true);
  for (Index cell = 0; cell < space.num_cells(); ++cell) {
    for (Index s = 0; s < n_states && out[cell]; ++s) {
      bool reachable = true;
      for (Index j = 0; j < space.num_sources() && reachable; ++j) {
        reachable = experiments[j].kernel()(s, space.coordinate(cell, j)) > 0.0;
      }
      if (reachable) out[cell] = false;
    }
  }
  return out;
}

Strategy Strategy::pure(ProductSpace space, std::vector<Index> sources_used,
                        const std::vector<Index>& actions, Index num_actions) {
  Matrix table = Matrix::Zero(space.num_cells(), num_actions);
  if (static_cast<Index>(actions.size()) != space.num_cells()) {
    throw Error(ErrorKind::dimension_mismatch, "one action per cell is required");
  }
  for (Index cell = 0; cell < space.num_cells(); ++cell) {
    if (actions[cell] < 0 || actions[cell] >= num_actions) {
      throw Error(ErrorKind::dimension_mismatch, "action index out of range");
    }
    table(cell, actions[cell]) = 1.0;
  }
  return Strategy(std::move(space), std::move(sources_used), std::move(table));
}

// ---------------------------------------------------------------------------
// JointExperiment

Matrix clean_stochastic_rows(const Matrix& rows) {
  Matrix out = rows.cwiseMax(0.0);
  for (Index r = 0; r < out.rows(); ++r) {
    const double sum = out.row(r).sum();
    if (sum > 0.0) out.row(r) /= sum;
  }
  return out;
}

Matrix marginalize(const Matrix& joint_kernel, const ProductSpace& space, Index source) {
  if (joint_kernel.cols() != space.num_cells()) {
    throw Error(ErrorKind::dimension_mismatch, "joint kernel does not match product space");
  }
  Matrix out = Matrix::Zero(joint_kernel.rows(), space.sizes()[source]);
  for (Index cell = 0; cell < space.num_cells(); ++cell) {
    out.col(space.coordinate(cell, source)) += joint_kernel.col(cell);
  }
  return out;
}

std::string composite_label(const std::vector<Experiment>& experiments,
                            const CompositeSignal& signal) {
  std::string label;
  for (std::size_t j = 0; j < signal.size(); ++j) {
    if (j > 0) label += '|';
    label += experiments[j].signals()[signal[j]];
  }
  return label;
}

namespace {

std::vector<std::string> composite_labels(const std::vector<Experiment>& experiments,
                                          const ProductSpace& space) {
  std::vector<std::string> labels;
  labels.reserve(space.num_cells());
  for (Index cell = 0; cell < space.num_cells(); ++cell) {
    labels.push_back(composite_label(experiments, space.decode(cell)));
  }
  return labels;
}

Experiment make_joint(const std::vector<Experiment>& marginals, const ProductSpace& space,
                      Matrix kernel, std::string name) {
  if (marginals.empty()) {
    throw Error(ErrorKind::empty_input, "a joint experiment needs at least one marginal");
  }
  if (kernel.cols() != space.num_cells() || kernel.rows() != marginals.front().num_states()) {
    throw Error(ErrorKind::dimension_mismatch, "joint kernel must be states x product cells");
  }
  return Experiment(std::move(name), composite_labels(marginals, space), std::move(kernel),
                    kComputedTolerance);
}

}  // namespace

JointExperiment::JointExperiment(std::vector<Experiment> marginals, Matrix joint_kernel,
                                 std::string name)
    : marginals_(std::move(marginals)),
      space_(ProductSpace::of(marginals_)),
      joint_(make_joint(marginals_, space_, std::move(joint_kernel), std::move(name))) {
  for (Index j = 0; j < space_.num_sources(); ++j) {
    if (marginals_[j].num_states() != joint_.num_states()) {
      throw Error(ErrorKind::dimension_mismatch, "marginals disagree on the state count");
    }
    const Matrix m = marginalize(joint_.kernel(), space_, j);
    max_marginal_error_ =
        std::max(max_marginal_error_, (m - marginals_[j].kernel()).cwiseAbs().maxCoeff());
  }
  if (max_marginal_error_ > kComputedTolerance) {
    throw Error(ErrorKind::numerical_failure,
                "joint experiment misses its marginals by " + fmt(max_marginal_error_));
  }
}

JointExperiment JointExperiment::independent(std::vector<Experiment> marginals) {
  const ProductSpace space = ProductSpace::of(marginals);
  const Index n_states = marginals.empty() ? 0 : marginals.front().num_states();
  Matrix kernel = Matrix::Ones(n_states, space.num_cells());
  for (Index cell = 0; cell < space.num_cells(); ++cell) {
    for (Index j = 0; j < space.num_sources(); ++j) {
      kernel.col(cell).array() *= marginals[j].kernel().col(space.coordinate(cell, j)).array();
    }
  }
  return JointExperiment(std::move(marginals), std::move(kernel), "independent");
}

// ---------------------------------------------------------------------------
// Operations

void validate_instance(const DecisionProblem& problem,
                       const std::vector<Experiment>& experiments) {
  const double prior_sum = problem.prior().sum();
  if ((problem.prior().array() < 0.0).any() || std::abs(prior_sum - 1.0) > kInputTolerance) {
    throw Error(ErrorKind::bad_prior, "prior sums to " + fmt(prior_sum));
  }
  for (std::size_t j = 0; j < experiments.size(); ++j) {
    const Experiment& e = experiments[j];
    if (e.num_states() != problem.num_states()) {
      throw Error(ErrorKind::dimension_mismatch,
                  "experiment " + std::to_string(j) + " ('" + e.name() + "') has " +
                      std::to_string(e.num_states()) + " rows but the problem has " +
                      std::to_string(problem.num_states()) + " states");
    }
    check_stochastic_rows(e.kernel(), kInputTolerance,
                          "experiment " + std::to_string(j) + " ('" + e.name() + "')");
  }
}

double bayes_value(const Experiment& experiment, const DecisionProblem& problem) {
  return bayes_value(experiment.kernel(), problem.utility());
}

double no_information_value(const DecisionProblem& problem) {
  return problem.utility().colwise().sum().maxCoeff();
}

std::vector<Index> bayes_optimal_actions(const Experiment& experiment,
                                         const DecisionProblem& problem) {
  if (experiment.num_states() != problem.num_states()) {
    throw Error(ErrorKind::dimension_mismatch, "experiment and problem disagree on states");
  }
  const Matrix payoff = experiment.kernel().transpose() * problem.utility();
  std::vector<Index> out(payoff.rows(), 0);
  for (Index y = 0; y < payoff.rows(); ++y) {
    const double best = payoff.row(y).maxCoeff();
    Index a = 0;
    while (payoff(y, a) < best - 1e-12) ++a;
    out[y] = a;
  }
  return out;
}

double evaluate_strategy(const Strategy& strategy, const Matrix& joint_kernel,
                         const DecisionProblem& problem) {
  if (joint_kernel.cols() != strategy.space().num_cells() ||
      joint_kernel.rows() != problem.num_states() ||
      strategy.num_actions() != problem.num_actions()) {
    throw Error(ErrorKind::dimension_mismatch, "strategy, joint and problem shapes disagree");
  }
  return joint_kernel.cwiseProduct(problem.utility() * strategy.table().transpose()).sum();
}

double evaluate_strategy(const Strategy& strategy, const JointExperiment& joint,
                         const DecisionProblem& problem) {
  if (!(strategy.space() == joint.space())) {
    throw Error(ErrorKind::dimension_mismatch, "strategy and joint use different product spaces");
  }
  return evaluate_strategy(strategy, joint.joint().kernel(), problem);
}

}  // namespace robust_fusion

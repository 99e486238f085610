#include "robust_fusion/robust.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "robust_fusion/blackwell.hpp"
#include "robust_fusion/linprog.hpp"

namespace robust_fusion {

namespace {

void require_nonempty(const std::vector<Experiment>& experiments) {
  if (experiments.empty()) {
    throw Error(ErrorKind::empty_input, "at least one experiment is required");
  }
}

SourceChoice best_for(const std::vector<Experiment>& experiments, const Matrix& utility) {
  SourceChoice best{0, bayes_value(experiments.front().kernel(), utility)};
  for (std::size_t j = 1; j < experiments.size(); ++j) {
    const double v = bayes_value(experiments[j].kernel(), utility);
    if (v > best.value + 1e-12) best = {static_cast<Index>(j), v};
  }
  return best;
}

void check_certificate(double value, double certificate) {
  if (std::abs(value - certificate) > kValueTolerance) {
    throw Error(ErrorKind::numerical_failure,
                "strategy guarantees " + std::to_string(certificate) + " but the value is " +
                    std::to_string(value));
  }
}

Strategy single_source_strategy(const std::vector<Experiment>& experiments,
                                const DecisionProblem& problem, Index source) {
  const ProductSpace space = ProductSpace::of(experiments);
  const std::vector<Index> best = bayes_optimal_actions(experiments[source], problem);
  std::vector<Index> actions(space.num_cells());
  for (Index cell = 0; cell < space.num_cells(); ++cell) {
    actions[cell] = best[space.coordinate(cell, source)];
  }
  return Strategy::pure(space, {source}, actions, problem.num_actions());
}

Strategy canonical_strategy(const std::vector<Experiment>& experiments,
                            const DecisionProblem& problem, const Decomposition& dec) {
  const ProductSpace space = ProductSpace::of(experiments);
  const NormalizedProblem& normalized = *dec.normalized;
  const Matrix& u = problem.utility();
  const double scale = 1.0 + u.cwiseAbs().maxCoeff();
  const Index n_sub = dec.increments.cols();

  // Threshold rule per subproblem: take the increment iff it pays strictly
  // in expectation given the chosen source's signal.
  std::vector<Index> source(n_sub);
  std::vector<std::vector<bool>> take(n_sub);
  for (Index l = 0; l < n_sub; ++l) {
    source[l] = best_for(experiments, dec.subproblems[l].utility).index;
    const Experiment& e = experiments[source[l]];
    const Eigen::RowVectorXd gain = dec.increments.col(l).transpose() * e.kernel();
    for (Index y = 0; y < e.num_signals(); ++y) take[l].push_back(gain(y) > 0.0);
  }

  Matrix table = Matrix::Zero(space.num_cells(), problem.num_actions());
  std::map<std::vector<bool>, Eigen::RowVectorXd> cache;
  for (Index cell = 0; cell < space.num_cells(); ++cell) {
    std::vector<bool> pattern(n_sub);
    for (Index l = 0; l < n_sub; ++l) pattern[l] = take[l][space.coordinate(cell, source[l])];
    auto it = cache.find(pattern);
    if (it == cache.end()) {
      Vector target = normalized.offset;
      for (Index l = 0; l < n_sub; ++l) {
        if (pattern[l]) target += dec.increments.col(l);
      }
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(problem.num_actions());
      Index exact = -1;
      for (Index a = 0; a < problem.num_actions() && exact < 0; ++a) {
        if ((u.col(a) - target).cwiseAbs().maxCoeff() <= 1e-9 * scale) exact = a;
      }
      if (exact >= 0) {
        row(exact) = 1.0;
      } else {
        row = dominating_mixed_action(problem, target).transpose();
      }
      it = cache.emplace(std::move(pattern), std::move(row)).first;
    }
    table.row(cell) = it->second;
  }
  std::vector<Index> used = sources_in_use(space, table);
  return Strategy(space, std::move(used), std::move(table));
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::binary_action:
      return "binary_action";
    case Method::canonical_assembly:
      return "canonical_assembly";
    case Method::dual_lp:
      return "dual_lp";
  }
  return "unknown";
}

double robust_value(const std::vector<Experiment>& experiments, const DecisionProblem& problem,
                    std::size_t cap) {
  require_nonempty(experiments);
  validate_instance(problem, experiments);
  const Index cells = checked_num_cells(experiments, cap);
  const bool binary = problem.num_states() == 2;
  if (static_cast<std::size_t>(cells) > kLpCellLimit) {
    if (!binary) {
      throw Error(ErrorKind::instance_too_large,
                  std::to_string(cells) + " composite signals exceed the LP limit of " +
                      std::to_string(kLpCellLimit) + " for more than two states");
    }
    return bayes_value(blackwell_supremum(experiments), problem);
  }
  const double value = worst_case_joint(experiments, problem, cap).value;
  if (binary) {
    const double envelope = bayes_value(blackwell_supremum(experiments), problem);
    if (std::abs(value - envelope) > kValueTolerance) {
      throw Error(ErrorKind::numerical_failure,
                  "Nature's LP (" + std::to_string(value) + ") and the supremum (" +
                      std::to_string(envelope) + ") disagree");
    }
  }
  return value;
}

SourceChoice best_single_source(const std::vector<Experiment>& experiments,
                                const DecisionProblem& problem) {
  require_nonempty(experiments);
  validate_instance(problem, experiments);
  return best_for(experiments, problem.utility());
}

RobustSolution robust_strategy(const std::vector<Experiment>& experiments,
                               const DecisionProblem& problem, std::size_t cap) {
  require_nonempty(experiments);
  validate_instance(problem, experiments);
  checked_num_cells(experiments, cap);
  if (problem.num_states() != 2) {
    return robust_strategy_dual(experiments, problem, std::min(cap, kLpCellLimit));
  }

  const double value = robust_value(experiments, problem, cap);
  if (problem.num_actions() == 2) {
    const SourceChoice choice = best_for(experiments, problem.utility());
    Strategy strategy = single_source_strategy(experiments, problem, choice.index);
    const double certificate = nature_best_response(strategy, experiments, problem, cap).value;
    check_certificate(value, certificate);
    return RobustSolution{value, std::move(strategy), certificate, Method::binary_action,
                          std::nullopt};
  }
  Decomposition dec = canonical_decomposition(problem);
  Strategy strategy = canonical_strategy(experiments, problem, dec);
  const double certificate = nature_best_response(strategy, experiments, problem, cap).value;
  check_certificate(value, certificate);
  return RobustSolution{value, std::move(strategy), certificate, Method::canonical_assembly,
                        std::move(dec)};
}

RobustSolution robust_strategy_dual(const std::vector<Experiment>& experiments,
                                    const DecisionProblem& problem, std::size_t cap) {
  Decomposition dec = weak_decomposition(experiments, problem, cap);
  const ProductSpace space = ProductSpace::of(experiments);
  Matrix table = dec.strategy->table();
  const std::vector<bool> unreachable = null_cells(experiments);
  for (Index cell = 0; cell < space.num_cells(); ++cell) {
    if (!unreachable[cell]) continue;
    table.row(cell).setZero();
    table(cell, 0) = 1.0;
  }
  std::vector<Index> used = sources_in_use(space, table);
  Strategy strategy(space, std::move(used), std::move(table));
  const double value = robust_value(experiments, problem, cap);
  const double certificate = nature_best_response(strategy, experiments, problem, cap).value;
  check_certificate(value, certificate);
  return RobustSolution{value, std::move(strategy), certificate, Method::dual_lp, std::move(dec)};
}

NatureResponse nature_best_response(const Strategy& strategy,
                                    const std::vector<Experiment>& experiments,
                                    const DecisionProblem& problem, std::size_t cap) {
  require_nonempty(experiments);
  validate_instance(problem, experiments);
  const Index cells = checked_num_cells(experiments, cap);
  const ProductSpace space = ProductSpace::of(experiments);
  if (!(strategy.space() == space) || strategy.num_actions() != problem.num_actions()) {
    throw Error(ErrorKind::dimension_mismatch,
                "strategy does not match the experiments' product space or the action set");
  }
  const Index n_states = problem.num_states();
  // payoff(theta, cell) of the strategy's (mixed) action at that cell.
  const Matrix payoff = problem.utility() * strategy.table().transpose();

  Matrix kernel = Matrix::Zero(n_states, cells);
  double value = 0.0;
  for (Index s = 0; s < n_states; ++s) {
    // Only cells every marginal can reach in this state carry mass.
    std::vector<Index> support;
    for (Index cell = 0; cell < cells; ++cell) {
      bool reachable = true;
      for (Index j = 0; j < space.num_sources() && reachable; ++j) {
        reachable = experiments[j].kernel()(s, space.coordinate(cell, j)) > 0.0;
      }
      if (reachable) support.push_back(cell);
    }
    const Index n_vars = static_cast<Index>(support.size());
    if (space.num_sources() == 1) {
      for (Index cell : support) kernel(s, cell) = experiments[0].kernel()(s, cell);
      value += payoff.row(s).dot(kernel.row(s));
      continue;
    }
    Index n_eq = 0;
    for (const Experiment& e : experiments) n_eq += e.num_signals();
    lp::Problem<double> lp(n_vars, n_eq, 0);
    Index row = 0;
    for (Index j = 0; j < space.num_sources(); ++j) {
      for (Index y = 0; y < experiments[j].num_signals(); ++y, ++row) {
        lp.eq_rhs(row) = experiments[j].kernel()(s, y);
        for (Index v = 0; v < n_vars; ++v) {
          if (space.coordinate(support[v], j) == y) lp.eq_matrix(row, v) = 1.0;
        }
      }
    }
    for (Index v = 0; v < n_vars; ++v) lp.objective(v) = payoff(s, support[v]);
    const auto solution = lp::solve(lp);
    if (!solution.optimal()) {
      throw Error(ErrorKind::numerical_failure, "Nature's best-response LP failed");
    }
    for (Index v = 0; v < n_vars; ++v) kernel(s, support[v]) = solution.primal(v);
    value += solution.objective;
  }
  return NatureResponse{JointExperiment(experiments, clean_stochastic_rows(kernel),
                                        "nature-response"),
                        value};
}

double canonical_value(const std::vector<Experiment>& experiments,
                       const DecisionProblem& problem) {
  require_nonempty(experiments);
  validate_instance(problem, experiments);
  const Decomposition dec = canonical_decomposition(problem);
  double value = dec.normalized->offset.sum();
  for (const Subproblem& sub : dec.subproblems) value += best_for(experiments, sub.utility).value;
  return value;
}

Contribution marginal_contribution(Index source, const std::vector<Experiment>& experiments,
                                   const DecisionProblem& problem) {
  require_nonempty(experiments);
  validate_instance(problem, experiments);
  if (problem.num_states() != 2) {
    throw Error(ErrorKind::not_binary_state, "marginal contributions need binary states");
  }
  if (source < 0 || source >= static_cast<Index>(experiments.size())) {
    throw Error(ErrorKind::invalid_argument, "source index out of range");
  }
  std::vector<Experiment> rest = experiments;
  rest.erase(rest.begin() + source);
  const double with = robust_value(experiments, problem);
  const double without = rest.empty() ? no_information_value(problem) : robust_value(rest, problem);

  Contribution out{with - without, {}};
  const Decomposition dec = canonical_decomposition(problem);
  double gained = 0.0;
  for (std::size_t l = 0; l < dec.subproblems.size(); ++l) {
    const Matrix& sub = dec.subproblems[l].utility;
    const double own = bayes_value(experiments[source].kernel(), sub);
    const double others =
        rest.empty() ? std::max(0.0, sub.col(1).sum()) : best_for(rest, sub).value;
    if (own > others + 1e-9) {
      out.wins.push_back(static_cast<Index>(l));
      gained += own - others;
    }
  }
  if (std::abs(gained - out.value) > kValueTolerance) {
    throw Error(ErrorKind::numerical_failure,
                "subproblem gains " + std::to_string(gained) +
                    " do not match the value difference " + std::to_string(out.value));
  }
  return out;
}

std::vector<Index> select_support(const std::vector<Experiment>& experiments,
                                  const DecisionProblem& problem) {
  require_nonempty(experiments);
  validate_instance(problem, experiments);
  if (problem.num_states() != 2) {
    throw Error(ErrorKind::not_binary_state, "support selection needs binary states");
  }
  const Decomposition dec = canonical_decomposition(problem);
  std::vector<Index> support;
  for (const Subproblem& sub : dec.subproblems) {
    support.push_back(best_for(experiments, sub.utility).index);
  }
  if (support.empty()) support.push_back(best_for(experiments, problem.utility()).index);
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  return support;
}

}  // namespace robust_fusion

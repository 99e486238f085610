#include "robust_fusion/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "robust_fusion/blackwell.hpp"
#include "robust_fusion/linprog.hpp"

namespace robust_fusion {

namespace {

struct SlackResult {
  double min_slack;
  Vector mix;
};

// max_{alpha in simplex} min_theta (columns * alpha - point)(theta).
SlackResult max_min_slack(const Matrix& columns, const Vector& point) {
  const Index k = columns.cols();
  const Index n_states = columns.rows();
  lp::Problem<double> problem(k + 1, 1, n_states);
  problem.sense = lp::Sense::maximize;
  problem.objective(k) = 1.0;
  problem.set_free(k);
  problem.eq_matrix.row(0).head(k).setOnes();
  problem.eq_rhs(0) = 1.0;
  for (Index s = 0; s < n_states; ++s) {
    problem.ub_matrix.row(s).head(k) = -columns.row(s);
    problem.ub_matrix(s, k) = 1.0;
    problem.ub_rhs(s) = -point(s);
  }
  const auto solution = lp::solve(problem);
  if (!solution.optimal()) {
    throw Error(ErrorKind::numerical_failure, "slack LP did not reach optimality");
  }
  return {solution.objective, solution.primal.head(k)};
}

Matrix select_columns(const Matrix& m, const std::vector<Index>& cols) {
  Matrix out(m.rows(), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Index>(i)) = m.col(cols[i]);
  return out;
}

Vector clean_distribution(const Vector& v) {
  Matrix row = v.transpose();
  return clean_stochastic_rows(row).row(0).transpose();
}

// Slack given up between the tie-break stages.
constexpr double kTieTolerance = 1e-11;

void require_binary(const DecisionProblem& problem) {
  if (problem.num_states() != 2) {
    throw Error(ErrorKind::not_binary_state,
                "the problem has " + std::to_string(problem.num_states()) +
                    " states; binary states are required");
  }
}

}  // namespace

DecisionProblem compose(const std::vector<std::string>& states,
                        const std::vector<Subproblem>& subproblems) {
  if (subproblems.empty()) {
    throw Error(ErrorKind::empty_input, "compose needs at least one subproblem");
  }
  const Index n_states = static_cast<Index>(states.size());
  std::vector<Index> sizes;
  for (const Subproblem& sub : subproblems) {
    if (sub.utility.rows() != n_states) {
      throw Error(ErrorKind::state_mismatch,
                  "subproblem has " + std::to_string(sub.utility.rows()) + " states, expected " +
                      std::to_string(n_states));
    }
    if (sub.utility.cols() != static_cast<Index>(sub.actions.size())) {
      throw Error(ErrorKind::dimension_mismatch, "subproblem utility/action count mismatch");
    }
    sizes.push_back(sub.utility.cols());
  }
  const ProductSpace space(sizes);
  Matrix u = Matrix::Zero(n_states, space.num_cells());
  std::vector<std::string> labels;
  for (Index cell = 0; cell < space.num_cells(); ++cell) {
    std::string label = subproblems.size() > 1 ? "(" : "";
    for (std::size_t l = 0; l < subproblems.size(); ++l) {
      const Index a = space.coordinate(cell, static_cast<Index>(l));
      u.col(cell) += subproblems[l].utility.col(a);
      label += (l ? "," : "") + subproblems[l].actions[a];
    }
    if (subproblems.size() > 1) label += ")";
    labels.push_back(std::move(label));
  }
  return DecisionProblem::from_weighted(states, std::move(labels), u);
}

NormalizedProblem remove_dominated(const DecisionProblem& problem) {
  require_binary(problem);
  const Matrix& u = problem.utility();
  std::vector<Index> alive;
  for (Index a = 0; a < problem.num_actions(); ++a) {
    const bool duplicate = std::any_of(alive.begin(), alive.end(),
                                       [&](Index b) { return u.col(b) == u.col(a); });
    if (!duplicate) alive.push_back(a);
  }
  const double scale = 1.0 + u.cwiseAbs().maxCoeff();
  for (std::size_t i = 0; i < alive.size() && alive.size() > 1;) {
    std::vector<Index> others = alive;
    others.erase(others.begin() + static_cast<std::ptrdiff_t>(i));
    const SlackResult r = max_min_slack(select_columns(u, others), u.col(alive[i]));
    if (r.min_slack >= -1e-9 * scale) {
      alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  std::stable_sort(alive.begin(), alive.end(),
                   [&](Index a, Index b) { return u(0, a) < u(0, b); });
  for (std::size_t i = 1; i < alive.size(); ++i) {
    if (!(u(0, alive[i]) > u(0, alive[i - 1]) && u(1, alive[i]) < u(1, alive[i - 1]))) {
      throw Error(ErrorKind::numerical_failure, "pruned actions are not strictly ordered");
    }
  }
  NormalizedProblem out;
  out.original_index = alive;
  out.offset = u.col(alive.front());
  out.payoffs = select_columns(u, alive).colwise() - out.offset;
  return out;
}

Decomposition canonical_decomposition(const DecisionProblem& problem) {
  NormalizedProblem normalized = remove_dominated(problem);
  const Index n = normalized.num_actions();
  Decomposition out;
  out.kind = DecompositionKind::canonical;
  out.increments.resize(2, n - 1);
  for (Index l = 0; l + 1 < n; ++l) {
    const Vector inc = normalized.payoffs.col(l + 1) - normalized.payoffs.col(l);
    out.increments.col(l) = inc;
    Subproblem sub;
    sub.actions = {problem.actions()[normalized.original_index[l]],
                   problem.actions()[normalized.original_index[l + 1]]};
    sub.utility = Matrix::Zero(2, 2);
    sub.utility.col(1) = inc;
    out.subproblems.push_back(std::move(sub));
  }
  out.normalized = std::move(normalized);
  return out;
}

bool polyhedron_contains(const DecisionProblem& problem, const Vector& point, double tolerance) {
  if (point.size() != problem.num_states()) {
    throw Error(ErrorKind::dimension_mismatch,
                "point has " + std::to_string(point.size()) + " entries for " +
                    std::to_string(problem.num_states()) + " states");
  }
  return max_min_slack(problem.utility(), point).min_slack >= -tolerance;
}

bool equivalent(const DecisionProblem& a, const DecisionProblem& b, double tolerance) {
  if (a.num_states() != b.num_states()) {
    throw Error(ErrorKind::dimension_mismatch, "problems have different state counts");
  }
  for (Index i = 0; i < a.num_actions(); ++i) {
    if (!polyhedron_contains(b, a.utility().col(i), tolerance)) return false;
  }
  for (Index i = 0; i < b.num_actions(); ++i) {
    if (!polyhedron_contains(a, b.utility().col(i), tolerance)) return false;
  }
  return true;
}

Vector dominating_mixed_action(const DecisionProblem& problem, const Vector& target,
                               double tolerance) {
  if (target.size() != problem.num_states()) {
    throw Error(ErrorKind::dimension_mismatch, "target has the wrong number of states");
  }
  const Matrix& u = problem.utility();
  const Index k = u.cols();
  const Index n_states = u.rows();
  const SlackResult feasible = max_min_slack(u, target);
  if (feasible.min_slack < -tolerance) {
    throw Error(ErrorKind::target_outside_polyhedron,
                "no mixed action reaches the target (shortfall " +
                    std::to_string(-feasible.min_slack) + ")");
  }
  const double floor = std::min(feasible.min_slack, 0.0);
  const Vector column_totals = u.colwise().sum().transpose();

  // Rows shared by every stage: per-state slack at least `floor`.
  auto base = [&](Index extra_vars, Index extra_ub) {
    lp::Problem<double> p(k + extra_vars, 1, n_states + extra_ub);
    p.eq_matrix.row(0).head(k).setOnes();
    p.eq_rhs(0) = 1.0;
    for (Index s = 0; s < n_states; ++s) {
      p.ub_matrix.row(s).head(k) = -u.row(s);
      p.ub_rhs(s) = -(target(s) + floor);
    }
    return p;
  };
  auto run = [](const lp::Problem<double>& p) {
    auto solution = lp::solve(p);
    if (!solution.optimal()) {
      throw Error(ErrorKind::numerical_failure, "dominating-action LP did not reach optimality");
    }
    return solution;
  };

  // Stage 1: total slack.
  lp::Problem<double> total = base(0, 0);
  total.sense = lp::Sense::maximize;
  total.objective = column_totals;
  const double best_total = run(total).objective;
  const double total_floor = best_total - kTieTolerance * (1.0 + std::abs(best_total));

  // Stage 2: smallest per-state slack among total-slack maximizers.
  lp::Problem<double> uniform = base(1, n_states + 1);
  uniform.sense = lp::Sense::maximize;
  uniform.objective(k) = 1.0;
  uniform.set_free(k);
  for (Index s = 0; s < n_states; ++s) {
    uniform.ub_matrix.row(n_states + s).head(k) = -u.row(s);
    uniform.ub_matrix(n_states + s, k) = 1.0;
    uniform.ub_rhs(n_states + s) = -target(s);
  }
  uniform.ub_matrix.row(2 * n_states).head(k) = -column_totals.transpose();
  uniform.ub_rhs(2 * n_states) = -total_floor;
  const double best_min = run(uniform).objective;
  const double min_floor = best_min - kTieTolerance * (1.0 + std::abs(best_min));

  // Stage 3: lowest action indices among the remaining optima.
  lp::Problem<double> lowest = base(0, 1);
  for (Index a = 0; a < k; ++a) lowest.objective(a) = static_cast<double>(a);
  for (Index s = 0; s < n_states; ++s) {
    lowest.ub_rhs(s) = -(target(s) + std::max(floor, min_floor));
  }
  lowest.ub_matrix.row(n_states).head(k) = -column_totals.transpose();
  lowest.ub_rhs(n_states) = -total_floor;
  Vector alpha = clean_distribution(run(lowest).primal);
  // Drop solver residue left by the tie-break relaxations.
  alpha = (alpha.array() < 1e-9).select(0.0, alpha);
  return alpha / alpha.sum();
}

Decomposition weak_decomposition(const std::vector<Experiment>& experiments,
                                 const DecisionProblem& problem, std::size_t cap) {
  if (experiments.empty()) {
    throw Error(ErrorKind::empty_input, "at least one experiment is required");
  }
  validate_instance(problem, experiments);
  const Index cells = checked_num_cells(experiments, cap);
  const ProductSpace space = ProductSpace::of(experiments);
  const Index n_states = problem.num_states();
  const Matrix& u = problem.utility();
  const std::vector<Index> actions = undominated_pure_actions(u);
  const Index k = static_cast<Index>(actions.size());

  std::vector<Index> phi_offset;
  Index n_vars = cells * k;
  for (const Experiment& e : experiments) {
    phi_offset.push_back(n_vars);
    n_vars += n_states * e.num_signals();
  }
  auto phi = [&](Index j, Index s, Index y) {
    return phi_offset[j] + s * experiments[j].num_signals() + y;
  };

  lp::Problem<double> lp(n_vars, cells, n_states * cells);
  lp.sense = lp::Sense::maximize;
  for (Index j = 0; j < space.num_sources(); ++j) {
    const Matrix& marginal = experiments[j].kernel();
    for (Index s = 0; s < n_states; ++s) {
      for (Index y = 0; y < marginal.cols(); ++y) {
        lp.objective(phi(j, s, y)) = marginal(s, y);
        lp.set_free(phi(j, s, y));
      }
    }
  }
  for (Index cell = 0; cell < cells; ++cell) {
    lp.eq_matrix.row(cell).segment(cell * k, k).setOnes();
    lp.eq_rhs(cell) = 1.0;
    for (Index s = 0; s < n_states; ++s) {
      const Index row = s * cells + cell;
      for (Index i = 0; i < k; ++i) lp.ub_matrix(row, cell * k + i) = -u(s, actions[i]);
      for (Index j = 0; j < space.num_sources(); ++j) {
        lp.ub_matrix(row, phi(j, s, space.coordinate(cell, j))) += 1.0;
      }
    }
  }
  const auto solution = lp::solve(lp);
  if (!solution.optimal()) {
    throw Error(ErrorKind::numerical_failure, "maxmin LP did not reach optimality");
  }

  Decomposition out;
  out.kind = DecompositionKind::weak;
  out.value = solution.objective;
  for (Index j = 0; j < space.num_sources(); ++j) {
    Matrix potential(n_states, experiments[j].num_signals());
    for (Index s = 0; s < n_states; ++s) {
      for (Index y = 0; y < potential.cols(); ++y) potential(s, y) = solution.primal(phi(j, s, y));
    }
    out.subproblems.push_back(Subproblem{experiments[j].signals(), potential});
    out.potentials.push_back(std::move(potential));
  }
  Matrix table = Matrix::Zero(cells, problem.num_actions());
  for (Index cell = 0; cell < cells; ++cell) {
    for (Index i = 0; i < k; ++i) table(cell, actions[i]) = solution.primal(cell * k + i);
  }
  table = clean_stochastic_rows(table);
  std::vector<Index> used = sources_in_use(space, table);
  out.strategy.emplace(space, std::move(used), std::move(table));
  return out;
}

}  // namespace robust_fusion

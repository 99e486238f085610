#include "robust_fusion/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "robust_fusion/blackwell.hpp"
#include "robust_fusion/linprog.hpp"
#include "robust_fusion/robust.hpp"

namespace robust_fusion {

namespace {

Matrix independent_kernel(const std::vector<Experiment>& experiments) {
  return JointExperiment::independent(experiments).joint().kernel();
}

std::vector<std::vector<Index>> natural_orders(const std::vector<Experiment>& experiments) {
  std::vector<std::vector<Index>> orders;
  for (const Experiment& e : experiments) {
    std::vector<Index> order(static_cast<std::size_t>(e.num_signals()));
    std::iota(order.begin(), order.end(), 0);
    orders.push_back(std::move(order));
  }
  return orders;
}

// Bayes-optimal action per cell against a joint kernel, restricted to `actions`.
std::vector<Index> best_response(const Matrix& joint_kernel, const Matrix& utility,
                                 const std::vector<Index>& actions) {
  const Matrix scores = joint_kernel.transpose() * utility;  // cells x actions
  std::vector<Index> out(static_cast<std::size_t>(scores.rows()));
  for (Index cell = 0; cell < scores.rows(); ++cell) {
    Index best = actions.front();
    for (Index a : actions) {
      if (scores(cell, a) > scores(cell, best) + 1e-12) best = a;
    }
    out[cell] = best;
  }
  return out;
}

}  // namespace

Vector comonotone_coupling(const std::vector<Experiment>& experiments, Index state,
                           const std::vector<std::vector<Index>>& orders) {
  const ProductSpace space = ProductSpace::of(experiments);
  // Cumulative breakpoints of every source along [0, 1].
  std::vector<std::vector<double>> cumulative(experiments.size());
  std::vector<double> breaks{0.0, 1.0};
  for (std::size_t j = 0; j < experiments.size(); ++j) {
    double at = 0.0;
    for (Index y : orders[j]) {
      at += experiments[j].kernel()(state, y);
      cumulative[j].push_back(at);
      breaks.push_back(std::min(at, 1.0));
    }
  }
  std::sort(breaks.begin(), breaks.end());
  Vector out = Vector::Zero(space.num_cells());
  CompositeSignal signal(experiments.size());
  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    const double width = breaks[b + 1] - breaks[b];
    if (width <= 0.0) continue;
    const double mid = 0.5 * (breaks[b] + breaks[b + 1]);
    for (std::size_t j = 0; j < experiments.size(); ++j) {
      const auto& c = cumulative[j];
      const std::size_t pos = std::min<std::size_t>(
          static_cast<std::size_t>(std::upper_bound(c.begin(), c.end(), mid) - c.begin()),
          c.size() - 1);
      signal[j] = orders[j][pos];
    }
    out(space.encode(signal)) += width;
  }
  return out / out.sum();
}

double oracle_value(const std::vector<Experiment>& experiments, const DecisionProblem& problem,
                    std::size_t cap) {
  if (experiments.empty()) {
    throw Error(ErrorKind::empty_input, "at least one experiment is required");
  }
  validate_instance(problem, experiments);
  const Index cells = checked_num_cells(experiments, cap);
  const ProductSpace space = ProductSpace::of(experiments);
  const Index n_states = problem.num_states();
  const Index n_actions = problem.num_actions();
  const Matrix& u = problem.utility();

  // Layout: potentials first (source, state, signal), then sigma(cell, action).
  std::vector<Index> start;
  Index n_phi = 0;
  for (const Experiment& e : experiments) {
    start.push_back(n_phi);
    n_phi += n_states * e.num_signals();
  }
  lp::Problem<double> lp(n_phi + cells * n_actions, cells, cells * n_states);
  lp.sense = lp::Sense::maximize;
  for (std::size_t j = 0; j < experiments.size(); ++j) {
    const Index k = experiments[j].num_signals();
    for (Index s = 0; s < n_states; ++s) {
      for (Index y = 0; y < k; ++y) {
        const Index var = start[j] + s * k + y;
        lp.set_free(var);
        lp.objective(var) = experiments[j].kernel()(s, y);
      }
    }
  }
  for (Index cell = 0; cell < cells; ++cell) {
    const Index sigma = n_phi + cell * n_actions;
    lp.eq_matrix.row(cell).segment(sigma, n_actions).setOnes();
    lp.eq_rhs(cell) = 1.0;
    for (Index s = 0; s < n_states; ++s) {
      const Index row = cell * n_states + s;
      lp.ub_matrix.row(row).segment(sigma, n_actions) = -u.row(s);
      for (std::size_t j = 0; j < experiments.size(); ++j) {
        const Index k = experiments[j].num_signals();
        lp.ub_matrix(row, start[j] + s * k + space.coordinate(cell, static_cast<Index>(j))) = 1.0;
      }
    }
  }
  const auto solution = lp::solve(lp);
  if (!solution.optimal()) {
    throw Error(ErrorKind::numerical_failure, "oracle LP did not reach optimality");
  }
  return solution.objective;
}

double deterministic_bound(const std::vector<Experiment>& experiments,
                           const DecisionProblem& problem, std::uint64_t seed,
                           std::size_t enumeration_limit, int samples) {
  if (experiments.empty()) {
    throw Error(ErrorKind::empty_input, "at least one experiment is required");
  }
  validate_instance(problem, experiments);
  const Index cells = checked_num_cells(experiments, 1024);
  const ProductSpace space = ProductSpace::of(experiments);
  const Matrix& u = problem.utility();
  const std::vector<Index> actions = undominated_pure_actions(u);
  const Index n_actions = static_cast<Index>(actions.size());

  double best = -std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<Index>& choice) {
    Matrix table = Matrix::Zero(cells, problem.num_actions());
    for (Index cell = 0; cell < cells; ++cell) table(cell, choice[cell]) = 1.0;
    std::vector<Index> used = sources_in_use(space, table);
    const Strategy s(space, std::move(used), std::move(table));
    best = std::max(best, nature_best_response(s, experiments, problem).value);
  };

  // Exhaustive when |A|^cells fits the limit.
  double count = 1.0;
  for (Index cell = 0; cell < cells && count <= static_cast<double>(enumeration_limit); ++cell) {
    count *= static_cast<double>(n_actions);
  }
  if (count <= static_cast<double>(enumeration_limit)) {
    std::vector<Index> digits(cells, 0);
    std::vector<Index> choice(cells, actions.front());
    while (true) {
      consider(choice);
      Index pos = 0;
      while (pos < cells && ++digits[pos] == n_actions) {
        digits[pos] = 0;
        choice[pos] = actions.front();
        ++pos;
      }
      if (pos == cells) break;
      choice[pos] = actions[digits[pos]];
    }
    return best;
  }

  // Single-source Bayes rules.
  for (std::size_t j = 0; j < experiments.size(); ++j) {
    const std::vector<Index> rule = bayes_optimal_actions(experiments[j], problem);
    std::vector<Index> choice(cells);
    for (Index cell = 0; cell < cells; ++cell) {
      choice[cell] = rule[space.coordinate(cell, static_cast<Index>(j))];
    }
    consider(choice);
  }
  // Best responses to reference and random couplings.
  consider(best_response(independent_kernel(experiments), u, actions));
  if (problem.num_states() == 2) {
    consider(best_response(supremum_joint(experiments).joint().kernel(), u, actions));
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < samples; ++i) {
    Matrix kernel(problem.num_states(), cells);
    for (Index s = 0; s < problem.num_states(); ++s) {
      auto orders = natural_orders(experiments);
      for (auto& order : orders) std::shuffle(order.begin(), order.end(), rng);
      kernel.row(s) = comonotone_coupling(experiments, s, orders).transpose();
    }
    const double w = unit(rng);
    kernel = w * kernel + (1.0 - w) * independent_kernel(experiments);
    consider(best_response(kernel, u, actions));
  }
  return best;
}

double sampled_coupling_bound(const std::vector<Experiment>& experiments,
                              const DecisionProblem& problem, int samples, std::uint64_t seed) {
  if (experiments.empty()) {
    throw Error(ErrorKind::empty_input, "at least one experiment is required");
  }
  validate_instance(problem, experiments);
  const Index cells = checked_num_cells(experiments);
  const Index n_states = problem.num_states();
  const Matrix& u = problem.utility();
  const Matrix independent = independent_kernel(experiments);

  Matrix natural(n_states, cells);
  for (Index s = 0; s < n_states; ++s) {
    natural.row(s) = comonotone_coupling(experiments, s, natural_orders(experiments)).transpose();
  }
  double best = std::min(bayes_value(natural, u), bayes_value(independent, u));

  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  constexpr int kPieces = 3;
  for (int i = 0; i < samples; ++i) {
    Matrix kernel(n_states, cells);
    for (Index s = 0; s < n_states; ++s) {
      double weights[kPieces + 1];
      double total = 0.0;
      for (double& w : weights) total += (w = expo(rng));
      Vector row = (weights[kPieces] / total) * independent.row(s).transpose();
      for (int p = 0; p < kPieces; ++p) {
        auto orders = natural_orders(experiments);
        for (auto& order : orders) std::shuffle(order.begin(), order.end(), rng);
        row += (weights[p] / total) * comonotone_coupling(experiments, s, orders);
      }
      kernel.row(s) = row.transpose();
    }
    best = std::min(best, bayes_value(kernel, u));
  }
  return best;
}

OracleReport run_oracles(const std::vector<Experiment>& experiments,
                         const DecisionProblem& problem, std::uint64_t seed,
                         std::string instance_id, double tolerance) {
  OracleReport report;
  report.instance_id = std::move(instance_id);
  report.main_value = robust_value(experiments, problem);
  const Index cells = checked_num_cells(experiments);
  report.oracle_value = static_cast<std::size_t>(cells) <= kLpCellLimit
                            ? oracle_value(experiments, problem)
                            : std::numeric_limits<double>::quiet_NaN();
  report.gap = std::abs(report.main_value - report.oracle_value);
  report.lower_bound = cells <= 1024 ? deterministic_bound(experiments, problem, seed)
                                     : -std::numeric_limits<double>::infinity();
  report.upper_bound = sampled_coupling_bound(experiments, problem, 200, seed);
  report.pass = (std::isnan(report.gap) || report.gap <= tolerance) &&
                report.lower_bound <= report.main_value + tolerance &&
                report.upper_bound >= report.main_value - tolerance;
  return report;
}

}  // namespace robust_fusion

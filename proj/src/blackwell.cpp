#include "robust_fusion/blackwell.hpp"

#include <algorithm>
#include <cmath>

#include "robust_fusion/linprog.hpp"

namespace robust_fusion {

namespace {

using Point = Eigen::Vector2d;

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

void require_binary(const Experiment& e) {
  if (e.num_states() != 2) {
    throw Error(ErrorKind::not_binary_state,
                "experiment '" + e.name() + "' has " + std::to_string(e.num_states()) +
                    " states; binary states are required");
  }
}

std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

}  // namespace

double Zonotope2::upper_height(double x) const {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < upper_path.size(); ++i) {
    const Point& p = upper_path[i];
    const Point& q = upper_path[i + 1];
    if (x < p.x() - 1e-15 || x > q.x() + 1e-15) continue;
    if (q.x() - p.x() <= 1e-15) {
      best = std::max({best, p.y(), q.y()});
    } else {
      const double t = std::clamp((x - p.x()) / (q.x() - p.x()), 0.0, 1.0);
      best = std::max(best, p.y() + t * (q.y() - p.y()));
    }
  }
  return best;
}

bool Zonotope2::contains(const Zonotope2& inner, double tolerance) const {
  for (const Point& v : inner.upper_path) {
    if (v.y() > upper_height(v.x()) + tolerance) return false;
  }
  return true;
}

Zonotope2 feasible_zonotope(const Experiment& experiment) {
  require_binary(experiment);
  std::vector<Point> gens;
  for (Index y = 0; y < experiment.num_signals(); ++y) {
    const Point g(experiment.kernel()(0, y), experiment.kernel()(1, y));
    if (g.x() <= 0.0 && g.y() <= 0.0) continue;  // Blackwell-irrelevant signal
    gens.push_back(g);
  }
  // Decreasing slope y/x, with x == 0 (infinite ratio) first.
  std::stable_sort(gens.begin(), gens.end(),
                   [](const Point& a, const Point& b) { return cross(b, a) > 0.0; });

  Zonotope2 z;
  for (const Point& g : gens) {
    if (!z.generators.empty()) {
      Point& last = z.generators.back();
      if (std::abs(cross(last, g)) <= 1e-12 * last.norm() * g.norm()) {
        last += g;
        continue;
      }
    }
    z.generators.push_back(g);
  }
  z.upper_path.push_back(Point::Zero());
  for (const Point& g : z.generators) z.upper_path.push_back(z.upper_path.back() + g);
  z.upper_path.back() = Point(1.0, 1.0);
  return z;
}

std::optional<GarblingMatrix> is_garbling(const Experiment& target, const Experiment& source) {
  if (target.num_states() != source.num_states()) {
    throw Error(ErrorKind::dimension_mismatch, "garbling requires equal state counts");
  }
  const Index n_states = source.num_states();
  const Index ns = source.num_signals();
  const Index nt = target.num_signals();
  const Matrix& S = source.kernel();
  const Matrix& T = target.kernel();

  if (ns == nt && (S - T).cwiseAbs().maxCoeff() == 0.0) {
    return GarblingMatrix{Matrix::Identity(ns, ns)};
  }
  // Uninformative targets are reached by ignoring the source entirely.
  bool uninformative = true;
  for (Index s = 1; s < n_states && uninformative; ++s) {
    uninformative = (T.row(s) - T.row(0)).cwiseAbs().maxCoeff() <= kInputTolerance;
  }
  if (uninformative) {
    return GarblingMatrix{Matrix::Ones(ns, 1) * T.row(0)};
  }

  // min L1 residual of source * g - target over row-stochastic g.
  const Index n_g = ns * nt;
  const Index n_res = n_states * nt;
  lp::Problem<double> problem(n_g + 2 * n_res, ns + n_res, 0);
  problem.objective.tail(2 * n_res).setOnes();
  for (Index y = 0; y < ns; ++y) {
    for (Index z = 0; z < nt; ++z) problem.eq_matrix(y, y * nt + z) = 1.0;
    problem.eq_rhs(y) = 1.0;
  }
  for (Index s = 0; s < n_states; ++s) {
    for (Index z = 0; z < nt; ++z) {
      const Index row = ns + s * nt + z;
      for (Index y = 0; y < ns; ++y) problem.eq_matrix(row, y * nt + z) = S(s, y);
      problem.eq_matrix(row, n_g + s * nt + z) = 1.0;
      problem.eq_matrix(row, n_g + n_res + s * nt + z) = -1.0;
      problem.eq_rhs(row) = T(s, z);
    }
  }
  const auto solution = lp::solve(problem);
  if (!solution.optimal()) {
    throw Error(ErrorKind::numerical_failure, "garbling LP did not reach optimality");
  }
  if (solution.objective > 1e-7) return std::nullopt;

  Matrix g(ns, nt);
  for (Index y = 0; y < ns; ++y) {
    for (Index z = 0; z < nt; ++z) g(y, z) = solution.primal(y * nt + z);
  }
  g = clean_stochastic_rows(g);
  if ((S * g - T).cwiseAbs().maxCoeff() > kComputedTolerance) return std::nullopt;
  return GarblingMatrix{std::move(g)};
}

Experiment blackwell_supremum(const std::vector<Experiment>& experiments) {
  if (experiments.empty()) {
    throw Error(ErrorKind::empty_input, "the supremum of an empty family is undefined");
  }
  std::vector<Point> points;
  std::string name = "sup(";
  for (std::size_t j = 0; j < experiments.size(); ++j) {
    require_binary(experiments[j]);
    const Zonotope2 z = feasible_zonotope(experiments[j]);
    points.insert(points.end(), z.upper_path.begin(), z.upper_path.end());
    name += (j ? "," : "") + experiments[j].name();
  }
  name += ")";
  std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });

  // Upper concave envelope (monotone chain); vertices collinear up to a
  // relative tolerance are fused.
  std::vector<Point> hull;
  for (const Point& p : points) {
    while (hull.size() >= 2) {
      const Point& o = hull[hull.size() - 2];
      const Point& a = hull.back();
      const Point u = a - o;
      const Point v = p - o;
      if (cross(u, v) >= -1e-14 * u.norm() * v.norm()) {
        hull.pop_back();
      } else {
        break;
      }
    }
    if (!hull.empty() && (hull.back() - p).cwiseAbs().maxCoeff() <= 1e-15) continue;
    hull.push_back(p);
  }

  const std::size_t edges = hull.size() - 1;
  Matrix kernel(2, static_cast<Index>(edges));
  for (std::size_t e = 0; e < edges; ++e) {
    const Point d = hull[e + 1] - hull[e];
    kernel(0, static_cast<Index>(e)) = std::max(d.x(), 0.0);
    kernel(1, static_cast<Index>(e)) = std::max(d.y(), 0.0);
  }
  kernel = clean_stochastic_rows(kernel);
  return Experiment(name, numbered("s", edges), std::move(kernel), kComputedTolerance);
}

JointExperiment supremum_joint(const std::vector<Experiment>& experiments, std::size_t cap) {
  const Experiment sup = blackwell_supremum(experiments);
  const Index cells = checked_num_cells(experiments, cap);
  const ProductSpace space = ProductSpace::of(experiments);

  std::vector<Matrix> garblings;
  for (const Experiment& e : experiments) {
    auto g = is_garbling(e, sup);
    if (!g) {
      throw Error(ErrorKind::numerical_failure,
                  "supremum does not dominate '" + e.name() + "'");
    }
    garblings.push_back(std::move(g->matrix));
  }

  Matrix kernel = Matrix::Zero(2, cells);
  Eigen::RowVectorXd weight(cells);
  for (Index z = 0; z < sup.num_signals(); ++z) {
    for (Index cell = 0; cell < cells; ++cell) {
      double w = 1.0;
      for (Index j = 0; j < space.num_sources() && w != 0.0; ++j) {
        w *= garblings[j](z, space.coordinate(cell, j));
      }
      weight(cell) = w;
    }
    kernel += sup.kernel().col(z) * weight;
  }
  return JointExperiment(experiments, clean_stochastic_rows(kernel), "supremum-joint");
}

std::vector<Index> undominated_pure_actions(const Matrix& utility) {
  const Index n = utility.cols();
  std::vector<Index> kept;
  for (Index a = 0; a < n; ++a) {
    bool dominated = false;
    for (Index b = 0; b < n && !dominated; ++b) {
      if (b == a) continue;
      const bool weakly = (utility.col(b).array() >= utility.col(a).array()).all();
      const bool equal = utility.col(b) == utility.col(a);
      dominated = weakly && (!equal || b < a);
    }
    if (!dominated) kept.push_back(a);
  }
  return kept;
}

WorstCaseJoint worst_case_joint(const std::vector<Experiment>& experiments,
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

  Index n_eq = 0;
  for (const Experiment& e : experiments) n_eq += n_states * e.num_signals();
  const Index n_prob = n_states * cells;
  const Index n_ub = cells * static_cast<Index>(actions.size());

  lp::Problem<double> lp(n_prob + cells, n_eq, n_ub);
  for (Index cell = 0; cell < cells; ++cell) {
    lp.objective(n_prob + cell) = 1.0;
    lp.set_free(n_prob + cell);
  }
  Index row = 0;
  for (Index j = 0; j < space.num_sources(); ++j) {
    const Matrix& marginal = experiments[j].kernel();
    for (Index s = 0; s < n_states; ++s) {
      for (Index yj = 0; yj < marginal.cols(); ++yj) {
        lp.eq_rhs(row) = marginal(s, yj);
        for (Index cell = 0; cell < cells; ++cell) {
          if (space.coordinate(cell, j) == yj) lp.eq_matrix(row, s * cells + cell) = 1.0;
        }
        ++row;
      }
    }
  }
  row = 0;
  for (Index cell = 0; cell < cells; ++cell) {
    for (Index a : actions) {
      for (Index s = 0; s < n_states; ++s) lp.ub_matrix(row, s * cells + cell) = u(s, a);
      lp.ub_matrix(row, n_prob + cell) = -1.0;
      ++row;
    }
  }

  const auto solution = lp::solve(lp);
  if (!solution.optimal()) {
    throw Error(ErrorKind::numerical_failure, "Nature's LP did not reach optimality");
  }
  Matrix kernel(n_states, cells);
  for (Index s = 0; s < n_states; ++s) {
    kernel.row(s) = solution.primal.segment(s * cells, cells).transpose();
  }
  JointExperiment joint(experiments, clean_stochastic_rows(kernel), "worst-case");
  return WorstCaseJoint{std::move(joint), solution.objective};
}

}  // namespace robust_fusion

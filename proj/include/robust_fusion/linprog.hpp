#pragma once

// Dense two-phase simplex with dual recovery.
//
//   minimize / maximize   c^T x
//   subject to            A_eq x  = b_eq
//                         A_ub x <= b_ub
//                         lower <= x <= upper      (entries may be infinite)
//
// Duals use the sensitivity convention: eq_duals[i] = d(objective)/d(b_eq[i])
// and likewise for ub_duals, independent of the optimization sense. Reduced
// costs are c - A_eq^T y_eq - A_ub^T y_ub in the user's variables.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "robust_fusion/errors.hpp"

namespace robust_fusion::lp {

enum class Sense { minimize, maximize };
enum class Status { optimal, infeasible, unbounded };

template <typename Scalar>
struct Problem {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Sense sense = Sense::minimize;
  Vector objective;
  Matrix eq_matrix;
  Vector eq_rhs;
  Matrix ub_matrix;
  Vector ub_rhs;
  Vector lower;
  Vector upper;

  Problem() : Problem(0, 0, 0) {}

  // Zero objective, zero constraint rows, and x >= 0.
  Problem(Eigen::Index num_variables, Eigen::Index num_eq, Eigen::Index num_ub)
      : objective(Vector::Zero(num_variables)),
        eq_matrix(Matrix::Zero(num_eq, num_variables)),
        eq_rhs(Vector::Zero(num_eq)),
        ub_matrix(Matrix::Zero(num_ub, num_variables)),
        ub_rhs(Vector::Zero(num_ub)),
        lower(Vector::Zero(num_variables)),
        upper(Vector::Constant(num_variables, infinity())) {}

  static constexpr Scalar infinity() {
    return std::numeric_limits<Scalar>::infinity();
  }

  Eigen::Index num_variables() const { return objective.size(); }

  void set_free(Eigen::Index j) {
    lower(j) = -infinity();
    upper(j) = infinity();
  }
};

template <typename Scalar>
struct Solution {
  using Vector = typename Problem<Scalar>::Vector;

  Status status = Status::infeasible;
  Vector primal;
  Scalar objective = Scalar(0);
  Vector eq_duals;
  Vector ub_duals;
  Vector reduced_costs;
  int iterations = 0;

  bool optimal() const { return status == Status::optimal; }
};

struct SimplexOptions {
  double pivot_tolerance = 1e-10;
  double feasibility_tolerance = 1e-9;
  double optimality_tolerance = 1e-10;
  // Consecutive degenerate pivots tolerated under Dantzig pricing before
  // switching to Bland's rule.
  int degenerate_pivots_before_bland = 50;
  // 0 selects a limit proportional to the tableau size.
  int max_iterations = 0;
};

template <typename Scalar>
class DenseSimplex {
 public:
  using Vector = typename Problem<Scalar>::Vector;
  using Matrix = typename Problem<Scalar>::Matrix;
  using Index = Eigen::Index;

  DenseSimplex(const Problem<Scalar>& problem, SimplexOptions options)
      : problem_(problem), options_(options) {}

  Solution<Scalar> run();

 private:
  struct ColumnMap {
    Index plus = -1;
    Index minus = -1;
    Scalar offset = Scalar(0);
    Scalar sign = Scalar(1);
  };

  enum class Outcome { optimal, unbounded };

  void check_shapes() const;
  bool build_standard_form();
  void pivot(Index row, Index col);
  Outcome iterate(Index num_columns, const std::vector<bool>& barred);
  void load_objective(const Vector& costs, Index num_columns);
  Solution<Scalar> extract(Index num_columns);

  const Problem<Scalar>& problem_;
  SimplexOptions options_;

  std::vector<ColumnMap> maps_;
  Index num_structural_ = 0;
  Index num_slack_ = 0;
  Index num_artificial_ = 0;
  Index num_rows_ = 0;
  Matrix standard_;           // signed rows, structural + slack columns
  Vector rhs_;                // signed
  std::vector<Scalar> row_sign_;
  std::vector<Index> slack_of_row_;
  std::vector<Index> basis_;  // -1 marks a redundant row
  Matrix tableau_;
  Vector phase2_costs_;
  int iterations_ = 0;
  int iteration_limit_ = 0;
};

template <typename Scalar>
void DenseSimplex<Scalar>::check_shapes() const {
  const Index n = problem_.num_variables();
  const bool ok = problem_.eq_matrix.cols() == n &&
                  problem_.ub_matrix.cols() == n &&
                  problem_.eq_matrix.rows() == problem_.eq_rhs.size() &&
                  problem_.ub_matrix.rows() == problem_.ub_rhs.size() &&
                  problem_.lower.size() == n && problem_.upper.size() == n;
  if (!ok) {
    throw Error(ErrorKind::dimension_mismatch, "inconsistent LP dimensions");
  }
  if (!problem_.objective.allFinite() || !problem_.eq_matrix.allFinite() ||
      !problem_.ub_matrix.allFinite() || !problem_.eq_rhs.allFinite() ||
      !problem_.ub_rhs.allFinite()) {
    throw Error(ErrorKind::invalid_argument, "LP coefficients must be finite");
  }
}

// Returns false when some variable has lower > upper.
template <typename Scalar>
bool DenseSimplex<Scalar>::build_standard_form() {
  const Index n = problem_.num_variables();
  const Index num_eq = problem_.eq_matrix.rows();
  const Index num_ub = problem_.ub_matrix.rows();

  maps_.assign(n, ColumnMap{});
  std::vector<std::pair<Index, Scalar>> bound_rows;
  Index k = 0;
  for (Index j = 0; j < n; ++j) {
    const Scalar lo = problem_.lower(j);
    const Scalar hi = problem_.upper(j);
    if (lo > hi) return false;
    ColumnMap& map = maps_[j];
    if (std::isfinite(lo)) {
      map.plus = k++;
      map.offset = lo;
      if (std::isfinite(hi)) bound_rows.emplace_back(map.plus, hi - lo);
    } else if (std::isfinite(hi)) {
      map.plus = k++;
      map.offset = hi;
      map.sign = Scalar(-1);
    } else {
      map.plus = k++;
      map.minus = k++;
    }
  }
  num_structural_ = k;
  num_slack_ = num_ub + static_cast<Index>(bound_rows.size());
  num_rows_ = num_eq + num_slack_;

  standard_ = Matrix::Zero(num_rows_, num_structural_ + num_slack_);
  rhs_ = Vector::Zero(num_rows_);
  slack_of_row_.assign(num_rows_, -1);

  auto load_row = [&](Index row, const auto& coefficients, Scalar b) {
    for (Index j = 0; j < n; ++j) {
      const Scalar a = coefficients(j);
      if (a == Scalar(0)) continue;
      const ColumnMap& map = maps_[j];
      if (map.minus >= 0) {
        standard_(row, map.plus) += a;
        standard_(row, map.minus) -= a;
      } else {
        standard_(row, map.plus) += a * map.sign;
        b -= a * map.offset;
      }
    }
    rhs_(row) = b;
  };

  for (Index i = 0; i < num_eq; ++i) {
    load_row(i, problem_.eq_matrix.row(i), problem_.eq_rhs(i));
  }
  for (Index i = 0; i < num_ub; ++i) {
    const Index row = num_eq + i;
    load_row(row, problem_.ub_matrix.row(i), problem_.ub_rhs(i));
    slack_of_row_[row] = num_structural_ + i;
    standard_(row, num_structural_ + i) = Scalar(1);
  }
  for (std::size_t b = 0; b < bound_rows.size(); ++b) {
    const Index row = num_eq + num_ub + static_cast<Index>(b);
    const Index slack = num_structural_ + num_ub + static_cast<Index>(b);
    standard_(row, bound_rows[b].first) = Scalar(1);
    standard_(row, slack) = Scalar(1);
    slack_of_row_[row] = slack;
    rhs_(row) = bound_rows[b].second;
  }

  row_sign_.assign(num_rows_, Scalar(1));
  for (Index i = 0; i < num_rows_; ++i) {
    if (rhs_(i) < Scalar(0)) {
      row_sign_[i] = Scalar(-1);
      standard_.row(i) *= Scalar(-1);
      rhs_(i) = -rhs_(i);
    }
  }

  phase2_costs_ = Vector::Zero(num_structural_ + num_slack_);
  const Scalar direction =
      problem_.sense == Sense::minimize ? Scalar(1) : Scalar(-1);
  for (Index j = 0; j < n; ++j) {
    const Scalar c = direction * problem_.objective(j);
    const ColumnMap& map = maps_[j];
    if (map.minus >= 0) {
      phase2_costs_(map.plus) = c;
      phase2_costs_(map.minus) = -c;
    } else {
      phase2_costs_(map.plus) = c * map.sign;
    }
  }
  return true;
}

template <typename Scalar>
void DenseSimplex<Scalar>::pivot(Index row, Index col) {
  const Scalar value = tableau_(row, col);
  tableau_.row(row) /= value;
  Vector column = tableau_.col(col);
  column(row) = Scalar(0);
  tableau_.noalias() -= column * tableau_.row(row);
  tableau_.col(col).setZero();
  tableau_(row, col) = Scalar(1);
  basis_[row] = col;
}

template <typename Scalar>
void DenseSimplex<Scalar>::load_objective(const Vector& costs,
                                          Index num_columns) {
  const Index obj = num_rows_;
  const Index rhs = num_columns;
  tableau_.row(obj).setZero();
  tableau_.row(obj).head(num_columns) = costs.head(num_columns).transpose();
  for (Index i = 0; i < num_rows_; ++i) {
    const Index b = basis_[i];
    if (b < 0) continue;
    const Scalar cb = costs(b);
    if (cb != Scalar(0)) {
      tableau_.row(obj).head(num_columns) -= cb * tableau_.row(i).head(num_columns);
      tableau_(obj, rhs) -= cb * tableau_(i, rhs);
    }
  }
}

template <typename Scalar>
typename DenseSimplex<Scalar>::Outcome DenseSimplex<Scalar>::iterate(
    Index num_columns, const std::vector<bool>& barred) {
  const Index obj = num_rows_;
  const Index rhs = num_columns;
  const Scalar pivot_tol = Scalar(options_.pivot_tolerance);
  const Scalar opt_tol = Scalar(options_.optimality_tolerance);
  int degenerate_run = 0;

  while (true) {
    const bool bland = degenerate_run > options_.degenerate_pivots_before_bland;

    Index entering = -1;
    Scalar best = -opt_tol;
    for (Index j = 0; j < num_columns; ++j) {
      if (barred[j]) continue;
      const Scalar d = tableau_(obj, j);
      if (d < best) {
        entering = j;
        if (bland) break;
        best = d;
      }
    }
    if (entering < 0) return Outcome::optimal;

    Index leaving = -1;
    Scalar best_ratio = std::numeric_limits<Scalar>::infinity();
    Scalar best_pivot = Scalar(0);
    for (Index i = 0; i < num_rows_; ++i) {
      if (basis_[i] < 0) continue;
      const Scalar a = tableau_(i, entering);
      if (a <= pivot_tol) continue;
      const Scalar ratio = std::max(tableau_(i, rhs), Scalar(0)) / a;
      const Scalar slack = Scalar(1e-12) * (Scalar(1) + std::abs(best_ratio));
      if (leaving < 0 || ratio < best_ratio - slack) {
        leaving = i;
        best_ratio = ratio;
        best_pivot = a;
      } else if (ratio <= best_ratio + slack) {
        const bool take = bland ? basis_[i] < basis_[leaving] : a > best_pivot;
        if (take) {
          leaving = i;
          best_ratio = std::min(best_ratio, ratio);
          best_pivot = a;
        }
      }
    }
    if (leaving < 0) return Outcome::unbounded;

    if (++iterations_ > iteration_limit_) {
      throw Error(ErrorKind::numerical_failure,
                  "simplex iteration limit exceeded (possible cycling)");
    }
    degenerate_run = best_ratio <= Scalar(1e-14) ? degenerate_run + 1 : 0;
    pivot(leaving, entering);
  }
}

template <typename Scalar>
Solution<Scalar> DenseSimplex<Scalar>::run() {
  check_shapes();
  Solution<Scalar> solution;
  if (!build_standard_form()) {
    solution.status = Status::infeasible;
    return solution;
  }

  // Rows whose slack cannot serve as the initial basic variable receive an
  // artificial column.
  basis_.assign(num_rows_, -1);
  std::vector<Index> artificial_rows;
  for (Index i = 0; i < num_rows_; ++i) {
    if (slack_of_row_[i] >= 0 && row_sign_[i] > Scalar(0)) {
      basis_[i] = slack_of_row_[i];
    } else {
      artificial_rows.push_back(i);
    }
  }
  num_artificial_ = static_cast<Index>(artificial_rows.size());
  const Index base_columns = num_structural_ + num_slack_;
  const Index phase1_columns = base_columns + num_artificial_;

  tableau_ = Matrix::Zero(num_rows_ + 1, phase1_columns + 1);
  tableau_.topLeftCorner(num_rows_, base_columns) = standard_;
  tableau_.col(phase1_columns).head(num_rows_) = rhs_;
  for (Index a = 0; a < num_artificial_; ++a) {
    const Index row = artificial_rows[a];
    tableau_(row, base_columns + a) = Scalar(1);
    basis_[row] = base_columns + a;
  }

  iteration_limit_ = options_.max_iterations > 0
                         ? options_.max_iterations
                         : static_cast<int>(20 * (num_rows_ + phase1_columns)) + 1000;

  const Scalar feas_tol =
      Scalar(options_.feasibility_tolerance) *
      std::max(Scalar(1), rhs_.size() ? rhs_.cwiseAbs().maxCoeff() : Scalar(0));

  if (num_artificial_ > 0) {
    Vector phase1_costs = Vector::Zero(phase1_columns);
    phase1_costs.tail(num_artificial_).setOnes();
    load_objective(phase1_costs, phase1_columns);
    std::vector<bool> barred(phase1_columns, false);
    for (Index a = 0; a < num_artificial_; ++a) barred[base_columns + a] = true;
    iterate(phase1_columns, barred);
    const Scalar infeasibility = -tableau_(num_rows_, phase1_columns);
    if (infeasibility > feas_tol) {
      solution.status = Status::infeasible;
      solution.iterations = iterations_;
      return solution;
    }

    // Pivot remaining zero-level artificials out of the basis; rows where no
    // structural or slack entry is usable are linearly redundant.
    for (Index i = 0; i < num_rows_; ++i) {
      if (basis_[i] < base_columns) continue;
      Index col = -1;
      Scalar best = Scalar(options_.pivot_tolerance);
      for (Index j = 0; j < base_columns; ++j) {
        const Scalar a = std::abs(tableau_(i, j));
        if (a > best) {
          best = a;
          col = j;
        }
      }
      if (col >= 0) {
        pivot(i, col);
      } else {
        basis_[i] = -1;
        tableau_.row(i).setZero();
      }
    }

    Matrix reduced(num_rows_ + 1, base_columns + 1);
    reduced.leftCols(base_columns) = tableau_.leftCols(base_columns);
    reduced.col(base_columns) = tableau_.col(phase1_columns);
    tableau_ = std::move(reduced);
  }

  load_objective(phase2_costs_, base_columns);
  std::vector<bool> barred(base_columns, false);
  const Outcome outcome = iterate(base_columns, barred);
  solution.iterations = iterations_;
  if (outcome == Outcome::unbounded) {
    solution.status = Status::unbounded;
    return solution;
  }
  return extract(base_columns);
}

template <typename Scalar>
Solution<Scalar> DenseSimplex<Scalar>::extract(Index num_columns) {
  Solution<Scalar> solution;
  solution.status = Status::optimal;
  solution.iterations = iterations_;

  std::vector<Index> rows;
  for (Index i = 0; i < num_rows_; ++i) {
    if (basis_[i] >= 0) rows.push_back(i);
  }
  const Index r = static_cast<Index>(rows.size());

  Vector values = Vector::Zero(num_columns);
  for (Index i : rows) values(basis_[i]) = tableau_(i, num_columns);

  // Recompute the basic solution and the duals from the original data; the
  // tableau accumulates rounding over many pivots.
  Vector row_duals = Vector::Zero(num_rows_);
  if (r > 0) {
    Matrix basis_matrix(r, r);
    Vector b(r);
    Vector cb(r);
    for (Index k = 0; k < r; ++k) {
      b(k) = rhs_(rows[k]);
      cb(k) = phase2_costs_(basis_[rows[k]]);
      for (Index q = 0; q < r; ++q) {
        basis_matrix(q, k) = standard_(rows[q], basis_[rows[k]]);
      }
    }
    Eigen::PartialPivLU<Matrix> lu(basis_matrix);
    Vector refined = lu.solve(b);
    Vector y = lu.transpose().solve(cb);
    const Scalar residual = (basis_matrix * refined - b).cwiseAbs().maxCoeff();
    Scalar drift = Scalar(0);
    for (Index k = 0; k < r; ++k) {
      drift = std::max(drift, std::abs(refined(k) - values(basis_[rows[k]])));
    }
    if (refined.allFinite() && y.allFinite() && residual < Scalar(1e-9) &&
        drift < Scalar(1e-6)) {
      for (Index k = 0; k < r; ++k) {
        values(basis_[rows[k]]) = std::max(refined(k), Scalar(0));
        row_duals(rows[k]) = y(k);
      }
    } else {
      // Keep the tableau's primal values; the duals still come from the basis.
      for (Index k = 0; k < r; ++k) {
        row_duals(rows[k]) = std::isfinite(y(k)) ? y(k) : Scalar(0);
      }
      for (Index j = 0; j < num_columns; ++j) values(j) = std::max(values(j), Scalar(0));
    }
  }

  const Index n = problem_.num_variables();
  solution.primal = Vector::Zero(n);
  for (Index j = 0; j < n; ++j) {
    const ColumnMap& map = maps_[j];
    if (map.minus >= 0) {
      solution.primal(j) = values(map.plus) - values(map.minus);
    } else {
      solution.primal(j) = map.offset + map.sign * values(map.plus);
    }
  }

  const Scalar direction =
      problem_.sense == Sense::minimize ? Scalar(1) : Scalar(-1);
  const Index num_eq = problem_.eq_matrix.rows();
  const Index num_ub = problem_.ub_matrix.rows();
  solution.eq_duals = Vector(num_eq);
  solution.ub_duals = Vector(num_ub);
  for (Index i = 0; i < num_eq; ++i) {
    solution.eq_duals(i) = direction * row_sign_[i] * row_duals(i);
  }
  for (Index i = 0; i < num_ub; ++i) {
    solution.ub_duals(i) = direction * row_sign_[num_eq + i] * row_duals(num_eq + i);
  }
  solution.reduced_costs = problem_.objective -
                           problem_.eq_matrix.transpose() * solution.eq_duals -
                           problem_.ub_matrix.transpose() * solution.ub_duals;
  solution.objective = problem_.objective.dot(solution.primal);
  return solution;
}

template <typename Scalar>
Solution<Scalar> solve(const Problem<Scalar>& problem,
                       const SimplexOptions& options = {}) {
  return DenseSimplex<Scalar>(problem, options).run();
}

// b^T y plus the bound terms selected by the sign of each reduced cost. Equals
// the primal objective at an optimal solution (strong duality).
template <typename Scalar>
Scalar dual_objective(const Problem<Scalar>& problem,
                      const Solution<Scalar>& solution) {
  Scalar value = problem.eq_rhs.dot(solution.eq_duals) +
                 problem.ub_rhs.dot(solution.ub_duals);
  const Scalar direction =
      problem.sense == Sense::minimize ? Scalar(1) : Scalar(-1);
  for (Eigen::Index j = 0; j < problem.num_variables(); ++j) {
    const Scalar r = solution.reduced_costs(j);
    if (r == Scalar(0)) continue;
    const Scalar bound = direction * r > Scalar(0) ? problem.lower(j) : problem.upper(j);
    if (std::isfinite(bound)) {
      value += r * bound;
    } else if (std::abs(r) > Scalar(1e-9)) {
      return direction > Scalar(0) ? -Problem<Scalar>::infinity()
                                   : Problem<Scalar>::infinity();
    }
  }
  return value;
}

extern template class DenseSimplex<double>;

}  // namespace robust_fusion::lp

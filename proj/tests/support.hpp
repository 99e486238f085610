#pragma once

// Shared fixtures and seeded instance generators for the test suites.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "robust_fusion/core.hpp"

namespace robust_fusion::testing {

inline std::vector<std::string> labels(const std::string& prefix, Index n) {
  std::vector<std::string> out;
  for (Index i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

inline Experiment make_experiment(const std::string& name, std::vector<std::string> signals,
                                  std::initializer_list<std::initializer_list<double>> rows) {
  Matrix k(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index r = 0;
  for (const auto& row : rows) {
    Index c = 0;
    for (double v : row) k(r, c++) = v;
    ++r;
  }
  return Experiment(name, std::move(signals), std::move(k));
}

// Two assets whose outputs depend on a binary state; payoffs already weighted
// by the uniform prior. Actions: none, asset2, asset1, both.
inline DecisionProblem portfolio_problem() {
  Matrix u(2, 4);
  u << 0, -1, 2, 1,
       0, 2, -1, 1;
  return DecisionProblem::from_weighted({"theta1", "theta2"},
                                        {"none", "asset2", "asset1", "both"}, u);
}

// Invest in asset 1 or not.
inline DecisionProblem asset1_problem() {
  Matrix u(2, 2);
  u << 0, 2,
       0, -1;
  return DecisionProblem::from_weighted({"theta1", "theta2"}, {"skip", "invest"}, u);
}

inline Experiment portfolio_p1() {
  return make_experiment("P1", {"1", "0"}, {{0.9, 0.1}, {0.5, 0.5}});
}

inline Experiment portfolio_p2() {
  return make_experiment("P2", {"1", "0"}, {{0.5, 0.5}, {0.9, 0.1}});
}

// Three-state example: each source alone is worthless, together they reveal
// the state. u(., 1) = (1, -2, 1), u(., 0) = (-1, 0, -1).
inline DecisionProblem three_state_problem() {
  Matrix u(3, 2);
  u << -1, 1,
       0, -2,
       -1, 1;
  return DecisionProblem::from_weighted({"theta1", "theta2", "theta3"}, {"0", "1"}, u);
}

// The same sources under the utilities u(., 1) = (1, -1, 1), u(., 0) = 0.
inline DecisionProblem three_state_literal_problem() {
  Matrix u(3, 2);
  u << 0, 1,
       0, -1,
       0, 1;
  return DecisionProblem::from_weighted({"theta1", "theta2", "theta3"}, {"0", "1"}, u);
}

inline Experiment three_state_px() {
  return make_experiment("PX", {"x1", "x2"}, {{1, 0}, {1, 0}, {0, 1}});
}

inline Experiment three_state_py() {
  return make_experiment("PY", {"y1", "y2"}, {{1, 0}, {0, 1}, {0, 1}});
}

inline Experiment symmetric_binary(double p, const std::string& name = "sym") {
  return make_experiment(name, {"a", "b"}, {{p, 1 - p}, {1 - p, p}});
}

// Rows drawn from a flat Dirichlet; with probability `zero_rate` an entry is
// forced to zero before renormalizing (at least one entry stays positive).
inline Experiment random_experiment(std::mt19937_64& rng, Index states, Index signals,
                                    const std::string& name = "R", double zero_rate = 0.0) {
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix k(states, signals);
  for (Index s = 0; s < states; ++s) {
    double sum = 0.0;
    for (Index y = 0; y < signals; ++y) {
      k(s, y) = unit(rng) < zero_rate ? 0.0 : expo(rng);
      sum += k(s, y);
    }
    if (sum == 0.0) {
      k(s, 0) = 1.0;
      sum = 1.0;
    }
    k.row(s) /= sum;
    // Exact row sums for the 1e-12 input check.
    k(s, signals - 1) = std::max(0.0, 1.0 - k.row(s).head(signals - 1).sum());
  }
  return Experiment(name, labels("y", signals), std::move(k));
}

inline DecisionProblem random_problem(std::mt19937_64& rng, Index states, Index actions) {
  std::uniform_real_distribution<double> util(-2.0, 2.0);
  std::exponential_distribution<double> expo(1.0);
  Vector prior(states);
  for (Index s = 0; s < states; ++s) prior(s) = 0.2 + expo(rng);
  prior /= prior.sum();
  prior(states - 1) = 1.0 - prior.head(states - 1).sum();
  Matrix raw(states, actions);
  for (Index s = 0; s < states; ++s) {
    for (Index a = 0; a < actions; ++a) raw(s, a) = util(rng);
  }
  return DecisionProblem(labels("t", states), prior, labels("a", actions), raw);
}

inline std::vector<Experiment> random_experiments(std::mt19937_64& rng, Index states,
                                                  Index max_sources, Index max_signals,
                                                  double zero_rate = 0.0) {
  std::uniform_int_distribution<Index> m_dist(1, max_sources);
  std::uniform_int_distribution<Index> k_dist(2, max_signals);
  const Index m = m_dist(rng);
  std::vector<Experiment> out;
  for (Index j = 0; j < m; ++j) {
    out.push_back(random_experiment(rng, states, k_dist(rng), "P" + std::to_string(j + 1),
                                    zero_rate));
  }
  return out;
}

// Per state: a comonotone coupling under random signal orders, mixed with the
// independent coupling. Enough spread for coupling-invariance checks.
inline Matrix random_coupling(std::mt19937_64& rng, const std::vector<Experiment>& experiments) {
  const ProductSpace space = ProductSpace::of(experiments);
  const Index states = experiments.front().num_states();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix out = Matrix::Zero(states, space.num_cells());
  for (Index s = 0; s < states; ++s) {
    std::vector<std::vector<Index>> order(experiments.size());
    for (std::size_t j = 0; j < experiments.size(); ++j) {
      order[j].resize(experiments[j].num_signals());
      for (Index y = 0; y < experiments[j].num_signals(); ++y) order[j][y] = y;
      std::shuffle(order[j].begin(), order[j].end(), rng);
    }
    // Walk [0, 1] through every source's quantile breakpoints simultaneously.
    std::vector<std::size_t> pos(experiments.size(), 0);
    std::vector<double> upper(experiments.size());
    for (std::size_t j = 0; j < experiments.size(); ++j) {
      upper[j] = experiments[j].kernel()(s, order[j][0]);
    }
    double at = 0.0;
    Matrix comonotone = Matrix::Zero(1, space.num_cells());
    while (true) {
      double next = 1.0;
      for (std::size_t j = 0; j < experiments.size(); ++j) next = std::min(next, upper[j]);
      CompositeSignal sig(experiments.size());
      for (std::size_t j = 0; j < experiments.size(); ++j) sig[j] = order[j][pos[j]];
      comonotone(0, space.encode(sig)) += std::max(0.0, next - at);
      at = next;
      bool advanced = false;
      for (std::size_t j = 0; j < experiments.size(); ++j) {
        while (upper[j] <= at + 1e-15 && pos[j] + 1 < order[j].size()) {
          ++pos[j];
          upper[j] += experiments[j].kernel()(s, order[j][pos[j]]);
          advanced = true;
        }
      }
      if (!advanced) break;
    }
    const double w = unit(rng);
    Matrix independent = Matrix::Ones(1, space.num_cells());
    for (Index cell = 0; cell < space.num_cells(); ++cell) {
      for (std::size_t j = 0; j < experiments.size(); ++j) {
        independent(0, cell) *= experiments[j].kernel()(s, space.coordinate(cell, j));
      }
    }
    out.row(s) = w * comonotone + (1.0 - w) * independent;
  }
  return clean_stochastic_rows(out);
}

inline double kl(const std::vector<double>& nu, const Matrix& kernel, Index state) {
  double out = 0.0;
  for (std::size_t y = 0; y < nu.size(); ++y) {
    if (nu[y] <= 0.0) continue;
    const double p = kernel(state, static_cast<Index>(y));
    if (p <= 0.0) return std::numeric_limits<double>::infinity();
    out += nu[y] * std::log(nu[y] / p);
  }
  return out;
}

// min over nu of max_theta KL(nu, P_theta), by repeated grid zooming over the
// simplex of 2 or 3 signals.
inline double grid_chernoff(const Experiment& e) {
  const Index k = e.num_signals();
  auto objective = [&](const std::vector<double>& nu) {
    return std::max(kl(nu, e.kernel(), 0), kl(nu, e.kernel(), 1));
  };
  std::vector<double> center(static_cast<std::size_t>(k), 1.0 / static_cast<double>(k));
  double width = 1.0;
  double best = objective(center);
  const int steps = 40;
  for (int round = 0; round < 12; ++round) {
    std::vector<double> best_nu = center;
    if (k == 2) {
      for (int i = -steps; i <= steps; ++i) {
        const double a = center[0] + width * i / steps;
        if (a < 0.0 || a > 1.0) continue;
        const std::vector<double> nu{a, 1.0 - a};
        const double v = objective(nu);
        if (v < best) best = v, best_nu = nu;
      }
    } else {
      for (int i = -steps; i <= steps; ++i) {
        for (int j = -steps; j <= steps; ++j) {
          const double a = center[0] + width * i / steps;
          const double b = center[1] + width * j / steps;
          if (a < 0.0 || b < 0.0 || a + b > 1.0) continue;
          const std::vector<double> nu{a, b, 1.0 - a - b};
          const double v = objective(nu);
          if (v < best) best = v, best_nu = nu;
        }
      }
    }
    center = best_nu;
    width *= 0.25;
  }
  return best;
}

}  // namespace robust_fusion::testing

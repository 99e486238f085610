#include "robust_fusion/asymptotics.hpp"

#include <cmath>
#include <limits>

#include "robust_fusion/decompose.hpp"
#include "robust_fusion/robust.hpp"

namespace robust_fusion {

namespace {

void require_binary(Index states) {
  if (states != 2) {
    throw Error(ErrorKind::not_binary_state,
                std::to_string(states) + " states given; binary states are required");
  }
}

// Calls f on every count vector of t draws over k signals, first count largest.
template <typename F>
void for_each_count_vector(Index k, int t, F&& f) {
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  auto fill = [&](auto&& self, Index pos, int remaining) -> void {
    if (pos == k - 1) {
      counts[pos] = remaining;
      f(counts);
      return;
    }
    for (int n = remaining; n >= 0; --n) {
      counts[pos] = n;
      self(self, pos + 1, remaining - n);
    }
  };
  fill(fill, 0, t);
}

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double y = v - carry;
    const double next = sum + y;
    carry = (next - sum) - y;
    sum = next;
  }
};

}  // namespace

std::size_t count_vectors(Index k, int t) {
  // C(t + k - 1, k - 1) computed incrementally; every prefix is an integer.
  const std::size_t limit = std::numeric_limits<std::size_t>::max();
  std::size_t out = 1;
  for (Index i = 1; i < k; ++i) {
    const std::size_t num = static_cast<std::size_t>(t) + static_cast<std::size_t>(i);
    if (out > limit / num) return limit;
    out = out * num / static_cast<std::size_t>(i);
  }
  return out;
}

Experiment iid_power(const Experiment& base, int t, std::size_t cap) {
  if (t < 1) throw Error(ErrorKind::invalid_argument, "t must be at least 1");
  if (t == 1) return base;
  const Index k = base.num_signals();
  const std::size_t n_cols = count_vectors(k, t);
  if (n_cols > cap) {
    throw Error(ErrorKind::t_overflow,
                "t = " + std::to_string(t) + " gives more than " + std::to_string(cap) +
                    " count vectors for '" + base.name() + "'");
  }
  const Index n_states = base.num_states();
  Matrix log_p(n_states, k);
  for (Index s = 0; s < n_states; ++s) {
    for (Index y = 0; y < k; ++y) {
      const double p = base.kernel()(s, y);
      log_p(s, y) = p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
    }
  }
  Matrix kernel(n_states, static_cast<Index>(n_cols));
  std::vector<std::string> labels;
  labels.reserve(n_cols);
  Index col = 0;
  const double log_t_factorial = std::lgamma(t + 1.0);
  for_each_count_vector(k, t, [&](const std::vector<int>& counts) {
    std::string label = "[";
    double log_coeff = log_t_factorial;
    for (Index y = 0; y < k; ++y) {
      log_coeff -= std::lgamma(counts[y] + 1.0);
      label += (y ? "," : "") + std::to_string(counts[y]);
    }
    labels.push_back(label + "]");
    for (Index s = 0; s < n_states; ++s) {
      double log_prob = log_coeff;
      bool possible = true;
      for (Index y = 0; y < k && possible; ++y) {
        if (counts[y] == 0) continue;
        possible = std::isfinite(log_p(s, y));
        log_prob += counts[y] * log_p(s, y);
      }
      kernel(s, col) = possible ? std::exp(log_prob) : 0.0;
    }
    ++col;
  });
  for (Index s = 0; s < n_states; ++s) {
    KahanSum total;
    for (Index c = 0; c < kernel.cols(); ++c) total.add(kernel(s, c));
    if (std::abs(total.sum - 1.0) > 1e-10) {
      throw Error(ErrorKind::numerical_failure,
                  "power experiment row " + std::to_string(s) + " sums to " +
                      std::to_string(total.sum));
    }
    kernel.row(s) /= total.sum;
  }
  return Experiment(base.name() + "^" + std::to_string(t), std::move(labels), std::move(kernel),
                    kComputedTolerance);
}

double chernoff_index(const Experiment& experiment) {
  require_binary(experiment.num_states());
  std::vector<double> log0, log1;
  for (Index y = 0; y < experiment.num_signals(); ++y) {
    const double p0 = experiment.kernel()(0, y);
    const double p1 = experiment.kernel()(1, y);
    if (p0 > 0.0 && p1 > 0.0) {
      log0.push_back(std::log(p0));
      log1.push_back(std::log(p1));
    }
  }
  if (log0.empty()) return std::numeric_limits<double>::infinity();

  // log sum_y exp((1 - s) log p0 + s log p1), convex in s.
  auto objective = [&](double s) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < log0.size(); ++i) {
      peak = std::max(peak, (1.0 - s) * log0[i] + s * log1[i]);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < log0.size(); ++i) {
      sum += std::exp((1.0 - s) * log0[i] + s * log1[i] - peak);
    }
    return peak + std::log(sum);
  };

  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = 1.0;
  double a = hi - ratio * (hi - lo), b = lo + ratio * (hi - lo);
  double fa = objective(a), fb = objective(b);
  while (hi - lo > 1e-10) {
    if (fa <= fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - ratio * (hi - lo);
      fa = objective(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + ratio * (hi - lo);
      fb = objective(b);
    }
  }
  const double best = std::min({objective(0.5 * (lo + hi)), objective(0.0), objective(1.0)});
  return std::max(0.0, -best);
}

std::vector<SweepRow> power_sweep(const std::vector<Experiment>& experiments,
                                  const DecisionProblem& problem, int t_max, std::size_t cap) {
  if (experiments.empty()) {
    throw Error(ErrorKind::empty_input, "at least one experiment is required");
  }
  if (t_max < 1) throw Error(ErrorKind::invalid_argument, "t_max must be at least 1");
  validate_instance(problem, experiments);
  std::vector<SweepRow> rows;
  for (int t = 1; t <= t_max; ++t) {
    std::vector<Experiment> powers;
    SweepRow row{t, 0.0, {}};
    for (const Experiment& e : experiments) {
      powers.push_back(iid_power(e, t, cap));
      row.single_values.push_back(bayes_value(powers.back(), problem));
    }
    row.joint_value = robust_value(powers, problem, cap);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<int> dominance_threshold(const std::vector<Experiment>& experiments,
                                       const DecisionProblem& problem, int t_max,
                                       std::size_t cap) {
  if (experiments.empty()) {
    throw Error(ErrorKind::empty_input, "at least one experiment is required");
  }
  validate_instance(problem, experiments);
  require_binary(problem.num_states());
  if (experiments.size() == 1) return 1;

  const double leader = chernoff_index(experiments.front());
  for (std::size_t j = 1; j < experiments.size(); ++j) {
    const double other = chernoff_index(experiments[j]);
    if (!(leader > other + 1e-9 * (1.0 + std::abs(other)))) {
      throw Error(ErrorKind::no_strict_leader,
                  "the first source's Chernoff index " + std::to_string(leader) +
                      " does not strictly exceed that of '" + experiments[j].name() + "' (" +
                      std::to_string(other) + ")");
    }
  }

  const Decomposition dec = canonical_decomposition(problem);
  for (int t = 1; t <= t_max; ++t) {
    std::vector<Experiment> powers;
    for (const Experiment& e : experiments) powers.push_back(iid_power(e, t, cap));
    bool leads = true;
    for (std::size_t l = 0; l < dec.subproblems.size() && leads; ++l) {
      const Matrix& sub = dec.subproblems[l].utility;
      const double own = bayes_value(powers.front().kernel(), sub);
      for (std::size_t j = 1; j < powers.size() && leads; ++j) {
        leads = own > bayes_value(powers[j].kernel(), sub) + 1e-12;
      }
    }
    if (leads) return t;
  }
  return std::nullopt;
}

}  // namespace robust_fusion

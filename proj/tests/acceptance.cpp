// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "robust_fusion/asymptotics.hpp"
#include "robust_fusion/blackwell.hpp"
#include "robust_fusion/cli.hpp"
#include "robust_fusion/decompose.hpp"
#include "robust_fusion/oracle.hpp"
#include "robust_fusion/robust.hpp"
#include "support.hpp"

namespace robust_fusion {
namespace {

using namespace robust_fusion::testing;

struct Case {
  std::vector<Experiment> experiments;
  DecisionProblem problem;
};

// Collects the first few failure messages of a criterion.
class Tally {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) notes_ << (failures_ > 1 ? "; " : "") << what;
  }
  void near(double actual, double expected, double tol, const std::string& what) {
    std::ostringstream msg;
    msg << what << ": " << actual << " vs " << expected;
    expect(std::abs(actual - expected) <= tol, msg.str());
  }
  bool ok() const { return failures_ == 0 && checks_ > 0; }
  std::string summary() const {
    std::ostringstream out;
    out << checks_ << " checks";
    if (failures_ > 0) out << ", " << failures_ << " failed (" << notes_.str() << ")";
    return out.str();
  }

 private:
  int checks_ = 0;
  int failures_ = 0;
  std::ostringstream notes_;
};

std::vector<Case> binary_action_suite() {
  std::mt19937_64 rng(1001);
  std::vector<Case> out;
  for (int i = 0; i < 200; ++i) {
    auto ex = random_experiments(rng, 2, 3, 4, 0.1);
    out.push_back({std::move(ex), random_problem(rng, 2, 2)});
  }
  return out;
}

std::vector<Case> supremum_suite() {
  std::mt19937_64 rng(1002);
  std::vector<Case> out;
  for (int i = 0; i < 100; ++i) {
    auto ex = random_experiments(rng, 2, 3, 4, 0.1);
    out.push_back({std::move(ex), random_problem(rng, 2, 2 + i % 3)});
  }
  return out;
}

std::vector<Case> canonical_suite() {
  std::mt19937_64 rng(1003);
  std::vector<Case> out;
  for (int i = 0; i < 100; ++i) {
    auto ex = random_experiments(rng, 2, 3, 4, 0.1);
    out.push_back({std::move(ex), random_problem(rng, 2, 2 + i % 5)});
  }
  return out;
}

std::vector<Case> many_state_suite() {
  std::mt19937_64 rng(1004);
  std::vector<Case> out;
  for (int i = 0; i < 50; ++i) {
    const Index states = 3 + i % 2;
    auto ex = random_experiments(rng, states, 3, 3, 0.1);
    out.push_back({std::move(ex), random_problem(rng, states, 2 + i % 3)});
  }
  return out;
}

double best_single(const std::vector<Experiment>& ex, const Matrix& utility) {
  double best = -std::numeric_limits<double>::infinity();
  for (const Experiment& e : ex) best = std::max(best, bayes_value(e.kernel(), utility));
  return best;
}

bool portfolio_reproduction(std::string& detail) {
  Tally t;
  const std::vector<Experiment> ex{portfolio_p1(), portfolio_p2()};
  const DecisionProblem p = portfolio_problem();
  t.near(robust_value(ex, p), 2.6, 1e-6, "robust value");
  t.near(best_single_source(ex, p).value, 2.3, 1e-6, "best single source");
  const RobustSolution sol = robust_strategy(ex, p);
  // Cells 1|1, 1|0, 0|1, 0|0 -> both, asset1, asset2, none.
  const std::vector<Index> expected{3, 2, 1, 0};
  for (Index cell = 0; cell < 4; ++cell) {
    t.expect(sol.strategy.table()(cell, expected[cell]) >= 1.0 - 1e-9,
             "table cell " + std::to_string(cell));
  }
  detail = t.summary();
  return t.ok();
}

bool three_state_reproduction(std::string& detail) {
  Tally t;
  const std::vector<Experiment> ex{three_state_px(), three_state_py()};
  const DecisionProblem p = three_state_problem();
  t.near(robust_value(ex, p), 2.0, 1e-6, "robust value");
  t.near(bayes_value(ex[0], p), 0.0, 1e-6, "first source alone");
  t.near(bayes_value(ex[1], p), 0.0, 1e-6, "second source alone");
  detail = t.summary();
  return t.ok();
}

bool binary_action_suite_check(const std::vector<Case>& suite, std::string& detail) {
  Tally t;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto& [ex, p] = suite[i];
    t.near(robust_value(ex, p), best_single(ex, p.utility()), 1e-6,
           "instance " + std::to_string(i));
  }
  detail = t.summary();
  return t.ok();
}

bool supremum_suite_check(const std::vector<Case>& suite, std::string& detail) {
  Tally t;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto& [ex, p] = suite[i];
    const std::string id = "instance " + std::to_string(i);
    const double envelope = bayes_value(blackwell_supremum(ex).kernel(), p.utility());
    t.near(worst_case_joint(ex, p).value, envelope, 1e-6, id + " worst case");
    const JointExperiment joint = supremum_joint(ex);
    double error = 0.0;
    for (std::size_t j = 0; j < ex.size(); ++j) {
      const Matrix m = marginalize(joint.joint().kernel(), joint.space(), static_cast<Index>(j));
      error = std::max(error, (m - ex[j].kernel()).cwiseAbs().maxCoeff());
    }
    t.expect(error <= 1e-8, id + " marginal error " + std::to_string(error));
    t.near(bayes_value(joint.joint().kernel(), p.utility()), envelope, 1e-6, id + " joint value");
  }
  detail = t.summary();
  return t.ok();
}

bool canonical_suite_check(const std::vector<Case>& suite, std::string& detail) {
  Tally t;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto& [ex, p] = suite[i];
    const std::string id = "instance " + std::to_string(i);
    const Decomposition d = canonical_decomposition(p);
    t.expect(undominated_pure_actions(p.utility()).size() <= 6, id + " action count");
    double sum = d.normalized->offset.sum();
    for (const Subproblem& sub : d.subproblems) sum += best_single(ex, sub.utility);
    const double v = robust_value(ex, p);
    t.near(v, sum, 1e-6, id + " subproblem sum");
    const RobustSolution sol = robust_strategy(ex, p);
    t.near(nature_best_response(sol.strategy, ex, p).value, v, 1e-6, id + " certificate");
  }
  Matrix u(2, 3);
  u << -1, 1, 2,
       2, 1, -1;
  const Decomposition fixed =
      canonical_decomposition(DecisionProblem::from_weighted({"t1", "t2"}, {"a", "b", "c"}, u));
  Matrix expected(2, 2);
  expected << 2, 1,
              -1, -2;
  t.expect(fixed.increments.rows() == 2 && fixed.increments.cols() == 2 &&
               (fixed.increments - expected).cwiseAbs().maxCoeff() <= 1e-9,
           "three-action increments");
  detail = t.summary();
  return t.ok();
}

bool many_state_suite_check(const std::vector<Case>& suite, std::string& detail) {
  Tally t;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto& [ex, p] = suite[i];
    const std::string id = "instance " + std::to_string(i);
    const Decomposition d = weak_decomposition(ex, p);
    const ProductSpace space = ProductSpace::of(ex);
    const Matrix payoff = p.utility() * d.strategy->table().transpose();
    double violation = 0.0;
    for (Index cell = 0; cell < space.num_cells(); ++cell) {
      for (Index s = 0; s < p.num_states(); ++s) {
        double total = 0.0;
        for (std::size_t j = 0; j < ex.size(); ++j) {
          total += d.potentials[j](s, space.coordinate(cell, static_cast<Index>(j)));
        }
        violation = std::max(violation, total - payoff(s, cell));
      }
    }
    t.expect(violation <= 1e-8, id + " pointwise violation " + std::to_string(violation));

    const double v = robust_value(ex, p);
    double best_sum = 0.0;
    double robust_sum = 0.0;
    for (std::size_t j = 0; j < ex.size(); ++j) {
      best_sum += best_single(ex, d.potentials[j]);
      const DecisionProblem sub =
          DecisionProblem::from_weighted(p.states(), ex[j].signals(), d.potentials[j]);
      robust_sum += robust_value(ex, sub);
    }
    t.near(best_sum, v, 1e-6, id + " decomposition identity");
    t.expect(v >= robust_sum - 1e-6, id + " subproblem values exceed the whole");
  }
  detail = t.summary();
  return t.ok();
}

bool oracle_agreement(const std::vector<const std::vector<Case>*>& suites, std::string& detail) {
  Tally t;
  int skipped = 0;
  std::uint64_t seed = 77;
  for (const auto* suite : suites) {
    for (const auto& [ex, p] : *suite) {
      const Index cells = ProductSpace::of(ex).num_cells();
      if (static_cast<std::size_t>(cells) > kLpCellLimit) {
        ++skipped;
        continue;
      }
      const std::string id = "seed " + std::to_string(seed);
      const double v = worst_case_joint(ex, p).value;
      t.near(oracle_value(ex, p), v, 1e-6, id + " max form");
      t.expect(deterministic_bound(ex, p, seed) <= v + 1e-6, id + " lower bound");
      t.expect(sampled_coupling_bound(ex, p, 200, seed) >= v - 1e-6, id + " upper bound");
      ++seed;
    }
  }
  detail = t.summary() + ", " + std::to_string(skipped) + " beyond the LP cell limit";
  return t.ok();
}

bool corollaries(const std::vector<Case>& suite, std::string& detail) {
  Tally t;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto& [ex, p] = suite[i];
    const std::string id = "instance " + std::to_string(i);
    for (Index j = 0; j < static_cast<Index>(ex.size()); ++j) {
      const Contribution c = marginal_contribution(j, ex, p);
      t.expect((std::abs(c.value) <= 1e-6) == c.wins.empty(),
               id + " source " + std::to_string(j) + " contribution " + std::to_string(c.value));
    }
    const std::vector<Index> support = select_support(ex, p);
    const std::size_t actions = undominated_pure_actions(p.utility()).size();
    t.expect(support.size() <= std::max<std::size_t>(actions, 2) - 1, id + " support size");
    if (actions == 2) t.expect(support.size() == 1, id + " binary-action support");
    std::vector<Experiment> kept;
    for (Index j : support) kept.push_back(ex[j]);
    t.near(robust_value(kept, p), robust_value(ex, p), 1e-6, id + " support value");
  }
  detail = t.summary();
  return t.ok();
}

bool asymptotics(std::string& detail) {
  Tally t;
  const Experiment sym = symmetric_binary(0.9);
  const double c = chernoff_index(sym);
  t.near(c, grid_chernoff(sym), 1e-4, "grid oracle");
  t.near(c, 0.5108, 1e-4, "reference index");
  const auto start = std::chrono::steady_clock::now();
  const std::vector<Experiment> ex{symmetric_binary(0.9, "P1"), symmetric_binary(0.7, "P2")};
  const DecisionProblem p = portfolio_problem();
  const auto t_star = dominance_threshold(ex, p, 32);
  t.expect(t_star.has_value() && *t_star <= 16,
           "threshold " + (t_star ? std::to_string(*t_star) : std::string("none")));
  if (t_star) {
    for (const SweepRow& row : power_sweep(ex, p, 32)) {
      if (row.t >= *t_star) {
        t.near(row.joint_value, row.single_values[0], 1e-6, "t = " + std::to_string(row.t));
      }
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  t.expect(seconds <= 60.0, "runtime " + std::to_string(seconds) + " s");
  detail = t.summary() + (t_star ? ", t* = " + std::to_string(*t_star) : "");
  return t.ok();
}

struct CliRun {
  int code;
  std::string out;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "robust-fusion");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str()};
}

bool cli_round_trip(std::string& detail) {
  Tally t;
  const std::string fixtures = FIXTURE_DIR;
  for (const char* name : {"portfolio.json", "three-state.json", "example2.json",
                           "covid-binary.json"}) {
    const std::string path = fixtures + "/" + name;
    const std::vector<std::vector<std::string>> commands{
        {"value", path}, {"strategy", path}, {"decompose", path},
        {"--seed", "5", "check", path}, {"sweep", path, "--t-max", "8"}};
    for (auto args : commands) {
      args.insert(args.begin(), {"--format", "machine"});
      const CliRun a = cli(args);
      const CliRun b = cli(args);
      const std::string id = std::string(name) + " " + args[2];
      t.expect(a.code == 0, id + " exit " + std::to_string(a.code));
      t.expect(a.out == b.out && !a.out.empty(), id + " output differs between runs");
    }
  }
  const std::string data = DATA_DIR;
  const std::vector<std::pair<std::string, int>> corrupted{
      {"malformed.json", kExitParse},       {"unknown-key.json", kExitParse},
      {"bad-fraction.json", kExitParse},    {"non-stochastic.json", kExitValidation},
      {"ragged.json", kExitValidation},     {"bad-prior.json", kExitValidation},
      {"state-mismatch.json", kExitValidation}};
  for (const auto& [name, code] : corrupted) {
    const int got = cli({"value", data + "/" + name}).code;
    t.expect(got == code, name + " exit " + std::to_string(got));
  }
  detail = t.summary();
  return t.ok();
}

}  // namespace
}  // namespace robust_fusion

int main() {
  using namespace robust_fusion;
  const auto suite3 = binary_action_suite();
  const auto suite4 = supremum_suite();
  const auto suite5 = canonical_suite();
  const auto suite6 = many_state_suite();

  const std::vector<std::pair<std::string, std::function<bool(std::string&)>>> criteria{
      {"portfolio reproduction", portfolio_reproduction},
      {"three-state reproduction", three_state_reproduction},
      {"binary-action suite", [&](std::string& d) { return binary_action_suite_check(suite3, d); }},
      {"supremum agreement", [&](std::string& d) { return supremum_suite_check(suite4, d); }},
      {"canonical decomposition suite",
       [&](std::string& d) { return canonical_suite_check(suite5, d); }},
      {"weak decomposition suite", [&](std::string& d) { return many_state_suite_check(suite6, d); }},
      {"minimax and oracle agreement",
       [&](std::string& d) { return oracle_agreement({&suite3, &suite4, &suite5, &suite6}, d); }},
      {"contribution and support", [&](std::string& d) { return corollaries(suite5, d); }},
      {"asymptotics", asymptotics},
      {"CLI round trip", cli_round_trip},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = criteria[i].second(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
              << "): " << detail << " [" << std::fixed << std::setprecision(2) << seconds
              << " s]\n";
    std::cout.unsetf(std::ios::fixed);
    if (!ok) ++failed;
  }
  return failed == 0 ? 0 : 1;
}

#include "robust_fusion/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "robust_fusion/asymptotics.hpp"
#include "robust_fusion/decompose.hpp"
#include "robust_fusion/io.hpp"
#include "robust_fusion/oracle.hpp"
#include "robust_fusion/robust.hpp"

namespace robust_fusion {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

struct Settings {
  double tolerance = kValueTolerance;
  std::size_t cap = kDefaultCap;
  std::string format = "text";
  std::uint64_t seed = 0;
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse_error:
      return kExitParse;
    case ErrorKind::dimension_mismatch:
    case ErrorKind::non_stochastic_row:
    case ErrorKind::bad_prior:
    case ErrorKind::empty_input:
    case ErrorKind::state_mismatch:
    case ErrorKind::invalid_argument:
      return kExitValidation;
    case ErrorKind::instance_too_large:
    case ErrorKind::t_overflow:
      return kExitTooLarge;
    case ErrorKind::numerical_failure:
      return kExitNumerical;
    case ErrorKind::not_binary_state:
    case ErrorKind::no_strict_leader:
    case ErrorKind::target_outside_polyhedron:
      return kExitPrecondition;
  }
  return kExitInternal;
}

std::string fixed(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(6) << v;
  return out.str();
}

std::string full(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r).transpose()));
  return out;
}

std::string cell_action(const Strategy& strategy, const DecisionProblem& problem, Index cell) {
  std::string text;
  for (Index a = 0; a < strategy.num_actions(); ++a) {
    const double w = strategy.table()(cell, a);
    if (w <= 1e-9) continue;
    if (w >= 1.0 - 1e-9) return problem.actions()[a];
    text += (text.empty() ? "" : " + ") + fixed(w) + " " + problem.actions()[a];
  }
  return text;
}

Index best_index(const std::vector<Experiment>& experiments, const Matrix& utility,
                 double* value) {
  Index best = 0;
  double best_value = bayes_value(experiments[0].kernel(), utility);
  for (std::size_t j = 1; j < experiments.size(); ++j) {
    const double v = bayes_value(experiments[j].kernel(), utility);
    if (v > best_value + 1e-12) best = static_cast<Index>(j), best_value = v;
  }
  if (value) *value = best_value;
  return best;
}

json cmd_value(const Instance& inst, const Settings& s, std::ostream& text) {
  const double v = robust_value(inst.experiments, inst.problem, s.cap);
  const SourceChoice best = best_single_source(inst.experiments, inst.problem);
  json report{{"value", v},
              {"best_single", {{"index", best.index},
                               {"name", inst.experiments[best.index].name()},
                               {"value", best.value}}},
              {"gap", v - best.value}};
  json singles = json::array();
  for (const Experiment& e : inst.experiments) {
    singles.push_back({{"name", e.name()}, {"value", bayes_value(e, inst.problem)}});
  }
  report["single_values"] = singles;

  text << "robust value        " << fixed(v) << "\n";
  text << "best single source  " << inst.experiments[best.index].name() << " ("
       << fixed(best.value) << ")\n";
  text << "gap                 " << fixed(v - best.value) << "\n";
  for (const Experiment& e : inst.experiments) {
    text << "  V(" << e.name() << ") = " << fixed(bayes_value(e, inst.problem)) << "\n";
  }
  return report;
}

json cmd_strategy(const Instance& inst, const Settings& s, std::ostream& text) {
  const RobustSolution sol = robust_strategy(inst.experiments, inst.problem, s.cap);
  const ProductSpace& space = sol.strategy.space();
  json table = json::array();
  json used = json::array();
  for (Index j : sol.strategy.sources_used()) used.push_back(inst.experiments[j].name());

  text << "method        " << to_string(sol.method) << "\n";
  text << "value         " << fixed(sol.value) << "\n";
  text << "certificate   " << fixed(sol.certificate_value) << "\n";
  text << "sources used  " << (used.empty() ? "none" : "");
  for (std::size_t i = 0; i < used.size(); ++i) {
    text << (i ? ", " : "") << used[i].get<std::string>();
  }
  text << "\n\n";
  for (Index cell = 0; cell < space.num_cells(); ++cell) {
    const std::string label = composite_label(inst.experiments, space.decode(cell));
    json mixture = json::object();
    for (Index a = 0; a < sol.strategy.num_actions(); ++a) {
      const double w = sol.strategy.table()(cell, a);
      if (w > 1e-9) mixture[inst.problem.actions()[a]] = w;
    }
    table.push_back({{"signal", label}, {"mixture", mixture}});
    text << "  " << label << " -> " << cell_action(sol.strategy, inst.problem, cell) << "\n";
  }
  return json{{"method", to_string(sol.method)},
              {"value", sol.value},
              {"certificate_value", sol.certificate_value},
              {"certificate_gap", std::abs(sol.value - sol.certificate_value)},
              {"sources_used", used},
              {"table", table}};
}

json cmd_decompose(const Instance& inst, const Settings& s, const std::string& mode,
                   std::ostream& text) {
  const auto& ex = inst.experiments;
  const bool canonical = mode == "canonical" || (mode == "auto" && inst.problem.num_states() == 2);
  if (canonical) {
    const Decomposition dec = canonical_decomposition(inst.problem);
    json subs = json::array();
    double value = dec.normalized->offset.sum();
    text << "canonical decomposition, offset (" << fixed(dec.normalized->offset(0)) << ", "
         << fixed(dec.normalized->offset(1)) << ")\n";
    for (std::size_t l = 0; l < dec.subproblems.size(); ++l) {
      const Subproblem& sub = dec.subproblems[l];
      double best_value = 0.0;
      const Index best = best_index(ex, sub.utility, &best_value);
      value += best_value;
      const Vector inc = dec.increments.col(static_cast<Index>(l));
      subs.push_back({{"actions", sub.actions},
                      {"increment", vector_json(inc)},
                      {"best_source", ex[best].name()},
                      {"best_value", best_value}});
      text << "  " << l + 1 << ": " << sub.actions[0] << " -> " << sub.actions[1]
           << "  increment (" << fixed(inc(0)) << ", " << fixed(inc(1)) << ")  best source "
           << ex[best].name() << " (" << fixed(best_value) << ")\n";
    }
    text << "value " << fixed(value) << "\n";
    return json{{"mode", "canonical"},
                {"offset", vector_json(dec.normalized->offset)},
                {"subproblems", subs},
                {"value", value}};
  }
  const Decomposition dec =
      weak_decomposition(ex, inst.problem, std::min(s.cap, kLpCellLimit));
  json subs = json::array();
  text << "weak decomposition, value " << fixed(dec.value) << "\n";
  for (std::size_t j = 0; j < dec.potentials.size(); ++j) {
    double best_value = 0.0;
    const Index best = best_index(ex, dec.potentials[j], &best_value);
    subs.push_back({{"source", ex[j].name()},
                    {"potentials", matrix_json(dec.potentials[j])},
                    {"attained", (ex[j].kernel().array() * dec.potentials[j].array()).sum()},
                    {"best_source", ex[best].name()},
                    {"best_value", best_value}});
    text << "  " << ex[j].name() << ": best source " << ex[best].name() << " ("
         << fixed(best_value) << ")\n";
    for (Index st = 0; st < dec.potentials[j].rows(); ++st) {
      text << "    " << inst.problem.states()[st] << ":";
      for (Index y = 0; y < dec.potentials[j].cols(); ++y) {
        text << " " << fixed(dec.potentials[j](st, y));
      }
      text << "\n";
    }
  }
  return json{{"mode", "weak"}, {"subproblems", subs}, {"value", dec.value}};
}

json cmd_sweep(const Instance& inst, const Settings& s, int t_max, const std::string& out_path,
               std::ostream& text) {
  const auto rows = power_sweep(inst.experiments, inst.problem, t_max, s.cap);
  std::optional<int> t_star;
  std::string leader_note;
  try {
    t_star = dominance_threshold(inst.experiments, inst.problem, t_max, s.cap);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::no_strict_leader && e.kind() != ErrorKind::not_binary_state) throw;
    leader_note = e.what();
  }

  std::ostringstream csv;
  csv << "t,V_joint";
  for (std::size_t j = 0; j < inst.experiments.size(); ++j) csv << ",V_" << j + 1;
  csv << "\n";
  json table = json::array();
  for (const SweepRow& row : rows) {
    csv << row.t << "," << full(row.joint_value);
    for (double v : row.single_values) csv << "," << full(v);
    csv << "\n";
    table.push_back({{"t", row.t}, {"V_joint", row.joint_value}, {"V", row.single_values}});
  }
  if (!out_path.empty()) {
    std::ofstream file(out_path, std::ios::binary);
    if (!file) throw Error(ErrorKind::invalid_argument, "cannot write '" + out_path + "'");
    file << csv.str();
    text << "wrote " << rows.size() << " rows to " << out_path << "\n";
  } else {
    text << csv.str();
  }
  if (t_star) {
    text << "t* = " << *t_star << "\n";
  } else {
    text << "t* not found" << (leader_note.empty() ? " up to t = " + std::to_string(t_max) : "")
         << (leader_note.empty() ? "" : ": " + leader_note) << "\n";
  }
  json report{{"t_max", t_max}, {"rows", table}};
  report["t_star"] = t_star ? json(*t_star) : json(nullptr);
  if (!leader_note.empty()) report["note"] = leader_note;
  if (!out_path.empty()) report["csv"] = out_path;
  return report;
}

json cmd_check(const Instance& inst, const Settings& s, std::ostream& text, bool* pass) {
  const OracleReport r = run_oracles(inst.experiments, inst.problem, s.seed, inst.digest,
                                     s.tolerance);
  *pass = r.pass;
  text << "main value     " << fixed(r.main_value) << "\n";
  text << "oracle value   " << (std::isnan(r.oracle_value) ? "skipped" : fixed(r.oracle_value))
       << "\n";
  text << "gap            " << (std::isnan(r.gap) ? "n/a" : full(r.gap)) << "\n";
  text << "lower bound    " << fixed(r.lower_bound) << "\n";
  text << "upper bound    " << fixed(r.upper_bound) << "\n";
  text << (r.pass ? "PASS" : "FAIL") << "\n";
  auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return json{{"instance_id", r.instance_id},
              {"main_value", r.main_value},
              {"oracle_value", finite_or_null(r.oracle_value)},
              {"gap", finite_or_null(r.gap)},
              {"lower_bound", finite_or_null(r.lower_bound)},
              {"upper_bound", r.upper_bound},
              {"seed", s.seed},
              {"pass", r.pass}};
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Settings settings;
  if (const char* env = std::getenv("ROBUST_FUSION_CAP")) {
    try {
      settings.cap = static_cast<std::size_t>(std::stoull(env));
    } catch (const std::exception&) {
      err << "error: ROBUST_FUSION_CAP must be a positive integer\n";
      return kExitUsage;
    }
  }

  CLI::App app{"Robust combination of information sources", "robust-fusion"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--tolerance", settings.tolerance, "Value comparison tolerance")
      ->check(CLI::PositiveNumber);
  app.add_option("--cap", settings.cap, "Largest product signal space")
      ->check(CLI::PositiveNumber);
  app.add_option("--format", settings.format, "Report format")
      ->check(CLI::IsMember({"text", "machine"}));
  app.add_option("--seed", settings.seed, "Seed for sampled checks");

  std::string path;
  auto add_command = [&](const std::string& name, const std::string& help) {
    CLI::App* cmd = app.add_subcommand(name, help);
    cmd->add_option("instance", path, "Instance JSON file")->required();
    return cmd;
  };
  CLI::App* value = add_command("value", "Robust value and the best single source");
  CLI::App* strategy = add_command("strategy", "Robustly optimal strategy table");
  CLI::App* decompose = add_command("decompose", "Canonical or weak decomposition");
  std::string mode = "auto";
  decompose->add_option("--mode", mode, "canonical, weak or auto")
      ->check(CLI::IsMember({"auto", "canonical", "weak"}));
  CLI::App* sweep = add_command("sweep", "Values of i.i.d. powers for t = 1..t-max");
  int t_max = 64;
  std::string out_path;
  sweep->add_option("--t-max", t_max, "Largest number of draws")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out_path, "CSV output file");
  CLI::App* check = add_command("check", "Cross-check against the oracles");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream help_out, help_err;
    const int code = app.exit(e, help_out, help_err);
    out << help_out.str();
    err << help_err.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  std::ostringstream text;
  int code = kExitOk;
  try {
    const Instance inst = load_instance(path);
    json report;
    std::string command;
    if (value->parsed()) {
      command = "value";
      report = cmd_value(inst, settings, text);
    } else if (strategy->parsed()) {
      command = "strategy";
      report = cmd_strategy(inst, settings, text);
    } else if (decompose->parsed()) {
      command = "decompose";
      report = cmd_decompose(inst, settings, mode, text);
    } else if (sweep->parsed()) {
      command = "sweep";
      report = cmd_sweep(inst, settings, t_max, out_path, text);
    } else if (check->parsed()) {
      command = "check";
      bool pass = false;
      report = cmd_check(inst, settings, text, &pass);
      if (!pass) code = kExitCheckFailed;
    }
    if (settings.format == "machine") {
      report["command"] = command;
      report["instance"] = {{"path", path}, {"digest", inst.digest}};
      report["version"] = kVersion;
      out << report.dump(2) << "\n";
    } else {
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      out << text.str() << "\n(" << std::fixed << std::setprecision(3) << seconds << " s)\n";
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return code;
}

}  // namespace robust_fusion

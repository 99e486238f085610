#include "robust_fusion/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace robust_fusion {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::parse_error, where + ": " + what);
}

void check_keys(const json& object, const std::string& where,
                const std::set<std::string>& required, const std::set<std::string>& optional) {
  if (!object.is_object()) fail(where, "expected an object");
  for (const auto& item : object.items()) {
    if (!required.count(item.key()) && !optional.count(item.key())) {
      fail(where, "unknown key '" + item.key() + "'");
    }
  }
  for (const std::string& key : required) {
    if (!object.contains(key)) fail(where, "missing key '" + key + "'");
  }
}

std::vector<std::string> string_list(const json& node, const std::string& where) {
  if (!node.is_array() || node.empty()) fail(where, "expected a nonempty array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_string()) fail(where + "/" + std::to_string(i), "expected a string");
    out.push_back(node[i].get<std::string>());
  }
  return out;
}

double number(const json& node, const std::string& where) {
  if (node.is_number()) return node.get<double>();
  if (node.is_string()) {
    try {
      return parse_fraction(node.get<std::string>());
    } catch (const Error& e) {
      const std::string message = e.what();
      fail(where, message.substr(message.find(": ") + 2));
    }
  }
  fail(where, "expected a number or a fraction string");
}

Vector vector_of(const json& node, const std::string& where) {
  if (!node.is_array()) fail(where, "expected an array");
  Vector out(static_cast<Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) {
    out(static_cast<Index>(i)) = number(node[i], where + "/" + std::to_string(i));
  }
  return out;
}

Matrix matrix_of(const json& node, const std::string& where) {
  if (!node.is_array() || node.empty()) fail(where, "expected a nonempty array of rows");
  const std::size_t cols = node[0].is_array() ? node[0].size() : 0;
  Matrix out(static_cast<Index>(node.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < node.size(); ++r) {
    const std::string row_where = where + "/" + std::to_string(r);
    if (!node[r].is_array()) fail(row_where, "expected a row array");
    if (node[r].size() != cols) {
      throw Error(ErrorKind::dimension_mismatch,
                  row_where + ": row has " + std::to_string(node[r].size()) +
                      " entries, expected " + std::to_string(cols));
    }
    out.row(static_cast<Index>(r)) = vector_of(node[r], row_where).transpose();
  }
  return out;
}

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

template <typename T>
bool parse_int(std::string_view s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

double parse_fraction(const std::string& text) {
  const std::size_t slash = text.find('/');
  if (slash == std::string::npos) {
    std::istringstream in(text);
    double v = 0.0;
    in >> v;
    if (!in || !in.eof() || !std::isfinite(v)) {
      throw Error(ErrorKind::parse_error, "'" + text + "' is not a number");
    }
    return v;
  }
  long long num = 0, den = 0;
  const std::string_view view(text);
  if (!parse_int(view.substr(0, slash), num) || !parse_int(view.substr(slash + 1), den)) {
    throw Error(ErrorKind::parse_error, "'" + text + "' is not a fraction of integers");
  }
  if (den <= 0) throw Error(ErrorKind::parse_error, "'" + text + "' has a nonpositive denominator");
  return static_cast<double>(num) / static_cast<double>(den);
}

Instance parse_instance(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse_error,
                "malformed JSON at " + line_column(text, e.byte) + ": " + e.what());
  }
  check_keys(doc, "/", {"problem", "experiments"}, {"description"});

  const json& p = doc["problem"];
  check_keys(p, "/problem", {"states", "actions", "utility"}, {"prior"});
  std::vector<std::string> states = string_list(p["states"], "/problem/states");
  std::vector<std::string> actions = string_list(p["actions"], "/problem/actions");
  const Index n_states = static_cast<Index>(states.size());
  Vector prior = p.contains("prior")
                     ? vector_of(p["prior"], "/problem/prior")
                     : Vector::Constant(n_states, 1.0 / static_cast<double>(n_states));
  Matrix utility = matrix_of(p["utility"], "/problem/utility");
  DecisionProblem problem(std::move(states), std::move(prior), std::move(actions),
                          std::move(utility));

  const json& list = doc["experiments"];
  if (!list.is_array() || list.empty()) fail("/experiments", "expected a nonempty array");
  std::vector<Experiment> experiments;
  for (std::size_t j = 0; j < list.size(); ++j) {
    const std::string where = "/experiments/" + std::to_string(j);
    check_keys(list[j], where, {"name", "signals", "kernel"}, {});
    if (!list[j]["name"].is_string()) fail(where + "/name", "expected a string");
    experiments.emplace_back(list[j]["name"].get<std::string>(),
                             string_list(list[j]["signals"], where + "/signals"),
                             matrix_of(list[j]["kernel"], where + "/kernel"));
  }
  validate_instance(problem, experiments);

  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a(doc.dump())));
  return Instance{std::move(problem), std::move(experiments), hex};
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::parse_error, "cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_instance(buffer.str());
}

}  // namespace robust_fusion

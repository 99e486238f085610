#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace robust_fusion {

enum class ErrorKind {
  dimension_mismatch,
  non_stochastic_row,
  bad_prior,
  not_binary_state,
  empty_input,
  state_mismatch,
  instance_too_large,
  numerical_failure,
  target_outside_polyhedron,
  no_strict_leader,
  t_overflow,
  parse_error,
  invalid_argument,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so callers (the CLI in
// particular) can map it to a stable exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension_mismatch: return "dimension-mismatch";
    case ErrorKind::non_stochastic_row: return "non-stochastic-row";
    case ErrorKind::bad_prior: return "bad-prior";
    case ErrorKind::not_binary_state: return "not-binary-state";
    case ErrorKind::empty_input: return "empty-input";
    case ErrorKind::state_mismatch: return "state-mismatch";
    case ErrorKind::instance_too_large: return "instance-too-large";
    case ErrorKind::numerical_failure: return "numerical-failure";
    case ErrorKind::target_outside_polyhedron: return "target-outside-polyhedron";
    case ErrorKind::no_strict_leader: return "no-strict-leader";
    case ErrorKind::t_overflow: return "t-overflow";
    case ErrorKind::parse_error: return "parse-error";
    case ErrorKind::invalid_argument: return "invalid-argument";
  }
  return "unknown";
}

}  // namespace robust_fusion

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "robust_fusion/core.hpp"

namespace robust_fusion {

struct Instance {
  DecisionProblem problem;
  std::vector<Experiment> experiments;
  // FNV-1a of the instance re-serialized in canonical form.
  std::string digest;
};

// Instance JSON:
//   {
//     "description": "...",                      (optional)
//     "problem": {
//       "states": [...], "actions": [...],
//       "prior": [...],                          (optional, uniform by default)
//       "utility": [[...], ...]                  (states x actions, raw)
//     },
//     "experiments": [ {"name": "...", "signals": [...], "kernel": [[...], ...]} ]
//   }
// Numbers may be JSON numbers or strings "a/b". Unknown keys are rejected.
Instance parse_instance(std::string_view text);
Instance load_instance(const std::string& path);

std::uint64_t fnv1a(std::string_view bytes);

// Parses "a/b", "a" or a decimal string; throws parse_error otherwise.
double parse_fraction(const std::string& text);

}  // namespace robust_fusion

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "horizon/plan.hpp"

namespace horizon {

enum class MatchMode { kExactSet, kNumeric, kEntityIdOrName };

std::string_view to_string(MatchMode mode);
std::optional<MatchMode> parse_match_mode(std::string_view text);

struct Task {
  std::string id;
  std::string question;
  std::vector<std::string> gold_answers;
  MatchMode match = MatchMode::kExactSet;
  Plan gold_plan;  // may end with Finish
  std::string dataset;
  bool has_bridge = false;
  bool has_comparison = false;
  std::optional<KoplProgram> program;  // KQA Pro style program, when available
};

// Gold steps without a trailing Finish.
std::vector<ToolCall> gold_tool_steps(const Plan& plan);

}  // namespace horizon

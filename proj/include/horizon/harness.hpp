#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "horizon/environment.hpp"
#include "horizon/plan.hpp"
#include "horizon/policies.hpp"
#include "horizon/prompts.hpp"
#include "horizon/task.hpp"

namespace horizon {

struct Budget {
  std::size_t max_tool_calls = 30;
  std::size_t max_replans = 8;
  std::size_t max_format_retries = 8;
};

enum class TraceStatus { kAnswered, kNoAnswer, kBudgetFailed, kFormatFailed, kReplanFailed };

std::string_view to_string(TraceStatus status);
std::optional<TraceStatus> parse_trace_status(std::string_view text);

// One policy call, including calls whose reply failed to parse.
struct Invocation {
  PolicyMode mode = PolicyMode::kShNextStep;
  std::size_t start_index = 0;
  std::size_t history_size = 0;
  std::size_t message_count = 0;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  std::string reply;
  std::string format_error;  // empty when the reply parsed
};

struct StepRecord {
  HistoryEntry entry;
  std::optional<FailureKind> failure;
  std::size_t invocation = 0;  // the invocation that proposed this step
};

struct Trace {
  std::string question_id;
  std::string question;
  Horizon horizon = Horizon::kSh;
  std::vector<StepRecord> steps;  // steps[i].entry.index == i
  std::vector<Invocation> invocations;
  TraceStatus status = TraceStatus::kNoAnswer;
  std::optional<std::string> answer;
  std::size_t replans = 0;  // SH: failures fed back; FH: replanning invocations
  std::size_t format_retries = 0;
  // History handed to each fh-replan invocation, in order.
  std::vector<std::vector<HistoryEntry>> replan_histories;

  std::size_t tool_calls() const { return steps.size(); }
  std::vector<HistoryEntry> history() const;
};

struct TokenStats {
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  std::size_t invocations = 0;

  bool operator==(const TokenStats&) const = default;
};

TokenStats account_tokens(const Trace& trace);

RepetitionReport trace_repetition(const Trace& trace);

// Execution graph of the calls a trace executed (edges from `$i` references).
ExecutionGraph executed_graph(const Trace& trace);

struct RunContext {
  const Environment& env;
  const PromptBuilder& prompts;
  const Tokenizer& tokenizer;
  Budget budget;
};

// Seed passed to the environment for step `index` of a trace.
std::uint64_t step_seed(std::uint64_t trace_seed, std::size_t index);

// Single-step horizon: one policy call before every executed step. A reply is
// one step, one step followed by Finish, or Finish alone.
Trace run_sh(const Task& task, const Policy& policy, const RunContext& ctx, std::uint64_t seed);

// Full horizon: one plan upfront, executed in order; the first failure triggers
// an append-only continuation from the next free index.
Trace run_fh(const Task& task, const Policy& policy, const RunContext& ctx, std::uint64_t seed);

Trace run_trace(Horizon horizon, const Task& task, const Policy& policy, const RunContext& ctx, std::uint64_t seed);

}  // namespace horizon

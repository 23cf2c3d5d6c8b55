#include "horizon/harness.hpp"

#include <utility>

#include "horizon/text.hpp"

namespace horizon {

std::string_view to_string(TraceStatus status) {
  switch (status) {
    case TraceStatus::kAnswered:
      return "answered";
    case TraceStatus::kNoAnswer:
      return "no_answer";
    case TraceStatus::kBudgetFailed:
      return "budget_failed";
    case TraceStatus::kFormatFailed:
      return "format_failed";
    case TraceStatus::kReplanFailed:
      return "replan_failed";
  }
  return "unknown";
}

std::optional<TraceStatus> parse_trace_status(std::string_view text) {
  for (auto s : {TraceStatus::kAnswered, TraceStatus::kNoAnswer, TraceStatus::kBudgetFailed,
                 TraceStatus::kFormatFailed, TraceStatus::kReplanFailed}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::vector<HistoryEntry> Trace::history() const {
  std::vector<HistoryEntry> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.entry);
  return out;
}

TokenStats account_tokens(const Trace& trace) {
  TokenStats stats;
  for (const auto& inv : trace.invocations) {
    stats.prompt_tokens += inv.prompt_tokens;
    stats.completion_tokens += inv.completion_tokens;
    ++stats.invocations;
  }
  return stats;
}

RepetitionReport trace_repetition(const Trace& trace) {
  std::vector<ExecutedCall> calls;
  for (const auto& s : trace.steps) calls.push_back({s.entry.index, s.entry.call});
  return detect_repetition(calls, [&](std::size_t i) {
    return i < trace.steps.size() ? trace.steps[i].entry.observation : "$" + std::to_string(i);
  });
}

ExecutionGraph executed_graph(const Trace& trace) {
  std::vector<std::vector<std::size_t>> deps;
  for (const auto& s : trace.steps) deps.push_back(s.entry.call.references());
  return ExecutionGraph::from_dependencies(deps);
}

std::uint64_t step_seed(std::uint64_t trace_seed, std::size_t index) {
  return mix64(trace_seed ^ mix64(static_cast<std::uint64_t>(index) + 0x51edULL));
}

namespace {

class Driver {
 public:
  Driver(const Task& task, const Policy& policy, const RunContext& ctx, std::uint64_t seed, Horizon horizon)
      : task_(task), policy_(policy), ctx_(ctx), seed_(seed), catalog_(ctx.env.catalog().with_finish()) {
    trace_.question_id = task.id;
    trace_.question = task.question;
    trace_.horizon = horizon;
  }

  Trace run_sh() {
    const auto system = ctx_.prompts.system_prompt(Horizon::kSh, task_.question);
    while (true) {
      if (trace_.steps.size() >= ctx_.budget.max_tool_calls) {
        trace_.status = TraceStatus::kBudgetFailed;
        break;
      }
      std::vector<Message> messages{{"system", system}, {"user", PromptBuilder::question_message(task_.question)}};
      for (const auto& s : trace_.steps) {
        messages.push_back({"assistant", to_wire(std::span<const ToolCall>(&s.entry.call, 1))});
        messages.push_back({"user", PromptBuilder::observation_message(s.entry)});
      }
      auto reply = ask(PolicyMode::kShNextStep, messages);
      if (!reply) break;
      const auto& plan = reply->first;
      if (is_finish(plan.steps.front())) {
        finish(plan.steps.front());
        break;
      }
      if (!execute(plan.steps.front())) {
        if (trace_.replans >= ctx_.budget.max_replans) {
          trace_.status = TraceStatus::kReplanFailed;
          break;
        }
        ++trace_.replans;
        continue;
      }
      if (plan.steps.size() == 2) {
        finish(plan.steps[1]);
        break;
      }
    }
    return std::move(trace_);
  }

  Trace run_fh() {
    std::vector<Message> messages{{"system", ctx_.prompts.system_prompt(Horizon::kFh, task_.question)},
                                  {"user", PromptBuilder::question_message(task_.question)}};
    auto reply = ask(PolicyMode::kFhInitial, messages);
    if (!reply) return std::move(trace_);
    messages.push_back({"assistant", reply->second});
    Plan plan = std::move(reply->first);
    std::size_t pos = 0;
    while (true) {
      if (pos == plan.steps.size()) {
        // Plan ran out without Finish: the last output is the answer.
        const auto last = outputs_.size();
        if (last && outputs_.back().ok) {
          trace_.answer = binding_text(ctx_.env, outputs_, last - 1);
          trace_.status = TraceStatus::kAnswered;
        } else {
          trace_.status = TraceStatus::kNoAnswer;
        }
        break;
      }
      const auto& step = plan.steps[pos];
      if (is_finish(step)) {
        finish(step);
        break;
      }
      if (trace_.steps.size() >= ctx_.budget.max_tool_calls) {
        trace_.status = TraceStatus::kBudgetFailed;
        break;
      }
      ++pos;
      if (execute(step)) continue;
      if (trace_.replans >= ctx_.budget.max_replans) {
        trace_.status = TraceStatus::kReplanFailed;
        break;
      }
      ++trace_.replans;
      auto history = trace_.history();
      messages.push_back({"user", PromptBuilder::replan_message(history, outputs_.size())});
      trace_.replan_histories.push_back(std::move(history));
      reply = ask(PolicyMode::kFhReplan, messages);
      if (!reply) break;
      messages.push_back({"assistant", reply->second});
      plan = std::move(reply->first);
      pos = 0;
    }
    return std::move(trace_);
  }

 private:
  // Invokes the policy, retrying on unparseable replies. Retry turns are shown
  // only to the retried invocation. Returns the plan and its reply text.
  std::optional<std::pair<Plan, std::string>> ask(PolicyMode mode, const std::vector<Message>& base) {
    const auto start = outputs_.size();
    const auto history = trace_.history();
    const auto origin = mode == PolicyMode::kFhReplan ? PlanOrigin::kContinuation : PlanOrigin::kInitial;
    std::vector<Message> messages = base;
    for (std::size_t attempt = 0;; ++attempt) {
      PolicyRequest request;
      request.question_id = task_.id;
      request.question = task_.question;
      request.mode = mode;
      request.start_index = start;
      request.history = history;
      request.messages = messages;
      request.attempt = attempt;
      request.seed = seed_;
      Invocation inv;
      inv.mode = mode;
      inv.start_index = start;
      inv.history_size = history.size();
      inv.message_count = messages.size();
      inv.prompt_tokens = count_tokens(ctx_.tokenizer, messages);
      inv.reply = policy_.respond(request);
      inv.completion_tokens = ctx_.tokenizer.count(inv.reply);
      std::string reason;
      try {
        Plan plan = parse_plan(inv.reply, catalog_, start, origin);
        if (mode == PolicyMode::kShNextStep && !sh_shape(plan)) {
          reason = "not_single_step: a reply holds one step, optionally followed by Finish";
        } else {
          auto text = inv.reply;
          trace_.invocations.push_back(std::move(inv));
          return std::make_pair(std::move(plan), std::move(text));
        }
      } catch (const PlanError& e) {
        reason = std::string(to_string(e.reason())) + ": " + e.what();
      }
      inv.format_error = reason;
      messages.push_back({"assistant", inv.reply});
      messages.push_back({"user", PromptBuilder::invalid_format_message(reason)});
      trace_.invocations.push_back(std::move(inv));
      if (trace_.format_retries >= ctx_.budget.max_format_retries) {
        trace_.status = TraceStatus::kFormatFailed;
        return std::nullopt;
      }
      ++trace_.format_retries;
    }
  }

  static bool sh_shape(const Plan& plan) {
    if (plan.steps.size() == 1) return true;
    return plan.steps.size() == 2 && !is_finish(plan.steps[0]) && is_finish(plan.steps[1]);
  }

  bool execute(const ToolCall& call) {
    const auto index = outputs_.size();
    Observation obs;
    try {
      obs = execute_step(ctx_.env, call, outputs_, step_seed(seed_, index));
    } catch (const ExecutionError& e) {
      obs = failure(fail(FailureKind::kBadReference, e.what()));
    }
    StepRecord record;
    record.entry = HistoryEntry{index, call, obs.ok, obs.text};
    if (obs.failure) record.failure = obs.failure->kind;
    record.invocation = trace_.invocations.empty() ? 0 : trace_.invocations.size() - 1;
    trace_.steps.push_back(std::move(record));
    const bool ok = obs.ok;
    outputs_.push_back(std::move(obs));
    return ok;
  }

  // Finish is terminal. An answer that cites a failed step is no answer.
  void finish(const ToolCall& call) {
    std::string text;
    if (auto it = call.args.find("answer"); it != call.args.end()) text = arg_to_wire(it->second);
    std::map<std::size_t, std::string> bound;
    for (auto index : embedded_refs(text)) {
      if (index >= outputs_.size() || !outputs_[index].ok) {
        trace_.status = TraceStatus::kNoAnswer;
        return;
      }
      bound[index] = binding_text(ctx_.env, outputs_, index);
    }
    trace_.answer = bound.empty() ? text : substitute_refs(text, bound);
    trace_.status = TraceStatus::kAnswered;
  }

  const Task& task_;
  const Policy& policy_;
  const RunContext& ctx_;
  std::uint64_t seed_;
  ToolCatalog catalog_;
  Trace trace_;
  std::vector<Observation> outputs_;
};

}  // namespace

Trace run_sh(const Task& task, const Policy& policy, const RunContext& ctx, std::uint64_t seed) {
  return Driver(task, policy, ctx, seed, Horizon::kSh).run_sh();
}

Trace run_fh(const Task& task, const Policy& policy, const RunContext& ctx, std::uint64_t seed) {
  return Driver(task, policy, ctx, seed, Horizon::kFh).run_fh();
}

Trace run_trace(Horizon horizon, const Task& task, const Policy& policy, const RunContext& ctx, std::uint64_t seed) {
  return horizon == Horizon::kSh ? run_sh(task, policy, ctx, seed) : run_fh(task, policy, ctx, seed);
}

}  // namespace horizon

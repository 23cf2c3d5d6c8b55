#include "horizon/policies.hpp"

#include <algorithm>

#include "horizon/text.hpp"

namespace horizon {
namespace {

std::uint64_t decision_key(std::uint64_t seed, std::string_view qid, std::string_view kind, std::size_t g,
                           std::size_t salt) {
  const std::string key = std::to_string(seed) + "|" + std::string(qid) + "|" + std::string(kind) + "|" +
                          std::to_string(g) + "|" + std::to_string(salt);
  return fnv1a64(key);
}

ToolCall default_finish(std::size_t steps) {
  ToolCall f;
  f.tool = std::string(kFinishTool);
  f.args["answer"] = steps ? "$" + std::to_string(steps - 1) : std::string();
  return f;
}

struct GoldParts {
  std::vector<ToolCall> steps;
  ToolCall finish;
};

GoldParts split_gold(const Plan& gold) {
  GoldParts parts;
  parts.steps = gold_tool_steps(gold);
  parts.finish = (!gold.steps.empty() && is_finish(gold.steps.back())) ? gold.steps.back()
                                                                        : default_finish(parts.steps.size());
  return parts;
}

// Walks the history and records which gold steps it realized, in order.
template <class Accepts>
std::vector<std::size_t> realized_steps(std::span<const HistoryEntry> history, std::size_t gold_size,
                                        Accepts accepts) {
  std::vector<std::size_t> realized;
  for (const auto& e : history) {
    if (realized.size() >= gold_size) break;
    if (e.ok && accepts(realized.size(), e.call, realized)) realized.push_back(e.index);
  }
  return realized;
}

}  // namespace

std::string_view to_string(PolicyMode mode) {
  switch (mode) {
    case PolicyMode::kShNextStep:
      return "sh-next-step";
    case PolicyMode::kFhInitial:
      return "fh-initial";
    case PolicyMode::kFhReplan:
      return "fh-replan";
  }
  return "unknown";
}

std::string_view to_string(Correction correction) {
  return correction == Correction::kCorrectsAfterFeedback ? "corrects-after-feedback" : "never-corrects";
}

std::optional<Correction> parse_correction(std::string_view text) {
  if (text == "corrects-after-feedback") return Correction::kCorrectsAfterFeedback;
  if (text == "never-corrects") return Correction::kNeverCorrects;
  return std::nullopt;
}

std::vector<ToolCall> gold_tool_steps(const Plan& plan) {
  std::vector<ToolCall> out;
  for (const auto& s : plan.steps) {
    if (!is_finish(s)) out.push_back(s);
  }
  return out;
}

ToolCall remap_gold_call(const ToolCall& call, const std::vector<std::size_t>& table) {
  ToolCall out = call;
  std::map<std::size_t, std::string> text_map;
  for (std::size_t g = 0; g < table.size(); ++g) text_map[g] = "$" + std::to_string(table[g]);
  for (auto& [key, value] : out.args) {
    if (auto* ref = std::get_if<StepRef>(&value)) {
      if (ref->index < table.size()) ref->index = table[ref->index];
    } else if (auto* s = std::get_if<std::string>(&value)) {
      if (!embedded_refs(*s).empty()) *s = substitute_refs(*s, text_map);
    }
  }
  return out;
}

OraclePolicy::OraclePolicy(Plan gold) : gold_(std::move(gold)) {}

std::string OraclePolicy::respond(const PolicyRequest& request) const {
  const auto parts = split_gold(gold_);
  const auto n = parts.steps.size();
  auto realized = realized_steps(request.history, n, [&](std::size_t g, const ToolCall& call, const auto& table) {
    return call == remap_gold_call(parts.steps[g], table);
  });
  const auto g0 = realized.size();
  // Unrealized gold steps land at consecutive indices from start_index.
  auto table = realized;
  for (std::size_t j = g0; j < n; ++j) table.push_back(request.start_index + (j - g0));

  std::vector<ToolCall> out;
  if (request.mode == PolicyMode::kShNextStep) {
    if (g0 < n) out.push_back(remap_gold_call(parts.steps[g0], table));
    if (g0 + 1 >= n) out.push_back(remap_gold_call(parts.finish, table));
  } else {
    for (std::size_t j = g0; j < n; ++j) out.push_back(remap_gold_call(parts.steps[j], table));
    out.push_back(remap_gold_call(parts.finish, table));
  }
  return to_wire(out);
}

std::string corrupt_term(std::string_view term, const NoiseModel& noise) {
  if (auto it = noise.synonyms.find(std::string(term)); it != noise.synonyms.end()) return it->second;
  std::string out(term);
  for (auto& c : out) {
    if (c == '_') {
      c = ' ';
    } else if (c == ' ') {
      c = '_';
    }
  }
  if (!out.empty()) {
    char& c = out.front();
    if (c >= 'a' && c <= 'z') {
      c = static_cast<char>(c - 'a' + 'A');
    } else if (c >= 'A' && c <= 'Z') {
      c = static_cast<char>(c - 'A' + 'a');
    }
  }
  return out;
}

NoisyPolicy::NoisyPolicy(Plan gold, NoiseModel noise, const ToolCatalog& catalog)
    : gold_(std::move(gold)), noise_(std::move(noise)), catalog_(catalog) {}

std::optional<ToolCall> NoisyPolicy::corrupted(std::string_view question_id, std::size_t g) const {
  const auto steps = gold_tool_steps(gold_);
  if (g >= steps.size()) return std::nullopt;
  ToolCall call = steps[g];
  bool changed = false;
  if (unit_interval(decision_key(noise_.seed, question_id, "schema", g, 0)) < noise_.schema_rate) {
    if (const auto* spec = catalog_.find(call.tool)) {
      for (const auto& p : spec->params) {
        if (!p.schema) continue;
        auto it = call.args.find(p.name);
        if (it == call.args.end()) continue;
        auto* text = std::get_if<std::string>(&it->second);
        if (!text) continue;
        auto wrong = corrupt_term(*text, noise_);
        if (wrong == *text) continue;
        *text = std::move(wrong);
        changed = true;
        break;
      }
    }
  }
  if (unit_interval(decision_key(noise_.seed, question_id, "reference", g, 0)) < noise_.reference_rate) {
    for (auto& [key, value] : call.args) {
      auto* ref = std::get_if<StepRef>(&value);
      if (!ref || ref->index == 0) continue;
      ref->index -= 1;
      changed = true;
      break;
    }
  }
  if (!changed) return std::nullopt;
  return call;
}

bool NoisyPolicy::repeats(std::string_view question_id, std::size_t g, std::size_t salt) const {
  return unit_interval(decision_key(noise_.seed, question_id, "repeat", g, salt)) < noise_.repeat_rate;
}

std::string NoisyPolicy::respond(const PolicyRequest& request) const {
  const auto parts = split_gold(gold_);
  const auto n = parts.steps.size();
  std::vector<std::optional<ToolCall>> wrong(n);
  for (std::size_t g = 0; g < n; ++g) wrong[g] = corrupted(request.question_id, g);

  auto realized = realized_steps(request.history, n, [&](std::size_t g, const ToolCall& call, const auto& table) {
    return call == remap_gold_call(parts.steps[g], table) ||
           (wrong[g] && call == remap_gold_call(*wrong[g], table));
  });
  const auto g0 = realized.size();

  // Variant of gold step g to emit: the corruption persists until the history
  // shows it failing (and the model corrects).
  auto variant = [&](std::size_t g, const std::vector<std::size_t>& table) {
    if (!wrong[g]) return remap_gold_call(parts.steps[g], table);
    auto bad = remap_gold_call(*wrong[g], table);
    if (noise_.correction == Correction::kCorrectsAfterFeedback) {
      const bool seen = std::any_of(request.history.begin(), request.history.end(),
                                    [&](const HistoryEntry& e) { return !e.ok && e.call == bad; });
      if (seen) return remap_gold_call(parts.steps[g], table);
    }
    return bad;
  };

  std::vector<ToolCall> out;
  if (request.mode == PolicyMode::kShNextStep) {
    if (!request.history.empty() && request.history.back().ok &&
        repeats(request.question_id, g0, request.history.size())) {
      out.push_back(request.history.back().call);
      return to_wire(out);
    }
    auto table = realized;
    table.push_back(request.start_index);
    if (g0 < n) out.push_back(variant(g0, table));
    if (g0 + 1 >= n) out.push_back(remap_gold_call(parts.finish, table));
    return to_wire(out);
  }

  auto table = realized;
  std::size_t next = request.start_index;
  for (std::size_t j = g0; j < n; ++j) {
    table.push_back(next);
    out.push_back(variant(j, table));
    ++next;
    if (repeats(request.question_id, j, 0)) {
      out.push_back(out.back());
      ++next;
    }
  }
  out.push_back(remap_gold_call(parts.finish, table));
  return to_wire(out);
}

ScriptedPolicy::ScriptedPolicy(std::vector<std::string> replies, std::string name)
    : replies_(std::move(replies)), name_(std::move(name)) {}

std::string ScriptedPolicy::respond(const PolicyRequest&) const {
  std::lock_guard lock(mutex_);
  if (replies_.empty()) return {};
  const auto i = std::min(next_, replies_.size() - 1);
  ++next_;
  return replies_[i];
}

std::size_t ScriptedPolicy::calls() const {
  std::lock_guard lock(mutex_);
  return next_;
}

}  // namespace horizon

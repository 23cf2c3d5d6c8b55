#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "horizon/plan.hpp"
#include "horizon/prompts.hpp"
#include "horizon/task.hpp"

namespace horizon {

enum class PolicyMode { kShNextStep, kFhInitial, kFhReplan };

std::string_view to_string(PolicyMode mode);

// Everything a policy may condition on. `messages` is the exact chat the
// harness would send to a model; `history` is the same information in
// structured form.
struct PolicyRequest {
  std::string_view question_id;
  std::string_view question;
  PolicyMode mode = PolicyMode::kShNextStep;
  std::size_t start_index = 0;
  std::span<const HistoryEntry> history;
  std::span<const Message> messages;
  std::size_t attempt = 0;  // format retries already spent on this invocation
  std::uint64_t seed = 0;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  // Returns plan wire text. Must be safe to call concurrently from different
  // traces.
  virtual std::string respond(const PolicyRequest& request) const = 0;
};

// Replays the gold plan. SH: the next gold step not yet executed successfully
// (with Finish attached to the last one). FH initial: the whole gold plan.
// FH replan: the unexecuted gold suffix, re-indexed from start_index.
class OraclePolicy final : public Policy {
 public:
  explicit OraclePolicy(Plan gold);
  std::string name() const override { return "oracle"; }
  std::string respond(const PolicyRequest& request) const override;

 private:
  Plan gold_;
};

enum class Correction { kCorrectsAfterFeedback, kNeverCorrects };

std::string_view to_string(Correction correction);
std::optional<Correction> parse_correction(std::string_view text);

struct NoiseModel {
  double schema_rate = 0.0;     // a schema-grounded argument is replaced
  double reference_rate = 0.0;  // a `$i` argument points at the wrong step
  double repeat_rate = 0.0;     // the previous call is issued again
  Correction correction = Correction::kCorrectsAfterFeedback;
  std::uint64_t seed = 0;
  // Preferred wrong terms, e.g. employee_counts -> employees. Terms without an
  // entry get a surface variant ('_' and ' ' swapped, first letter case
  // flipped).
  std::map<std::string, std::string> synonyms;
};

std::string corrupt_term(std::string_view term, const NoiseModel& noise);

// Gold steps with seeded corruption. Decisions are pure functions of
// (seed, question id, kind, gold step), so reruns are identical. Under
// kCorrectsAfterFeedback a corrupted step is emitted correctly once the
// history shows the corrupted call failing.
class NoisyPolicy final : public Policy {
 public:
  NoisyPolicy(Plan gold, NoiseModel noise, const ToolCatalog& catalog);
  std::string name() const override { return "noisy"; }
  std::string respond(const PolicyRequest& request) const override;

  // Corrupted form of gold step g under the gold indexing, or nullopt when the
  // noise model leaves it intact.
  std::optional<ToolCall> corrupted(std::string_view question_id, std::size_t g) const;
  bool repeats(std::string_view question_id, std::size_t g, std::size_t salt) const;

 private:
  Plan gold_;
  NoiseModel noise_;
  const ToolCatalog& catalog_;
};

// Returns scripted replies in order; after the last one it keeps returning it.
class ScriptedPolicy final : public Policy {
 public:
  explicit ScriptedPolicy(std::vector<std::string> replies, std::string name = "scripted");
  std::string name() const override { return name_; }
  std::string respond(const PolicyRequest& request) const override;
  std::size_t calls() const;

 private:
  std::vector<std::string> replies_;
  std::string name_;
  mutable std::mutex mutex_;
  mutable std::size_t next_ = 0;
};

class FunctionPolicy final : public Policy {
 public:
  using Fn = std::function<std::string(const PolicyRequest&)>;
  FunctionPolicy(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}
  std::string name() const override { return name_; }
  std::string respond(const PolicyRequest& request) const override { return fn_(request); }

 private:
  std::string name_;
  Fn fn_;
};

// Rewrites gold-plan references (both `$i` arguments and `$i` inside text)
// through table[g] = absolute step index of gold step g.
ToolCall remap_gold_call(const ToolCall& call, const std::vector<std::size_t>& table);

}  // namespace horizon

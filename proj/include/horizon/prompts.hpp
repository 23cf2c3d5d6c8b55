#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "horizon/grounding.hpp"
#include "horizon/plan.hpp"

namespace horizon {

enum class Horizon { kSh, kFh };

std::string_view to_string(Horizon horizon);
std::optional<Horizon> parse_horizon(std::string_view text);

struct Message {
  std::string role;  // system | user | assistant
  std::string content;

  bool operator==(const Message&) const = default;
};

// One executed step as the policy sees it.
struct HistoryEntry {
  std::size_t index = 0;
  ToolCall call;
  bool ok = false;
  std::string observation;

  bool operator==(const HistoryEntry&) const = default;
};

// Canonical text of a history; two histories are information-equivalent iff
// these strings match.
std::string serialize_history(std::span<const HistoryEntry> history);

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::string_view name() const = 0;
  virtual std::size_t count(std::string_view text) const = 0;
};

class WhitespaceTokenizer final : public Tokenizer {
 public:
  std::string_view name() const override { return "whitespace"; }
  std::size_t count(std::string_view text) const override;
};

std::unique_ptr<Tokenizer> make_tokenizer(std::string_view name);

std::size_t count_tokens(const Tokenizer& tokenizer, std::span<const Message> messages);

struct Demonstration {
  std::string question;
  std::string plan;  // wire text
};

// [{"question": ..., "plan": [...]}]
std::vector<Demonstration> load_demonstrations(std::string_view json_text);
std::vector<Demonstration> load_demonstrations_file(const std::string& path);

inline constexpr std::size_t kDemonstrationCount = 10;

// System prompt: horizon header, engine body with the tool catalog (Finish
// included) and the demonstrations nearest to the question.
class PromptBuilder {
 public:
  PromptBuilder(std::string_view engine_kind, const ToolCatalog& catalog, std::vector<Demonstration> demonstrations = {},
                std::shared_ptr<const SimilarityProvider> similarity = nullptr);

  std::string system_prompt(Horizon horizon, std::string_view question) const;
  std::vector<const Demonstration*> select_demonstrations(std::string_view question) const;

  // Opening user turn.
  static std::string question_message(std::string_view question);
  // SH: the user turn that reports one observation.
  static std::string observation_message(const HistoryEntry& entry);
  // FH: the replanning turn over the whole executed prefix.
  static std::string replan_message(std::span<const HistoryEntry> history, std::size_t start_index);
  static std::string execution_result(std::span<const HistoryEntry> history);
  static std::string invalid_format_message(std::string_view reason);

  const std::string& tool_definitions() const { return tool_definitions_; }

 private:
  std::string body_;
  std::string tool_definitions_;
  std::vector<Demonstration> demonstrations_;
  std::shared_ptr<const SimilarityProvider> similarity_;
};

// Fills {name} placeholders; unknown placeholders are left untouched.
std::string fill_template(std::string_view tmpl, std::span<const std::pair<std::string_view, std::string_view>> values);

}  // namespace horizon

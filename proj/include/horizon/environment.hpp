#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "horizon/plan.hpp"
#include "horizon/value.hpp"

namespace horizon {

// One argument after `$i` substitution. `value` is set when the argument was a
// bare reference, so engines can consume structured outputs (entity sets);
// `text` is always the rendered form. Text arguments also keep the raw
// template and the rendered outputs of the `$i` tokens it embeds.
struct ResolvedArg {
  std::string text;
  const Value* value = nullptr;
  std::string raw;
  std::map<std::size_t, std::string> embedded;
};

using ResolvedArgs = std::map<std::string, ResolvedArg, std::less<>>;

class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string_view kind() const = 0;  // "kopl", "atomic", "qa"
  virtual const ToolCatalog& catalog() const = 0;
  virtual Observation invoke(std::string_view tool, const ResolvedArgs& args, std::uint64_t seed) const = 0;
  // Text form of an output, as it appears in observations and answers.
  virtual std::string render(const Value& value) const = 0;
};

class ExecutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Builds observations with the shared text conventions.
Observation success(const Environment& env, Value value, std::string_view note = {});
Observation failure(Failure failure);

// Resolves `$i` against earlier observations (indexed by absolute step) and
// dispatches. Unknown tools and references to steps that do not exist throw
// ExecutionError; a reference to a step that failed yields a failure
// observation, since the history already carries that failure.
Observation execute_step(const Environment& env, const ToolCall& call, std::span<const Observation> bindings,
                         std::uint64_t seed);

// Rendered output of an earlier step (the observation text when it failed).
std::string binding_text(const Environment& env, std::span<const Observation> bindings, std::size_t index);

}  // namespace horizon

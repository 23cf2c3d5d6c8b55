#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "horizon/grounding.hpp"

namespace horizon {

// `$i`: the output of step i, 0-indexed over the whole trace.
struct StepRef {
  std::size_t index = 0;

  auto operator<=>(const StepRef&) const = default;
};

using ArgValue = std::variant<std::string, double, StepRef>;

std::string arg_to_wire(const ArgValue& value);

struct ToolCall {
  std::string tool;
  std::map<std::string, ArgValue> args;  // sorted keys: canonical order

  bool operator==(const ToolCall&) const = default;

  // Every step index the call depends on, including `$i` inside text args.
  std::vector<std::size_t> references() const;
};

// Pseudo-tool that ends an episode. It is never executed and never counts
// against the tool-call budget.
inline constexpr std::string_view kFinishTool = "Finish";
inline bool is_finish(const ToolCall& call) { return call.tool == kFinishTool; }

enum class ParamKind {
  kReference,  // must be "$i"
  kLiteral,    // plain value; "$i" allowed and substituted with the step output
  kText,       // free text that may embed "$i" tokens
};

struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::kLiteral;
  std::string description;
  std::optional<Namespace> schema;  // grounded against this namespace
  bool required = true;
  std::vector<std::string> choices;  // closed vocabulary when nonempty
};

struct ToolSpec {
  std::string name;
  std::string description;
  std::vector<ParamSpec> params;

  const ParamSpec* param(std::string_view name) const;
};

class ToolCatalog {
 public:
  ToolCatalog() = default;
  explicit ToolCatalog(std::vector<ToolSpec> tools);

  const ToolSpec* find(std::string_view name) const;
  std::span<const ToolSpec> tools() const { return tools_; }
  std::vector<std::string> names() const;

  // Same catalog plus the Finish pseudo-tool; this is what planners see.
  ToolCatalog with_finish() const;

  // Compact JSON list of {name, description, parameters:[{name, type, description, ...}]}.
  std::string to_json() const;

 private:
  std::vector<ToolSpec> tools_;
};

ToolSpec finish_spec();

enum class PlanOrigin { kInitial, kContinuation };

struct Plan {
  std::vector<ToolCall> steps;
  PlanOrigin origin = PlanOrigin::kInitial;
  std::size_t start_index = 0;  // absolute index of steps[0]

  bool operator==(const Plan&) const = default;
};

class PlanError : public std::runtime_error {
 public:
  enum class Reason {
    kSyntax,
    kNotAList,
    kUnknownTool,
    kUnknownParameter,
    kMissingParameter,
    kBadReference,
    kBadValue,
    kMisplacedFinish,
    kEmptyPlan,
  };

  PlanError(Reason reason, const std::string& message) : std::runtime_error(message), reason_(reason) {}
  Reason reason() const { return reason_; }

 private:
  Reason reason_;
};

std::string_view to_string(PlanError::Reason reason);

// Accepts the wire list `[{"tool":..., "args":{...}}, ...]` or the structured
// output wrapper `{"plan": [...]}`. References must point strictly before the
// referencing step's absolute index (start_index + position).
Plan parse_plan(std::string_view text, const ToolCatalog& catalog, std::size_t start_index = 0,
                PlanOrigin origin = PlanOrigin::kInitial);

std::string to_wire(const ToolCall& call);
std::string to_wire(std::span<const ToolCall> calls);
std::string to_wire(const Plan& plan);

// Exact non-negative rational, kept in lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational of(std::int64_t num, std::int64_t den);
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string to_string() const;
  Rational operator*(std::int64_t k) const { return of(num * k, den); }
  bool operator==(const Rational&) const = default;
};

class ExecutionGraph {
 public:
  ExecutionGraph() = default;
  // deps[i] lists the nodes node i consumes; each must be < i.
  static ExecutionGraph from_dependencies(const std::vector<std::vector<std::size_t>>& deps);

  std::size_t size() const { return deps_.size(); }
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }
  const std::vector<std::size_t>& dependencies(std::size_t node) const { return deps_[node]; }
  std::vector<std::size_t> sinks() const;

  // Nodes on the longest path (critical path); 0 for the empty graph.
  std::size_t depth() const;
  // |V| / depth, exact.
  Rational breadth() const;

 private:
  std::vector<std::vector<std::size_t>> deps_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;  // (from, to), sorted
};

// One node per executable step (Finish excluded); edge j -> i iff step i uses $j.
ExecutionGraph build_dag(const Plan& plan);

// A KQA Pro style program: each step names its inputs by earlier index.
struct KoplStep {
  std::string function;
  std::vector<std::string> inputs;
  std::vector<std::size_t> dependencies;
};

struct KoplProgram {
  std::vector<KoplStep> steps;
};

class ProgramError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws ProgramError unless every dependency points strictly backwards.
void validate_program(const KoplProgram& program);

// Gold execution graph: identical steps (same function, inputs and merged
// dependencies) collapse into one node; steps that do not feed the final step
// are dropped.
ExecutionGraph derive_gold_dag_kopl(const KoplProgram& program);

// The same merge applied to a gold tool-call plan.
ExecutionGraph derive_gold_dag(const Plan& plan);

KoplProgram program_from_plan(const Plan& plan);

// Executed call as seen by the repetition detector: the call plus the text of
// every referenced output, so references compare by what they resolved to.
struct ExecutedCall {
  std::size_t index = 0;
  ToolCall call;
};

struct RepetitionReport {
  bool repeated = false;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (i, j), i < j
};

// Returns the observation text of an earlier step.
using OutputResolver = std::function<std::string(std::size_t)>;

// Canonical form used for repetition checks: sorted keys, references replaced
// by the referenced observation text.
std::string canonical_call(const ToolCall& call, const OutputResolver& resolved);

RepetitionReport detect_repetition(std::span<const ExecutedCall> calls, const OutputResolver& resolved);

std::string substitute_refs(std::string_view text, const std::map<std::size_t, std::string>& outputs);
std::vector<std::size_t> embedded_refs(std::string_view text);

}  // namespace horizon

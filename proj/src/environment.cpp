#include "horizon/environment.hpp"

namespace horizon {

std::string_view to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::kEmptyResult:
      return "empty_result";
    case FailureKind::kGrounding:
      return "grounding";
    case FailureKind::kTypeMismatch:
      return "type_mismatch";
    case FailureKind::kContractViolation:
      return "contract_violation";
    case FailureKind::kUnsupported:
      return "unsupported";
    case FailureKind::kBadReference:
      return "bad_reference";
    case FailureKind::kUnknownTool:
      return "unknown_tool";
    case FailureKind::kNoAnswer:
      return "no_answer";
  }
  return "unknown";
}

Observation success(const Environment& env, Value value, std::string_view note) {
  Observation obs;
  obs.ok = true;
  obs.text = env.render(value);
  if (!note.empty()) {
    obs.text += ' ';
    obs.text += note;
  }
  obs.value = std::move(value);
  return obs;
}

Observation failure(Failure f) {
  Observation obs;
  obs.ok = false;
  obs.text = "Error: " + f.message;
  obs.failure = std::move(f);
  return obs;
}

std::string binding_text(const Environment& env, std::span<const Observation> bindings, std::size_t index) {
  if (index >= bindings.size()) return "$" + std::to_string(index);
  const auto& obs = bindings[index];
  return obs.ok && obs.value ? env.render(*obs.value) : obs.text;
}

Observation execute_step(const Environment& env, const ToolCall& call, std::span<const Observation> bindings,
                         std::uint64_t seed) {
  const auto* spec = env.catalog().find(call.tool);
  if (!spec) throw ExecutionError("unknown tool '" + call.tool + "'");

  std::optional<Failure> broken;
  auto lookup = [&](std::size_t index) -> const Observation* {
    if (index >= bindings.size()) {
      throw ExecutionError("step $" + std::to_string(index) + " has not been executed");
    }
    const auto& obs = bindings[index];
    if (!obs.ok || !obs.value) {
      if (!broken) {
        broken = fail(FailureKind::kBadReference,
                      "$" + std::to_string(index) + " refers to a step that failed, so it has no output");
      }
      return nullptr;
    }
    return &obs;
  };

  ResolvedArgs args;
  for (const auto& [key, value] : call.args) {
    ResolvedArg arg;
    if (const auto* ref = std::get_if<StepRef>(&value)) {
      if (const auto* obs = lookup(ref->index)) {
        arg.value = &*obs->value;
        arg.text = env.render(*obs->value);
      }
    } else if (const auto* text = std::get_if<std::string>(&value)) {
      for (auto index : embedded_refs(*text)) {
        if (const auto* obs = lookup(index)) arg.embedded[index] = env.render(*obs->value);
      }
      arg.raw = *text;
      arg.text = arg.embedded.empty() ? *text : substitute_refs(*text, arg.embedded);
    } else {
      arg.text = arg_to_wire(value);
    }
    args.emplace(key, std::move(arg));
  }
  if (broken) return failure(std::move(*broken));
  return env.invoke(call.tool, args, seed);
}

}  // namespace horizon

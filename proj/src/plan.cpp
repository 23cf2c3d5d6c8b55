#include "horizon/plan.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "horizon/json_io.hpp"
#include "horizon/text.hpp"
#include "horizon/typed_value.hpp"

namespace horizon {
namespace {

using Reason = PlanError::Reason;

std::optional<std::size_t> parse_ref(std::string_view text) {
  if (text.size() < 2 || text.front() != '$') return std::nullopt;
  std::size_t value = 0;
  const char* begin = text.data() + 1;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

OrderedJson arg_json(const ArgValue& value) {
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  if (const auto* r = std::get_if<StepRef>(&value)) return "$" + std::to_string(r->index);
  const double d = std::get<double>(value);
  if (std::floor(d) == d && std::fabs(d) < 9e15) return static_cast<std::int64_t>(d);
  return d;
}

OrderedJson call_json(const ToolCall& call) {
  OrderedJson args = OrderedJson::object();
  for (const auto& [key, value] : call.args) args[key] = arg_json(value);
  OrderedJson out;
  out["tool"] = call.tool;
  out["args"] = std::move(args);
  return out;
}

std::string_view kind_name(ParamKind kind) {
  switch (kind) {
    case ParamKind::kReference:
      return "reference";
    case ParamKind::kLiteral:
      return "string";
    case ParamKind::kText:
      return "text";
  }
  return "string";
}

}  // namespace

std::string arg_to_wire(const ArgValue& value) {
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  if (const auto* r = std::get_if<StepRef>(&value)) return "$" + std::to_string(r->index);
  return format_number(std::get<double>(value));
}

std::vector<std::size_t> embedded_refs(std::string_view text) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '$' || i + 1 >= text.size() || !is_digit(text[i + 1])) continue;
    std::size_t j = i + 1;
    std::size_t value = 0;
    while (j < text.size() && is_digit(text[j])) value = value * 10 + static_cast<std::size_t>(text[j++] - '0');
    out.push_back(value);
    i = j - 1;
  }
  return out;
}

std::string substitute_refs(std::string_view text, const std::map<std::size_t, std::string>& outputs) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '$' && i + 1 < text.size() && is_digit(text[i + 1])) {
      std::size_t j = i + 1;
      std::size_t value = 0;
      while (j < text.size() && is_digit(text[j])) value = value * 10 + static_cast<std::size_t>(text[j++] - '0');
      if (auto it = outputs.find(value); it != outputs.end()) {
        out += it->second;
        i = j - 1;
        continue;
      }
    }
    out.push_back(text[i]);
  }
  return out;
}

std::vector<std::size_t> ToolCall::references() const {
  std::vector<std::size_t> out;
  for (const auto& [key, value] : args) {
    if (const auto* r = std::get_if<StepRef>(&value)) {
      out.push_back(r->index);
    } else if (const auto* s = std::get_if<std::string>(&value)) {
      for (auto ref : embedded_refs(*s)) out.push_back(ref);
    }
  }
  return out;
}

const ParamSpec* ToolSpec::param(std::string_view param_name) const {
  for (const auto& p : params) {
    if (p.name == param_name) return &p;
  }
  return nullptr;
}

ToolCatalog::ToolCatalog(std::vector<ToolSpec> tools) : tools_(std::move(tools)) {}

const ToolSpec* ToolCatalog::find(std::string_view name) const {
  for (const auto& t : tools_) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::vector<std::string> ToolCatalog::names() const {
  std::vector<std::string> out;
  for (const auto& t : tools_) out.push_back(t.name);
  return out;
}

ToolSpec finish_spec() {
  return ToolSpec{std::string(kFinishTool),
                  "Return the final answer and stop. Use $i to answer with the output of step i.",
                  {ParamSpec{"answer", ParamKind::kText, "The final answer, or $i", std::nullopt, true, {}}}};
}

ToolCatalog ToolCatalog::with_finish() const {
  if (find(kFinishTool)) return *this;
  auto tools = tools_;
  tools.push_back(finish_spec());
  return ToolCatalog(std::move(tools));
}

std::string ToolCatalog::to_json() const {
  OrderedJson out = OrderedJson::array();
  for (const auto& t : tools_) {
    OrderedJson tool;
    tool["name"] = t.name;
    tool["description"] = t.description;
    OrderedJson params = OrderedJson::array();
    for (const auto& p : t.params) {
      OrderedJson param;
      param["name"] = p.name;
      param["type"] = std::string(kind_name(p.kind));
      param["description"] = p.description;
      if (!p.required) param["required"] = false;
      if (!p.choices.empty()) param["enum"] = p.choices;
      params.push_back(std::move(param));
    }
    tool["parameters"] = std::move(params);
    out.push_back(std::move(tool));
  }
  return out.dump();
}

std::string_view to_string(PlanError::Reason reason) {
  switch (reason) {
    case Reason::kSyntax:
      return "syntax";
    case Reason::kNotAList:
      return "not_a_list";
    case Reason::kUnknownTool:
      return "unknown_tool";
    case Reason::kUnknownParameter:
      return "unknown_parameter";
    case Reason::kMissingParameter:
      return "missing_parameter";
    case Reason::kBadReference:
      return "bad_reference";
    case Reason::kBadValue:
      return "bad_value";
    case Reason::kMisplacedFinish:
      return "misplaced_finish";
    case Reason::kEmptyPlan:
      return "empty_plan";
  }
  return "syntax";
}

Plan parse_plan(std::string_view text, const ToolCatalog& catalog, std::size_t start_index,
                PlanOrigin origin) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw PlanError(Reason::kSyntax, e.what());
  }
  if (root.is_object() && root.contains("plan")) root = root["plan"];
  if (!root.is_array()) throw PlanError(Reason::kNotAList, "a plan must be a list of tool calls");
  if (root.empty()) throw PlanError(Reason::kEmptyPlan, "the plan contains no steps");

  Plan plan;
  plan.origin = origin;
  plan.start_index = start_index;
  for (std::size_t position = 0; position < root.size(); ++position) {
    const auto& node = root[position];
    const std::size_t absolute = start_index + position;
    const auto where = "step " + std::to_string(absolute);
    if (!node.is_object() || !node.contains("tool") || !node["tool"].is_string()) {
      throw PlanError(Reason::kSyntax, where + ": expected {\"tool\": ..., \"args\": {...}}");
    }
    ToolCall call;
    call.tool = node["tool"].get<std::string>();
    const auto* spec = catalog.find(call.tool);
    if (!spec) throw PlanError(Reason::kUnknownTool, where + ": unknown tool '" + call.tool + "'");
    if (is_finish(call) && position + 1 != root.size()) {
      throw PlanError(Reason::kMisplacedFinish, where + ": Finish must be the last step");
    }

    Json args = Json::object();
    if (auto it = node.find("args"); it != node.end() && !it->is_null()) {
      if (!it->is_object()) throw PlanError(Reason::kSyntax, where + ": args must be an object");
      args = *it;
    }
    auto check_ref = [&](std::size_t ref, const std::string& param) {
      if (ref >= absolute) {
        throw PlanError(Reason::kBadReference, where + ": " + param + " references $" + std::to_string(ref) +
                                                    ", which is not an earlier step");
      }
    };
    for (auto it = args.begin(); it != args.end(); ++it) {
      const auto* param = spec->param(it.key());
      if (!param) {
        throw PlanError(Reason::kUnknownParameter,
                        where + ": tool '" + call.tool + "' has no parameter '" + it.key() + "'");
      }
      const auto& value = it.value();
      ArgValue arg;
      if (value.is_string()) {
        const auto s = value.get<std::string>();
        if (auto ref = parse_ref(s); ref && param->kind != ParamKind::kText) {
          check_ref(*ref, it.key());
          arg = StepRef{*ref};
        } else if (param->kind == ParamKind::kReference) {
          throw PlanError(Reason::kBadValue, where + ": " + it.key() + " must be a step reference like $0");
        } else {
          if (param->kind == ParamKind::kText) {
            for (auto ref : embedded_refs(s)) check_ref(ref, it.key());
          }
          if (!param->choices.empty() &&
              std::find(param->choices.begin(), param->choices.end(), s) == param->choices.end()) {
            throw PlanError(Reason::kBadValue, where + ": " + it.key() + " must be one of " +
                                                   join(param->choices, ", "));
          }
          arg = s;
        }
      } else if (value.is_number()) {
        if (param->kind == ParamKind::kReference) {
          throw PlanError(Reason::kBadValue, where + ": " + it.key() + " must be a step reference like $0");
        }
        arg = value.get<double>();
        if (!param->choices.empty()) {
          const auto s = arg_to_wire(arg);
          if (std::find(param->choices.begin(), param->choices.end(), s) == param->choices.end()) {
            throw PlanError(Reason::kBadValue, where + ": " + it.key() + " must be one of " +
                                                   join(param->choices, ", "));
          }
          arg = s;
        }
      } else {
        throw PlanError(Reason::kBadValue, where + ": " + it.key() + " must be a string or number");
      }
      call.args.emplace(it.key(), std::move(arg));
    }
    for (const auto& p : spec->params) {
      if (p.required && !call.args.contains(p.name)) {
        throw PlanError(Reason::kMissingParameter,
                        where + ": tool '" + call.tool + "' requires parameter '" + p.name + "'");
      }
    }
    plan.steps.push_back(std::move(call));
  }
  return plan;
}

std::string to_wire(const ToolCall& call) { return call_json(call).dump(); }

std::string to_wire(std::span<const ToolCall> calls) {
  OrderedJson out = OrderedJson::array();
  for (const auto& c : calls) out.push_back(call_json(c));
  return out.dump();
}

std::string to_wire(const Plan& plan) { return to_wire(std::span<const ToolCall>(plan.steps)); }

Rational Rational::of(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const auto g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational{num, den};
}

std::string Rational::to_string() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

ExecutionGraph ExecutionGraph::from_dependencies(const std::vector<std::vector<std::size_t>>& deps) {
  ExecutionGraph g;
  g.deps_.resize(deps.size());
  for (std::size_t i = 0; i < deps.size(); ++i) {
    auto d = deps[i];
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    for (auto j : d) {
      if (j >= i) throw std::invalid_argument("dependency must point to an earlier node");
      g.edges_.emplace_back(j, i);
    }
    g.deps_[i] = std::move(d);
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  return g;
}

std::vector<std::size_t> ExecutionGraph::sinks() const {
  std::vector<bool> used(deps_.size(), false);
  for (const auto& [from, to] : edges_) used[from] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (!used[i]) out.push_back(i);
  }
  return out;
}

std::size_t ExecutionGraph::depth() const {
  // Node order is already topological since every dependency points backwards.
  std::vector<std::size_t> longest(deps_.size(), 1);
  std::size_t best = 0;
  for (std::size_t i = 0; i < deps_.size(); ++i) {
    for (auto j : deps_[i]) longest[i] = std::max(longest[i], longest[j] + 1);
    best = std::max(best, longest[i]);
  }
  return best;
}

Rational ExecutionGraph::breadth() const {
  const auto d = depth();
  if (d == 0) return Rational{0, 1};
  return Rational::of(static_cast<std::int64_t>(size()), static_cast<std::int64_t>(d));
}

ExecutionGraph build_dag(const Plan& plan) {
  std::vector<std::vector<std::size_t>> deps;
  for (const auto& step : plan.steps) {
    if (is_finish(step)) continue;
    std::vector<std::size_t> local;
    for (auto ref : step.references()) {
      if (ref >= plan.start_index) local.push_back(ref - plan.start_index);
    }
    deps.push_back(std::move(local));
  }
  return ExecutionGraph::from_dependencies(deps);
}

void validate_program(const KoplProgram& program) {
  for (std::size_t i = 0; i < program.steps.size(); ++i) {
    for (auto d : program.steps[i].dependencies) {
      if (d >= i) {
        throw ProgramError("step " + std::to_string(i) + " (" + program.steps[i].function +
                           ") depends on step " + std::to_string(d) + ", which is not earlier");
      }
    }
  }
}

ExecutionGraph derive_gold_dag_kopl(const KoplProgram& program) {
  validate_program(program);
  if (program.steps.empty()) return {};

  // Canonical node per step: identical function, inputs and canonical inputs merge.
  std::map<std::string, std::size_t> by_signature;
  std::vector<std::size_t> canonical(program.steps.size());
  std::vector<std::vector<std::size_t>> node_deps;
  for (std::size_t i = 0; i < program.steps.size(); ++i) {
    const auto& step = program.steps[i];
    Json signature = Json::array();
    signature.push_back(step.function);
    signature.push_back(step.inputs);
    std::vector<std::size_t> deps;
    for (auto d : step.dependencies) deps.push_back(canonical[d]);
    signature.push_back(deps);
    auto [it, inserted] = by_signature.emplace(signature.dump(), node_deps.size());
    if (inserted) node_deps.push_back(deps);
    canonical[i] = it->second;
  }

  // Keep only nodes that feed the final step.
  const std::size_t sink = canonical.back();
  std::vector<bool> keep(node_deps.size(), false);
  keep[sink] = true;
  for (std::size_t n = node_deps.size(); n-- > 0;) {
    if (!keep[n]) continue;
    for (auto d : node_deps[n]) keep[d] = true;
  }
  std::vector<std::size_t> renumber(node_deps.size(), 0);
  std::vector<std::vector<std::size_t>> deps;
  for (std::size_t n = 0; n < node_deps.size(); ++n) {
    if (!keep[n]) continue;
    renumber[n] = deps.size();
    std::vector<std::size_t> mapped;
    for (auto d : node_deps[n]) mapped.push_back(renumber[d]);
    deps.push_back(std::move(mapped));
  }
  return ExecutionGraph::from_dependencies(deps);
}

KoplProgram program_from_plan(const Plan& plan) {
  KoplProgram program;
  for (const auto& step : plan.steps) {
    if (is_finish(step)) continue;
    KoplStep out;
    out.function = step.tool;
    for (const auto& [key, value] : step.args) {
      if (const auto* r = std::get_if<StepRef>(&value)) {
        out.inputs.push_back(key + "=$");
        out.dependencies.push_back(r->index - plan.start_index);
      } else if (const auto* s = std::get_if<std::string>(&value)) {
        // Embedded references become positional placeholders so merged inputs compare equal.
        std::string text;
        for (std::size_t i = 0; i < s->size(); ++i) {
          if ((*s)[i] == '$' && i + 1 < s->size() && is_digit((*s)[i + 1])) {
            std::size_t j = i + 1;
            std::size_t value_index = 0;
            while (j < s->size() && is_digit((*s)[j])) {
              value_index = value_index * 10 + static_cast<std::size_t>((*s)[j++] - '0');
            }
            text += "$";
            out.dependencies.push_back(value_index - plan.start_index);
            i = j - 1;
          } else {
            text.push_back((*s)[i]);
          }
        }
        out.inputs.push_back(key + "=" + text);
      } else {
        out.inputs.push_back(key + "=" + arg_to_wire(value));
      }
    }
    program.steps.push_back(std::move(out));
  }
  return program;
}

ExecutionGraph derive_gold_dag(const Plan& plan) { return derive_gold_dag_kopl(program_from_plan(plan)); }

std::string canonical_call(const ToolCall& call, const OutputResolver& resolved) {
  Json args = Json::object();
  for (const auto& [key, value] : call.args) {
    if (const auto* r = std::get_if<StepRef>(&value)) {
      args[key] = resolved(r->index);
    } else if (const auto* s = std::get_if<std::string>(&value)) {
      std::map<std::size_t, std::string> outputs;
      for (auto ref : embedded_refs(*s)) outputs[ref] = resolved(ref);
      args[key] = substitute_refs(*s, outputs);
    } else {
      args[key] = arg_to_wire(value);
    }
  }
  return Json{{"tool", call.tool}, {"args", args}}.dump();
}

RepetitionReport detect_repetition(std::span<const ExecutedCall> calls, const OutputResolver& resolved) {
  std::vector<std::string> keys;
  keys.reserve(calls.size());
  for (const auto& c : calls) keys.push_back(canonical_call(c.call, resolved));
  RepetitionReport report;
  for (std::size_t i = 0; i < calls.size(); ++i) {
    for (std::size_t j = i + 1; j < calls.size(); ++j) {
      if (keys[i] == keys[j]) {
        report.pairs.emplace_back(std::min(calls[i].index, calls[j].index),
                                  std::max(calls[i].index, calls[j].index));
      }
    }
  }
  std::sort(report.pairs.begin(), report.pairs.end());
  report.repeated = !report.pairs.empty();
  return report;
}

}  // namespace horizon

#include "horizon/atomic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "horizon/text.hpp"

namespace horizon {
namespace {

constexpr std::size_t kRenderLimit = 20;

Failure empty(std::string message) { return fail(FailureKind::kEmptyResult, std::move(message)); }

bool needs_quotes(std::string_view atom) {
  if (atom.empty()) return true;
  for (char c : atom) {
    if (is_space(c) || c == '(' || c == ')' || c == '"' || c == '\\') return true;
  }
  return false;
}

std::optional<std::string_view> head_for(CompareOp op) {
  switch (op) {
    case CompareOp::kLt:
      return "LT";
    case CompareOp::kLe:
      return "LE";
    case CompareOp::kGt:
      return "GT";
    case CompareOp::kGe:
      return "GE";
    default:
      return std::nullopt;
  }
}

std::optional<CompareOp> op_for(std::string_view head) {
  if (head == "LT") return CompareOp::kLt;
  if (head == "LE") return CompareOp::kLe;
  if (head == "GT") return CompareOp::kGt;
  if (head == "GE") return CompareOp::kGe;
  return std::nullopt;
}

std::optional<TypedValue> year_of(const TypedValue& v) {
  switch (v.kind()) {
    case ValueKind::kYear:
      return v;
    case ValueKind::kDate:
      return TypedValue::year(v.as_date().year);
    case ValueKind::kNumber: {
      const auto& q = v.as_number();
      if (q.unit.empty() && std::floor(q.amount) == q.amount) {
        return TypedValue::year(static_cast<std::int64_t>(q.amount));
      }
      return std::nullopt;
    }
    case ValueKind::kString:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

SExpr SExpr::call(std::string_view head, std::vector<SExpr> args) {
  std::vector<SExpr> items;
  items.push_back(leaf(std::string(head)));
  for (auto& a : args) items.push_back(std::move(a));
  return list(std::move(items));
}

std::string SExpr::to_string() const {
  if (!is_list) {
    if (!needs_quotes(atom)) return atom;
    std::string out = "\"";
    for (char c : atom) {
      if (c == '"' || c == '\\') out.push_back('\\');
      out.push_back(c);
    }
    out.push_back('"');
    return out;
  }
  std::string out = "(";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out.push_back(' ');
    out += items[i].to_string();
  }
  out.push_back(')');
  return out;
}

SExpr parse_sexpr(std::string_view text) {
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && is_space(text[pos])) ++pos;
  };
  std::function<SExpr()> parse = [&]() -> SExpr {
    skip();
    if (pos >= text.size()) throw SExprError("unexpected end of S-expression");
    if (text[pos] == '(') {
      ++pos;
      std::vector<SExpr> items;
      while (true) {
        skip();
        if (pos >= text.size()) throw SExprError("missing ')'");
        if (text[pos] == ')') {
          ++pos;
          break;
        }
        items.push_back(parse());
      }
      if (items.empty()) throw SExprError("empty list");
      return SExpr::list(std::move(items));
    }
    if (text[pos] == ')') throw SExprError("unexpected ')' at offset " + std::to_string(pos));
    std::string atom;
    if (text[pos] == '"') {
      ++pos;
      while (pos < text.size() && text[pos] != '"') {
        if (text[pos] == '\\' && pos + 1 < text.size()) ++pos;
        atom.push_back(text[pos++]);
      }
      if (pos >= text.size()) throw SExprError("unterminated string");
      ++pos;
      return SExpr::leaf(std::move(atom));
    }
    while (pos < text.size() && !is_space(text[pos]) && text[pos] != '(' && text[pos] != ')') {
      atom.push_back(text[pos++]);
    }
    return SExpr::leaf(std::move(atom));
  };
  auto expr = parse();
  skip();
  if (pos != text.size()) throw SExprError("trailing input after S-expression");
  return expr;
}

Outcome<std::string> AtomicEngine::ground(std::string_view term, Namespace ns) const {
  auto result = grounder_.ground(term, ns);
  if (result.ok()) return result.matched;
  return fail(FailureKind::kGrounding, describe_grounding_failure(term, ns, result), result.candidates);
}

Outcome<Value> AtomicEngine::extract_entity(std::string_view input) const {
  const auto text = trim(input);
  if (auto id = store_.node_index(text)) return Value(EntitySet{{*id}, std::nullopt});
  if (auto named = store_.nodes_named(text); !named.empty()) {
    return Value(EntitySet{{named.begin(), named.end()}, std::nullopt});
  }
  if (auto members = store_.instances_of(text); !members.empty()) {
    return Value(EntitySet{{members.begin(), members.end()}, std::nullopt});
  }
  if (auto literal = parse_literal(text); literal.kind() != ValueKind::kString) return Value(literal);
  auto grounded = grounder_.ground(text, Namespace::kEntityName);
  if (grounded.ok()) {
    const auto named = store_.nodes_named(grounded.matched);
    return Value(EntitySet{{named.begin(), named.end()}, std::nullopt});
  }
  return fail(FailureKind::kGrounding, describe_grounding_failure(text, Namespace::kEntityName, grounded),
              grounded.candidates);
}

Outcome<EntitySet> AtomicEngine::find_relation(std::string_view relation, Direction direction,
                                               const Value& target) const {
  auto grounded = ground(relation, Namespace::kRelation);
  if (!grounded) return grounded.failure();
  std::set<std::size_t> out;
  if (const auto* literal = std::get_if<TypedValue>(&target)) {
    if (direction != Direction::kForward) {
      return fail(FailureKind::kContractViolation, "a literal target only supports the forward direction");
    }
    for (const auto& t : store_.triples()) {
      if (t.predicate == grounded.value() && !t.object_is_node() && t.object_literal() == *literal) {
        out.insert(t.subject);
      }
    }
  } else if (const auto* set = std::get_if<EntitySet>(&target)) {
    const std::set<std::size_t> targets(set->ids.begin(), set->ids.end());
    for (const auto& t : store_.triples()) {
      if (t.predicate != grounded.value() || !t.object_is_node()) continue;
      if (direction == Direction::kForward && targets.contains(t.object_node())) out.insert(t.subject);
      if (direction == Direction::kBackward && targets.contains(t.subject)) out.insert(t.object_node());
    }
  } else {
    return fail(FailureKind::kContractViolation, "find_relation needs an entity set or literal target");
  }
  if (out.empty()) {
    return empty("no entity reaches the target via '" + grounded.value() + "' (" +
                 std::string(to_string(direction)) + ")");
  }
  return EntitySet{{out.begin(), out.end()}, std::nullopt};
}

Outcome<EntitySet> AtomicEngine::merge(const EntitySet& a, const EntitySet& b) const {
  const std::set<std::size_t> right(b.ids.begin(), b.ids.end());
  EntitySet out;
  for (auto id : a.ids) {
    if (right.contains(id)) out.ids.push_back(id);
  }
  if (out.empty()) return empty("the intersection is empty");
  return out;
}

Outcome<EntitySet> AtomicEngine::order(bool argmax, const EntitySet& input, std::string_view property) const {
  auto grounded = ground(property, Namespace::kAttributeKey);
  if (!grounded) return grounded.failure();
  std::vector<std::pair<std::size_t, const TypedValue*>> valued;
  for (auto id : input.ids) {
    for (const auto& t : store_.triples()) {
      if (t.subject == id && t.predicate == grounded.value() && !t.object_is_node() &&
          t.object_literal().kind() != ValueKind::kString) {
        valued.emplace_back(id, &t.object_literal());
        break;
      }
    }
  }
  if (valued.empty()) return empty("no input entity has a comparable '" + grounded.value() + "'");
  const TypedValue* best = valued.front().second;
  try {
    for (const auto& [id, v] : valued) {
      const auto cmp = order_typed(*v, *best);
      if (argmax ? cmp == std::strong_ordering::greater : cmp == std::strong_ordering::less) best = v;
    }
    EntitySet out;
    for (const auto& [id, v] : valued) {
      if (order_typed(*v, *best) == std::strong_ordering::equal) out.ids.push_back(id);
    }
    return out;
  } catch (const ValueError& e) {
    return fail(FailureKind::kTypeMismatch, e.what());
  }
}

Outcome<EntitySet> AtomicEngine::compare(CompareOp op, std::string_view property, const TypedValue& literal) const {
  auto grounded = ground(property, Namespace::kAttributeKey);
  if (!grounded) return grounded.failure();
  std::set<std::size_t> out;
  for (const auto& t : store_.triples()) {
    if (t.predicate != grounded.value() || t.object_is_node()) continue;
    try {
      if (compare_typed(t.object_literal(), op, literal)) out.insert(t.subject);
    } catch (const ValueError&) {
    }
  }
  if (out.empty()) {
    return empty("no entity has " + grounded.value() + " " + std::string(to_string(op)) + " " + literal.to_string());
  }
  return EntitySet{{out.begin(), out.end()}, std::nullopt};
}

std::optional<TypedValue> AtomicEngine::parse_year(std::string_view text) const {
  if (trim(text) == "NOW") return TypedValue::year(evaluation_year_);
  return parse_typed(text, ValueKind::kYear);
}

Outcome<EntitySet> AtomicEngine::time_constraint(const EntitySet& input, std::string_view relation,
                                                 const TypedValue& year) const {
  auto grounded = ground(relation, Namespace::kRelation);
  if (!grounded) return grounded.failure();
  auto wanted = year_of(year);
  if (!wanted) return fail(FailureKind::kTypeMismatch, "'" + year.to_string() + "' is not a year");
  EntitySet out;
  for (auto id : input.ids) {
    for (const auto& t : store_.triples()) {
      if (t.subject != id || t.predicate != grounded.value() || t.object_is_node()) continue;
      const auto& v = t.object_literal();
      if (v.kind() != ValueKind::kYear && v.kind() != ValueKind::kDate) continue;
      if (year_of(v) == wanted) {
        out.ids.push_back(id);
        break;
      }
    }
  }
  if (out.empty()) return empty("no input entity has '" + grounded.value() + "' in " + wanted->to_string());
  return out;
}

Outcome<Value> AtomicEngine::eval(const SExpr& expr) const { return eval_at(expr, "root"); }

Outcome<Value> AtomicEngine::eval_at(const SExpr& expr, const std::string& path) const {
  auto located = [&](Failure f) {
    f.message += " [at " + path + "]";
    return f;
  };
  if (!expr.is_list) {
    auto r = extract_entity(expr.atom);
    if (!r) return located(r.failure());
    return r;
  }
  if (expr.items.empty() || expr.items.front().is_list) {
    return located(fail(FailureKind::kContractViolation, "malformed S-expression"));
  }
  const auto& head = expr.head();
  auto arity = [&](std::size_t n) { return expr.items.size() == n + 1; };
  auto bad_arity = [&] {
    return located(fail(FailureKind::kContractViolation, "wrong number of arguments for " + head));
  };
  auto sub_set = [&](std::size_t i) -> Outcome<EntitySet> {
    auto r = eval_at(expr.items[i], path + "." + std::to_string(i));
    if (!r) return r.failure();
    if (const auto* set = std::get_if<EntitySet>(&r.value())) return *set;
    return located(fail(FailureKind::kContractViolation, head + " argument " + std::to_string(i) + " is not a set"));
  };
  auto atom_at = [&](std::size_t i) -> std::optional<std::string> {
    if (expr.items[i].is_list) return std::nullopt;
    return expr.items[i].atom;
  };
  auto wrap = [&](Outcome<EntitySet> r) -> Outcome<Value> {
    if (!r) return located(r.failure());
    return Value(std::move(r.value()));
  };

  if (head == "JOIN") {
    if (!arity(2)) return bad_arity();
    const auto& rel = expr.items[1];
    Direction direction = Direction::kForward;
    std::string relation;
    if (!rel.is_list) {
      relation = rel.atom;
    } else if (rel.items.size() == 2 && !rel.items[0].is_list && rel.items[0].atom == "R" && !rel.items[1].is_list) {
      direction = Direction::kBackward;
      relation = rel.items[1].atom;
    } else {
      return located(fail(FailureKind::kContractViolation, "JOIN relation must be an atom or (R atom)"));
    }
    auto target = eval_at(expr.items[2], path + ".2");
    if (!target) return target.failure();
    return wrap(find_relation(relation, direction, target.value()));
  }
  if (head == "AND") {
    if (!arity(2)) return bad_arity();
    auto a = sub_set(1);
    if (!a) return a.failure();
    auto b = sub_set(2);
    if (!b) return b.failure();
    return wrap(merge(a.value(), b.value()));
  }
  if (head == "ARGMAX" || head == "ARGMIN") {
    if (!arity(2)) return bad_arity();
    auto set = sub_set(1);
    if (!set) return set.failure();
    auto prop = atom_at(2);
    if (!prop) return located(fail(FailureKind::kContractViolation, head + " property must be an atom"));
    return wrap(order(head == "ARGMAX", set.value(), *prop));
  }
  if (auto op = op_for(head)) {
    if (!arity(2)) return bad_arity();
    auto prop = atom_at(1);
    auto literal = atom_at(2);
    if (!prop || !literal) return located(fail(FailureKind::kContractViolation, head + " takes two atoms"));
    return wrap(compare(*op, *prop, parse_literal(*literal)));
  }
  if (head == "TC") {
    if (!arity(3)) return bad_arity();
    auto set = sub_set(1);
    if (!set) return set.failure();
    auto rel = atom_at(2);
    auto literal = atom_at(3);
    if (!rel || !literal) return located(fail(FailureKind::kContractViolation, "TC takes a relation and a year"));
    auto year = parse_year(*literal);
    if (!year) return located(fail(FailureKind::kTypeMismatch, "'" + *literal + "' is not a year"));
    return wrap(time_constraint(set.value(), *rel, *year));
  }
  if (head == "COUNT") {
    if (!arity(1)) return bad_arity();
    auto set = sub_set(1);
    if (!set) return set.failure();
    return Value(count(set.value()));
  }
  return located(fail(FailureKind::kUnsupported, "unknown head '" + head + "'"));
}

std::string AtomicEngine::render_set(const EntitySet& set) const {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < set.ids.size() && i < kRenderLimit; ++i) {
    const auto& node = store_.nodes()[set.ids[i]];
    parts.push_back(node.name == node.id ? node.id : node.id + " (" + node.name + ")");
  }
  auto text = join(parts, "; ");
  if (set.ids.size() > kRenderLimit) text += "; ... (" + std::to_string(set.ids.size()) + " entities)";
  return text;
}

namespace {

enum class Shape { kSeed, kSet, kCount };

struct Compiled {
  SExpr expr;
  Shape shape = Shape::kSet;
};

}  // namespace

SExpr compile_chain(const Plan& chain) {
  std::vector<Compiled> compiled;
  auto text_arg = [](const ToolCall& call, const std::string& key) -> std::string {
    auto it = call.args.find(key);
    if (it == call.args.end()) throw CompileError(call.tool + " is missing '" + key + "'");
    if (std::holds_alternative<StepRef>(it->second)) {
      throw CompileError(call.tool + " '" + key + "' must be a literal, not a reference");
    }
    return arg_to_wire(it->second);
  };
  auto ref_arg = [&](const ToolCall& call, const std::string& key, std::size_t self) -> const Compiled& {
    auto it = call.args.find(key);
    if (it == call.args.end()) throw CompileError(call.tool + " is missing '" + key + "'");
    const auto* ref = std::get_if<StepRef>(&it->second);
    if (!ref) throw CompileError(call.tool + " '" + key + "' must be a step reference");
    if (ref->index < chain.start_index || ref->index >= self) {
      throw CompileError("step " + std::to_string(self) + " references $" + std::to_string(ref->index) +
                         ", which is not an earlier step of the chain");
    }
    return compiled[ref->index - chain.start_index];
  };
  auto set_arg = [&](const ToolCall& call, const std::string& key, std::size_t self) -> SExpr {
    const auto& c = ref_arg(call, key, self);
    if (c.shape == Shape::kCount) throw CompileError(call.tool + " '" + key + "' cannot consume a count");
    return c.expr;
  };
  auto literal_arg = [&](const ToolCall& call, const std::string& key, std::size_t self) -> SExpr {
    auto it = call.args.find(key);
    if (it == call.args.end()) throw CompileError(call.tool + " is missing '" + key + "'");
    if (std::holds_alternative<StepRef>(it->second)) {
      const auto& c = ref_arg(call, key, self);
      if (c.shape != Shape::kSeed) throw CompileError(call.tool + " '" + key + "' needs a literal seed");
      return c.expr;
    }
    return SExpr::leaf(arg_to_wire(it->second));
  };

  for (std::size_t i = 0; i < chain.steps.size(); ++i) {
    const auto& call = chain.steps[i];
    const std::size_t self = chain.start_index + i;
    if (is_finish(call)) break;
    if (call.tool == "extract_entity") {
      compiled.push_back({SExpr::leaf(text_arg(call, "input")), Shape::kSeed});
    } else if (call.tool == "find_relation") {
      auto direction = parse_direction(text_arg(call, "direction"));
      if (!direction) throw CompileError("find_relation direction must be forward or backward");
      auto relation = SExpr::leaf(text_arg(call, "relation"));
      if (*direction == Direction::kBackward) relation = SExpr::call("R", {std::move(relation)});
      compiled.push_back({SExpr::call("JOIN", {std::move(relation), set_arg(call, "target", self)}), Shape::kSet});
    } else if (call.tool == "merge") {
      compiled.push_back({SExpr::call("AND", {set_arg(call, "input1", self), set_arg(call, "input2", self)}),
                          Shape::kSet});
    } else if (call.tool == "order") {
      const auto mode = text_arg(call, "mode");
      if (mode != "argmax" && mode != "argmin") throw CompileError("order mode must be argmin or argmax");
      compiled.push_back({SExpr::call(mode == "argmax" ? "ARGMAX" : "ARGMIN",
                                      {set_arg(call, "input", self), SExpr::leaf(text_arg(call, "property"))}),
                          Shape::kSet});
    } else if (call.tool == "compare") {
      auto op = parse_compare_op(text_arg(call, "operator"));
      auto head = op ? head_for(*op) : std::nullopt;
      if (!head) throw CompileError("compare operator must be one of <, <=, >, >=");
      compiled.push_back({SExpr::call(*head, {SExpr::leaf(text_arg(call, "property")),
                                              literal_arg(call, "literal", self)}),
                          Shape::kSet});
    } else if (call.tool == "time_constraint") {
      compiled.push_back({SExpr::call("TC", {set_arg(call, "input", self), SExpr::leaf(text_arg(call, "relation")),
                                             literal_arg(call, "literal", self)}),
                          Shape::kSet});
    } else if (call.tool == "count") {
      compiled.push_back({SExpr::call("COUNT", {set_arg(call, "input", self)}), Shape::kCount});
    } else {
      throw CompileError("'" + call.tool + "' is not an atomic query tool");
    }
  }
  if (compiled.empty()) throw CompileError("the chain has no steps");
  return compiled.back().expr;
}

ToolCatalog atomic_catalog() {
  auto ref = [](std::string name, std::string description) {
    return ParamSpec{std::move(name), ParamKind::kReference, std::move(description), std::nullopt, true, {}};
  };
  auto schema = [](std::string name, Namespace ns, std::string description) {
    return ParamSpec{std::move(name), ParamKind::kLiteral, std::move(description), ns, true, {}};
  };
  auto choice = [](std::string name, std::vector<std::string> choices, std::string description) {
    return ParamSpec{std::move(name), ParamKind::kLiteral, std::move(description), std::nullopt, true,
                     std::move(choices)};
  };
  std::vector<ToolSpec> tools;
  tools.push_back({"extract_entity", "Resolve an entity mention, a class name, or a literal value.",
                   {schema("input", Namespace::kEntityName, "Mention, class, or literal")}});
  tools.push_back({"find_relation", "Entities x with (x, relation, target) for forward, (target, relation, x) for backward.",
                   {schema("relation", Namespace::kRelation, "Relation name"),
                    choice("direction", {"forward", "backward"}, "Edge direction"),
                    ref("target", "Target entities from an earlier step")}});
  tools.push_back({"merge", "Intersection of two entity sets.",
                   {ref("input1", "First entity set"), ref("input2", "Second entity set")}});
  tools.push_back({"order", "Entities with the maximum or minimum property value.",
                   {choice("mode", {"argmin", "argmax"}, "Which extreme"), ref("input", "Entity set"),
                    schema("property", Namespace::kAttributeKey, "Property name")}});
  tools.push_back({"compare", "All entities whose property compares to the literal.",
                   {choice("operator", {"<", "<=", ">", ">="}, "Comparison operator"),
                    schema("property", Namespace::kAttributeKey, "Property name"),
                    ParamSpec{"literal", ParamKind::kLiteral, "Literal value, e.g. 60 minutes", std::nullopt, true, {}}}});
  tools.push_back({"time_constraint", "Keep entities whose temporal property falls in the given year.",
                   {ref("input", "Entity set"), schema("relation", Namespace::kRelation, "Temporal property"),
                    ParamSpec{"literal", ParamKind::kLiteral, "A year, or NOW", std::nullopt, true, {}}}});
  tools.push_back({"count", "Number of input entities.", {ref("input", "Entity set")}});
  return ToolCatalog(std::move(tools));
}

AtomicEnvironment::AtomicEnvironment(const GraphStore& store, const Grounder& grounder,
                                     std::int64_t evaluation_year)
    : engine_(store, grounder, evaluation_year), catalog_(atomic_catalog()) {}

std::string AtomicEnvironment::render(const Value& value) const {
  if (const auto* set = std::get_if<EntitySet>(&value)) return engine_.render_set(*set);
  if (const auto* tv = std::get_if<TypedValue>(&value)) return tv->to_string();
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  return std::to_string(std::get<std::int64_t>(value));
}

Observation AtomicEnvironment::invoke(std::string_view tool, const ResolvedArgs& args, std::uint64_t) const {
  auto text = [&](std::string_view name) -> std::string {
    auto it = args.find(name);
    return it == args.end() ? std::string() : it->second.text;
  };
  auto value = [&](std::string_view name) -> const Value* {
    auto it = args.find(name);
    return it == args.end() ? nullptr : it->second.value;
  };
  auto set = [&](std::string_view name) -> const EntitySet* {
    const auto* v = value(name);
    return v ? std::get_if<EntitySet>(v) : nullptr;
  };
  auto not_a_set = [&](std::string_view name) {
    return failure(fail(FailureKind::kContractViolation,
                        "'" + std::string(name) + "' of " + std::string(tool) + " must reference an entity set"));
  };
  auto literal = [&](std::string_view name) -> std::optional<TypedValue> {
    if (const auto* v = value(name)) {
      if (const auto* tv = std::get_if<TypedValue>(v)) return *tv;
      return std::nullopt;
    }
    return parse_literal(text(name));
  };
  auto result = [&](Outcome<EntitySet> r) {
    return r ? success(*this, Value(std::move(r.value()))) : failure(r.failure());
  };
  const auto& e = engine_;

  if (tool == "extract_entity") {
    auto r = e.extract_entity(text("input"));
    return r ? success(*this, std::move(r.value())) : failure(r.failure());
  }
  if (tool == "find_relation") {
    auto direction = parse_direction(text("direction"));
    if (!direction) return failure(fail(FailureKind::kUnsupported, "direction must be forward or backward"));
    const auto* target = value("target");
    if (!target) return not_a_set("target");
    return result(e.find_relation(text("relation"), *direction, *target));
  }
  if (tool == "merge") {
    const auto* a = set("input1");
    const auto* b = set("input2");
    if (!a) return not_a_set("input1");
    if (!b) return not_a_set("input2");
    return result(e.merge(*a, *b));
  }
  if (tool == "order") {
    const auto* input = set("input");
    if (!input) return not_a_set("input");
    return result(e.order(text("mode") == "argmax", *input, text("property")));
  }
  if (tool == "compare") {
    auto op = parse_compare_op(text("operator"));
    if (!op || !head_for(*op)) {
      return failure(fail(FailureKind::kUnsupported, "unsupported operator '" + text("operator") + "'"));
    }
    auto lit = literal("literal");
    if (!lit) return failure(fail(FailureKind::kContractViolation, "compare needs a literal value"));
    return result(e.compare(*op, text("property"), *lit));
  }
  if (tool == "time_constraint") {
    const auto* input = set("input");
    if (!input) return not_a_set("input");
    std::optional<TypedValue> year;
    if (const auto* v = value("literal")) {
      if (const auto* tv = std::get_if<TypedValue>(v)) year = year_of(*tv);
    } else {
      year = e.parse_year(text("literal"));
    }
    if (!year) return failure(fail(FailureKind::kTypeMismatch, "'" + text("literal") + "' is not a year"));
    return result(e.time_constraint(*input, text("relation"), *year));
  }
  if (tool == "count") {
    const auto* input = set("input");
    if (!input) return not_a_set("input");
    return success(*this, Value(e.count(*input)));
  }
  return failure(fail(FailureKind::kUnknownTool, "unknown tool '" + std::string(tool) + "'"));
}

}  // namespace horizon

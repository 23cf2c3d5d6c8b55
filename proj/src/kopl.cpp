#include "horizon/kopl.hpp"

#include <algorithm>
#include <set>

#include "horizon/text.hpp"

namespace horizon {
namespace {

constexpr std::size_t kRenderLimit = 20;

std::string describe(std::string_view key, CompareOp op, std::string_view value) {
  return std::string(key) + " " + std::string(to_string(op)) + " " + std::string(value);
}

Failure empty(std::string message) { return fail(FailureKind::kEmptyResult, std::move(message)); }

const std::vector<FactRef>* facts_of(const EntitySet& set, std::size_t position) {
  if (!set.facts) return nullptr;
  return &(*set.facts)[position];
}

}  // namespace

Outcome<std::string> KoplEngine::ground(std::string_view term, Namespace ns) const {
  auto result = grounder_.ground(term, ns);
  if (result.ok()) return result.matched;
  return fail(FailureKind::kGrounding, describe_grounding_failure(term, ns, result), result.candidates);
}

Outcome<EntitySet> KoplEngine::find_all() const {
  EntitySet out;
  for (std::size_t i = 0; i < kb_.entities().size(); ++i) out.ids.push_back(i);
  if (out.empty()) return empty("the knowledge base has no entities");
  return out;
}

Outcome<EntitySet> KoplEngine::find(std::string_view name) const {
  auto grounded = ground(name, Namespace::kEntityName);
  if (!grounded) return grounded.failure();
  EntitySet out;
  const auto ids = kb_.entities_named(grounded.value());
  out.ids.assign(ids.begin(), ids.end());
  if (out.empty()) return empty("no entity named '" + std::string(name) + "'");
  return out;
}

Outcome<EntitySet> KoplEngine::filter_concept(const EntitySet& input, std::string_view concept_name) const {
  auto grounded = ground(concept_name, Namespace::kConcept);
  if (!grounded) return grounded.failure();
  std::set<std::string, std::less<>> accepted;
  for (const auto& id : kb_.concepts_named(grounded.value())) {
    for (auto& c : concept_closure(kb_, id)) accepted.insert(std::move(c));
  }
  EntitySet out;
  for (auto id : input.ids) {
    const auto& e = kb_.entities()[id];
    if (std::any_of(e.instance_of.begin(), e.instance_of.end(),
                    [&](const std::string& c) { return accepted.contains(c); })) {
      out.ids.push_back(id);
    }
  }
  if (out.empty()) return empty("no input entity is an instance of '" + grounded.value() + "'");
  return out;
}

Outcome<EntitySet> KoplEngine::filter_attribute(const EntitySet& input, std::string_view key, ValueKind kind,
                                                std::string_view value, CompareOp op) const {
  auto grounded = ground(key, Namespace::kAttributeKey);
  if (!grounded) return grounded.failure();
  auto target = parse_typed(value, kind);
  if (!target) {
    return fail(FailureKind::kTypeMismatch,
                "'" + std::string(value) + "' is not a valid " + std::string(to_string(kind)) + " value");
  }
  if (kind == ValueKind::kString && op != CompareOp::kEq && op != CompareOp::kNe) {
    return fail(FailureKind::kUnsupported, "strings only support = and !=");
  }
  EntitySet out;
  out.facts.emplace();
  for (auto id : input.ids) {
    std::vector<FactRef> admitted;
    for (const auto& fact : kb_.entities()[id].attributes) {
      if (fact.key != grounded.value() || fact.value.kind() != kind) continue;
      try {
        if (compare_typed(fact.value, op, *target)) admitted.push_back(FactRef{fact.key, &fact.qualifiers});
      } catch (const ValueError&) {
        // Facts in another unit are simply not comparable with the target.
      }
    }
    if (!admitted.empty()) {
      out.ids.push_back(id);
      out.facts->push_back(std::move(admitted));
    }
  }
  if (out.empty()) return empty("no entity has " + describe(grounded.value(), op, target->to_string()));
  return out;
}

Outcome<EntitySet> KoplEngine::qualifier_filter(const EntitySet& input, std::string_view qkey, ValueKind kind,
                                                std::string_view value, CompareOp op) const {
  if (!input.facts) {
    return fail(FailureKind::kContractViolation,
                "qualifier filters need the output of a filter or relate step");
  }
  auto grounded = ground(qkey, Namespace::kQualifierKey);
  if (!grounded) return grounded.failure();
  auto target = parse_typed(value, kind);
  if (!target) {
    return fail(FailureKind::kTypeMismatch,
                "'" + std::string(value) + "' is not a valid " + std::string(to_string(kind)) + " value");
  }
  EntitySet out;
  out.facts.emplace();
  for (std::size_t i = 0; i < input.ids.size(); ++i) {
    std::vector<FactRef> kept;
    for (const auto& fact : *facts_of(input, i)) {
      for (const auto& q : *fact.qualifiers) {
        if (q.key != grounded.value() || q.value.kind() != kind) continue;
        bool match = false;
        try {
          match = compare_typed(q.value, op, *target);
        } catch (const ValueError&) {
        }
        if (match) {
          kept.push_back(fact);
          break;
        }
      }
    }
    if (!kept.empty()) {
      out.ids.push_back(input.ids[i]);
      out.facts->push_back(std::move(kept));
    }
  }
  if (out.empty()) return empty("no fact has qualifier " + describe(grounded.value(), op, target->to_string()));
  return out;
}

Outcome<EntitySet> KoplEngine::relate(const EntitySet& input, std::string_view relation,
                                      Direction direction) const {
  auto grounded = ground(relation, Namespace::kRelation);
  if (!grounded) return grounded.failure();
  std::map<std::size_t, std::vector<FactRef>> reached;
  for (auto id : input.ids) {
    for (const auto& link : kb_.links(id)) {
      if (link.predicate != grounded.value() || link.direction != direction) continue;
      reached[link.target].push_back(FactRef{std::string(link.predicate), link.qualifiers});
    }
  }
  EntitySet out;
  out.facts.emplace();
  for (auto& [id, facts] : reached) {
    out.ids.push_back(id);
    out.facts->push_back(std::move(facts));
  }
  if (out.empty()) {
    return empty("no entity is linked by '" + grounded.value() + "' (" + std::string(to_string(direction)) +
                 ") from the input");
  }
  return out;
}

Outcome<EntitySet> KoplEngine::set_op(const EntitySet& a, const EntitySet& b, SetOp op) const {
  EntitySet out;
  if (op == SetOp::kAnd) {
    std::set<std::size_t> right(b.ids.begin(), b.ids.end());
    for (std::size_t i = 0; i < a.ids.size(); ++i) {
      if (right.contains(a.ids[i])) out.ids.push_back(a.ids[i]);
    }
    if (out.empty()) return empty("the intersection is empty");
    return out;
  }
  std::set<std::size_t> seen;
  for (const auto* side : {&a, &b}) {
    for (auto id : side->ids) {
      if (seen.insert(id).second) out.ids.push_back(id);
    }
  }
  if (out.empty()) return empty("the union is empty");
  return out;
}

namespace {

// First fact value for an ordered comparison; strings are not ordered.
const TypedValue* first_ordered_value(const Entity& e, const std::string& key) {
  for (const auto& fact : e.attributes) {
    if (fact.key == key && fact.value.kind() != ValueKind::kString) return &fact.value;
  }
  return nullptr;
}

}  // namespace

Outcome<std::string> KoplEngine::select_between(const EntitySet& a, const EntitySet& b, std::string_view key,
                                                bool greater) const {
  if (a.empty() || b.empty()) return empty("select needs two nonempty inputs");
  auto grounded = ground(key, Namespace::kAttributeKey);
  if (!grounded) return grounded.failure();
  const auto ia = a.ids.front();
  const auto ib = b.ids.front();
  const auto& ea = kb_.entities()[ia];
  const auto& eb = kb_.entities()[ib];
  const auto* va = first_ordered_value(ea, grounded.value());
  const auto* vb = first_ordered_value(eb, grounded.value());
  if (!va || !vb) {
    return empty((va ? eb : ea).name + " has no comparable value for '" + grounded.value() + "'");
  }
  std::strong_ordering order = std::strong_ordering::equal;
  try {
    order = order_typed(*va, *vb);
  } catch (const ValueError& e) {
    return fail(FailureKind::kTypeMismatch, e.what());
  }
  if (order == std::strong_ordering::equal) return (ia <= ib ? ea : eb).name;
  const bool a_wins = greater ? order == std::strong_ordering::greater : order == std::strong_ordering::less;
  return (a_wins ? ea : eb).name;
}

Outcome<std::string> KoplEngine::select_among(const EntitySet& input, std::string_view key, bool largest) const {
  if (input.empty()) return empty("select needs a nonempty input");
  auto grounded = ground(key, Namespace::kAttributeKey);
  if (!grounded) return grounded.failure();
  std::optional<std::size_t> best;
  const TypedValue* best_value = nullptr;
  for (auto id : input.ids) {
    const auto& e = kb_.entities()[id];
    const auto* v = first_ordered_value(e, grounded.value());
    if (!v) return empty(e.name + " has no comparable value for '" + grounded.value() + "'");
    if (!best) {
      best = id;
      best_value = v;
      continue;
    }
    std::strong_ordering order = std::strong_ordering::equal;
    try {
      order = order_typed(*v, *best_value);
    } catch (const ValueError& err) {
      return fail(FailureKind::kTypeMismatch, err.what());
    }
    const bool better = largest ? order == std::strong_ordering::greater : order == std::strong_ordering::less;
    if (better || (order == std::strong_ordering::equal && id < *best)) {
      best = id;
      best_value = v;
    }
  }
  return kb_.entities()[*best].name;
}

Outcome<std::string> KoplEngine::verify(const TypedValue& queried, ValueKind kind, std::string_view value,
                                        CompareOp op) const {
  auto target = parse_typed(value, kind);
  if (!target) {
    return fail(FailureKind::kTypeMismatch,
                "'" + std::string(value) + "' is not a valid " + std::string(to_string(kind)) + " value");
  }
  try {
    return std::string(compare_typed(queried, op, *target) ? "yes" : "no");
  } catch (const ValueError& e) {
    return fail(FailureKind::kTypeMismatch, e.what());
  }
}

Outcome<std::vector<std::string>> KoplEngine::query_name(const EntitySet& input) const {
  if (input.empty()) return empty("cannot name an empty entity set");
  std::vector<std::string> names;
  for (auto id : input.ids) names.push_back(kb_.entities()[id].name);
  return names;
}

Outcome<std::vector<TypedValue>> KoplEngine::query_attr(const EntitySet& input, std::string_view key) const {
  if (input.empty()) return empty("cannot query an empty entity set");
  auto grounded = ground(key, Namespace::kAttributeKey);
  if (!grounded) return grounded.failure();
  std::vector<TypedValue> out;
  for (auto id : input.ids) {
    for (const auto& fact : kb_.entities()[id].attributes) {
      if (fact.key == grounded.value()) out.push_back(fact.value);
    }
  }
  if (out.empty()) return empty("the input has no value for '" + grounded.value() + "'");
  return out;
}

Outcome<std::vector<TypedValue>> KoplEngine::query_attr_under_condition(const EntitySet& input,
                                                                        std::string_view key,
                                                                        std::string_view qkey,
                                                                        std::string_view qvalue) const {
  if (input.empty()) return empty("cannot query an empty entity set");
  auto gkey = ground(key, Namespace::kAttributeKey);
  if (!gkey) return gkey.failure();
  auto gqkey = ground(qkey, Namespace::kQualifierKey);
  if (!gqkey) return gqkey.failure();
  std::vector<TypedValue> out;
  for (auto id : input.ids) {
    for (const auto& fact : kb_.entities()[id].attributes) {
      if (fact.key != gkey.value()) continue;
      for (const auto& q : fact.qualifiers) {
        if (q.key != gqkey.value()) continue;
        auto target = parse_typed(qvalue, q.value.kind());
        if (target && *target == q.value) {
          out.push_back(fact.value);
          break;
        }
      }
    }
  }
  if (out.empty()) {
    return empty("no value for '" + gkey.value() + "' where " + gqkey.value() + " = " + std::string(qvalue));
  }
  return out;
}

Outcome<std::vector<std::string>> KoplEngine::query_relation(const EntitySet& a, const EntitySet& b) const {
  if (a.empty() || b.empty()) return empty("query needs two nonempty inputs");
  const auto from = a.ids.front();
  const auto to = b.ids.front();
  std::vector<std::string> out;
  for (const auto& link : kb_.links(from)) {
    if (link.target == to && link.direction == Direction::kForward) out.emplace_back(link.predicate);
  }
  if (out.empty()) {
    return empty("no relation from " + kb_.entities()[from].name + " to " + kb_.entities()[to].name);
  }
  return out;
}

Outcome<std::vector<TypedValue>> KoplEngine::query_attr_qualifier(const EntitySet& input, std::string_view key,
                                                                  std::string_view value,
                                                                  std::string_view qkey) const {
  if (input.empty()) return empty("cannot query an empty entity set");
  auto gkey = ground(key, Namespace::kAttributeKey);
  if (!gkey) return gkey.failure();
  auto gqkey = ground(qkey, Namespace::kQualifierKey);
  if (!gqkey) return gqkey.failure();
  std::vector<TypedValue> out;
  for (auto id : input.ids) {
    for (const auto& fact : kb_.entities()[id].attributes) {
      if (fact.key != gkey.value()) continue;
      auto target = parse_typed(value, fact.value.kind());
      if (!target || !(*target == fact.value)) continue;
      for (const auto& q : fact.qualifiers) {
        if (q.key == gqkey.value()) out.push_back(q.value);
      }
    }
  }
  if (out.empty()) return empty("no '" + gqkey.value() + "' qualifier on " + gkey.value() + " = " + std::string(value));
  return out;
}

Outcome<std::vector<TypedValue>> KoplEngine::query_relation_qualifier(const EntitySet& a, const EntitySet& b,
                                                                      std::string_view relation,
                                                                      std::string_view qkey) const {
  if (a.empty() || b.empty()) return empty("query needs two nonempty inputs");
  auto grel = ground(relation, Namespace::kRelation);
  if (!grel) return grel.failure();
  auto gqkey = ground(qkey, Namespace::kQualifierKey);
  if (!gqkey) return gqkey.failure();
  const auto from = a.ids.front();
  const auto to = b.ids.front();
  std::vector<TypedValue> out;
  for (const auto& link : kb_.links(from)) {
    if (link.target != to || link.predicate != grel.value()) continue;
    for (const auto& q : *link.qualifiers) {
      if (q.key == gqkey.value()) out.push_back(q.value);
    }
  }
  if (out.empty()) return empty("no '" + gqkey.value() + "' qualifier on that '" + grel.value() + "' link");
  return out;
}

std::string KoplEngine::render_set(const EntitySet& set) const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < set.ids.size() && i < kRenderLimit; ++i) {
    names.push_back(kb_.entities()[set.ids[i]].name);
  }
  auto text = join(names, "; ");
  if (set.ids.size() > kRenderLimit) text += "; ... (" + std::to_string(set.ids.size()) + " entities)";
  return text;
}

ToolCatalog kopl_catalog() {
  auto ref = [](std::string name, std::string description) {
    return ParamSpec{std::move(name), ParamKind::kReference, std::move(description), std::nullopt, true, {}};
  };
  auto schema = [](std::string name, Namespace ns, std::string description) {
    return ParamSpec{std::move(name), ParamKind::kLiteral, std::move(description), ns, true, {}};
  };
  auto literal = [](std::string name, std::string description) {
    return ParamSpec{std::move(name), ParamKind::kLiteral, std::move(description), std::nullopt, true, {}};
  };
  auto choice = [](std::string name, std::vector<std::string> choices, std::string description) {
    return ParamSpec{std::move(name), ParamKind::kLiteral, std::move(description), std::nullopt, true,
                     std::move(choices)};
  };
  const std::vector<std::string> ops{"=", "!=", "<", ">", "<=", ">="};
  const auto input = ref("input", "Entity set from an earlier step");
  const auto key = schema("key", Namespace::kAttributeKey, "Attribute key");
  const auto qkey = schema("qkey", Namespace::kQualifierKey, "Qualifier key");

  std::vector<ToolSpec> tools;
  tools.push_back({"FindAll", "Return every entity in the knowledge base.", {}});
  tools.push_back({"Find", "Return the entities with the given name.",
                   {schema("name", Namespace::kEntityName, "Entity name")}});
  tools.push_back({"FilterConcept", "Keep entities that are instances of a concept or its subclasses.",
                   {input, schema("concept", Namespace::kConcept, "Concept name")}});
  tools.push_back({"FilterStr", "Keep entities whose string attribute equals the value.",
                   {input, key, literal("value", "String value")}});
  for (const auto& [name, kind] : {std::pair{"FilterNum", "number"}, std::pair{"FilterYear", "year"},
                                   std::pair{"FilterDate", "date"}}) {
    tools.push_back({name, std::string("Keep entities whose ") + kind + " attribute satisfies the comparison.",
                     {input, key, literal("value", std::string("A ") + kind + " value"),
                      choice("op", ops, "Comparison operator")}});
  }
  tools.push_back({"QFilterStr", "Keep facts whose string qualifier equals the value.",
                   {input, qkey, literal("qvalue", "String value")}});
  for (const auto& [name, kind] : {std::pair{"QFilterNum", "number"}, std::pair{"QFilterYear", "year"},
                                   std::pair{"QFilterDate", "date"}}) {
    tools.push_back({name, std::string("Keep facts whose ") + kind + " qualifier satisfies the comparison.",
                     {input, qkey, literal("qvalue", std::string("A ") + kind + " value"),
                      choice("op", ops, "Comparison operator")}});
  }
  tools.push_back({"Relate", "Follow a relation from the input entities.",
                   {input, schema("relation", Namespace::kRelation, "Relation name"),
                    choice("direction", {"forward", "backward"}, "Edge direction")}});
  tools.push_back({"And", "Intersection of two entity sets.",
                   {ref("input1", "First entity set"), ref("input2", "Second entity set")}});
  tools.push_back({"Or", "Union of two entity sets.",
                   {ref("input1", "First entity set"), ref("input2", "Second entity set")}});
  tools.push_back({"Count", "Number of entities in the set.", {input}});
  tools.push_back({"SelectBetween", "Pick the entity with the greater or lesser attribute value.",
                   {ref("input1", "First entity"), ref("input2", "Second entity"), key,
                    choice("op", {"greater", "less"}, "Which one to pick")}});
  tools.push_back({"SelectAmong", "Pick the entity with the largest or smallest attribute value.",
                   {input, key, choice("op", {"largest", "smallest"}, "Which extreme to pick")}});
  tools.push_back({"VerifyStr", "Check whether a queried string equals the value.",
                   {ref("input", "Queried value"), literal("value", "String value")}});
  for (const auto& [name, kind] : {std::pair{"VerifyNum", "number"}, std::pair{"VerifyYear", "year"},
                                   std::pair{"VerifyDate", "date"}}) {
    tools.push_back({name, std::string("Check whether a queried ") + kind + " satisfies the comparison.",
                     {ref("input", "Queried value"), literal("value", std::string("A ") + kind + " value"),
                      choice("op", ops, "Comparison operator")}});
  }
  tools.push_back({"QueryName", "Name of the input entity.", {input}});
  tools.push_back({"QueryAttr", "Value of an attribute of the input entity.", {input, key}});
  tools.push_back({"QueryAttrUnderCondition", "Attribute value whose qualifier matches the condition.",
                   {input, key, qkey, literal("qvalue", "Qualifier value")}});
  tools.push_back({"QueryRelation", "Relation from the first entity to the second.",
                   {ref("input1", "Subject entity"), ref("input2", "Object entity")}});
  tools.push_back({"QueryAttrQualifier", "Qualifier value attached to an attribute fact.",
                   {input, key, literal("value", "Attribute value"), qkey}});
  tools.push_back({"QueryRelationQualifier", "Qualifier value attached to a relation fact.",
                   {ref("input1", "Subject entity"), ref("input2", "Object entity"),
                    schema("relation", Namespace::kRelation, "Relation name"), qkey}});
  return ToolCatalog(std::move(tools));
}

KoplEnvironment::KoplEnvironment(const KnowledgeBase& kb, const Grounder& grounder)
    : engine_(kb, grounder), catalog_(kopl_catalog()) {}

std::string KoplEnvironment::render(const Value& value) const {
  if (const auto* set = std::get_if<EntitySet>(&value)) return engine_.render_set(*set);
  if (const auto* tv = std::get_if<TypedValue>(&value)) return tv->to_string();
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  return std::to_string(std::get<std::int64_t>(value));
}

namespace {

template <class T>
std::string all_values_note(const std::vector<T>& values) {
  if (values.size() < 2) return {};
  std::vector<std::string> parts;
  for (const auto& v : values) {
    if constexpr (std::is_same_v<T, TypedValue>) {
      parts.push_back(v.to_string());
    } else {
      parts.push_back(v);
    }
  }
  return "(all values: " + join(parts, "; ") + ")";
}

}  // namespace

Observation KoplEnvironment::invoke(std::string_view tool, const ResolvedArgs& args, std::uint64_t) const {
  auto text = [&](std::string_view name) -> std::string {
    auto it = args.find(name);
    return it == args.end() ? std::string() : it->second.text;
  };
  auto set = [&](std::string_view name) -> const EntitySet* {
    auto it = args.find(name);
    if (it == args.end() || !it->second.value) return nullptr;
    return std::get_if<EntitySet>(it->second.value);
  };
  auto not_a_set = [&](std::string_view name) {
    return failure(fail(FailureKind::kContractViolation,
                        "'" + std::string(name) + "' of " + std::string(tool) + " must reference an entity set"));
  };
  auto op = [&](std::string_view name) { return parse_compare_op(text(name)); };
  auto bad_op = [&] { return failure(fail(FailureKind::kUnsupported, "unsupported operator '" + text("op") + "'")); };

  auto entity_result = [&](Outcome<EntitySet> r) {
    return r ? success(*this, std::move(r.value())) : failure(r.failure());
  };
  auto name_result = [&](Outcome<std::string> r) {
    return r ? success(*this, std::move(r.value())) : failure(r.failure());
  };
  auto values_result = [&](auto r) {
    if (!r) return failure(r.failure());
    auto note = all_values_note(r.value());
    return success(*this, Value(r.value().front()), note);
  };

  const auto& e = engine_;
  if (tool == "FindAll") return entity_result(e.find_all());
  if (tool == "Find") return entity_result(e.find(text("name")));

  static const std::map<std::string_view, ValueKind, std::less<>> kKinds{
      {"FilterStr", ValueKind::kString},  {"FilterNum", ValueKind::kNumber},   {"FilterYear", ValueKind::kYear},
      {"FilterDate", ValueKind::kDate},   {"QFilterStr", ValueKind::kString}, {"QFilterNum", ValueKind::kNumber},
      {"QFilterYear", ValueKind::kYear},  {"QFilterDate", ValueKind::kDate},  {"VerifyStr", ValueKind::kString},
      {"VerifyNum", ValueKind::kNumber},  {"VerifyYear", ValueKind::kYear},   {"VerifyDate", ValueKind::kDate}};

  if (tool.starts_with("Verify")) {
    const auto kind = kKinds.at(tool);
    auto it = args.find("input");
    if (it == args.end() || !it->second.value) return not_a_set("input");
    TypedValue queried;
    if (const auto* tv = std::get_if<TypedValue>(it->second.value)) {
      queried = *tv;
    } else if (const auto* s = std::get_if<std::string>(it->second.value)) {
      queried = kind == ValueKind::kString ? TypedValue::string(*s) : parse_typed(*s, kind).value_or(TypedValue::string(*s));
    } else if (const auto* n = std::get_if<std::int64_t>(it->second.value)) {
      queried = TypedValue::number(static_cast<double>(*n));
    } else {
      return failure(fail(FailureKind::kContractViolation, std::string(tool) + " needs a queried value, not an entity set"));
    }
    auto compare = kind == ValueKind::kString ? std::optional<CompareOp>(CompareOp::kEq) : op("op");
    if (!compare) return bad_op();
    return name_result(e.verify(queried, kind, text("value"), *compare));
  }

  if (tool == "And" || tool == "Or") {
    const auto* a = set("input1");
    const auto* b = set("input2");
    if (!a) return not_a_set("input1");
    if (!b) return not_a_set("input2");
    return entity_result(e.set_op(*a, *b, tool == "And" ? SetOp::kAnd : SetOp::kOr));
  }
  if (tool == "SelectBetween" || tool == "QueryRelation" || tool == "QueryRelationQualifier") {
    const auto* a = set("input1");
    const auto* b = set("input2");
    if (!a) return not_a_set("input1");
    if (!b) return not_a_set("input2");
    if (tool == "SelectBetween") return name_result(e.select_between(*a, *b, text("key"), text("op") == "greater"));
    if (tool == "QueryRelation") return values_result(e.query_relation(*a, *b));
    return values_result(e.query_relation_qualifier(*a, *b, text("relation"), text("qkey")));
  }

  const auto* input = set("input");
  if (!input) return not_a_set("input");
  if (tool == "FilterConcept") return entity_result(e.filter_concept(*input, text("concept")));
  if (tool.starts_with("Filter")) {
    const auto kind = kKinds.at(tool);
    auto compare = kind == ValueKind::kString ? std::optional<CompareOp>(CompareOp::kEq) : op("op");
    if (!compare) return bad_op();
    return entity_result(e.filter_attribute(*input, text("key"), kind, text("value"), *compare));
  }
  if (tool.starts_with("QFilter")) {
    const auto kind = kKinds.at(tool);
    auto compare = kind == ValueKind::kString ? std::optional<CompareOp>(CompareOp::kEq) : op("op");
    if (!compare) return bad_op();
    return entity_result(e.qualifier_filter(*input, text("qkey"), kind, text("qvalue"), *compare));
  }
  if (tool == "Relate") {
    auto direction = parse_direction(text("direction"));
    if (!direction) return failure(fail(FailureKind::kUnsupported, "direction must be forward or backward"));
    return entity_result(e.relate(*input, text("relation"), *direction));
  }
  if (tool == "Count") return success(*this, Value(e.count(*input)));
  if (tool == "SelectAmong") return name_result(e.select_among(*input, text("key"), text("op") == "largest"));
  if (tool == "QueryName") return values_result(e.query_name(*input));
  if (tool == "QueryAttr") return values_result(e.query_attr(*input, text("key")));
  if (tool == "QueryAttrUnderCondition") {
    return values_result(e.query_attr_under_condition(*input, text("key"), text("qkey"), text("qvalue")));
  }
  if (tool == "QueryAttrQualifier") {
    return values_result(e.query_attr_qualifier(*input, text("key"), text("value"), text("qkey")));
  }
  return failure(fail(FailureKind::kUnknownTool, "unknown tool '" + std::string(tool) + "'"));
}

ProgramResult execute_program(const Environment& env, const Plan& program, std::uint64_t seed) {
  for (std::size_t i = 0; i < program.steps.size(); ++i) {
    for (auto ref : program.steps[i].references()) {
      if (ref >= program.start_index + i) {
        throw ProgramError("step " + std::to_string(program.start_index + i) + " references $" +
                           std::to_string(ref) + ", which is not an earlier step");
      }
    }
  }
  ProgramResult result;
  for (std::size_t i = 0; i < program.steps.size(); ++i) {
    const auto& call = program.steps[i];
    if (is_finish(call)) {
      std::map<std::size_t, std::string> outputs;
      const auto& answer = std::get<std::string>(call.args.at("answer"));
      for (auto ref : embedded_refs(answer)) outputs[ref] = binding_text(env, result.observations, ref);
      result.answer = substitute_refs(answer, outputs);
      result.ok = true;
      return result;
    }
    result.observations.push_back(execute_step(env, call, result.observations, seed));
    if (!result.observations.back().ok) {
      result.failed_step = program.start_index + i;
      return result;
    }
  }
  result.ok = true;
  if (!result.observations.empty()) result.answer = env.render(*result.observations.back().value);
  return result;
}

}  // namespace horizon

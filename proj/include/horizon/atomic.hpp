#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "horizon/environment.hpp"
#include "horizon/graph_store.hpp"
#include "horizon/grounding.hpp"
#include "horizon/plan.hpp"
#include "horizon/value.hpp"

namespace horizon {

// Parenthesized prefix term: an atom, or a list whose first item is the head.
struct SExpr {
  std::string atom;
  std::vector<SExpr> items;
  bool is_list = false;

  static SExpr leaf(std::string text) { return SExpr{std::move(text), {}, false}; }
  static SExpr list(std::vector<SExpr> items) { return SExpr{{}, std::move(items), true}; }
  static SExpr call(std::string_view head, std::vector<SExpr> args);

  const std::string& head() const { return items.front().atom; }
  std::string to_string() const;
  bool operator==(const SExpr&) const = default;
};

class SExprError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

SExpr parse_sexpr(std::string_view text);

class AtomicEngine {
 public:
  AtomicEngine(const GraphStore& store, const Grounder& grounder, std::int64_t evaluation_year)
      : store_(store), grounder_(grounder), evaluation_year_(evaluation_year) {}

  const GraphStore& store() const { return store_; }
  std::int64_t evaluation_year() const { return evaluation_year_; }

  // Node id, exact name, class, typed literal, then soft-grounded name.
  Outcome<Value> extract_entity(std::string_view input) const;
  // Forward: {x | (x, relation, t)}; backward: {x | (t, relation, x)}. A
  // literal target matches literal objects (forward only).
  Outcome<EntitySet> find_relation(std::string_view relation, Direction direction, const Value& target) const;
  Outcome<EntitySet> merge(const EntitySet& a, const EntitySet& b) const;
  // Ties keep every extremal node; nodes without the property are skipped.
  Outcome<EntitySet> order(bool argmax, const EntitySet& input, std::string_view property) const;
  Outcome<EntitySet> compare(CompareOp op, std::string_view property, const TypedValue& literal) const;
  // Keeps nodes with a year/date value for `relation` in the given year.
  Outcome<EntitySet> time_constraint(const EntitySet& input, std::string_view relation,
                                     const TypedValue& year) const;
  std::int64_t count(const EntitySet& input) const { return static_cast<std::int64_t>(input.ids.size()); }

  // "NOW" maps to the evaluation year; otherwise a year or an ISO date.
  std::optional<TypedValue> parse_year(std::string_view text) const;

  Outcome<Value> eval(const SExpr& expr) const;

  std::string render_set(const EntitySet& set) const;

 private:
  Outcome<std::string> ground(std::string_view term, Namespace ns) const;
  Outcome<Value> eval_at(const SExpr& expr, const std::string& path) const;

  const GraphStore& store_;
  const Grounder& grounder_;
  std::int64_t evaluation_year_;
};

class CompileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Folds a chain of atomic tool calls into the S-expression of its last step.
SExpr compile_chain(const Plan& chain);

ToolCatalog atomic_catalog();

class AtomicEnvironment final : public Environment {
 public:
  AtomicEnvironment(const GraphStore& store, const Grounder& grounder, std::int64_t evaluation_year);

  std::string_view kind() const override { return "atomic"; }
  const ToolCatalog& catalog() const override { return catalog_; }
  Observation invoke(std::string_view tool, const ResolvedArgs& args, std::uint64_t seed) const override;
  std::string render(const Value& value) const override;

  const AtomicEngine& engine() const { return engine_; }

 private:
  AtomicEngine engine_;
  ToolCatalog catalog_;
};

}  // namespace horizon

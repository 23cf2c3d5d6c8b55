#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "horizon/environment.hpp"
#include "horizon/grounding.hpp"
#include "horizon/kb.hpp"
#include "horizon/value.hpp"

namespace horizon {

enum class SetOp { kAnd, kOr };

// The KoPL operator families over an immutable KB. Every schema term passes
// through the grounder first; empty entity sets are failures (count excepted).
class KoplEngine {
 public:
  KoplEngine(const KnowledgeBase& kb, const Grounder& grounder) : kb_(kb), grounder_(grounder) {}

  const KnowledgeBase& kb() const { return kb_; }

  Outcome<EntitySet> find_all() const;
  Outcome<EntitySet> find(std::string_view name) const;
  Outcome<EntitySet> filter_concept(const EntitySet& input, std::string_view concept_name) const;
  Outcome<EntitySet> filter_attribute(const EntitySet& input, std::string_view key, ValueKind kind,
                                      std::string_view value, CompareOp op) const;
  Outcome<EntitySet> qualifier_filter(const EntitySet& input, std::string_view qkey, ValueKind kind,
                                      std::string_view value, CompareOp op) const;
  Outcome<EntitySet> relate(const EntitySet& input, std::string_view relation, Direction direction) const;
  Outcome<EntitySet> set_op(const EntitySet& a, const EntitySet& b, SetOp op) const;
  std::int64_t count(const EntitySet& input) const { return static_cast<std::int64_t>(input.ids.size()); }
  Outcome<std::string> select_between(const EntitySet& a, const EntitySet& b, std::string_view key,
                                      bool greater) const;
  Outcome<std::string> select_among(const EntitySet& input, std::string_view key, bool largest) const;
  Outcome<std::string> verify(const TypedValue& queried, ValueKind kind, std::string_view value,
                              CompareOp op) const;

  // Projections return every value found, in KB order; callers use the first.
  Outcome<std::vector<std::string>> query_name(const EntitySet& input) const;
  Outcome<std::vector<TypedValue>> query_attr(const EntitySet& input, std::string_view key) const;
  Outcome<std::vector<TypedValue>> query_attr_under_condition(const EntitySet& input, std::string_view key,
                                                              std::string_view qkey,
                                                              std::string_view qvalue) const;
  Outcome<std::vector<std::string>> query_relation(const EntitySet& a, const EntitySet& b) const;
  Outcome<std::vector<TypedValue>> query_attr_qualifier(const EntitySet& input, std::string_view key,
                                                        std::string_view value, std::string_view qkey) const;
  Outcome<std::vector<TypedValue>> query_relation_qualifier(const EntitySet& a, const EntitySet& b,
                                                            std::string_view relation,
                                                            std::string_view qkey) const;

  std::string render_set(const EntitySet& set) const;

 private:
  Outcome<std::string> ground(std::string_view term, Namespace ns) const;

  const KnowledgeBase& kb_;
  const Grounder& grounder_;
};

ToolCatalog kopl_catalog();

class KoplEnvironment final : public Environment {
 public:
  KoplEnvironment(const KnowledgeBase& kb, const Grounder& grounder);

  std::string_view kind() const override { return "kopl"; }
  const ToolCatalog& catalog() const override { return catalog_; }
  Observation invoke(std::string_view tool, const ResolvedArgs& args, std::uint64_t seed) const override;
  std::string render(const Value& value) const override;

  const KoplEngine& engine() const { return engine_; }

 private:
  KoplEngine engine_;
  ToolCatalog catalog_;
};

// Runs a whole program (tool calls with `$i` references) without a policy.
// Throws ProgramError for malformed references; a failing step yields its
// failure together with the step index.
struct ProgramResult {
  bool ok = false;
  std::vector<Observation> observations;
  std::size_t failed_step = 0;
  std::string answer;
};

ProgramResult execute_program(const Environment& env, const Plan& program, std::uint64_t seed = 0);

}  // namespace horizon

#include "horizon/kb.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "horizon/json_io.hpp"

namespace horizon {
namespace {

using Kind = KbError::Kind;

const Json& require(const Json& node, std::string_view key, const std::string& position) {
  if (!node.is_object()) {
    throw KbError(Kind::kMalformed, position, "expected an object");
  }
  auto it = node.find(std::string(key));
  if (it == node.end()) {
    throw KbError(Kind::kMalformed, position, "missing field '" + std::string(key) + "'");
  }
  return *it;
}

std::string require_string(const Json& node, std::string_view key, const std::string& position) {
  const auto& value = require(node, key, position);
  if (!value.is_string()) {
    throw KbError(Kind::kMalformed, position + "." + std::string(key), "expected a string");
  }
  return value.get<std::string>();
}

const Json& optional_array(const Json& node, std::string_view key, const std::string& position) {
  static const Json kEmpty = Json::array();
  auto it = node.find(std::string(key));
  if (it == node.end() || it->is_null()) {
    return kEmpty;
  }
  if (!it->is_array()) {
    throw KbError(Kind::kMalformed, position + "." + std::string(key), "expected a list");
  }
  return *it;
}

std::vector<std::string> string_list(const Json& node, std::string_view key,
                                     const std::string& position) {
  std::vector<std::string> out;
  const auto& list = optional_array(node, key, position);
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (!list[i].is_string()) {
      throw KbError(Kind::kMalformed,
                    position + "." + std::string(key) + "[" + std::to_string(i) + "]",
                    "expected a string");
    }
    out.push_back(list[i].get<std::string>());
  }
  return out;
}

std::vector<Qualifier> parse_qualifiers(const Json& node, const std::string& position) {
  std::vector<Qualifier> out;
  const auto& list = optional_array(node, "qualifiers", position);
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto here = position + ".qualifiers[" + std::to_string(i) + "]";
    out.push_back(Qualifier{require_string(list[i], "key", here),
                            typed_value_from_json(require(list[i], "value", here), here + ".value")});
  }
  return out;
}

Json qualifiers_to_json(const std::vector<Qualifier>& qualifiers) {
  Json out = Json::array();
  for (const auto& q : qualifiers) {
    out.push_back(Json{{"key", q.key}, {"value", typed_value_to_json(q.value)}});
  }
  return out;
}

}  // namespace

Json typed_value_to_json(const TypedValue& value) {
  Json out;
  out["kind"] = std::string(to_string(value.kind()));
  switch (value.kind()) {
    case ValueKind::kString:
      out["value"] = value.as_string();
      break;
    case ValueKind::kNumber:
      out["value"] = value.as_number().amount;
      if (!value.as_number().unit.empty()) {
        out["unit"] = value.as_number().unit;
      }
      break;
    case ValueKind::kYear:
      out["value"] = value.as_year().value;
      break;
    case ValueKind::kDate:
      out["value"] = value.as_date().to_string();
      break;
  }
  return out;
}

TypedValue typed_value_from_json(const Json& node, const std::string& position) {
  const auto kind_text = require_string(node, "kind", position);
  const auto kind = parse_value_kind(kind_text);
  if (!kind) {
    throw KbError(Kind::kMalformed, position + ".kind", "unknown value kind '" + kind_text + "'");
  }
  const auto& value = require(node, "value", position);
  const auto here = position + ".value";
  switch (*kind) {
    case ValueKind::kString:
      if (!value.is_string()) throw KbError(Kind::kMalformed, here, "expected a string");
      return TypedValue::string(value.get<std::string>());
    case ValueKind::kNumber: {
      if (!value.is_number()) throw KbError(Kind::kMalformed, here, "expected a number");
      std::string unit;
      if (auto it = node.find("unit"); it != node.end()) {
        if (!it->is_string()) throw KbError(Kind::kMalformed, position + ".unit", "expected a string");
        unit = it->get<std::string>();
      }
      return TypedValue::number(value.get<double>(), std::move(unit));
    }
    case ValueKind::kYear:
      if (!value.is_number_integer()) throw KbError(Kind::kMalformed, here, "expected an integer");
      return TypedValue::year(value.get<std::int64_t>());
    case ValueKind::kDate: {
      if (!value.is_string()) throw KbError(Kind::kMalformed, here, "expected an ISO date string");
      auto date = Date::parse(value.get<std::string>());
      if (!date) throw KbError(Kind::kMalformed, here, "invalid date '" + value.get<std::string>() + "'");
      return TypedValue::date(*date);
    }
  }
  throw KbError(Kind::kMalformed, position, "unreachable value kind");
}

std::string_view to_string(Direction direction) {
  return direction == Direction::kForward ? "forward" : "backward";
}

std::optional<Direction> parse_direction(std::string_view text) {
  if (text == "forward") return Direction::kForward;
  if (text == "backward") return Direction::kBackward;
  return std::nullopt;
}

KnowledgeBase::KnowledgeBase(std::vector<Concept> concepts, std::vector<Entity> entities)
    : concepts_(std::move(concepts)), entities_(std::move(entities)) {
  for (std::size_t i = 0; i < concepts_.size(); ++i) {
    const auto position = "concepts[" + std::to_string(i) + "]";
    if (!concept_by_id_.emplace(concepts_[i].id, i).second) {
      throw KbError(Kind::kDuplicateId, position, "duplicate concept id '" + concepts_[i].id + "'");
    }
  }
  for (std::size_t i = 0; i < concepts_.size(); ++i) {
    for (std::size_t j = 0; j < concepts_[i].subclass_of.size(); ++j) {
      const auto& parent = concepts_[i].subclass_of[j];
      if (!concept_by_id_.contains(parent)) {
        throw KbError(Kind::kDanglingReference,
                      "concepts[" + std::to_string(i) + "].subclass_of[" + std::to_string(j) + "]",
                      "unknown concept '" + parent + "'");
      }
      children_[parent].push_back(concepts_[i].id);
    }
  }

  // Taxonomy must be acyclic: iterative three-colour DFS over subclass_of.
  std::vector<int> colour(concepts_.size(), 0);
  for (std::size_t root = 0; root < concepts_.size(); ++root) {
    if (colour[root] != 0) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    colour[root] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto& parents = concepts_[node].subclass_of;
      if (next == parents.size()) {
        colour[node] = 2;
        stack.pop_back();
        continue;
      }
      const auto parent = concept_by_id_.at(parents[next++]);
      if (colour[parent] == 1) {
        throw KbError(Kind::kCyclicTaxonomy, "concepts[" + std::to_string(parent) + "]",
                      "subclass cycle through '" + concepts_[parent].id + "'");
      }
      if (colour[parent] == 0) {
        colour[parent] = 1;
        stack.emplace_back(parent, 0);
      }
    }
  }

  for (std::size_t i = 0; i < entities_.size(); ++i) {
    if (!entity_by_id_.emplace(entities_[i].id, i).second) {
      throw KbError(Kind::kDuplicateId, "entities[" + std::to_string(i) + "]",
                    "duplicate entity id '" + entities_[i].id + "'");
    }
  }

  links_.resize(entities_.size());
  std::vector<std::set<std::tuple<std::string_view, Direction, std::size_t>>> seen(entities_.size());
  auto add_link = [&](std::size_t from, const Link& link) {
    if (seen[from].emplace(link.predicate, link.direction, link.target).second) {
      links_[from].push_back(link);
    }
  };

  for (std::size_t i = 0; i < entities_.size(); ++i) {
    const auto& e = entities_[i];
    const auto position = "entities[" + std::to_string(i) + "]";
    for (std::size_t j = 0; j < e.instance_of.size(); ++j) {
      if (!concept_by_id_.contains(e.instance_of[j])) {
        throw KbError(Kind::kDanglingReference,
                      position + ".instance_of[" + std::to_string(j) + "]",
                      "unknown concept '" + e.instance_of[j] + "'");
      }
    }
    for (std::size_t j = 0; j < e.relations.size(); ++j) {
      const auto& edge = e.relations[j];
      auto target = entity_by_id_.find(edge.target);
      if (target == entity_by_id_.end()) {
        throw KbError(Kind::kDanglingReference,
                      position + ".relations[" + std::to_string(j) + "].target",
                      "unknown entity '" + edge.target + "'");
      }
    }
    name_index_[e.name].push_back(i);
  }

  // Declared edges first so their qualifiers win over implied inverses.
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    for (const auto& edge : entities_[i].relations) {
      add_link(i, Link{edge.predicate, edge.direction, entity_by_id_.at(edge.target), &edge.qualifiers});
    }
  }
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    for (const auto& edge : entities_[i].relations) {
      const auto target = entity_by_id_.at(edge.target);
      add_link(target, Link{edge.predicate, flip(edge.direction), i, &edge.qualifiers});
    }
  }
}

std::optional<std::size_t> KnowledgeBase::entity_index(std::string_view id) const {
  auto it = entity_by_id_.find(std::string(id));
  if (it == entity_by_id_.end()) return std::nullopt;
  return it->second;
}

const Entity* KnowledgeBase::find_entity(std::string_view id) const {
  auto index = entity_index(id);
  return index ? &entities_[*index] : nullptr;
}

const Concept* KnowledgeBase::find_concept(std::string_view id) const {
  auto it = concept_by_id_.find(std::string(id));
  return it == concept_by_id_.end() ? nullptr : &concepts_[it->second];
}

std::span<const std::size_t> KnowledgeBase::entities_named(std::string_view name) const {
  auto it = name_index_.find(name);
  if (it == name_index_.end()) return {};
  return it->second;
}

std::vector<std::string> KnowledgeBase::concepts_named(std::string_view name) const {
  std::vector<std::string> out;
  for (const auto& c : concepts_) {
    if (c.name == name) out.push_back(c.id);
  }
  return out;
}

std::span<const std::string> KnowledgeBase::direct_subclasses(std::string_view concept_id) const {
  auto it = children_.find(std::string(concept_id));
  if (it == children_.end()) return {};
  return it->second;
}

std::vector<std::string> concept_closure(const KnowledgeBase& kb, std::string_view concept_id) {
  if (!kb.find_concept(concept_id)) {
    throw KbError(Kind::kUnknownConcept, "", "unknown concept '" + std::string(concept_id) + "'");
  }
  std::vector<std::string> out{std::string(concept_id)};
  std::set<std::string, std::less<>> seen{std::string(concept_id)};
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (const auto& child : kb.direct_subclasses(out[i])) {
      if (seen.insert(child).second) out.push_back(child);
    }
  }
  return out;
}

KnowledgeBase load_kb(std::string_view document) {
  Json root;
  try {
    root = Json::parse(document);
  } catch (const Json::parse_error& e) {
    throw KbError(Kind::kMalformed, "byte " + std::to_string(e.byte), e.what());
  }
  if (!root.is_object()) {
    throw KbError(Kind::kMalformed, "$", "expected a top-level object");
  }

  std::vector<Concept> concepts;
  const auto& concept_list = optional_array(root, "concepts", "$");
  for (std::size_t i = 0; i < concept_list.size(); ++i) {
    const auto position = "concepts[" + std::to_string(i) + "]";
    const auto& node = concept_list[i];
    concepts.push_back(Concept{require_string(node, "id", position), require_string(node, "name", position),
                               string_list(node, "subclass_of", position)});
  }

  std::vector<Entity> entities;
  const auto& entity_list = optional_array(root, "entities", "$");
  for (std::size_t i = 0; i < entity_list.size(); ++i) {
    const auto position = "entities[" + std::to_string(i) + "]";
    const auto& node = entity_list[i];
    Entity e;
    e.id = require_string(node, "id", position);
    e.name = require_string(node, "name", position);
    e.instance_of = string_list(node, "instance_of", position);
    const auto& attributes = optional_array(node, "attributes", position);
    for (std::size_t j = 0; j < attributes.size(); ++j) {
      const auto here = position + ".attributes[" + std::to_string(j) + "]";
      e.attributes.push_back(AttributeFact{require_string(attributes[j], "key", here),
                                           typed_value_from_json(require(attributes[j], "value", here),
                                                                 here + ".value"),
                                           parse_qualifiers(attributes[j], here)});
    }
    const auto& relations = optional_array(node, "relations", position);
    for (std::size_t j = 0; j < relations.size(); ++j) {
      const auto here = position + ".relations[" + std::to_string(j) + "]";
      const auto direction_text = require_string(relations[j], "direction", here);
      auto direction = parse_direction(direction_text);
      if (!direction) {
        throw KbError(Kind::kMalformed, here + ".direction",
                      "expected 'forward' or 'backward', got '" + direction_text + "'");
      }
      e.relations.push_back(RelationEdge{require_string(relations[j], "predicate", here), *direction,
                                         require_string(relations[j], "target", here),
                                         parse_qualifiers(relations[j], here)});
    }
    entities.push_back(std::move(e));
  }
  return KnowledgeBase(std::move(concepts), std::move(entities));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

KnowledgeBase load_kb_file(const std::filesystem::path& path) { return load_kb(read_file(path)); }

std::string serialize_kb(const KnowledgeBase& kb) {
  Json root;
  root["concepts"] = Json::array();
  for (const auto& c : kb.concepts()) {
    root["concepts"].push_back(Json{{"id", c.id}, {"name", c.name}, {"subclass_of", c.subclass_of}});
  }
  root["entities"] = Json::array();
  for (const auto& e : kb.entities()) {
    Json node{{"id", e.id}, {"name", e.name}, {"instance_of", e.instance_of}};
    node["attributes"] = Json::array();
    for (const auto& a : e.attributes) {
      node["attributes"].push_back(Json{{"key", a.key},
                                        {"value", typed_value_to_json(a.value)},
                                        {"qualifiers", qualifiers_to_json(a.qualifiers)}});
    }
    node["relations"] = Json::array();
    for (const auto& r : e.relations) {
      node["relations"].push_back(Json{{"predicate", r.predicate},
                                       {"direction", std::string(to_string(r.direction))},
                                       {"target", r.target},
                                       {"qualifiers", qualifiers_to_json(r.qualifiers)}});
    }
    root["entities"].push_back(std::move(node));
  }
  return root.dump(2);
}

}  // namespace horizon

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "horizon/typed_value.hpp"

namespace horizon {

struct Qualifier {
  std::string key;
  TypedValue value;

  bool operator==(const Qualifier&) const = default;
};

struct AttributeFact {
  std::string key;
  TypedValue value;
  std::vector<Qualifier> qualifiers;

  bool operator==(const AttributeFact&) const = default;
};

enum class Direction { kForward, kBackward };

std::string_view to_string(Direction direction);
std::optional<Direction> parse_direction(std::string_view text);
inline Direction flip(Direction d) {
  return d == Direction::kForward ? Direction::kBackward : Direction::kForward;
}

struct RelationEdge {
  std::string predicate;
  Direction direction = Direction::kForward;
  std::string target;
  std::vector<Qualifier> qualifiers;

  bool operator==(const RelationEdge&) const = default;
};

struct Entity {
  std::string id;
  std::string name;
  std::vector<std::string> instance_of;
  std::vector<AttributeFact> attributes;
  std::vector<RelationEdge> relations;

  bool operator==(const Entity&) const = default;
};

struct Concept {
  std::string id;
  std::string name;
  std::vector<std::string> subclass_of;

  bool operator==(const Concept&) const = default;
};

class KbError : public std::runtime_error {
 public:
  enum class Kind { kMalformed, kDanglingReference, kCyclicTaxonomy, kUnknownConcept, kDuplicateId };

  KbError(Kind kind, std::string position, const std::string& message)
      : std::runtime_error(position.empty() ? message : position + ": " + message),
        kind_(kind),
        position_(std::move(position)) {}

  Kind kind() const { return kind_; }
  const std::string& position() const { return position_; }

 private:
  Kind kind_;
  std::string position_;
};

// One traversable edge from an entity. Declared edges and their implied
// inverses both appear, so traversal works from either endpoint.
struct Link {
  std::string_view predicate;
  Direction direction;
  std::size_t target;
  const std::vector<Qualifier>* qualifiers;
};

// Immutable after construction; safe to share across threads.
class KnowledgeBase {
 public:
  KnowledgeBase() = default;
  KnowledgeBase(std::vector<Concept> concepts, std::vector<Entity> entities);

  KnowledgeBase(const KnowledgeBase&) = delete;
  KnowledgeBase& operator=(const KnowledgeBase&) = delete;
  KnowledgeBase(KnowledgeBase&&) = default;
  KnowledgeBase& operator=(KnowledgeBase&&) = default;

  std::span<const Entity> entities() const { return entities_; }
  std::span<const Concept> concepts() const { return concepts_; }

  std::optional<std::size_t> entity_index(std::string_view id) const;
  const Entity* find_entity(std::string_view id) const;
  const Concept* find_concept(std::string_view id) const;

  // Exact-name lookup; one name may map to several entities.
  std::span<const std::size_t> entities_named(std::string_view name) const;
  const std::map<std::string, std::vector<std::size_t>, std::less<>>& name_index() const {
    return name_index_;
  }

  std::span<const Link> links(std::size_t entity) const { return links_[entity]; }
  std::vector<std::string> concepts_named(std::string_view name) const;
  std::span<const std::string> direct_subclasses(std::string_view concept_id) const;

  bool operator==(const KnowledgeBase& other) const {
    return concepts_ == other.concepts_ && entities_ == other.entities_;
  }

 private:
  std::vector<Concept> concepts_;
  std::vector<Entity> entities_;
  std::unordered_map<std::string, std::size_t> entity_by_id_;
  std::unordered_map<std::string, std::size_t> concept_by_id_;
  std::unordered_map<std::string, std::vector<std::string>> children_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> name_index_;
  std::vector<std::vector<Link>> links_;
};

// Fail-fast load of the KB document format; errors carry a JSON-path position.
KnowledgeBase load_kb(std::string_view document);
KnowledgeBase load_kb_file(const std::filesystem::path& path);
std::string serialize_kb(const KnowledgeBase& kb);

// The concept plus all transitive subclasses, in discovery order.
std::vector<std::string> concept_closure(const KnowledgeBase& kb, std::string_view concept_id);

std::string read_file(const std::filesystem::path& path);

}  // namespace horizon

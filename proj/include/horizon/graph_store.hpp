#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "horizon/kb.hpp"
#include "horizon/typed_value.hpp"

namespace horizon {

struct GraphNode {
  std::string id;
  std::string name;
  std::vector<std::string> classes;

  bool operator==(const GraphNode&) const = default;
};

struct Triple {
  std::size_t subject = 0;
  std::string predicate;
  std::variant<std::size_t, TypedValue> object;

  bool object_is_node() const { return object.index() == 0; }
  std::size_t object_node() const { return std::get<0>(object); }
  const TypedValue& object_literal() const { return std::get<1>(object); }

  bool operator==(const Triple&) const = default;
};

// Triple store for the atomic engine. Iteration order is file order; exact
// duplicate triples are dropped on construction.
class GraphStore {
 public:
  GraphStore() = default;
  GraphStore(std::vector<GraphNode> nodes, std::vector<Triple> triples);

  GraphStore(const GraphStore&) = delete;
  GraphStore& operator=(const GraphStore&) = delete;
  GraphStore(GraphStore&&) = default;
  GraphStore& operator=(GraphStore&&) = default;

  std::span<const GraphNode> nodes() const { return nodes_; }
  std::span<const Triple> triples() const { return triples_; }

  std::optional<std::size_t> node_index(std::string_view id) const;
  std::span<const std::size_t> nodes_named(std::string_view name) const;
  const std::map<std::string, std::vector<std::size_t>, std::less<>>& name_index() const {
    return name_index_;
  }
  // Nodes carrying the class, in node order. Empty when the class is unknown.
  std::span<const std::size_t> instances_of(std::string_view cls) const;
  const std::map<std::string, std::vector<std::size_t>, std::less<>>& class_index() const {
    return class_index_;
  }

  bool operator==(const GraphStore& other) const {
    return nodes_ == other.nodes_ && triples_ == other.triples_;
  }

 private:
  std::vector<GraphNode> nodes_;
  std::vector<Triple> triples_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> name_index_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> class_index_;
};

// {nodes:[{id,name,classes}], triples:[{s,p,o_node}|{s,p,o_literal}]}.
// Errors reuse KbError so both loaders report positions the same way.
GraphStore load_graph_store(std::string_view document);
GraphStore load_graph_store_file(const std::filesystem::path& path);
std::string serialize_graph_store(const GraphStore& store);

}  // namespace horizon

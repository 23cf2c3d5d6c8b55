#include "horizon/graph_store.hpp"

#include <set>

#include "horizon/json_io.hpp"

namespace horizon {
namespace {

using Kind = KbError::Kind;

std::string field_string(const Json& node, const char* key, const std::string& position) {
  auto it = node.find(key);
  if (it == node.end() || !it->is_string()) {
    throw KbError(Kind::kMalformed, position, std::string("missing string field '") + key + "'");
  }
  return it->get<std::string>();
}

}  // namespace

GraphStore::GraphStore(std::vector<GraphNode> nodes, std::vector<Triple> triples)
    : nodes_(std::move(nodes)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!by_id_.emplace(nodes_[i].id, i).second) {
      throw KbError(Kind::kDuplicateId, "nodes[" + std::to_string(i) + "]",
                    "duplicate node id '" + nodes_[i].id + "'");
    }
    name_index_[nodes_[i].name].push_back(i);
    std::set<std::string> seen;
    for (const auto& cls : nodes_[i].classes) {
      if (seen.insert(cls).second) class_index_[cls].push_back(i);
    }
  }
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& t = triples[i];
    const auto position = "triples[" + std::to_string(i) + "]";
    if (t.subject >= nodes_.size() || (t.object_is_node() && t.object_node() >= nodes_.size())) {
      throw KbError(Kind::kDanglingReference, position, "triple endpoint out of range");
    }
    bool duplicate = false;
    for (const auto& existing : triples_) {
      if (existing == t) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) triples_.push_back(t);
  }
}

std::optional<std::size_t> GraphStore::node_index(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::span<const std::size_t> GraphStore::nodes_named(std::string_view name) const {
  auto it = name_index_.find(name);
  if (it == name_index_.end()) return {};
  return it->second;
}

std::span<const std::size_t> GraphStore::instances_of(std::string_view cls) const {
  auto it = class_index_.find(cls);
  if (it == class_index_.end()) return {};
  return it->second;
}

GraphStore load_graph_store(std::string_view document) {
  Json root;
  try {
    root = Json::parse(document);
  } catch (const Json::parse_error& e) {
    throw KbError(Kind::kMalformed, "byte " + std::to_string(e.byte), e.what());
  }
  if (!root.is_object()) throw KbError(Kind::kMalformed, "$", "expected a top-level object");

  std::vector<GraphNode> nodes;
  std::unordered_map<std::string, std::size_t> ids;
  if (auto it = root.find("nodes"); it != root.end()) {
    if (!it->is_array()) throw KbError(Kind::kMalformed, "nodes", "expected a list");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto position = "nodes[" + std::to_string(i) + "]";
      const auto& node = (*it)[i];
      GraphNode n{field_string(node, "id", position), field_string(node, "name", position), {}};
      if (auto classes = node.find("classes"); classes != node.end()) {
        if (!classes->is_array()) throw KbError(Kind::kMalformed, position + ".classes", "expected a list");
        for (const auto& c : *classes) {
          if (!c.is_string()) throw KbError(Kind::kMalformed, position + ".classes", "expected strings");
          n.classes.push_back(c.get<std::string>());
        }
      }
      ids.emplace(n.id, nodes.size());
      nodes.push_back(std::move(n));
    }
  }

  std::vector<Triple> triples;
  if (auto it = root.find("triples"); it != root.end()) {
    if (!it->is_array()) throw KbError(Kind::kMalformed, "triples", "expected a list");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto position = "triples[" + std::to_string(i) + "]";
      const auto& node = (*it)[i];
      const auto s = field_string(node, "s", position);
      auto subject = ids.find(s);
      if (subject == ids.end()) {
        throw KbError(Kind::kDanglingReference, position + ".s", "unknown node '" + s + "'");
      }
      Triple t;
      t.subject = subject->second;
      t.predicate = field_string(node, "p", position);
      const bool has_node = node.contains("o_node");
      const bool has_literal = node.contains("o_literal");
      if (has_node == has_literal) {
        throw KbError(Kind::kMalformed, position, "exactly one of o_node and o_literal is required");
      }
      if (has_node) {
        const auto o = field_string(node, "o_node", position);
        auto object = ids.find(o);
        if (object == ids.end()) {
          throw KbError(Kind::kDanglingReference, position + ".o_node", "unknown node '" + o + "'");
        }
        t.object = object->second;
      } else {
        t.object = typed_value_from_json(node.at("o_literal"), position + ".o_literal");
      }
      triples.push_back(std::move(t));
    }
  }
  return GraphStore(std::move(nodes), std::move(triples));
}

GraphStore load_graph_store_file(const std::filesystem::path& path) {
  return load_graph_store(read_file(path));
}

std::string serialize_graph_store(const GraphStore& store) {
  Json root;
  root["nodes"] = Json::array();
  for (const auto& n : store.nodes()) {
    root["nodes"].push_back(Json{{"id", n.id}, {"name", n.name}, {"classes", n.classes}});
  }
  root["triples"] = Json::array();
  for (const auto& t : store.triples()) {
    Json node{{"s", store.nodes()[t.subject].id}, {"p", t.predicate}};
    if (t.object_is_node()) {
      node["o_node"] = store.nodes()[t.object_node()].id;
    } else {
      node["o_literal"] = typed_value_to_json(t.object_literal());
    }
    root["triples"].push_back(std::move(node));
  }
  return root.dump(2);
}

}  // namespace horizon

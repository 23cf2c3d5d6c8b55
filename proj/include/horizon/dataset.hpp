#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "horizon/environment.hpp"
#include "horizon/graph_store.hpp"
#include "horizon/grounding.hpp"
#include "horizon/kb.hpp"
#include "horizon/mock_tools.hpp"
#include "horizon/prompts.hpp"
#include "horizon/task.hpp"

namespace horizon {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EngineKind { kKopl, kAtomic, kQa };

std::string_view to_string(EngineKind kind);
std::optional<EngineKind> parse_engine_kind(std::string_view text);

ToolCatalog catalog_for(EngineKind kind);

// Task file:
// {"name", "engine": kopl|atomic|qa, "source": <kb/graph/corpus path>,
//  "demonstrations": <path, optional>, "evaluation_year": <atomic, optional>,
//  "tasks": [{"id", "question", "answers": [...], "match", "gold_plan": [...],
//             "program": [{"function", "inputs", "dependencies"}], "has_bridge",
//             "has_comparison"}]}
// Relative paths resolve against the task file's directory.
struct Dataset {
  std::string name;
  EngineKind engine = EngineKind::kKopl;
  std::filesystem::path path;
  std::filesystem::path source;
  std::vector<Demonstration> demonstrations;
  std::int64_t evaluation_year = 2024;
  std::vector<Task> tasks;
};

Dataset load_dataset(const std::filesystem::path& path);

// Gold execution graph of a task: merged program DAG when a program is given,
// otherwise the merged DAG of the gold plan.
ExecutionGraph gold_graph(const Task& task);
std::string last_gold_tool(const Task& task);

// Everything an engine needs, owned together so references stay valid.
struct EnvironmentBundle {
  std::unique_ptr<KnowledgeBase> kb;
  std::unique_ptr<GraphStore> graph;
  std::unique_ptr<MockCorpus> corpus;
  std::unique_ptr<SchemaIndex> index;
  std::unique_ptr<Grounder> grounder;
  std::unique_ptr<Environment> env;
  std::unique_ptr<PromptBuilder> prompts;
};

struct EnvironmentOptions {
  Robustness robustness = Robustness::kHigh;
  std::size_t top_k = 0;  // QA retrieval depth; 0 picks 10 (high) or 1 (low)
  std::shared_ptr<const CandidateValidator> validator;
};

EnvironmentBundle make_environment(const Dataset& dataset, const EnvironmentOptions& options);

}  // namespace horizon

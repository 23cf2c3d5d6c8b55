#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "horizon/dataset.hpp"
#include "horizon/harness.hpp"
#include "horizon/kb.hpp"
#include "horizon/kopl.hpp"

namespace testing {

inline std::filesystem::path data_path(const std::string& rel) {
  return std::filesystem::path(HORIZON_SOURCE_DIR) / "data" / rel;
}

// Mini-KB with a KoPL environment; owns everything the environment refers to.
struct MiniKopl {
  horizon::KnowledgeBase kb;
  horizon::SchemaIndex index;
  horizon::Grounder grounder;
  horizon::KoplEnvironment env;

  explicit MiniKopl(horizon::Robustness mode = horizon::Robustness::kHigh,
                    const std::string& file = "kopl/mini_kb.json")
      : kb(horizon::load_kb_file(data_path(file))),
        index(horizon::SchemaIndex::build(kb)),
        grounder(index, mode),
        env(kb, grounder) {}
};

inline horizon::Plan plan_of(const std::string& wire, const horizon::ToolCatalog& catalog) {
  return horizon::parse_plan(wire, catalog.with_finish());
}

struct Suite {
  horizon::Dataset dataset;
  horizon::EnvironmentBundle bundle;
  std::unique_ptr<horizon::Tokenizer> tokenizer = horizon::make_tokenizer("whitespace");

  explicit Suite(const std::string& rel, horizon::Robustness mode = horizon::Robustness::kHigh, std::size_t top_k = 0)
      : dataset(horizon::load_dataset(data_path(rel))),
        bundle(horizon::make_environment(dataset, {mode, top_k, nullptr})) {}

  horizon::RunContext context(horizon::Budget budget = {}) const {
    return {*bundle.env, *bundle.prompts, *tokenizer, budget};
  }
  const horizon::Task& task(const std::string& id) const {
    for (const auto& t : dataset.tasks) {
      if (t.id == id) return t;
    }
    throw std::out_of_range(id);
  }
};

inline const char* kSuites[] = {"kopl/mini_tasks.json", "kopl/nba_tasks.json", "atomic/tasks.json", "qa/tasks.json"};

}  // namespace testing

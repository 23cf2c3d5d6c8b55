#include "horizon/dataset.hpp"

#include <set>

#include "horizon/atomic.hpp"
#include "horizon/json_io.hpp"
#include "horizon/kopl.hpp"

namespace horizon {
namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& rel) {
  std::filesystem::path p(rel);
  return p.is_absolute() ? p : base / p;
}

KoplProgram program_from_json(const Json& node, const std::string& where) {
  if (!node.is_array()) throw DatasetError(where + " must be a list");
  KoplProgram program;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const auto& s = node[i];
    const auto at = where + "[" + std::to_string(i) + "]";
    if (!s.is_object() || !s.contains("function")) throw DatasetError(at + " needs 'function'");
    KoplStep step;
    step.function = s["function"].get<std::string>();
    for (const auto& in : s.value("inputs", Json::array())) step.inputs.push_back(in.get<std::string>());
    for (const auto& d : s.value("dependencies", Json::array())) step.dependencies.push_back(d.get<std::size_t>());
    program.steps.push_back(std::move(step));
  }
  try {
    validate_program(program);
  } catch (const ProgramError& e) {
    throw DatasetError(where + ": " + e.what());
  }
  return program;
}

}  // namespace

std::string_view to_string(EngineKind kind) {
  switch (kind) {
    case EngineKind::kKopl:
      return "kopl";
    case EngineKind::kAtomic:
      return "atomic";
    case EngineKind::kQa:
      return "qa";
  }
  return "unknown";
}

std::optional<EngineKind> parse_engine_kind(std::string_view text) {
  for (auto k : {EngineKind::kKopl, EngineKind::kAtomic, EngineKind::kQa}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

ToolCatalog catalog_for(EngineKind kind) {
  switch (kind) {
    case EngineKind::kKopl:
      return kopl_catalog();
    case EngineKind::kAtomic:
      return atomic_catalog();
    case EngineKind::kQa:
      return qa_catalog();
  }
  return {};
}

Dataset load_dataset(const std::filesystem::path& path) {
  Json root;
  try {
    root = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw DatasetError(path.string() + ": not valid JSON at byte " + std::to_string(e.byte));
  } catch (const std::exception& e) {
    throw DatasetError(e.what());
  }
  const auto base = path.parent_path();
  Dataset ds;
  ds.path = path;
  try {
    ds.name = root.at("name").get<std::string>();
    const auto engine = root.at("engine").get<std::string>();
    auto kind = parse_engine_kind(engine);
    if (!kind) throw DatasetError("unknown engine '" + engine + "'");
    ds.engine = *kind;
    ds.source = resolve(base, root.at("source").get<std::string>());
    if (root.contains("demonstrations")) {
      ds.demonstrations = load_demonstrations_file(resolve(base, root["demonstrations"].get<std::string>()).string());
    }
    ds.evaluation_year = root.value("evaluation_year", std::int64_t{2024});
    const auto catalog = catalog_for(ds.engine).with_finish();
    std::set<std::string> ids;
    const auto& tasks = root.at("tasks");
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const auto& t = tasks[i];
      const auto where = "tasks[" + std::to_string(i) + "]";
      Task task;
      task.id = t.at("id").get<std::string>();
      if (!ids.insert(task.id).second) throw DatasetError(where + ": duplicate id '" + task.id + "'");
      task.question = t.at("question").get<std::string>();
      for (const auto& a : t.at("answers")) task.gold_answers.push_back(a.get<std::string>());
      const auto match = t.value("match", std::string("exact-set"));
      auto mode = parse_match_mode(match);
      if (!mode) throw DatasetError(where + ": unknown match mode '" + match + "'");
      task.match = *mode;
      try {
        task.gold_plan = parse_plan(t.at("gold_plan").dump(), catalog);
      } catch (const PlanError& e) {
        throw DatasetError(where + ".gold_plan: " + e.what());
      }
      if (t.contains("program")) task.program = program_from_json(t["program"], where + ".program");
      task.dataset = ds.name;
      task.has_bridge = t.value("has_bridge", false);
      task.has_comparison = t.value("has_comparison", false);
      ds.tasks.push_back(std::move(task));
    }
  } catch (const Json::exception& e) {
    throw DatasetError(path.string() + ": " + e.what());
  }
  return ds;
}

ExecutionGraph gold_graph(const Task& task) {
  return task.program ? derive_gold_dag_kopl(*task.program) : derive_gold_dag(task.gold_plan);
}

std::string last_gold_tool(const Task& task) {
  const auto steps = gold_tool_steps(task.gold_plan);
  return steps.empty() ? std::string() : steps.back().tool;
}

EnvironmentBundle make_environment(const Dataset& dataset, const EnvironmentOptions& options) {
  EnvironmentBundle b;
  switch (dataset.engine) {
    case EngineKind::kKopl:
      b.kb = std::make_unique<KnowledgeBase>(load_kb_file(dataset.source));
      b.index = std::make_unique<SchemaIndex>(SchemaIndex::build(*b.kb));
      b.grounder = std::make_unique<Grounder>(*b.index, options.robustness, nullptr, options.validator);
      b.env = std::make_unique<KoplEnvironment>(*b.kb, *b.grounder);
      break;
    case EngineKind::kAtomic:
      b.graph = std::make_unique<GraphStore>(load_graph_store_file(dataset.source));
      b.index = std::make_unique<SchemaIndex>(SchemaIndex::build(*b.graph));
      b.grounder = std::make_unique<Grounder>(*b.index, options.robustness, nullptr, options.validator);
      b.env = std::make_unique<AtomicEnvironment>(*b.graph, *b.grounder, dataset.evaluation_year);
      break;
    case EngineKind::kQa: {
      b.corpus = std::make_unique<MockCorpus>(load_corpus_file(dataset.source.string()));
      const std::size_t k =
          options.top_k ? options.top_k : (options.robustness == Robustness::kHigh ? kHighCandidates : kLowCandidates);
      b.env = std::make_unique<QaEnvironment>(*b.corpus, k);
      break;
    }
  }
  b.prompts = std::make_unique<PromptBuilder>(to_string(dataset.engine), b.env->catalog(), dataset.demonstrations);
  return b;
}

}  // namespace horizon

#include "horizon/cli.hpp"

#include <fstream>
#include <iostream>

#include "horizon/gee.hpp"
#include "horizon/graph_store.hpp"
#include "horizon/json_io.hpp"
#include "horizon/runner.hpp"

namespace horizon {
namespace fs = std::filesystem;
namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l + "\n";
  return s;
}

void apply(RunConfig& c, const RunOverrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.planner) {
    if (*o.planner == "both") {
      c.planners = {Horizon::kSh, Horizon::kFh};
    } else if (auto h = parse_horizon(*o.planner)) {
      c.planners = {*h};
    } else {
      throw ConfigError("unknown planner '" + *o.planner + "'");
    }
  }
  if (o.robustness) {
    auto r = parse_robustness(*o.robustness);
    if (!r) throw ConfigError("unknown robustness '" + *o.robustness + "'");
    c.robustness = *r;
  }
  if (o.trials) {
    if (*o.trials == 0) throw ConfigError("trials must be positive");
    c.trials = *o.trials;
  }
  if (o.jobs) {
    if (*o.jobs == 0) throw ConfigError("jobs must be positive");
    c.jobs = *o.jobs;
  }
}

std::string manifest_json(const RunConfig& c, const Dataset& ds, const fs::path& out) {
  OrderedJson m;
  m["config_hash"] = config_hash(c);
  m["seed"] = c.seed;
  m["dataset"] = ds.name;
  m["dataset_path"] = ds.path.generic_string();
  m["source"] = ds.source.generic_string();
  OrderedJson ids = OrderedJson::array();
  for (const auto& t : ds.tasks) ids.push_back(t.id);
  m["task_ids"] = ids;
  m["engine"] = std::string(to_string(c.engine));
  m["planners"] = OrderedJson::array();
  for (auto h : c.planners) m["planners"].push_back(std::string(to_string(h)));
  m["policy"] = c.policy.kind;
  m["robustness"] = std::string(to_string(c.robustness));
  m["trials"] = c.trials;
  m["budget"] = {{"max_tool_calls", c.budget.max_tool_calls},
                 {"max_replans", c.budget.max_replans},
                 {"max_format_retries", c.budget.max_format_retries}};
  m["config"] = OrderedJson::parse(canonical_config(c));
  m["outputs"] = {{"traces", (out / "traces.jsonl").generic_string()},
                  {"outcomes", (out / "outcomes.jsonl").generic_string()},
                  {"summary", (out / "summary.txt").generic_string()}};
  return m.dump(2) + "\n";
}

}  // namespace

int cmd_run(const fs::path& config_path, const fs::path& out, const RunOverrides& overrides, std::ostream& log,
            std::ostream& err) {
  RunConfig config;
  Dataset dataset;
  try {
    config = load_run_config(config_path);
    apply(config, overrides);
    dataset = load_dataset(config.dataset);
    if (dataset.engine != config.engine) {
      throw ConfigError("config engine '" + std::string(to_string(config.engine)) + "' does not match dataset engine '" +
                        std::string(to_string(dataset.engine)) + "'");
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    fs::create_directories(out);
    write_text(out / "manifest.json", manifest_json(config, dataset, out));
    EnvironmentOptions options;
    options.robustness = config.robustness;
    options.top_k = config.top_k;
    if (!config.validator_endpoint.empty()) options.validator = std::make_shared<RemoteValidator>(config.validator_endpoint);
    const auto bundle = make_environment(dataset, options);
    const auto result = run_experiment(config, dataset, bundle);
    write_text(out / "traces.jsonl", join_lines(result.trace_lines));
    std::string outcomes;
    for (const auto& r : result.outcomes) outcomes += outcome_to_json(r) + "\n";
    write_text(out / "outcomes.jsonl", outcomes);
    Report summary;
    if (!result.outcomes.empty()) summary.groups = summarize_run(result.outcomes);
    summary.fit_notice = "run summary; use `stats` for the fitted model";
    const auto text = report_text(summary);
    write_text(out / "summary.txt", text);
    log << "run " << result.run_id << ": " << result.outcomes.size() << " records written to " << out.string() << "\n"
        << text;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_stats(const std::vector<fs::path>& inputs, const fs::path& out, std::ostream& log, std::ostream& err) {
  try {
    std::vector<OutcomeRecord> records;
    for (const auto& in : inputs) {
      const auto path = fs::is_directory(in) ? in / "outcomes.jsonl" : in;
      for (auto& r : load_outcomes(read_file(path))) records.push_back(std::move(r));
    }
    if (records.empty()) {
      err << "error: no outcome records in the given inputs\n";
      return kExitRuntime;
    }
    const auto report = build_report(records);
    fs::create_directories(out);
    const auto text = report_text(report);
    write_text(out / "report.txt", text);
    write_text(out / "report.json", report_json(report) + "\n");
    log << text;
  } catch (const GeeError& e) {
    err << "model error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_inspect(const fs::path& dir, const std::string& question_id, std::optional<std::size_t> trial,
                std::optional<std::string> planner, std::ostream& log, std::ostream& err) {
  try {
    const auto path = fs::is_directory(dir) ? dir / "traces.jsonl" : dir;
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t shown = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = Json::parse(line);
      if (j.value("question_id", "") != question_id) continue;
      if (trial && j.value("trial", std::size_t{0}) != *trial) continue;
      if (planner && j.value("planner", "") != *planner) continue;
      const auto step = j.value("step", std::size_t{0});
      const auto tool = j.value("tool", "");
      if (tool == "-" || tool == kFinishTool) {
        log << "  => " << j.value("outcome_kind", "") << "  " << j["args"].dump() << "  [tokens "
            << j.value("tokens_in", 0) << "/" << j.value("tokens_out", 0) << "]\n\n";
      } else {
        if (step == 0) {
          log << question_id << " trial " << j.value("trial", 0) << " (" << j.value("planner", "") << ")\n";
        }
        log << "  [" << step << "] " << tool << " " << j["args"].dump() << "  -> " << j.value("outcome_kind", "")
            << "  [tokens " << j.value("tokens_in", 0) << "/" << j.value("tokens_out", 0) << "]\n";
      }
      ++shown;
    }
    if (shown == 0) {
      err << "error: no trace lines for question '" << question_id << "'\n";
      return kExitRuntime;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_validate(const fs::path& file, std::ostream& log, std::ostream& err) {
  try {
    const auto text = read_file(file);
    const auto root = Json::parse(text, nullptr, false);
    if (root.is_discarded() || !root.is_object()) {
      err << "invalid: " << file.string() << " is not a JSON object\n";
      return kExitConfig;
    }
    if (root.contains("tasks")) {
      const auto ds = load_dataset(file);
      EnvironmentOptions options;
      const auto bundle = make_environment(ds, options);
      log << "ok: task file '" << ds.name << "' with " << ds.tasks.size() << " tasks (" << to_string(ds.engine)
          << ")\n";
    } else if (root.contains("documents")) {
      const auto corpus = load_corpus(text);
      log << "ok: corpus with " << corpus.documents().size() << " documents\n";
    } else if (root.contains("triples") || root.contains("nodes")) {
      const auto g = load_graph_store(text);
      log << "ok: graph store with " << g.nodes().size() << " nodes\n";
    } else if (root.contains("entities") || root.contains("concepts")) {
      const auto kb = load_kb(text);
      log << "ok: knowledge base with " << kb.entities().size() << " entities\n";
    } else {
      err << "invalid: cannot tell what kind of file " << file.string() << " is\n";
      return kExitConfig;
    }
  } catch (const std::exception& e) {
    err << "invalid: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}

}  // namespace horizon

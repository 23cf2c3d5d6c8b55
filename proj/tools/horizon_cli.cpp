#include <iostream>

#include "CLI11.hpp"
#include "horizon/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"horizon: plan-horizon experiments over KB, graph and QA tool environments"};
  app.require_subcommand(1);

  std::string config, out = "out", dir, question, file;
  horizon::RunOverrides overrides;
  std::optional<std::size_t> trial;
  std::optional<std::string> planner;

  auto* run = app.add_subcommand("run", "execute every (task, trial, planner) unit of a config");
  run->add_option("--config", config, "run config JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory");
  run->add_option("--seed", overrides.seed, "override the run seed");
  run->add_option("--planner", overrides.planner, "sh | fh | both");
  run->add_option("--robustness", overrides.robustness, "high | low");
  run->add_option("--trials", overrides.trials, "trials per task");
  run->add_option("--jobs", overrides.jobs, "worker threads");

  auto* stats = app.add_subcommand("stats", "summaries and clustered logistic fit from run outputs");
  std::vector<std::string> inputs;
  stats->add_option("inputs", inputs, "run output directories or outcomes.jsonl files")->required();
  stats->add_option("--out", out, "report directory (defaults to the input directory)");

  auto* inspect = app.add_subcommand("inspect", "pretty-print the trace of one question");
  inspect->add_option("dir", dir, "run output directory or traces.jsonl")->required();
  inspect->add_option("question", question, "question id")->required();
  inspect->add_option("--trial", trial, "only this trial");
  inspect->add_option("--planner", planner, "only this planner");

  auto* validate = app.add_subcommand("validate", "lint a KB, graph store, corpus or task file");
  validate->add_option("file", file, "file to check")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : horizon::kExitConfig;
  }

  if (*run) return horizon::cmd_run(config, out, overrides, std::cout, std::cerr);
  if (*stats) {
    const std::filesystem::path first(inputs.front());
    const auto target = stats->count("--out")            ? std::filesystem::path(out)
                        : std::filesystem::is_directory(first) ? first
                                                               : first.parent_path();
    return horizon::cmd_stats({inputs.begin(), inputs.end()}, target, std::cout, std::cerr);
  }
  if (*inspect) return horizon::cmd_inspect(dir, question, trial, planner, std::cout, std::cerr);
  return horizon::cmd_validate(file, std::cout, std::cerr);
}

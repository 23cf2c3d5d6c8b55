#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "horizon/dataset.hpp"
#include "horizon/harness.hpp"
#include "horizon/policies.hpp"
#include "horizon/remote_policy.hpp"
#include "horizon/report.hpp"

namespace horizon {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PolicySpec {
  std::string kind = "oracle";  // oracle | noisy | scripted | remote
  NoiseModel noise;
  RemotePolicyConfig remote;
  std::vector<std::string> script;
};

// Run configuration file:
// {"dataset", "engine", "robustness": high|low, "planner": sh|fh|both,
//  "policy": {"kind", ...}, "budget": {"max_tool_calls", "max_replans",
//  "max_format_retries"}, "seed", "trials", "tokenizer", "top_k", "jobs"}
struct RunConfig {
  std::filesystem::path dataset;
  EngineKind engine = EngineKind::kKopl;
  Robustness robustness = Robustness::kHigh;
  std::vector<Horizon> planners{Horizon::kFh};
  PolicySpec policy;
  Budget budget;
  std::uint64_t seed = 0;
  std::size_t trials = 3;
  std::string tokenizer = "whitespace";
  std::size_t top_k = 0;
  std::size_t jobs = 1;
  std::string validator_endpoint;  // empty: threshold validator
};

// Throws ConfigError for anything malformed or out of range.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);
std::string canonical_config(const RunConfig& config);  // stable JSON
std::string config_hash(const RunConfig& config);

std::uint64_t trial_seed(std::uint64_t run_seed, std::string_view question_id, std::size_t trial);

// Builds the policy for one task. Remote policies are shared across tasks.
class PolicyFactory {
 public:
  PolicyFactory(const PolicySpec& spec, const ToolCatalog& catalog);
  std::shared_ptr<const Policy> for_task(const Task& task) const;

 private:
  const PolicySpec& spec_;
  const ToolCatalog& catalog_;
  std::shared_ptr<const Policy> shared_;
};

// One line per executed step plus a terminal line. Each line carries the
// tokens of the invocations made since the previous line.
std::vector<std::string> trace_log_lines(const Trace& trace, std::string_view run_id, std::size_t trial);

OutcomeRecord make_outcome(const Trace& trace, const Task& task, const RunConfig& config, std::string_view run_id,
                           std::size_t trial, std::string_view policy_name);

struct RunResult {
  std::string run_id;
  std::vector<OutcomeRecord> outcomes;
  std::vector<std::string> trace_lines;
};

// Executes every (task, trial, planner) unit; output order is independent of
// the job count.
RunResult run_experiment(const RunConfig& config, const Dataset& dataset, const EnvironmentBundle& bundle);

}  // namespace horizon

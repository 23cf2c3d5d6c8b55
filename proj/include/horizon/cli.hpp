#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace horizon {

enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitConfig = 2 };

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> planner;
  std::optional<std::string> robustness;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> jobs;
};

// Output directory layout of `run`:
//   manifest.json   written before any task executes
//   traces.jsonl    one line per executed step plus a terminal line per trace
//   outcomes.jsonl  one record per (task, trial, planner)
//   summary.txt     accuracy/token table
int cmd_run(const std::filesystem::path& config, const std::filesystem::path& out, const RunOverrides& overrides,
            std::ostream& log, std::ostream& err);

// Reads <dir>/outcomes.jsonl of every input (directories or jsonl files) and
// writes report.txt and report.json into `out`.
int cmd_stats(const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& out, std::ostream& log,
              std::ostream& err);

// Pretty-prints the trace lines of one question (all trials/planners unless
// narrowed).
int cmd_inspect(const std::filesystem::path& dir, const std::string& question_id, std::optional<std::size_t> trial,
                std::optional<std::string> planner, std::ostream& log, std::ostream& err);

// Lints a KB, graph store, corpus or task file; the kind is sniffed from the
// top-level keys.
int cmd_validate(const std::filesystem::path& file, std::ostream& log, std::ostream& err);

}  // namespace horizon

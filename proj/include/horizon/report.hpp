#pragma once

#include <optional>
#include <string>
#include <vector>

#include "horizon/gee.hpp"
#include "horizon/plan.hpp"

namespace horizon {

// One (question, trial, planner, config) result.
struct OutcomeRecord {
  std::string run_id;
  std::string question_id;
  std::size_t trial = 0;
  std::string planner;  // sh | fh
  std::string policy;
  std::string dataset;
  std::string engine;  // kopl | atomic | qa
  std::string robustness;
  int success = 0;
  std::string label;
  std::string status;
  std::string answer;
  std::size_t depth = 0;
  Rational breadth;
  std::string last_tool;
  bool has_bridge = false;
  bool has_comparison = false;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  std::size_t invocations = 0;
  std::size_t tool_calls = 0;
  std::size_t replans = 0;
  std::size_t format_retries = 0;
  bool repeated = false;
};

std::string outcome_to_json(const OutcomeRecord& record);  // one line
OutcomeRecord outcome_from_json(std::string_view line);
std::vector<OutcomeRecord> load_outcomes(std::string_view jsonl);

struct PlannerSummary {
  std::size_t records = 0;
  Rational accuracy;            // successes / records, exact
  Rational mean_prompt_tokens;  // exact means
  Rational mean_completion_tokens;
  Rational repetition_rate;  // traces with at least one repeated call
};

struct GroupSummary {
  std::string dataset;
  std::string policy;
  std::optional<PlannerSummary> sh;
  std::optional<PlannerSummary> fh;

  // Present only when both planners ran.
  std::optional<double> delta_sh() const;  // accuracy(SH) - accuracy(FH)
  std::optional<double> input_ratio() const;   // SH / FH; undefined when FH is 0
  std::optional<double> output_ratio() const;
};

struct Report {
  std::vector<GroupSummary> groups;  // sorted by (dataset, policy)
  std::optional<GeeFit> fit;
  std::string fit_notice;  // why the fit is absent, or a warning about it
};

// Throws std::invalid_argument on empty input.
std::vector<GroupSummary> summarize_run(const std::vector<OutcomeRecord>& records);

struct Design {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<std::string> clusters;
  std::vector<std::string> names;
};

// intercept, z(depth), z(breadth), SH, z(depth):SH, z(breadth):SH, then
// controls: last-step tool dummies (KoPL records), dataset dummies (more than
// one dataset), has_bridge / has_comparison flags. Reference levels are
// the alphabetically first; constant control columns are dropped. Throws
// GeeError when depth or breadth is constant.
Design build_design(const std::vector<OutcomeRecord>& records);

// Summary plus the clustered fit when both planners are present. Fit errors
// (degenerate features, rank deficiency) propagate as GeeError.
Report build_report(const std::vector<OutcomeRecord>& records);

std::string report_text(const Report& report);
std::string report_json(const Report& report);

}  // namespace horizon

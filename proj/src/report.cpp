#include "horizon/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "horizon/json_io.hpp"
#include "horizon/text.hpp"

namespace horizon {
namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(std::string text, std::size_t width) {
  if (text.size() < width) text.append(width - text.size(), ' ');
  return text;
}

std::string opt(const std::optional<double>& v, int digits) { return v ? fixed(*v, digits) : "-"; }

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json rational_json(const Rational& r) { return Json{{"num", r.num}, {"den", r.den}, {"value", r.to_double()}}; }

}  // namespace

std::string outcome_to_json(const OutcomeRecord& r) {
  OrderedJson j;
  j["run_id"] = r.run_id;
  j["question_id"] = r.question_id;
  j["trial"] = r.trial;
  j["planner"] = r.planner;
  j["policy"] = r.policy;
  j["dataset"] = r.dataset;
  j["engine"] = r.engine;
  j["robustness"] = r.robustness;
  j["success"] = r.success;
  j["label"] = r.label;
  j["status"] = r.status;
  j["answer"] = r.answer;
  j["depth"] = r.depth;
  j["breadth"] = r.breadth.to_string();
  j["last_tool"] = r.last_tool;
  j["has_bridge"] = r.has_bridge;
  j["has_comparison"] = r.has_comparison;
  j["prompt_tokens"] = r.prompt_tokens;
  j["completion_tokens"] = r.completion_tokens;
  j["invocations"] = r.invocations;
  j["tool_calls"] = r.tool_calls;
  j["replans"] = r.replans;
  j["format_retries"] = r.format_retries;
  j["repeated"] = r.repeated;
  return j.dump();
}

OutcomeRecord outcome_from_json(std::string_view line) {
  const auto j = Json::parse(line);
  OutcomeRecord r;
  r.run_id = j.value("run_id", std::string());
  r.question_id = j.at("question_id").get<std::string>();
  r.trial = j.value("trial", std::size_t{0});
  r.planner = j.at("planner").get<std::string>();
  r.policy = j.value("policy", std::string());
  r.dataset = j.value("dataset", std::string());
  r.engine = j.value("engine", std::string());
  r.robustness = j.value("robustness", std::string());
  r.success = j.at("success").get<int>();
  r.label = j.value("label", std::string());
  r.status = j.value("status", std::string());
  r.answer = j.value("answer", std::string());
  r.depth = j.at("depth").get<std::size_t>();
  const auto breadth = j.at("breadth");
  if (breadth.is_string()) {
    const auto parts = split(breadth.get<std::string>(), '/');
    r.breadth = Rational::of(std::stoll(parts[0]), parts.size() > 1 ? std::stoll(parts[1]) : 1);
  } else {
    // Plain numbers are accepted for synthetic logs; kept to 1e-6.
    r.breadth = Rational::of(static_cast<std::int64_t>(std::llround(breadth.get<double>() * 1e6)), 1000000);
  }
  r.last_tool = j.value("last_tool", std::string());
  r.has_bridge = j.value("has_bridge", false);
  r.has_comparison = j.value("has_comparison", false);
  r.prompt_tokens = j.value("prompt_tokens", std::size_t{0});
  r.completion_tokens = j.value("completion_tokens", std::size_t{0});
  r.invocations = j.value("invocations", std::size_t{0});
  r.tool_calls = j.value("tool_calls", std::size_t{0});
  r.replans = j.value("replans", std::size_t{0});
  r.format_retries = j.value("format_retries", std::size_t{0});
  r.repeated = j.value("repeated", false);
  return r;
}

std::vector<OutcomeRecord> load_outcomes(std::string_view jsonl) {
  std::vector<OutcomeRecord> out;
  std::size_t line_no = 0;
  for (const auto& line : split(jsonl, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(outcome_from_json(line));
    } catch (const std::exception& e) {
      throw std::runtime_error("outcome line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::optional<double> GroupSummary::delta_sh() const {
  if (!sh || !fh) return std::nullopt;
  return sh->accuracy.to_double() - fh->accuracy.to_double();
}

std::optional<double> GroupSummary::input_ratio() const {
  if (!sh || !fh || fh->mean_prompt_tokens.num == 0) return std::nullopt;
  return sh->mean_prompt_tokens.to_double() / fh->mean_prompt_tokens.to_double();
}

std::optional<double> GroupSummary::output_ratio() const {
  if (!sh || !fh || fh->mean_completion_tokens.num == 0) return std::nullopt;
  return sh->mean_completion_tokens.to_double() / fh->mean_completion_tokens.to_double();
}

std::vector<GroupSummary> summarize_run(const std::vector<OutcomeRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no outcome records");
  struct Acc {
    std::int64_t n = 0, ok = 0, in = 0, out = 0, rep = 0;
  };
  std::map<std::tuple<std::string, std::string, std::string>, Acc> acc;
  for (const auto& r : records) {
    auto& a = acc[{r.dataset, r.policy, r.planner}];
    ++a.n;
    a.ok += r.success ? 1 : 0;
    a.in += static_cast<std::int64_t>(r.prompt_tokens);
    a.out += static_cast<std::int64_t>(r.completion_tokens);
    a.rep += r.repeated ? 1 : 0;
  }
  std::map<std::pair<std::string, std::string>, GroupSummary> groups;
  for (const auto& [key, a] : acc) {
    const auto& [dataset, policy, planner] = key;
    auto& g = groups[{dataset, policy}];
    g.dataset = dataset;
    g.policy = policy;
    PlannerSummary s;
    s.records = static_cast<std::size_t>(a.n);
    s.accuracy = Rational::of(a.ok, a.n);
    s.mean_prompt_tokens = Rational::of(a.in, a.n);
    s.mean_completion_tokens = Rational::of(a.out, a.n);
    s.repetition_rate = Rational::of(a.rep, a.n);
    if (planner == "sh") {
      g.sh = s;
    } else if (planner == "fh") {
      g.fh = s;
    }
  }
  std::vector<GroupSummary> out;
  for (auto& [key, g] : groups) out.push_back(std::move(g));
  return out;
}

Design build_design(const std::vector<OutcomeRecord>& records) {
  std::vector<double> depth, breadth;
  for (const auto& r : records) {
    depth.push_back(static_cast<double>(r.depth));
    breadth.push_back(r.breadth.to_double());
  }
  const auto zd = standardize(depth);
  const auto zb = standardize(breadth);

  std::vector<std::pair<std::string, std::vector<double>>> cols;
  const auto n = records.size();
  auto column = [&](std::string name, auto value) {
    std::vector<double> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = value(i);
    cols.emplace_back(std::move(name), std::move(c));
  };
  auto sh = [&](std::size_t i) { return records[i].planner == "sh" ? 1.0 : 0.0; };
  column("const", [](std::size_t) { return 1.0; });
  column("depth", [&](std::size_t i) { return zd[i]; });
  column("breadth", [&](std::size_t i) { return zb[i]; });
  column("SH", sh);
  column("depth:SH", [&](std::size_t i) { return zd[i] * sh(i); });
  column("breadth:SH", [&](std::size_t i) { return zb[i] * sh(i); });

  auto dummies = [&](const std::string& prefix, auto level_of, auto applies) {
    std::set<std::string> levels;
    for (std::size_t i = 0; i < n; ++i) {
      if (applies(i)) levels.insert(level_of(i));
    }
    if (levels.size() < 2) return;
    for (auto it = std::next(levels.begin()); it != levels.end(); ++it) {
      const auto level = *it;
      column(prefix + "[" + level + "]",
             [&](std::size_t i) { return applies(i) && level_of(i) == level ? 1.0 : 0.0; });
    }
  };
  auto is_kopl = [&](std::size_t i) { return records[i].engine == "kopl"; };
  dummies("last_tool", [&](std::size_t i) { return records[i].last_tool; }, is_kopl);
  dummies("dataset", [&](std::size_t i) { return records[i].dataset; }, [](std::size_t) { return true; });
  auto any_flag = [&](auto flag) {
    bool lo = false, hi = false;
    for (std::size_t i = 0; i < n; ++i) (flag(i) ? hi : lo) = true;
    return lo && hi;
  };
  auto bridge = [&](std::size_t i) { return records[i].has_bridge ? 1.0 : 0.0; };
  auto comparison = [&](std::size_t i) { return records[i].has_comparison ? 1.0 : 0.0; };
  if (any_flag([&](std::size_t i) { return records[i].has_bridge; })) column("has_bridge", bridge);
  if (any_flag([&](std::size_t i) { return records[i].has_comparison; })) column("has_comparison", comparison);

  Design d;
  d.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
  d.y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    d.names.push_back(cols[j].first);
    for (std::size_t i = 0; i < n; ++i) {
      d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cols[j].second[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    d.y(static_cast<Eigen::Index>(i)) = records[i].success ? 1.0 : 0.0;
    d.clusters.push_back(records[i].question_id);
  }
  return d;
}

Report build_report(const std::vector<OutcomeRecord>& records) {
  Report report;
  report.groups = summarize_run(records);
  std::set<std::string> planners;
  for (const auto& r : records) planners.insert(r.planner);
  if (planners.size() < 2) {
    report.fit_notice = "GEE skipped: records come from one planner only";
    return report;
  }
  auto design = build_design(records);
  report.fit = fit_clustered_logit(design.x, design.y, design.clusters, design.names);
  if (report.fit->separation) {
    report.fit_notice = "warning: separation detected; coefficients diverge and are not estimates";
  } else if (!report.fit->converged) {
    report.fit_notice = "warning: IRLS did not converge";
  }
  return report;
}

std::string report_text(const Report& report) {
  std::ostringstream os;
  os << "Accuracy and tokens\n";
  os << pad("dataset", 16) << pad("policy", 12) << pad("SH acc", 9) << pad("FH acc", 9) << pad("dSH", 9)
     << pad("SH in", 11) << pad("FH in", 11) << pad("in ratio", 10) << pad("SH out", 10) << pad("FH out", 10)
     << "out ratio\n";
  for (const auto& g : report.groups) {
    auto acc = [](const std::optional<PlannerSummary>& s) { return s ? fixed(s->accuracy.to_double(), 3) : "-"; };
    auto in = [](const std::optional<PlannerSummary>& s) {
      return s ? fixed(s->mean_prompt_tokens.to_double(), 1) : "-";
    };
    auto out = [](const std::optional<PlannerSummary>& s) {
      return s ? fixed(s->mean_completion_tokens.to_double(), 1) : "-";
    };
    os << pad(g.dataset, 16) << pad(g.policy, 12) << pad(acc(g.sh), 9) << pad(acc(g.fh), 9)
       << pad(opt(g.delta_sh(), 3), 9) << pad(in(g.sh), 11) << pad(in(g.fh), 11) << pad(opt(g.input_ratio(), 2), 10)
       << pad(out(g.sh), 10) << pad(out(g.fh), 10) << opt(g.output_ratio(), 2) << "\n";
  }
  os << "\nRepeated tool calls (share of traces)\n";
  os << pad("dataset", 16) << pad("policy", 12) << pad("SH", 9) << "FH\n";
  for (const auto& g : report.groups) {
    auto rep = [](const std::optional<PlannerSummary>& s) {
      return s ? fixed(s->repetition_rate.to_double(), 3) : "-";
    };
    os << pad(g.dataset, 16) << pad(g.policy, 12) << pad(rep(g.sh), 9) << rep(g.fh) << "\n";
  }
  if (report.fit) {
    const auto& f = *report.fit;
    os << "\nGEE (logit, independence, cluster-robust SE; " << f.clusters << " clusters, " << f.iterations
       << " iterations)\n";
    std::size_t width = 14;
    for (const auto& n : f.names) width = std::max(width, n.size() + 2);
    os << pad("Coefficient", width) << pad("Estimate", 12) << pad("p", 10) << "Std Err\n";
    for (Eigen::Index j = 0; j < f.beta.size(); ++j) {
      const auto& name = f.names[static_cast<std::size_t>(j)];
      if (f.separation) {
        // Diverging fit: the estimate is shown but inference is meaningless.
        os << pad(name, width) << pad(fixed(f.beta(j), 4), 12) << pad("-", 10) << "-\n";
        continue;
      }
      const double p = f.p_values(j);
      const char* stars = p < 0.01 ? "**" : (p < 0.05 ? "*" : "");
      os << pad(name, width) << pad(fixed(f.beta(j), 4) + stars, 12) << pad(fixed(p, 4), 10)
         << fixed(f.std_errors(j), 4) << "\n";
    }
    os << "** p<0.01, * p<0.05 (two-sided)\n";
  }
  if (!report.fit_notice.empty()) os << "\n" << report.fit_notice << "\n";
  return os.str();
}

std::string report_json(const Report& report) {
  OrderedJson root;
  root["groups"] = OrderedJson::array();
  for (const auto& g : report.groups) {
    OrderedJson j;
    j["dataset"] = g.dataset;
    j["policy"] = g.policy;
    for (const auto& [name, s] : {std::pair{"sh", &g.sh}, std::pair{"fh", &g.fh}}) {
      if (!*s) {
        j[name] = nullptr;
        continue;
      }
      const auto& v = **s;
      j[name] = {{"records", v.records},
                 {"accuracy", rational_json(v.accuracy)},
                 {"mean_prompt_tokens", rational_json(v.mean_prompt_tokens)},
                 {"mean_completion_tokens", rational_json(v.mean_completion_tokens)},
                 {"repetition_rate", rational_json(v.repetition_rate)}};
    }
    j["delta_sh"] = opt_json(g.delta_sh());
    j["input_ratio"] = opt_json(g.input_ratio());
    j["output_ratio"] = opt_json(g.output_ratio());
    root["groups"].push_back(std::move(j));
  }
  if (report.fit) {
    const auto& f = *report.fit;
    OrderedJson fit;
    fit["converged"] = f.converged;
    fit["separation"] = f.separation;
    fit["iterations"] = f.iterations;
    fit["clusters"] = f.clusters;
    fit["coefficients"] = OrderedJson::array();
    for (Eigen::Index j = 0; j < f.beta.size(); ++j) {
      fit["coefficients"].push_back({{"name", f.names[static_cast<std::size_t>(j)]},
                                     {"estimate", f.beta(j)},
                                     {"std_err", f.std_errors(j)},
                                     {"z", f.z(j)},
                                     {"p", f.p_values(j)}});
    }
    root["gee"] = std::move(fit);
  } else {
    root["gee"] = nullptr;
  }
  root["notice"] = report.fit_notice;
  return root.dump(2);
}

}  // namespace horizon

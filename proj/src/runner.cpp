#include "horizon/runner.hpp"

#include <atomic>
#include <thread>

#include "horizon/answer_match.hpp"
#include "horizon/json_io.hpp"
#include "horizon/text.hpp"

namespace horizon {
namespace {

template <class T>
T get_or(const Json& node, const char* key, T fallback) {
  if (!node.contains(key)) return fallback;
  try {
    return node[key].get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(std::string("'") + key + "' has the wrong type");
  }
}

double rate(const Json& node, const char* key) {
  const auto v = get_or<double>(node, key, 0.0);
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string("'") + key + "' must lie in [0, 1]");
  return v;
}

std::size_t positive(const Json& node, const char* key, std::size_t fallback) {
  if (!node.contains(key)) return fallback;
  const auto& v = node[key];
  if (!v.is_number_integer() || v.get<std::int64_t>() < 1) throw ConfigError(std::string("'") + key + "' must be a positive integer");
  return v.get<std::size_t>();
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config is not valid JSON at byte " + std::to_string(e.byte));
  }
  if (!root.is_object()) throw ConfigError("config must be an object");
  RunConfig c;
  if (!root.contains("dataset") || !root["dataset"].is_string()) throw ConfigError("config needs a 'dataset' path");
  std::filesystem::path ds(root["dataset"].get<std::string>());
  c.dataset = ds.is_absolute() ? ds : base_dir / ds;

  const auto engine = get_or<std::string>(root, "engine", "");
  auto kind = parse_engine_kind(engine);
  if (!kind) throw ConfigError("unknown engine '" + engine + "' (expected kopl, atomic or qa)");
  c.engine = *kind;

  const auto robustness = get_or<std::string>(root, "robustness", "high");
  auto mode = parse_robustness(robustness);
  if (!mode) throw ConfigError("unknown robustness '" + robustness + "' (expected high or low)");
  c.robustness = *mode;

  const auto planner = get_or<std::string>(root, "planner", "fh");
  if (planner == "both") {
    c.planners = {Horizon::kSh, Horizon::kFh};
  } else if (auto h = parse_horizon(planner)) {
    c.planners = {*h};
  } else {
    throw ConfigError("unknown planner '" + planner + "' (expected sh, fh or both)");
  }

  c.seed = get_or<std::uint64_t>(root, "seed", 0);
  c.trials = positive(root, "trials", 3);
  c.tokenizer = get_or<std::string>(root, "tokenizer", "whitespace");
  if (!make_tokenizer(c.tokenizer)) throw ConfigError("unknown tokenizer '" + c.tokenizer + "'");
  c.top_k = root.contains("top_k") ? positive(root, "top_k", 1) : 0;
  c.jobs = positive(root, "jobs", 1);
  c.validator_endpoint = get_or<std::string>(root, "validator_endpoint", "");

  if (root.contains("budget")) {
    const auto& b = root["budget"];
    c.budget.max_tool_calls = positive(b, "max_tool_calls", c.budget.max_tool_calls);
    c.budget.max_replans = positive(b, "max_replans", c.budget.max_replans);
    c.budget.max_format_retries = positive(b, "max_format_retries", c.budget.max_format_retries);
  }

  const Json policy = root.value("policy", Json{{"kind", "oracle"}});
  c.policy.kind = get_or<std::string>(policy, "kind", "oracle");
  if (c.policy.kind == "noisy") {
    auto& n = c.policy.noise;
    n.schema_rate = rate(policy, "schema_rate");
    n.reference_rate = rate(policy, "reference_rate");
    n.repeat_rate = rate(policy, "repeat_rate");
    const auto corr = get_or<std::string>(policy, "correction", "corrects-after-feedback");
    auto parsed = parse_correction(corr);
    if (!parsed) throw ConfigError("unknown correction '" + corr + "'");
    n.correction = *parsed;
    n.seed = get_or<std::uint64_t>(policy, "seed", c.seed);
    n.synonyms = get_or<std::map<std::string, std::string>>(policy, "synonyms", {});
  } else if (c.policy.kind == "scripted") {
    c.policy.script = get_or<std::vector<std::string>>(policy, "replies", {});
    if (c.policy.script.empty()) throw ConfigError("scripted policy needs 'replies'");
  } else if (c.policy.kind == "remote") {
    auto& r = c.policy.remote;
    r.endpoint = get_or<std::string>(policy, "endpoint", "");
    r.model = get_or<std::string>(policy, "model", "");
    if (r.endpoint.empty() || r.model.empty()) throw ConfigError("remote policy needs 'endpoint' and 'model'");
    r.temperature = get_or<double>(policy, "temperature", 0.0);
    r.max_retries = get_or<int>(policy, "max_retries", 2);
    r.prompt_template = get_or<std::string>(policy, "prompt_template", "default");
    r.demonstrations = get_or<std::string>(policy, "demonstrations", "");
    r.timeout_seconds = get_or<int>(policy, "timeout_seconds", 120);
    r.max_in_flight = positive(policy, "max_in_flight", 4);
    r.api_key_env = get_or<std::string>(policy, "api_key_env", "");
  } else if (c.policy.kind != "oracle") {
    throw ConfigError("unknown policy kind '" + c.policy.kind + "'");
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_run_config(text, path.parent_path());
}

std::string canonical_config(const RunConfig& c) {
  OrderedJson j;
  j["dataset"] = c.dataset.generic_string();
  j["engine"] = std::string(to_string(c.engine));
  j["robustness"] = std::string(to_string(c.robustness));
  j["planners"] = OrderedJson::array();
  for (auto h : c.planners) j["planners"].push_back(std::string(to_string(h)));
  OrderedJson p;
  p["kind"] = c.policy.kind;
  if (c.policy.kind == "noisy") {
    p["schema_rate"] = c.policy.noise.schema_rate;
    p["reference_rate"] = c.policy.noise.reference_rate;
    p["repeat_rate"] = c.policy.noise.repeat_rate;
    p["correction"] = std::string(to_string(c.policy.noise.correction));
    p["seed"] = c.policy.noise.seed;
    p["synonyms"] = c.policy.noise.synonyms;
  } else if (c.policy.kind == "scripted") {
    p["replies"] = c.policy.script;
  } else if (c.policy.kind == "remote") {
    p["endpoint"] = c.policy.remote.endpoint;
    p["model"] = c.policy.remote.model;
    p["temperature"] = c.policy.remote.temperature;
    p["prompt_template"] = c.policy.remote.prompt_template;
    p["demonstrations"] = c.policy.remote.demonstrations;
  }
  j["policy"] = p;
  j["budget"] = {{"max_tool_calls", c.budget.max_tool_calls},
                 {"max_replans", c.budget.max_replans},
                 {"max_format_retries", c.budget.max_format_retries}};
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  j["tokenizer"] = c.tokenizer;
  j["top_k"] = c.top_k;
  j["validator_endpoint"] = c.validator_endpoint;
  return j.dump();
}

std::string config_hash(const RunConfig& config) { return hex64(fnv1a64(canonical_config(config))); }

std::uint64_t trial_seed(std::uint64_t run_seed, std::string_view question_id, std::size_t trial) {
  return mix64(run_seed ^ mix64(fnv1a64(question_id) + trial));
}

PolicyFactory::PolicyFactory(const PolicySpec& spec, const ToolCatalog& catalog) : spec_(spec), catalog_(catalog) {
  if (spec.kind == "scripted") {
    shared_ = std::make_shared<ScriptedPolicy>(spec.script);
  } else if (spec.kind == "remote") {
    auto remote = std::make_shared<RemotePolicy>(spec.remote, catalog);
    remote->check_endpoint();
    shared_ = std::move(remote);
  }
}

std::shared_ptr<const Policy> PolicyFactory::for_task(const Task& task) const {
  if (spec_.kind == "oracle") return std::make_shared<OraclePolicy>(task.gold_plan);
  if (spec_.kind == "noisy") return std::make_shared<NoisyPolicy>(task.gold_plan, spec_.noise, catalog_);
  if (spec_.kind == "scripted") return std::make_shared<ScriptedPolicy>(spec_.script);
  return shared_;
}

std::vector<std::string> trace_log_lines(const Trace& trace, std::string_view run_id, std::size_t trial) {
  std::vector<std::string> lines;
  std::size_t charged = 0;  // invocations already attributed to a line
  auto tokens_until = [&](std::size_t last_invocation) {
    std::pair<std::size_t, std::size_t> t{0, 0};
    for (; charged <= last_invocation && charged < trace.invocations.size(); ++charged) {
      t.first += trace.invocations[charged].prompt_tokens;
      t.second += trace.invocations[charged].completion_tokens;
    }
    return t;
  };
  auto line = [&](std::size_t step, const std::string& tool, OrderedJson args, std::string_view kind,
                  std::pair<std::size_t, std::size_t> tokens) {
    OrderedJson j;
    j["run_id"] = std::string(run_id);
    j["question_id"] = trace.question_id;
    j["trial"] = trial;
    j["planner"] = std::string(to_string(trace.horizon));
    j["step"] = step;
    j["tool"] = tool;
    j["args"] = std::move(args);
    j["outcome_kind"] = std::string(kind);
    j["tokens_in"] = tokens.first;
    j["tokens_out"] = tokens.second;
    lines.push_back(j.dump());
  };
  for (const auto& s : trace.steps) {
    auto wire = OrderedJson::parse(to_wire(s.entry.call));
    line(s.entry.index, s.entry.call.tool, wire["args"], s.failure ? to_string(*s.failure) : "ok",
         tokens_until(s.invocation));
  }
  OrderedJson args = OrderedJson::object();
  if (trace.answer) args["answer"] = *trace.answer;
  const bool finished = trace.status == TraceStatus::kAnswered || trace.status == TraceStatus::kNoAnswer;
  line(trace.steps.size(), finished ? std::string(kFinishTool) : "-", std::move(args), to_string(trace.status),
       tokens_until(trace.invocations.size()));
  return lines;
}

OutcomeRecord make_outcome(const Trace& trace, const Task& task, const RunConfig& config, std::string_view run_id,
                           std::size_t trial, std::string_view policy_name) {
  OutcomeRecord r;
  r.run_id = std::string(run_id);
  r.question_id = task.id;
  r.trial = trial;
  r.planner = std::string(to_string(trace.horizon));
  r.policy = std::string(policy_name);
  r.dataset = task.dataset;
  r.engine = std::string(to_string(config.engine));
  r.robustness = std::string(to_string(config.robustness));
  r.answer = trace.answer.value_or("");
  const auto label = match_answer(r.answer, task.gold_answers, task.match);
  r.label = std::string(to_string(label));
  r.success = label == MatchLabel::kCorrect ? 1 : 0;
  r.status = std::string(to_string(trace.status));
  const auto g = gold_graph(task);
  r.depth = g.depth();
  r.breadth = g.breadth();
  r.last_tool = last_gold_tool(task);
  r.has_bridge = task.has_bridge;
  r.has_comparison = task.has_comparison;
  const auto tokens = account_tokens(trace);
  r.prompt_tokens = tokens.prompt_tokens;
  r.completion_tokens = tokens.completion_tokens;
  r.invocations = tokens.invocations;
  r.tool_calls = trace.tool_calls();
  r.replans = trace.replans;
  r.format_retries = trace.format_retries;
  r.repeated = trace_repetition(trace).repeated;
  return r;
}

RunResult run_experiment(const RunConfig& config, const Dataset& dataset, const EnvironmentBundle& bundle) {
  RunResult result;
  result.run_id = config_hash(config);
  const auto tokenizer = make_tokenizer(config.tokenizer);
  const RunContext ctx{*bundle.env, *bundle.prompts, *tokenizer, config.budget};
  const PolicyFactory factory(config.policy, bundle.env->catalog());

  struct Unit {
    std::size_t task, trial;
    Horizon planner;
  };
  std::vector<Unit> units;
  for (std::size_t t = 0; t < dataset.tasks.size(); ++t) {
    for (std::size_t trial = 0; trial < config.trials; ++trial) {
      for (auto h : config.planners) units.push_back({t, trial, h});
    }
  }
  struct Done {
    OutcomeRecord outcome;
    std::vector<std::string> lines;
    std::string error;
  };
  std::vector<Done> done(units.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < units.size(); i = next++) {
      const auto& u = units[i];
      const auto& task = dataset.tasks[u.task];
      try {
        const auto policy = factory.for_task(task);
        const auto trace = run_trace(u.planner, task, *policy, ctx, trial_seed(config.seed, task.id, u.trial));
        done[i].outcome = make_outcome(trace, task, config, result.run_id, u.trial, policy->name());
        done[i].lines = trace_log_lines(trace, result.run_id, u.trial);
      } catch (const std::exception& e) {
        done[i].error = task.id + ": " + e.what();
      }
    }
  };
  const auto jobs = std::min(config.jobs, std::max<std::size_t>(units.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& d : done) {
    if (!d.error.empty()) throw std::runtime_error(d.error);
    result.outcomes.push_back(std::move(d.outcome));
    for (auto& l : d.lines) result.trace_lines.push_back(std::move(l));
  }
  return result;
}

}  // namespace horizon

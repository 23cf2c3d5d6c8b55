// Acceptance gate: one PASS/FAIL line per primary criterion. Exit status is
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "../unit/helpers.hpp"
#include "../unit/logit_oracle.hpp"
#include "horizon/answer_match.hpp"
#include "horizon/atomic.hpp"
#include "horizon/gee.hpp"
#include "horizon/mock_tools.hpp"
#include "horizon/policies.hpp"

using namespace horizon;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond && pass) detail << "failed: " << what << "; ";
    pass = pass && cond;
  }
};

int failures = 0;

void criterion(const std::string& name, double limit_seconds, const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.require(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_seconds > 0) {
    std::ostringstream lim;
    lim << "runtime " << secs << " s < " << limit_seconds << " s";
    v.require(secs < limit_seconds, lim.str());
  }
  if (!v.pass) ++failures;
  std::printf("%s  %-26s %s[%.3f s]\n", v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.str().c_str(), secs);
  std::fflush(stdout);
}

bool solved(const Trace& t, const Task& task) {
  return t.status == TraceStatus::kAnswered && t.answer &&
         match_answer(*t.answer, task.gold_answers, task.match) == MatchLabel::kCorrect;
}

bool has_literal_duplicate(const Plan& gold) {
  std::set<std::string> seen;
  for (const auto& s : gold_tool_steps(gold)) {
    if (!seen.insert(to_wire(s)).second) return true;
  }
  return false;
}

// Longest path by enumerating every path ending at each node.
std::size_t brute_depth(const std::vector<std::vector<std::size_t>>& deps) {
  std::function<std::size_t(std::size_t)> walk = [&](std::size_t v) -> std::size_t {
    std::size_t best = 0;
    for (auto d : deps[v]) best = std::max(best, walk(d));
    return best + 1;
  };
  std::size_t best = 0;
  for (std::size_t v = 0; v < deps.size(); ++v) best = std::max(best, walk(v));
  return best;
}

}  // namespace

int main() {
  std::cout << "acceptance criteria\n";

  criterion("plan-metrics", 1.0, [](Verdict& v) {
    const auto plan = parse_plan(R"([{"tool":"Find","args":{"name":"Google"}},
      {"tool":"Find","args":{"name":"Instagram"}},
      {"tool":"Relate","args":{"input":"$1","relation":"parent organization","direction":"forward"}},
      {"tool":"SelectBetween","args":{"input1":"$0","input2":"$2","key":"employee_counts","op":"greater"}},
      {"tool":"Finish","args":{"answer":"$3"}}])",
                                 kopl_catalog().with_finish());
    const auto g = build_dag(plan);
    v.detail << "|V|=" << g.size() << " d=" << g.depth() << " b=" << g.breadth().to_string() << " ";
    v.require(g.size() == 4, "|V| == 4");
    v.require(g.depth() == 3, "depth == 3");
    v.require(g.breadth() == Rational::of(4, 3), "breadth == 4/3");
  });

  criterion("kopl-golden-run", 1.0, [](Verdict& v) {
    const testing::Suite s("kopl/mini_tasks.json");
    const auto& task = s.task("mini-taller");
    v.require(task.question == "Who is taller, LeBron James Jr. or his father?", "question text");
    const OraclePolicy oracle(task.gold_plan);
    const auto steps = gold_tool_steps(task.gold_plan).size();
    const auto sh = run_sh(task, oracle, s.context(), 1);
    const auto fh = run_fh(task, oracle, s.context(), 1);
    v.detail << "SH=" << sh.answer.value_or("-") << " (" << sh.invocations.size() << " inv) FH="
             << fh.answer.value_or("-") << " (" << fh.invocations.size() << " inv) ";
    v.require(sh.answer == "LeBron James Jr.", "SH answer");
    v.require(fh.answer == "LeBron James Jr.", "FH answer");
    v.require(fh.invocations.size() == 1, "FH one invocation");
    v.require(sh.invocations.size() == steps && sh.tool_calls() == steps, "SH one invocation per step");
  });

  criterion("atomic-golden-run", 1.0, [](Verdict& v) {
    const testing::Suite s("atomic/tasks.json");
    const auto& task = s.task("atomic-lautner-short");
    Plan chain;
    chain.steps = gold_tool_steps(task.gold_plan);
    const auto expr = compile_chain(chain);
    const auto& env = dynamic_cast<const AtomicEnvironment&>(*s.bundle.env);
    v.detail << expr.to_string() << " ";
    v.require(expr.is_list && expr.head() == "AND", "head AND");
    v.require(expr.items.size() == 3 && expr.items[1].is_list && expr.items[1].head() == "JOIN", "first operand JOIN");
    const auto compiled = env.engine().eval(expr);
    v.require(compiled.ok(), "compiled evaluation succeeds");
    if (!compiled.ok()) return;
    const auto& set = std::get<EntitySet>(compiled.value());
    v.require(set.ids.size() == 1 && env.engine().store().nodes()[set.ids[0]].id == "m.02686wj", "evaluates to m.02686wj");
    const auto stepwise = execute_program(env, chain);
    v.require(stepwise.ok && stepwise.answer == env.render(compiled.value()), "step-wise result agrees");
  });

  criterion("budgets", 0, [](Verdict& v) {
    const testing::Suite s("kopl/mini_tasks.json");
    const auto& task = s.task("mini-taller");
    const ScriptedPolicy forever({R"([{"tool":"Find","args":{"name":"Google"}}])"});
    const auto calls = run_sh(task, forever, s.context(), 1);
    v.require(calls.status == TraceStatus::kBudgetFailed && calls.tool_calls() == 30, "30-call limit");
    const ScriptedPolicy failing({R"([{"tool":"Find","args":{"name":"Zzyzx Nowhere Corp"}}])"});
    for (auto h : {Horizon::kSh, Horizon::kFh}) {
      const auto t = run_trace(h, task, failing, s.context(), 1);
      v.require(t.status == TraceStatus::kReplanFailed && t.replans == 8 && t.tool_calls() == 9, "8-replan limit");
    }
    const ScriptedPolicy garbage({"no plan here"});
    for (auto h : {Horizon::kSh, Horizon::kFh}) {
      const auto t = run_trace(h, task, garbage, s.context(), 1);
      v.require(t.status == TraceStatus::kFormatFailed && t.format_retries == 8 && t.invocations.size() == 9,
                "8-format-retry limit");
    }
    v.detail << "calls=" << calls.tool_calls() << " ";
  });

  criterion("robustness-dominance", 0, [](Verdict& v) {
    std::size_t pairs = 0, low_solved = 0;
    for (const char* suite : testing::kSuites) {
      const testing::Suite low(suite, Robustness::kLow), high(suite, Robustness::kHigh);
      for (const auto& task : low.dataset.tasks) {
        std::vector<std::pair<std::unique_ptr<Policy>, std::unique_ptr<Policy>>> policies;
        policies.emplace_back(std::make_unique<OraclePolicy>(task.gold_plan),
                              std::make_unique<OraclePolicy>(task.gold_plan));
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
          NoiseModel n;
          n.schema_rate = 0.4;
          n.reference_rate = 0.1;
          n.correction = Correction::kNeverCorrects;
          n.seed = seed;
          policies.emplace_back(std::make_unique<NoisyPolicy>(task.gold_plan, n, low.bundle.env->catalog()),
                                std::make_unique<NoisyPolicy>(task.gold_plan, n, high.bundle.env->catalog()));
        }
        for (const auto& [pl, ph] : policies) {
          for (auto h : {Horizon::kSh, Horizon::kFh}) {
            const auto tl = run_trace(h, task, *pl, low.context(), 3);
            ++pairs;
            if (!solved(tl, task)) continue;
            ++low_solved;
            const auto th = run_trace(h, task, *ph, high.context(), 3);
            v.require(solved(th, task) && th.answer == tl.answer, "low-solved task " + task.id + " solved alike in high");
          }
        }
      }
    }
    const testing::Suite hi("kopl/mini_tasks.json", Robustness::kHigh), lo("kopl/mini_tasks.json", Robustness::kLow);
    const auto probe = parse_plan(R"([{"tool":"Find","args":{"name":"Google"}},
      {"tool":"QueryAttr","args":{"input":"$0","key":"employees"}}])",
                                  kopl_catalog().with_finish());
    const auto rh = execute_program(*hi.bundle.env, probe);
    const auto rl = execute_program(*lo.bundle.env, probe);
    v.require(rh.ok && rh.answer.find("180000") != std::string::npos, "employees soft-matches in high mode");
    v.require(!rl.ok && rl.observations.back().failure && !rl.observations.back().failure->candidates.empty() &&
                  rl.observations.back().text.find("employee_counts") != std::string::npos,
              "employees fails in low mode with candidate feedback");
    v.detail << pairs << " runs, " << low_solved << " solved in low; employees high=" << rh.answer << " ";
  });

  criterion("recall-monotonicity", 0, [](Verdict& v) {
    std::mt19937_64 rng(1234);
    const std::vector<std::string> words{"film", "director", "born", "city", "river", "award", "actor", "year", "team",
                                         "song", "album", "novel", "war", "king", "bridge", "museum", "star", "lake"};
    const TrigramSimilarity sim;
    std::size_t top1 = 0, top10 = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<MockDocument> docs;
      const std::size_t n = 1 + rng() % 20;
      std::vector<std::string> questions;
      for (std::size_t d = 0; d < n; ++d) {
        MockDocument doc;
        doc.title = "doc " + std::to_string(d);
        for (int w = 0; w < 10; ++w) doc.text += words[rng() % words.size()] + " ";
        if (rng() % 2) {
          const auto q = "which " + words[rng() % words.size()] + " " + words[rng() % words.size()] + " " +
                         words[rng() % words.size()];
          doc.answers[normalize_question(q)] = "answer " + std::to_string(d);
          questions.push_back(q);
        }
        docs.push_back(std::move(doc));
      }
      questions.push_back("which " + words[rng() % words.size()] + " unanswered");
      const MockCorpus corpus(std::move(docs));
      const auto& q = questions[rng() % questions.size()];
      const auto a1 = mock_search(corpus, q, 1, sim);
      const auto a10 = mock_search(corpus, q, 10, sim);
      top1 += a1.ok();
      top10 += a10.ok();
      if (a1.ok()) v.require(a10.ok() && a10.value() == a1.value(), "top-1 success implies top-10 success");
    }
    const auto corpus = load_corpus_file(testing::data_path("qa/rank3_corpus.json").string());
    const auto q = "Where was John Singleton born?";
    const auto order = corpus.rank(q, sim);
    v.require(corpus.documents()[order[2]].title == "Boyz n the Hood", "answer document is ranked third");
    v.require(!mock_search(corpus, q, 1, sim).ok(), "rank-3 case fails at k=1");
    const auto k10 = mock_search(corpus, q, 10, sim);
    v.require(k10.ok() && k10.value() == "Los Angeles", "rank-3 case succeeds at k=10");
    v.detail << "1000 corpora, top-1 hits " << top1 << ", top-10 hits " << top10 << " ";
  });

  criterion("repetition-detector", 0, [](Verdict& v) {
    std::size_t noisy_traces = 0, noisy_repeated = 0, oracle_traces = 0, oracle_repeated = 0, excluded = 0;
    for (const char* suite : testing::kSuites) {
      const testing::Suite s(suite);
      for (const auto& task : s.dataset.tasks) {
        NoiseModel n;
        n.repeat_rate = 1.0;
        n.seed = 5;
        const NoisyPolicy noisy(task.gold_plan, n, s.bundle.env->catalog());
        const OraclePolicy oracle(task.gold_plan);
        const bool dup = has_literal_duplicate(task.gold_plan);
        excluded += dup;
        for (auto h : {Horizon::kSh, Horizon::kFh}) {
          ++noisy_traces;
          noisy_repeated += trace_repetition(run_trace(h, task, noisy, s.context(), 2)).repeated;
          if (dup) continue;
          ++oracle_traces;
          oracle_repeated += trace_repetition(run_trace(h, task, oracle, s.context(), 2)).repeated;
        }
      }
    }
    // A gold program that itself issues the same call twice is flagged, and
    // only that pair is flagged.
    const testing::Suite mini("kopl/mini_tasks.json");
    const auto& taller = mini.task("mini-taller");
    const auto rep = trace_repetition(run_fh(taller, OraclePolicy(taller.gold_plan), mini.context(), 2));
    v.require(rep.pairs == std::vector<std::pair<std::size_t, std::size_t>>{{0, 2}}, "gold duplicate is the only pair");
    v.require(noisy_repeated == noisy_traces, "repeat-rate 1 flags 100% of traces");
    v.require(oracle_repeated == 0, "oracle flags 0% of traces");
    v.detail << "noisy " << noisy_repeated << "/" << noisy_traces << ", oracle " << oracle_repeated << "/"
             << oracle_traces << " (" << excluded << " task with a duplicated gold call excluded) ";
  });

  criterion("token-accounting", 0, [](Verdict& v) {
    std::size_t tasks = 0;
    for (const char* suite : testing::kSuites) {
      const testing::Suite s(suite);
      for (const auto& task : s.dataset.tasks) {
        if (gold_tool_steps(task.gold_plan).size() < 3) continue;
        const OraclePolicy oracle(task.gold_plan);
        const auto sh = run_sh(task, oracle, s.context(), 1);
        const auto fh = run_fh(task, oracle, s.context(), 1);
        const bool clean = sh.replans == 0 && fh.replans == 0 && sh.format_retries == 0 && fh.format_retries == 0 &&
                           sh.status == TraceStatus::kAnswered && fh.status == TraceStatus::kAnswered;
        v.require(clean, "no-failure oracle run on " + task.id);
        ++tasks;
        v.require(account_tokens(sh).prompt_tokens > account_tokens(fh).prompt_tokens, "SH > FH prompt tokens on " + task.id);
      }
    }
    v.require(tasks >= 20, "at least 20 tasks with 3+ steps");
    v.detail << tasks << " tasks ";
  });

  criterion("gee-fidelity", 30.0, [](Verdict& v) {
    // (i) small fixtures against the plain-loop Newton oracle.
    double worst = 0;
    std::mt19937_64 rng(99);
    std::normal_distribution<double> norm;
    std::uniform_real_distribution<double> unif;
    std::size_t fixtures = 0;
    for (int attempt = 0; fixtures < 20 && attempt < 1000; ++attempt) {
      const std::size_t n = 8 + rng() % 5;
      Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 2);
      Eigen::VectorXd y(static_cast<Eigen::Index>(n));
      oracle::Mat xm;
      oracle::Vec yv;
      std::vector<std::string> c;
      for (std::size_t i = 0; i < n; ++i) {
        const double z = norm(rng);
        const double yi = unif(rng) < 1 / (1 + std::exp(-(0.2 + 0.5 * z))) ? 1 : 0;
        x(static_cast<Eigen::Index>(i), 0) = 1;
        x(static_cast<Eigen::Index>(i), 1) = z;
        y(static_cast<Eigen::Index>(i)) = yi;
        xm.push_back({1, z});
        yv.push_back(yi);
        c.push_back("q" + std::to_string(i / 2));
      }
      GeeFit fit;
      try {
        fit = fit_clustered_logit(x, y, c);
      } catch (const GeeError&) {
        continue;
      }
      if (fit.separation) continue;  // no finite MLE to compare
      const auto ref = oracle::fit(xm, yv, c);
      for (int j = 0; j < 2; ++j) worst = std::max(worst, std::fabs(fit.beta(j) - ref.beta[static_cast<std::size_t>(j)]));
      ++fixtures;
    }
    v.require(fixtures == 20, "20 non-separated fixtures");
    v.require(worst < 1e-6, "coefficients within 1e-6 of Newton oracle");

    // (ii) coverage of the known depth effect.
    const double beta_true[] = {0.2, -0.4, 0.3, 0.1};
    std::size_t covered = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      std::mt19937_64 r(seed);
      const Eigen::Index n = 2000;
      Eigen::MatrixXd x(n, 4);
      Eigen::VectorXd y(n);
      std::vector<std::string> c;
      double depth = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (i % 4 == 0) depth = norm(r);  // one depth per question
        const double sh = static_cast<double>(i % 2);
        x.row(i) << 1, depth, sh, depth * sh;
        const double eta = beta_true[0] + beta_true[1] * depth + beta_true[2] * sh + beta_true[3] * depth * sh;
        y(i) = unif(r) < 1 / (1 + std::exp(-eta)) ? 1 : 0;
        c.push_back("q" + std::to_string(i / 4));
      }
      const auto fit = fit_clustered_logit(x, y, c);
      v.require(fit.clusters == 500, "500 clusters");
      covered += std::fabs(fit.beta(1) - beta_true[1]) <= 3 * fit.std_errors(1);
    }
    v.require(covered >= 95, "truth within 3 SE in at least 95 of 100 seeds");

    // (iii) positive rescaling leaves z unchanged.
    double zdiff = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      std::mt19937_64 r(seed + 1000);
      const Eigen::Index n = 400;
      Eigen::MatrixXd x(n, 3);
      Eigen::VectorXd y(n);
      std::vector<std::string> c;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double a = norm(r), b = norm(r);
        x.row(i) << 1, a, b;
        y(i) = unif(r) < 1 / (1 + std::exp(-(0.1 + 0.6 * a - 0.3 * b))) ? 1 : 0;
        c.push_back("q" + std::to_string(i / 4));
      }
      auto scaled = x;
      scaled.col(1) *= 0.013;
      scaled.col(2) *= 250.0;
      const auto f0 = fit_clustered_logit(x, y, c);
      const auto f1 = fit_clustered_logit(scaled, y, c);
      for (int j = 0; j < 3; ++j) zdiff = std::max(zdiff, std::fabs(f0.z(j) - f1.z(j)));
    }
    v.require(zdiff < 1e-8, "z invariant to rescaling within 1e-8");
    v.detail << "max |dbeta|=" << worst << ", coverage " << covered << "/100, max |dz|=" << zdiff << " ";
  });

  criterion("information-parity", 0, [](Verdict& v) {
    std::size_t runs = 0, events = 0;
    const std::vector<std::unique_ptr<testing::Suite>> suites = [] {
      std::vector<std::unique_ptr<testing::Suite>> out;
      for (const char* s : testing::kSuites) out.push_back(std::make_unique<testing::Suite>(s, Robustness::kLow, 0));
      return out;
    }();
    std::vector<std::pair<const testing::Suite*, const Task*>> tasks;
    for (const auto& s : suites) {
      for (const auto& t : s->dataset.tasks) tasks.emplace_back(s.get(), &t);
    }
    for (std::uint64_t seed = 0; runs < 500; ++seed) {
      const auto& [suite, task] = tasks[seed % tasks.size()];
      NoiseModel n;
      n.schema_rate = 0.5;
      n.reference_rate = 0.2;
      n.repeat_rate = 0.1;
      n.correction = seed % 3 == 0 ? Correction::kNeverCorrects : Correction::kCorrectsAfterFeedback;
      n.seed = seed;
      const NoisyPolicy noisy(task->gold_plan, n, suite->bundle.env->catalog());
      const auto trace_seed = seed * 7919 + 1;
      const auto fh = run_fh(*task, noisy, suite->context(), trace_seed);
      ++runs;
      for (const auto& h : fh.replan_histories) {
        ++events;
        // Replay the same calls through the SH loop and capture what its
        // policy is handed once the same prefix has executed.
        std::optional<std::string> seen;
        const FunctionPolicy replay("replay", [&](const PolicyRequest& r) -> std::string {
          if (r.history.size() == h.size()) {
            seen = serialize_history(r.history);
            return R"([{"tool":"Finish","args":{"answer":"-"}}])";
          }
          return to_wire(std::span<const ToolCall>(&h[r.history.size()].call, 1));
        });
        run_sh(*task, replay, suite->context({1000, 1000, 8}), trace_seed);
        v.require(seen.has_value(), "SH reached the replan point");
        v.require(seen == serialize_history(h), "FH replan history equals SH history");
        const auto prefix = std::span<const StepRecord>(fh.steps).first(h.size());
        for (std::size_t i = 0; i < h.size(); ++i) v.require(prefix[i].entry == h[i], "history is the executed prefix");
      }
    }
    v.require(events > 0, "replan events occurred");
    v.detail << runs << " runs, " << events << " replan events ";
  });

  criterion("depth-breadth-oracle", 0, [](Verdict& v) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 10000; ++trial) {
      const std::size_t n = 1 + rng() % 8;
      std::vector<std::vector<std::size_t>> deps(n);
      for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
          if (rng() % 3 == 0) deps[i].push_back(j);
        }
      }
      const auto g = ExecutionGraph::from_dependencies(deps);
      const auto d = g.depth();
      v.require(d == brute_depth(deps), "depth equals exhaustive longest path");
      v.require(g.breadth() * static_cast<std::int64_t>(d) == Rational::of(static_cast<std::int64_t>(n), 1),
                "d*b == |V|");
    }
    v.detail << "10000 DAGs ";
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
  return failures == 0 ? 0 : 1;
}

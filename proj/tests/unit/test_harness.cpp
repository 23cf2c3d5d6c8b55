#include "doctest.h"
#include "helpers.hpp"
#include "horizon/answer_match.hpp"
#include "horizon/harness.hpp"
#include "horizon/policies.hpp"

using namespace horizon;

namespace {

const char* kGoogle = R"([{"tool":"Find","args":{"name":"Google"}}])";
const char* kMissing = R"([{"tool":"Find","args":{"name":"Zzyzx Nowhere Corp"}}])";

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("oracle SH spends one invocation per tool step, FH spends one") {
    const testing::Suite s("kopl/mini_tasks.json");
    const auto& task = s.task("mini-taller");
    const OraclePolicy oracle(task.gold_plan);
    const auto ctx = s.context();
    const auto sh = run_sh(task, oracle, ctx, 1);
    const auto fh = run_fh(task, oracle, ctx, 1);
    for (const auto* t : {&sh, &fh}) {
      CHECK(t->status == TraceStatus::kAnswered);
      REQUIRE(t->answer);
      CHECK(match_answer(*t->answer, task.gold_answers, task.match) == MatchLabel::kCorrect);
      CHECK(t->tool_calls() == 4);
      CHECK(t->replans == 0);
      CHECK(t->format_retries == 0);
    }
    CHECK(sh.invocations.size() == 4);
    CHECK(fh.invocations.size() == 1);
    CHECK(sh.history() == fh.history());
    CHECK(account_tokens(sh).invocations == 4);
  }

  TEST_CASE("account_tokens sums every invocation, including rejected replies") {
    Trace t;
    t.invocations.resize(3);
    t.invocations[0].prompt_tokens = 10;
    t.invocations[0].completion_tokens = 2;
    t.invocations[1].prompt_tokens = 12;
    t.invocations[1].completion_tokens = 1;
    t.invocations[1].format_error = "syntax";
    t.invocations[2].prompt_tokens = 15;
    t.invocations[2].completion_tokens = 3;
    CHECK(account_tokens(t) == TokenStats{37, 6, 3});
  }

  TEST_CASE("tool-call budget stops a policy that never finishes") {
    const testing::Suite s("kopl/mini_tasks.json");
    const ScriptedPolicy forever({kGoogle});
    const auto t = run_sh(s.task("mini-taller"), forever, s.context(), 3);
    CHECK(t.status == TraceStatus::kBudgetFailed);
    CHECK(t.tool_calls() == 30);
    CHECK(t.invocations.size() == 30);

    Budget small;
    small.max_tool_calls = 5;
    const auto capped = run_sh(s.task("mini-taller"), forever, s.context(small), 3);
    CHECK(capped.tool_calls() == 5);
  }

  TEST_CASE("SH failure budget: eight fed-back failures, the ninth ends the trace") {
    const testing::Suite s("kopl/mini_tasks.json");
    const ScriptedPolicy failing({kMissing});
    const auto t = run_sh(s.task("mini-taller"), failing, s.context(), 3);
    CHECK(t.status == TraceStatus::kReplanFailed);
    CHECK(t.replans == 8);
    CHECK(t.tool_calls() == 9);
  }

  TEST_CASE("FH replan budget: eight replans, the ninth failure ends the trace") {
    const testing::Suite s("kopl/mini_tasks.json");
    const ScriptedPolicy failing({kMissing});
    const auto t = run_fh(s.task("mini-taller"), failing, s.context(), 3);
    CHECK(t.status == TraceStatus::kReplanFailed);
    CHECK(t.replans == 8);
    CHECK(t.tool_calls() == 9);
    CHECK(t.invocations.size() == 9);
    CHECK(t.replan_histories.size() == 8);
    for (std::size_t i = 0; i < t.replan_histories.size(); ++i) CHECK(t.replan_histories[i].size() == i + 1);
  }

  TEST_CASE("format retries are capped at eight") {
    const testing::Suite s("kopl/mini_tasks.json");
    const ScriptedPolicy garbage({"I think the answer is Google."});
    for (auto h : {Horizon::kSh, Horizon::kFh}) {
      const auto t = run_trace(h, s.task("mini-taller"), garbage, s.context(), 3);
      CHECK(t.status == TraceStatus::kFormatFailed);
      CHECK(t.format_retries == 8);
      CHECK(t.invocations.size() == 9);
      CHECK(t.tool_calls() == 0);
      for (const auto& inv : t.invocations) CHECK_FALSE(inv.format_error.empty());
    }
  }

  TEST_CASE("a retry turn reaches the model with the reason") {
    const testing::Suite s("kopl/mini_tasks.json");
    std::vector<std::string> seen;
    const FunctionPolicy p("probe", [&](const PolicyRequest& r) -> std::string {
      if (r.attempt == 0) return R"([{"tool":"Fnd","args":{"name":"Google"}}])";
      seen.push_back(r.messages.back().content);
      return R"([{"tool":"Find","args":{"name":"Google"}},{"tool":"Finish","args":{"answer":"$0"}}])";
    });
    const auto t = run_sh(s.task("mini-taller"), p, s.context(), 1);
    CHECK(t.status == TraceStatus::kAnswered);
    CHECK(t.format_retries == 1);
    REQUIRE(seen.size() == 1);
    CHECK(seen[0].find("Reason: unknown_tool") != std::string::npos);
  }

  TEST_CASE("SH rejects multi-step replies") {
    const testing::Suite s("kopl/mini_tasks.json");
    const ScriptedPolicy two({R"([{"tool":"Find","args":{"name":"Google"}},{"tool":"Find","args":{"name":"Meta"}}])"});
    const auto t = run_sh(s.task("mini-taller"), two, s.context(), 1);
    CHECK(t.status == TraceStatus::kFormatFailed);
    CHECK(t.invocations.front().format_error.rfind("not_single_step", 0) == 0);
  }

  TEST_CASE("Finish citing a failed step is no answer") {
    const testing::Suite s("kopl/mini_tasks.json");
    const ScriptedPolicy p({R"([{"tool":"Find","args":{"name":"Zzyzx Nowhere Corp"}},
                                {"tool":"Finish","args":{"answer":"$0"}}])"});
    const auto fh = run_fh(s.task("mini-taller"), p, s.context({30, 0, 8}), 1);
    CHECK(fh.status == TraceStatus::kReplanFailed);
    const ScriptedPolicy cite({R"([{"tool":"Find","args":{"name":"Google"}}])",
                               R"([{"tool":"Find","args":{"name":"Zzyzx Nowhere Corp"}}])",
                               R"([{"tool":"Finish","args":{"answer":"$1 or $0"}}])"});
    const auto sh = run_sh(s.task("mini-taller"), cite, s.context(), 1);
    CHECK(sh.status == TraceStatus::kNoAnswer);
    CHECK_FALSE(sh.answer);
    CHECK(sh.tool_calls() == 2);
  }

  TEST_CASE("Finish with literal text and embedded references") {
    const testing::Suite s("kopl/mini_tasks.json");
    const ScriptedPolicy p({R"([{"tool":"Find","args":{"name":"Google"}},
                                {"tool":"Finish","args":{"answer":"It is $0."}}])"});
    const auto t = run_fh(s.task("mini-taller"), p, s.context(), 1);
    REQUIRE(t.answer);
    CHECK(*t.answer == "It is Google.");
  }

  TEST_CASE("FH plan without Finish answers with the last output") {
    const testing::Suite s("kopl/mini_tasks.json");
    const ScriptedPolicy p({kGoogle});
    const auto t = run_fh(s.task("mini-taller"), p, s.context(), 1);
    CHECK(t.status == TraceStatus::kAnswered);
    CHECK(t.answer == "Google");
  }

  TEST_CASE("step seeds differ by index and are reproducible") {
    CHECK(step_seed(7, 0) == step_seed(7, 0));
    CHECK(step_seed(7, 0) != step_seed(7, 1));
    CHECK(step_seed(7, 0) != step_seed(8, 0));
  }

  TEST_CASE("oracle answers every suite task under both horizons") {
    for (const char* suite : testing::kSuites) {
      const testing::Suite s(suite);
      for (const auto& task : s.dataset.tasks) {
        const OraclePolicy oracle(task.gold_plan);
        for (auto h : {Horizon::kSh, Horizon::kFh}) {
          const auto t = run_trace(h, task, oracle, s.context(), 11);
          CAPTURE(task.id);
          CHECK(t.status == TraceStatus::kAnswered);
          REQUIRE(t.answer);
          CHECK(match_answer(*t.answer, task.gold_answers, task.match) == MatchLabel::kCorrect);
          CHECK(t.invocations.size() == (h == Horizon::kFh ? 1 : gold_tool_steps(task.gold_plan).size()));
        }
      }
    }
  }
}

#include "doctest.h"
#include "helpers.hpp"
#include "horizon/prompts.hpp"

using namespace horizon;

TEST_SUITE("prompts") {
  TEST_CASE("whitespace tokenizer counts maximal non-space runs") {
    const WhitespaceTokenizer t;
    CHECK(t.count("") == 0);
    CHECK(t.count("   ") == 0);
    CHECK(t.count("a") == 1);
    CHECK(t.count("  Find  the\tanswer\n now ") == 4);
    CHECK(make_tokenizer("whitespace") != nullptr);
    CHECK(make_tokenizer("bpe-unknown") == nullptr);
    const std::vector<Message> msgs{{"system", "one two"}, {"user", "three"}};
    CHECK(count_tokens(t, msgs) == 3);
  }

  TEST_CASE("fill_template leaves unknown placeholders alone") {
    const std::pair<std::string_view, std::string_view> values[] = {{"a", "1"}, {"b", "{a}"}};
    CHECK(fill_template("x{a}y{b}z{c}", values) == "x1y{a}z{c}");
    CHECK(fill_template("no braces", values) == "no braces");
    CHECK(fill_template("open { only", values) == "open { only");
  }

  TEST_CASE("system prompt carries tool definitions and at most ten demonstrations") {
    std::vector<Demonstration> demos;
    for (int i = 0; i < 14; ++i) demos.push_back({"question number " + std::to_string(i), "[]"});
    const auto catalog = kopl_catalog();
    const PromptBuilder b("kopl", catalog, demos);
    const auto sh = b.system_prompt(Horizon::kSh, "question number 3");
    const auto fh = b.system_prompt(Horizon::kFh, "question number 3");
    CHECK(sh.find(b.tool_definitions()) != std::string::npos);
    CHECK(fh.find(b.tool_definitions()) != std::string::npos);
    CHECK(b.tool_definitions().find("\"Finish\"") != std::string::npos);
    CHECK(sh != fh);
    const auto chosen = b.select_demonstrations("question number 3");
    CHECK(chosen.size() == kDemonstrationCount);
    CHECK(chosen.front()->question == "question number 3");
    std::size_t shown = 0;
    for (std::size_t pos = 0; (pos = sh.find("Question: question number", pos)) != std::string::npos; ++pos) ++shown;
    CHECK(shown == kDemonstrationCount);
    CHECK(sh.find("{tool_definitions}") == std::string::npos);
    CHECK(sh.find("{demonstrations}") == std::string::npos);
    CHECK_THROWS(PromptBuilder("sparql", catalog));
  }

  TEST_CASE("demonstration files load for every engine") {
    for (const char* f : {"kopl/demonstrations.json", "atomic/demonstrations.json", "qa/demonstrations.json"}) {
      const auto demos = load_demonstrations_file(testing::data_path(f).string());
      CHECK_FALSE(demos.empty());
    }
    CHECK_THROWS(load_demonstrations("{}"));
    CHECK_THROWS(load_demonstrations("[{\"question\":\"q\"}]"));
  }

  TEST_CASE("execution result and replan turn formats") {
    const auto catalog = kopl_catalog().with_finish();
    const auto plan = parse_plan(R"([{"tool":"Find","args":{"name":"Google"}},
      {"tool":"QueryAttr","args":{"input":"$0","key":"employees"}}])",
                                 catalog);
    const std::vector<HistoryEntry> h{{0, plan.steps[0], true, "Google"},
                                      {1, plan.steps[1], false, "Error: no attribute 'employees'"}};
    const auto result = PromptBuilder::execution_result(h);
    CHECK(result == "[0] " + to_wire(plan.steps[0]) + "\n    -> Google\n[1] " + to_wire(plan.steps[1]) +
                        "\n    -> Error: no attribute 'employees'");
    const auto replan = PromptBuilder::replan_message(h, 2);
    CHECK(replan.find(result) != std::string::npos);
    CHECK(replan.find("starting at index 2") != std::string::npos);
    CHECK(PromptBuilder::observation_message(h[1]) == "Observation $1: Error: no attribute 'employees'");
    CHECK(PromptBuilder::question_message("Who?") == "Question: Who?");
    CHECK(PromptBuilder::invalid_format_message("syntax: bad").find("\nReason: syntax: bad") != std::string::npos);
  }

  TEST_CASE("serialize_history distinguishes outcome and observation") {
    const auto catalog = kopl_catalog().with_finish();
    const auto plan = parse_plan(R"([{"tool":"Find","args":{"name":"Google"}}])", catalog);
    const std::vector<HistoryEntry> a{{0, plan.steps[0], true, "Google"}};
    std::vector<HistoryEntry> b = a;
    CHECK(serialize_history(a) == serialize_history(b));
    b[0].ok = false;
    CHECK(serialize_history(a) != serialize_history(b));
    b = a;
    b[0].observation = "Google LLC";
    CHECK(serialize_history(a) != serialize_history(b));
    CHECK(serialize_history({}) == "");
  }
}

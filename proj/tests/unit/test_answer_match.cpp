#include "doctest.h"
#include "horizon/answer_match.hpp"

using namespace horizon;

namespace {

MatchLabel m(std::string_view predicted, std::vector<std::string> gold, MatchMode mode = MatchMode::kExactSet) {
  return match_answer(predicted, gold, mode);
}

}  // namespace

TEST_SUITE("answer_match") {
  TEST_CASE("a gold value inside a sentence is correct") {
    CHECK(m("The answer is LeBron James Jr.", {"LeBron James Jr."}) == MatchLabel::kCorrect);
    CHECK(m("lebron james jr.", {"LeBron James Jr."}) == MatchLabel::kCorrect);
    CHECK(m("LeBron James", {"LeBron James Jr."}) == MatchLabel::kIncorrect);
  }

  TEST_CASE("entity ids or names") {
    const std::vector<std::string> gold{"m.02686wj (He's a Bully, Charlie Brown)"};
    CHECK(match_answer("m.02686wj", gold, MatchMode::kEntityIdOrName) == MatchLabel::kCorrect);
    CHECK(match_answer("He's a Bully, Charlie Brown", gold, MatchMode::kEntityIdOrName) == MatchLabel::kCorrect);
    CHECK(match_answer("m.03nm_fh", gold, MatchMode::kEntityIdOrName) == MatchLabel::kIncorrect);
  }

  TEST_CASE("numeric values") {
    CHECK(m("2", {"2"}, MatchMode::kNumeric) == MatchLabel::kCorrect);
    CHECK(m("There are 2.0 of them", {"2"}, MatchMode::kNumeric) == MatchLabel::kCorrect);
    CHECK(m("67,000", {"67000"}, MatchMode::kNumeric) == MatchLabel::kCorrect);
    CHECK(m("206 centimetre", {"206 centimetre"}, MatchMode::kNumeric) == MatchLabel::kCorrect);
    CHECK(m("12", {"2"}, MatchMode::kNumeric) == MatchLabel::kIncorrect);
  }

  TEST_CASE("sets: missing or extra items are partial") {
    const std::vector<std::string> gold{"Twilight", "Abduction"};
    CHECK(match_answer("Twilight; Abduction", gold, MatchMode::kExactSet) == MatchLabel::kCorrect);
    CHECK(match_answer("Twilight", gold, MatchMode::kExactSet) == MatchLabel::kPartiallyCorrect);
    CHECK(match_answer("Twilight; Abduction; Eclipse", gold, MatchMode::kExactSet) == MatchLabel::kPartiallyCorrect);
  }

  TEST_CASE("refusals") {
    CHECK(m("", {"Google"}) == MatchLabel::kRefusal);
    CHECK(m("I don't know.", {"Google"}) == MatchLabel::kRefusal);
    CHECK(m("The answer is unknown", {"Google"}) == MatchLabel::kRefusal);
    CHECK(m("Meta", {"Google"}) == MatchLabel::kIncorrect);
  }

  TEST_CASE("judge only sees unsettled answers") {
    int calls = 0;
    const AnswerJudge judge = [&](std::string_view, std::span<const std::string>) -> std::optional<MatchLabel> {
      ++calls;
      return MatchLabel::kCorrect;
    };
    const std::vector<std::string> gold{"Google"};
    CHECK(match_answer("Google", gold, MatchMode::kExactSet, judge) == MatchLabel::kCorrect);
    CHECK(calls == 0);
    CHECK(match_answer("Alphabet's search unit", gold, MatchMode::kExactSet, judge) == MatchLabel::kCorrect);
    CHECK(calls == 1);
    CHECK(match_answer("I don't know", gold, MatchMode::kExactSet, judge) == MatchLabel::kRefusal);
    CHECK(calls == 1);
  }

  TEST_CASE("label text round trips") {
    for (auto l : {MatchLabel::kCorrect, MatchLabel::kPartiallyCorrect, MatchLabel::kIncorrect, MatchLabel::kRefusal}) {
      CHECK(parse_match_label(to_string(l)) == l);
    }
  }
}

#include <random>

#include "doctest.h"
#include "horizon/json_io.hpp"
#include "horizon/report.hpp"

using namespace horizon;

namespace {

OutcomeRecord rec(std::string q, std::string planner, int success, std::size_t depth, Rational breadth) {
  OutcomeRecord r;
  r.run_id = "r1";
  r.question_id = std::move(q);
  r.planner = std::move(planner);
  r.policy = "noisy";
  r.dataset = "d";
  r.engine = "atomic";
  r.robustness = "low";
  r.success = success;
  r.label = success ? "correct" : "incorrect";
  r.status = "answered";
  r.depth = depth;
  r.breadth = breadth;
  return r;
}

// 60 questions x 2 planners x 3 trials with outcomes drawn from a known model.
std::vector<OutcomeRecord> synthetic(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u;
  std::vector<OutcomeRecord> out;
  for (int q = 0; q < 60; ++q) {
    const std::size_t depth = 1 + static_cast<std::size_t>(q % 5);
    const std::size_t nodes = depth + static_cast<std::size_t>(q % 3);
    for (const char* planner : {"sh", "fh"}) {
      for (int t = 0; t < 3; ++t) {
        const double eta = 1.0 - 0.4 * static_cast<double>(depth) + (planner[0] == 's' ? 0.3 : 0.0);
        auto r = rec("q" + std::to_string(q), planner, u(rng) < 1 / (1 + std::exp(-eta)) ? 1 : 0, depth,
                     Rational::of(static_cast<std::int64_t>(nodes), static_cast<std::int64_t>(depth)));
        r.trial = static_cast<std::size_t>(t);
        r.prompt_tokens = planner[0] == 's' ? 300 : 100;
        r.completion_tokens = 10;
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("outcome records round trip through JSON with exact breadth") {
    auto r = rec("mini-employees", "fh", 1, 3, Rational::of(4, 3));
    r.last_tool = "SelectBetween";
    r.has_comparison = true;
    r.prompt_tokens = 812;
    r.repeated = true;
    const auto line = outcome_to_json(r);
    CHECK(line.find('\n') == std::string::npos);
    CHECK(Json::parse(line)["breadth"] == "4/3");
    const auto back = outcome_from_json(line);
    CHECK(back.breadth == Rational::of(4, 3));
    CHECK(back.question_id == r.question_id);
    CHECK(back.last_tool == "SelectBetween");
    CHECK(back.has_comparison);
    CHECK(back.repeated);
    CHECK(back.prompt_tokens == 812);
    CHECK(load_outcomes(line + "\n\n" + line + "\n").size() == 2);
  }

  TEST_CASE("summaries are exact rationals") {
    std::vector<OutcomeRecord> rs{rec("a", "sh", 1, 1, Rational::of(1, 1)), rec("b", "sh", 0, 2, Rational::of(1, 1)),
                                  rec("c", "sh", 1, 2, Rational::of(3, 2)), rec("a", "fh", 0, 1, Rational::of(1, 1))};
    rs[0].prompt_tokens = 10;
    rs[1].prompt_tokens = 11;
    rs[2].prompt_tokens = 11;
    rs[3].prompt_tokens = 8;
    rs[1].repeated = true;
    const auto groups = summarize_run(rs);
    REQUIRE(groups.size() == 1);
    REQUIRE(groups[0].sh);
    REQUIRE(groups[0].fh);
    CHECK(groups[0].sh->accuracy == Rational::of(2, 3));
    CHECK(groups[0].sh->mean_prompt_tokens == Rational::of(32, 3));
    CHECK(groups[0].sh->repetition_rate == Rational::of(1, 3));
    CHECK(groups[0].fh->accuracy == Rational::of(0, 1));
    CHECK(*groups[0].delta_sh() == doctest::Approx(2.0 / 3.0));
    CHECK(*groups[0].input_ratio() == doctest::Approx((32.0 / 3.0) / 8.0));
    CHECK_THROWS_AS(summarize_run({}), std::invalid_argument);
  }

  TEST_CASE("one planner: no fit and a notice") {
    std::vector<OutcomeRecord> rs{rec("a", "fh", 1, 1, Rational::of(1, 1)), rec("b", "fh", 0, 2, Rational::of(1, 1))};
    const auto report = build_report(rs);
    CHECK_FALSE(report.fit);
    CHECK(report.fit_notice.find("one planner") != std::string::npos);
    CHECK_FALSE(report.groups[0].delta_sh());
    CHECK(report_text(report).find("one planner") != std::string::npos);
    CHECK(Json::parse(report_json(report))["gee"].is_null());
  }

  TEST_CASE("design columns: core terms first, controls only when they vary") {
    auto rs = synthetic(1);
    auto d = build_design(rs);
    CHECK(d.names == std::vector<std::string>{"const", "depth", "breadth", "SH", "depth:SH", "breadth:SH"});
    CHECK(d.x.rows() == static_cast<Eigen::Index>(rs.size()));
    CHECK(d.clusters.front() == "q0");
    // Standardized columns have mean 0 and population variance 1.
    CHECK(d.x.col(1).mean() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK((d.x.col(1).array().square().mean()) == doctest::Approx(1.0));
    for (std::size_t i = 0; i < rs.size(); ++i) {
      rs[i].engine = "kopl";
      rs[i].last_tool = i % 2 ? "QueryAttr" : "Count";
      rs[i].dataset = i % 3 ? "kopl-nba" : "kopl-mini";
      rs[i].has_bridge = i % 4 == 0;
    }
    d = build_design(rs);
    CHECK(d.names == std::vector<std::string>{"const", "depth", "breadth", "SH", "depth:SH", "breadth:SH",
                                              "last_tool[QueryAttr]", "dataset[kopl-nba]", "has_bridge"});
    for (auto& r : rs) r.depth = 2;
    CHECK_THROWS_AS(build_design(rs), GeeError);
  }

  TEST_CASE("fit on synthetic outcomes recovers the depth sign and prints a table") {
    const auto report = build_report(synthetic(3));
    REQUIRE(report.fit);
    CHECK(report.fit->names[1] == "depth");
    CHECK(report.fit->beta(1) < 0);
    CHECK(report.fit->clusters == 60);
    const auto text = report_text(report);
    CHECK(text.find("depth:SH") != std::string::npos);
    const auto j = Json::parse(report_json(report));
    CHECK(j["gee"]["coefficients"].size() == 6);
    CHECK(j["groups"][0]["sh"]["mean_prompt_tokens"]["num"] == 300);
    CHECK(j["groups"][0]["input_ratio"] == 3.0);
  }
}

#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "horizon/atomic.hpp"
#include "horizon/json_io.hpp"

using namespace horizon;

namespace {

struct Toy {
  GraphStore store = load_graph_store_file(testing::data_path("atomic/toy_graph.json"));
  SchemaIndex index = SchemaIndex::build(store);
  Grounder grounder{index, Robustness::kHigh};
  AtomicEnvironment env{store, grounder, 2024};
  const AtomicEngine& engine() const { return env.engine(); }
  std::vector<std::string> ids(const EntitySet& set) const {
    std::vector<std::string> out;
    for (auto i : set.ids) out.push_back(store.nodes()[i].id);
    return out;
  }
};

using Ids = std::vector<std::string>;

const char* kLautnerChain = R"([{"tool":"extract_entity","args":{"input":"Taylor Lautner"}},
  {"tool":"find_relation","args":{"relation":"film.film.starring","direction":"forward","target":"$0"}},
  {"tool":"compare","args":{"operator":"<","property":"film.film.runtime","literal":"60 minutes"}},
  {"tool":"merge","args":{"input1":"$1","input2":"$2"}}])";

}  // namespace

TEST_SUITE("atomic") {
  TEST_CASE("extract_entity resolves mentions, classes and literals") {
    const Toy t;
    const auto lautner = t.engine().extract_entity("Taylor Lautner");
    REQUIRE(lautner.ok());
    CHECK(t.ids(std::get<EntitySet>(lautner.value())) == Ids{"m.07ldhs"});
    const auto specials = t.engine().extract_entity("tv.tv_special");
    CHECK(std::get<EntitySet>(specials.value()).ids.size() == 2);
    const auto lit = t.engine().extract_entity("60 minutes");
    REQUIRE(lit.ok());
    CHECK(std::get<TypedValue>(lit.value()).as_number().unit == "minutes");
    const auto bad = t.engine().extract_entity("Zzyzx Unknown");
    REQUIRE_FALSE(bad.ok());
    CHECK_FALSE(bad.failure().candidates.empty());
  }

  TEST_CASE("find_relation directions agree with a scan of the triples") {
    const Toy t;
    const auto lautner = std::get<EntitySet>(t.engine().extract_entity("Taylor Lautner").value());
    const auto films = t.engine().find_relation("film.film.starring", Direction::kForward, lautner).value();
    auto film_ids = t.ids(films);
    std::sort(film_ids.begin(), film_ids.end());
    CHECK(film_ids == Ids{"m.02686wj", "m.03nm_fh", "m.0fphgb"});
    // Backward is forward over the inverted store.
    for (std::size_t n = 0; n < t.store.nodes().size(); ++n) {
      const EntitySet seed{{n}, std::nullopt};
      const auto back = t.engine().find_relation("film.film.directed_by", Direction::kBackward, seed);
      std::set<std::size_t> expect;
      for (const auto& tr : t.store.triples()) {
        if (tr.predicate == "film.film.directed_by" && tr.subject == n) expect.insert(tr.object_node());
      }
      if (expect.empty()) {
        CHECK_FALSE(back.ok());
      } else {
        REQUIRE(back.ok());
        CHECK(std::set<std::size_t>(back.value().ids.begin(), back.value().ids.end()) == expect);
      }
    }
    CHECK_FALSE(t.engine().find_relation("film.film.sequel", Direction::kForward, lautner).ok());
  }

  TEST_CASE("order keeps ties and skips missing values") {
    const Toy t;
    const auto lautner = std::get<EntitySet>(t.engine().extract_entity("Taylor Lautner").value());
    const auto films = t.engine().find_relation("film.film.starring", Direction::kForward, lautner).value();
    CHECK(t.ids(t.engine().order(true, films, "film.film.runtime").value()) == Ids{"m.03nm_fh"});
    CHECK(t.ids(t.engine().order(false, lautner, "people.person.date_of_birth").value()) == Ids{"m.07ldhs"});
    CHECK_FALSE(t.engine().order(true, lautner, "film.film.runtime").ok());
  }

  TEST_CASE("time_constraint with NOW uses the evaluation year") {
    const GraphStore store = load_graph_store(R"({"nodes":[{"id":"a","name":"A"},{"id":"b","name":"B"}],
      "triples":[{"s":"a","p":"aired","o_literal":{"kind":"year","value":2024}},
                 {"s":"b","p":"aired","o_literal":{"kind":"date","value":"2019-05-01"}}]})");
    const auto index = SchemaIndex::build(store);
    const Grounder g(index, Robustness::kHigh);
    const AtomicEngine now2024(store, g, 2024), now2019(store, g, 2019);
    const EntitySet both{{0, 1}, std::nullopt};
    CHECK(now2024.time_constraint(both, "aired", *now2024.parse_year("NOW")).value().ids == std::vector<std::size_t>{0});
    CHECK(now2019.time_constraint(both, "aired", *now2019.parse_year("NOW")).value().ids == std::vector<std::size_t>{1});
  }

  TEST_CASE("Lautner short-film chain compiles to AND of JOIN and evaluates to m.02686wj") {
    const Toy t;
    const auto chain = testing::plan_of(kLautnerChain, atomic_catalog());
    const auto expr = compile_chain(chain);
    CHECK(expr.to_string() == "(AND (JOIN film.film.starring \"Taylor Lautner\") (LT film.film.runtime \"60 minutes\"))");
    const auto compiled = t.engine().eval(expr);
    REQUIRE(compiled.ok());
    CHECK(t.ids(std::get<EntitySet>(compiled.value())) == Ids{"m.02686wj"});
    const auto stepwise = execute_program(t.env, chain);
    REQUIRE(stepwise.ok);
    CHECK(stepwise.answer == t.env.render(compiled.value()));
  }

  TEST_CASE("S-expression text round trips") {
    const auto e = parse_sexpr("(COUNT (AND (JOIN (R film.film.directed_by) m.02686wj) tv.tv_special))");
    CHECK(parse_sexpr(e.to_string()) == e);
    CHECK(e.head() == "COUNT");
    CHECK_THROWS_AS(parse_sexpr("(AND a"), SExprError);
  }

  TEST_CASE("compile errors") {
    const auto catalog = atomic_catalog().with_finish();
    const auto count_as_set = parse_plan(R"([{"tool":"extract_entity","args":{"input":"Twilight"}},
      {"tool":"count","args":{"input":"$0"}},
      {"tool":"merge","args":{"input1":"$0","input2":"$1"}}])",
                                         catalog);
    CHECK_THROWS_AS(compile_chain(count_as_set), CompileError);
    const auto single = parse_plan(R"([{"tool":"extract_entity","args":{"input":"Twilight"}}])", catalog);
    CHECK(compile_chain(single).to_string() == "Twilight");
    const Toy t;
    CHECK(t.engine().count(EntitySet{}) == 0);
    CHECK(std::get<std::int64_t>(t.engine().eval(parse_sexpr("(COUNT (JOIN film.film.starring m.07ldhs))")).value()) == 3);
    CHECK_FALSE(t.engine().eval(parse_sexpr("(JOIN film.film.starring (AND m.07ldhs m.03nm_fh))")).ok());
  }

  TEST_CASE("compiled and step-wise evaluation agree on random chains") {
    const Toy t;
    const auto catalog = atomic_catalog().with_finish();
    std::mt19937_64 rng(2024);
    auto pick = [&](const std::vector<std::string>& v) { return v[rng() % v.size()]; };
    const std::vector<std::string> seeds{"Taylor Lautner", "Kristen Stewart", "Twilight", "film.film",
                                         "tv.tv_special", "people.person", "Sam Jaimes", "Abduction"};
    const std::vector<std::string> rels{"film.film.starring", "film.film.directed_by"};
    const std::vector<std::string> props{"film.film.runtime", "film.film.release_date", "people.person.date_of_birth"};
    const std::vector<std::string> literals{"60 minutes", "110 minutes", "2000-01-01", "2010-06-01"};
    const std::vector<std::string> ops{"<", "<=", ">", ">="};
    const std::vector<std::string> years{"2006", "2008", "2011", "NOW"};
    std::size_t both_ok = 0;
    for (int trial = 0; trial < 400; ++trial) {
      Json steps = Json::array();
      std::vector<std::size_t> sets;
      const std::size_t len = 1 + rng() % 5;
      for (std::size_t i = 0; i < len; ++i) {
        const auto ref = [&] { return "$" + std::to_string(sets[rng() % sets.size()]); };
        const int kind = sets.empty() ? static_cast<int>(rng() % 2) * 4 : static_cast<int>(rng() % 6);
        if (kind == 0) {
          steps.push_back({{"tool", "extract_entity"}, {"args", {{"input", pick(seeds)}}}});
        } else if (kind == 1) {
          steps.push_back({{"tool", "find_relation"},
                           {"args", {{"relation", pick(rels)}, {"direction", rng() % 2 ? "forward" : "backward"},
                                     {"target", ref()}}}});
        } else if (kind == 2) {
          steps.push_back({{"tool", "merge"}, {"args", {{"input1", ref()}, {"input2", ref()}}}});
        } else if (kind == 3) {
          steps.push_back({{"tool", "order"},
                           {"args", {{"mode", rng() % 2 ? "argmax" : "argmin"}, {"input", ref()}, {"property", pick(props)}}}});
        } else if (kind == 4) {
          steps.push_back({{"tool", "compare"},
                           {"args", {{"operator", pick(ops)}, {"property", pick(props)}, {"literal", pick(literals)}}}});
        } else {
          steps.push_back({{"tool", "time_constraint"},
                           {"args", {{"input", ref()}, {"relation", "film.film.release_date"}, {"literal", pick(years)}}}});
        }
        sets.push_back(i);
      }
      if (rng() % 4 == 0) steps.push_back({{"tool", "count"}, {"args", {{"input", "$" + std::to_string(len - 1)}}}});
      const auto chain = parse_plan(steps.dump(), catalog);
      // The compiled form only covers the last step and its ancestors, so
      // compare against the last observation rather than whole-chain success.
      std::vector<Observation> obs;
      for (std::size_t i = 0; i < chain.steps.size(); ++i) obs.push_back(execute_step(t.env, chain.steps[i], obs, i));
      const auto& last = obs.back();
      const auto compiled = t.engine().eval(compile_chain(chain));
      CAPTURE(steps.dump());
      CHECK(last.ok == compiled.ok());
      if (last.ok && compiled.ok()) {
        ++both_ok;
        CHECK(t.env.render(*last.value) == t.env.render(compiled.value()));
      }
    }
    CHECK(both_ok > 50);
  }

  TEST_CASE("the catalog has 7 tools") { CHECK(atomic_catalog().tools().size() == 7); }
}

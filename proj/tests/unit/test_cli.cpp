#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "horizon/cli.hpp"
#include "horizon/json_io.hpp"
#include "horizon/report.hpp"

using namespace horizon;
namespace fs = std::filesystem;

namespace {

const fs::path kSource(HORIZON_SOURCE_DIR);

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("horizon_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string l; std::getline(in, l);) n += !l.empty();
  return n;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("run writes manifest, traces, outcomes and summary") {
    const auto out = scratch("run");
    std::ostringstream log, err;
    RunOverrides o;
    o.trials = 1;
    REQUIRE(cmd_run(kSource / "configs/mini_oracle.json", out, o, log, err) == kExitOk);
    for (const char* f : {"manifest.json", "traces.jsonl", "outcomes.jsonl", "summary.txt"}) CHECK(fs::exists(out / f));
    const auto manifest = Json::parse(read_file(out / "manifest.json"));
    CHECK(manifest["dataset"] == "kopl-mini");
    CHECK(manifest["trials"] == 1);
    CHECK(manifest["planners"].size() == 2);
    CHECK(manifest["config_hash"].get<std::string>().size() == 16);
    CHECK(manifest["task_ids"].size() == 7);
    CHECK(line_count(out / "outcomes.jsonl") == 14);
    for (const auto& r : load_outcomes(read_file(out / "outcomes.jsonl"))) CHECK(r.success == 1);
    CHECK(log.str().find("1.000    1.000") != std::string::npos);
    fs::remove_all(out);
  }

  TEST_CASE("config problems exit with 2 before anything runs") {
    const auto out = scratch("bad");
    std::ostringstream log, err;
    CHECK(cmd_run(kSource / "tests/fixtures/bad_engine.json", out, {}, log, err) == kExitConfig);
    CHECK(err.str().find("config error") != std::string::npos);
    CHECK_FALSE(fs::exists(out / "manifest.json"));
    CHECK(cmd_run(kSource / "configs/does_not_exist.json", out, {}, log, err) == kExitConfig);
    RunOverrides o;
    o.planner = "sideways";
    CHECK(cmd_run(kSource / "configs/mini_oracle.json", out, o, log, err) == kExitConfig);
    o = {};
    o.trials = 0;
    CHECK(cmd_run(kSource / "configs/mini_oracle.json", out, o, log, err) == kExitConfig);
    // Config engine kopl against a QA dataset.
    const auto mismatch = scratch("mismatch.json");
    std::ofstream(mismatch) << R"({"dataset": ")" << (kSource / "data/qa/tasks.json").generic_string()
                            << R"(", "engine": "kopl"})";
    CHECK(cmd_run(mismatch, out, {}, log, err) == kExitConfig);
    fs::remove(mismatch);
  }

  TEST_CASE("stats: fit needs both planners, pooled inputs are accepted") {
    const auto a = scratch("stats_a"), b = scratch("stats_b");
    std::ostringstream log, err;
    RunOverrides o;
    o.planner = "fh";
    o.trials = 1;
    REQUIRE(cmd_run(kSource / "configs/mini_oracle.json", a, o, log, err) == kExitOk);
    REQUIRE(cmd_stats({a}, a, log, err) == kExitOk);
    CHECK(read_file(a / "report.txt").find("one planner") != std::string::npos);
    CHECK(Json::parse(read_file(a / "report.json"))["gee"].is_null());

    o.planner = "sh";
    REQUIRE(cmd_run(kSource / "configs/mini_oracle.json", b, o, log, err) == kExitOk);
    std::ostringstream log2;
    const int code = cmd_stats({a, b / "outcomes.jsonl"}, b, log2, err);
    // Oracle outcomes are all successes: the model cannot be fitted, and the
    // failure is reported, not hidden.
    CHECK(code != kExitConfig);
    if (code == kExitOk) CHECK(fs::exists(b / "report.json"));
    CHECK(cmd_stats({scratch("empty")}, b, log2, err) == kExitRuntime);
    fs::remove_all(a);
    fs::remove_all(b);
  }

  TEST_CASE("inspect prints the trace of one question") {
    const auto out = scratch("inspect");
    std::ostringstream log, err;
    RunOverrides o;
    o.trials = 1;
    REQUIRE(cmd_run(kSource / "configs/mini_oracle.json", out, o, log, err) == kExitOk);
    std::ostringstream shown;
    CHECK(cmd_inspect(out, "mini-employees", 0, std::string("fh"), shown, err) == kExitOk);
    CHECK(shown.str().find("SelectBetween") != std::string::npos);
    CHECK(shown.str().find("=> answered") != std::string::npos);
    std::ostringstream none;
    CHECK(cmd_inspect(out, "no-such-question", std::nullopt, std::nullopt, none, err) == kExitRuntime);
    fs::remove_all(out);
  }

  TEST_CASE("validate sniffs the file kind") {
    std::ostringstream log, err;
    for (const char* f : {"data/kopl/mini_kb.json", "data/kopl/nba_tasks.json", "data/atomic/toy_graph.json",
                          "data/qa/corpus.json", "data/qa/tasks.json", "data/atomic/tasks.json"}) {
      CAPTURE(f);
      CHECK(cmd_validate(kSource / f, log, err) == kExitOk);
    }
    const auto bad = scratch("bad.json");
    std::ofstream(bad) << R"({"something": []})";
    CHECK(cmd_validate(bad, log, err) == kExitConfig);
    std::ofstream(bad, std::ios::trunc) << "not json";
    CHECK(cmd_validate(bad, log, err) == kExitConfig);
    std::ofstream(bad, std::ios::trunc) << R"({"documents": [{"title": "A", "text": "x"}, {"title": "A", "text": "y"}]})";
    CHECK(cmd_validate(bad, log, err) == kExitConfig);
    fs::remove(bad);
  }
}

#include <doctest.h>

#include <sstream>

#include "lppo/dataset.hpp"
#include "lppo/error.hpp"
#include "lppo/prefix_sampler.hpp"
#include "lppo/sim_env.hpp"
#include "oracles.hpp"

using namespace lppo;

TEST_SUITE("dataset") {

TEST_CASE("two lines, one with an expert solution") {
  std::istringstream in(
      R"({"id":"a","question":"2+2?","answer":"4"})"
      "\n"
      R"({"id":"b","question":"3+3?","answer":"6","expert_solution":"3+3\n= 6\n"})"
      "\n");
  const auto problems = parse_dataset(in);
  REQUIRE(problems.size() == 2);
  CHECK(problems[0].pool == Pool::Standard);
  CHECK_FALSE(problems[0].expert_solution.has_value());
  CHECK(problems[1].pool == Pool::PrefixEligible);
  CHECK(*problems[1].expert_solution == "3+3\n= 6\n");
}

TEST_CASE("empty input gives an empty dataset") {
  std::istringstream in("");
  CHECK(parse_dataset(in).empty());
  std::istringstream blanks("\n  \n\n");
  CHECK(parse_dataset(blanks).empty());
}

TEST_CASE("duplicate id names the id and the later line") {
  std::ostringstream text;
  for (int line = 1; line <= 9; ++line) {
    const std::string id = (line == 3 || line == 9) ? "q7" : "q" + std::to_string(100 + line);
    text << R"({"id":")" << id << R"(","question":"x","answer":"y"})" << '\n';
  }
  std::istringstream in(text.str());
  try {
    parse_dataset(in);
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("\"q7\"") != std::string::npos);
    CHECK(msg.find("line 9") != std::string::npos);
  }
}

TEST_CASE("missing key and bad JSON carry the line number") {
  std::istringstream missing(R"({"id":"a","question":"x","answer":"y"})"
                             "\n"
                             R"({"id":"b","answer":"y"})");
  CHECK_THROWS_WITH_AS(parse_dataset(missing), doctest::Contains("line 2"), Error);
  std::istringstream broken("{not json\n");
  CHECK_THROWS_WITH_AS(parse_dataset(broken), doctest::Contains("line 1"), Error);
  std::istringstream empty_solution(R"({"id":"a","question":"x","answer":"y","expert_solution":"  "})");
  CHECK_THROWS_WITH_AS(parse_dataset(empty_solution), doctest::Contains("empty"), Error);
}

TEST_CASE("missing file is an error naming the path") {
  CHECK_THROWS_WITH_AS(load_dataset("/nonexistent/lppo.jsonl"),
                       doctest::Contains("/nonexistent/lppo.jsonl"), Error);
}

TEST_CASE("synthetic suite is deterministic and fully prefix-eligible by default") {
  DatasetConfig cfg;
  cfg.n_problems = 64;
  cfg.steps_min = 4;
  cfg.steps_max = 8;
  cfg.branching = 4;
  cfg.prefix_eligible_fraction = 1.0;
  cfg.seed = 1;
  const auto a = generate_synthetic(cfg);
  const auto b = generate_synthetic(cfg);
  REQUIRE(a.size() == 64);
  for (const auto& p : a) CHECK(p.pool == Pool::PrefixEligible);

  std::ostringstream sa, sb;
  write_dataset(sa, a);
  write_dataset(sb, b);
  CHECK(sa.str() == sb.str());

  cfg.seed = 2;
  std::ostringstream sc;
  write_dataset(sc, generate_synthetic(cfg));
  CHECK(sc.str() != sa.str());
}

TEST_CASE("eligible fraction") {
  DatasetConfig cfg;
  cfg.prefix_eligible_fraction = 0.0;
  for (const auto& p : generate_synthetic(cfg)) {
    CHECK(p.pool == Pool::Standard);
    CHECK_FALSE(p.expert_solution.has_value());
  }

  cfg.n_problems = 10;
  cfg.prefix_eligible_fraction = 0.5;
  std::size_t eligible = 0;
  for (const auto& p : generate_synthetic(cfg)) eligible += p.pool == Pool::PrefixEligible;
  CHECK(eligible == 5);
}

TEST_CASE("degenerate configs are rejected") {
  DatasetConfig cfg;
  cfg.branching = 1;
  CHECK_THROWS_AS(generate_synthetic(cfg), Error);
  cfg = {};
  cfg.steps_min = 0;
  CHECK_THROWS_AS(generate_synthetic(cfg), Error);
  cfg = {};
  cfg.steps_min = 5;
  cfg.steps_max = 4;
  CHECK_THROWS_AS(generate_synthetic(cfg), Error);
  cfg = {};
  cfg.prefix_eligible_fraction = 1.5;
  CHECK_THROWS_AS(generate_synthetic(cfg), Error);
}

TEST_CASE("round trip through JSONL") {
  DatasetConfig cfg;
  cfg.n_problems = 20;
  cfg.prefix_eligible_fraction = 0.4;
  const auto original = generate_synthetic(cfg);
  const auto dir = oracle::scratch_dir("dataset_roundtrip");
  save_dataset(dir / "d.jsonl", original);
  const auto reloaded = load_dataset(dir / "d.jsonl");
  CHECK(reloaded == original);
}

TEST_CASE("steps stay within range and the path fits the branching factor") {
  DatasetConfig cfg;
  cfg.n_problems = 200;
  cfg.steps_min = 2;
  cfg.steps_max = 5;
  cfg.branching = 3;
  for (const auto& p : generate_synthetic(cfg)) {
    const auto spec = ChainProblemSpec::from_json(p.question);
    CHECK(spec.steps >= 2);
    CHECK(spec.steps <= 5);
    CHECK(spec.correct_path.size() == static_cast<std::size_t>(spec.steps));
    for (int a : spec.correct_path) CHECK((a >= 0 && a < 3));
  }
}

TEST_CASE("every expert solution tokenizes and verifies as correct") {
  DatasetConfig cfg;
  cfg.n_problems = 50;
  const auto problems = generate_synthetic(cfg);
  ChainEnvironment env(problems);
  for (const auto& p : problems) {
    REQUIRE(p.expert_solution.has_value());
    const TokenSeq seq = tokenize(*p.expert_solution);
    const auto& chain = env.problem(p.id);
    CHECK(seq.size() == static_cast<std::size_t>(chain.spec.steps));
    ChainRollout r;
    r.problem_id = p.id;
    r.actions = parse_actions(seq.tokens);
    CHECK(verify(r, chain) == 1);
    CHECK(p.gold_answer == chain.spec.render_answer());
  }
}

}  // TEST_SUITE

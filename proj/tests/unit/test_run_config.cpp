#include <doctest.h>

#include <sstream>

#include "lppo/error.hpp"
#include "lppo/run_config.hpp"
#include "oracles.hpp"

using namespace lppo;

TEST_SUITE("run_config") {

TEST_CASE("defaults") {
  const RunConfig cfg;
  CHECK(cfg.group_size == 32);
  CHECK(cfg.batch_size == 128);
  CHECK(cfg.mini_batch == 64);
  CHECK(cfg.beta_min == 0.3);
  CHECK(cfg.beta_max == 0.8);
  CHECK(cfg.weighting.kappa == 8.0);
  CHECK(cfg.weighting.bias == 0.5);
  CHECK(cfg.epsilon_c == 0.0);
  CHECK(cfg.entropy_coef == -0.001);
  CHECK(cfg.learning_rate == 0.1);
  CHECK(cfg.mode == Mode::Lppo);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("modes switch mechanisms independently") {
  RunConfig cfg;
  cfg.mode = Mode::Lppo;
  CHECK((cfg.prefix_enabled() && cfg.weighting_enabled()));
  cfg.mode = Mode::LpOnly;
  CHECK((!cfg.prefix_enabled() && cfg.weighting_enabled()));
  cfg.mode = Mode::PgOnly;
  CHECK((cfg.prefix_enabled() && !cfg.weighting_enabled()));
  cfg.mode = Mode::GrpoBaseline;
  CHECK((!cfg.prefix_enabled() && !cfg.weighting_enabled()));
  CHECK_FALSE(cfg.curation().prefix_enabled);
  for (auto m : {"lppo", "lp_only", "pg_only", "grpo_baseline"}) CHECK(to_string(parse_mode(m)) == m);
  CHECK_THROWS_AS(parse_mode("both"), Error);
}

TEST_CASE("parsing a config file") {
  std::istringstream in(
      "# comment\n"
      "mode = pg_only\n"
      "group_size = 8   # trailing comment\n"
      "\n"
      "synthetic.n_problems=12\n"
      "max_requeue = 3\n"
      "init_mode = zero\n"
      "dataset = data/set.jsonl\n");
  const auto cfg = parse_run_config(in, "/base");
  CHECK(cfg.mode == Mode::PgOnly);
  CHECK(cfg.group_size == 8);
  CHECK(cfg.synthetic.n_problems == 12);
  CHECK(cfg.max_requeue == std::optional<std::size_t>(3));
  CHECK(cfg.weighting.init_mode == InitMode::Zero);
  CHECK(*cfg.dataset_path == std::filesystem::path("/base/data/set.jsonl"));
}

TEST_CASE("errors name the field and line") {
  std::istringstream bad_value("mode = lppo\ngroup_size = many\n");
  CHECK_THROWS_WITH_AS(parse_run_config(bad_value, ""), doctest::Contains("line 2: group_size"), Error);
  std::istringstream unknown("colour = red\n");
  CHECK_THROWS_WITH_AS(parse_run_config(unknown, ""), doctest::Contains("colour"), Error);
  std::istringstream no_eq("group_size 8\n");
  CHECK_THROWS_WITH_AS(parse_run_config(no_eq, ""), doctest::Contains("line 1"), Error);
  std::istringstream invalid("group_size = 1\n");
  CHECK_THROWS_WITH_AS(parse_run_config(invalid, ""), doctest::Contains("group_size"), Error);
  std::istringstream beta("beta_min = 0.9\nbeta_max = 0.5\n");
  CHECK_THROWS_WITH_AS(parse_run_config(beta, ""), doctest::Contains("beta_min"), Error);
  std::istringstream clip("clip_eps = 1.5\n");
  CHECK_THROWS_WITH_AS(parse_run_config(clip, ""), doctest::Contains("clip_eps"), Error);
  CHECK_THROWS_WITH_AS(load_run_config("/no/such/file.cfg"), doctest::Contains("/no/such/file.cfg"), Error);
}

TEST_CASE("text form round trips and the hash follows the content") {
  RunConfig cfg;
  cfg.set("mode", "lp_only");
  cfg.set("learning_rate", "0.25");
  cfg.set("max_requeue", "2");
  cfg.set("layout", "shared_step");
  std::istringstream in(cfg.to_text());
  const auto back = parse_run_config(in, "");
  CHECK(back.to_text() == cfg.to_text());
  CHECK(back.hash() == cfg.hash());
  CHECK(cfg.hash().size() == 16);

  RunConfig other = cfg;
  other.seed = 99;
  CHECK(other.hash() != cfg.hash());
  CHECK(cfg.to_json().at("mode") == "lp_only");
}

TEST_CASE("synthetic problems come from the config") {
  RunConfig cfg;
  cfg.set("synthetic.n_problems", "9");
  cfg.set("synthetic.prefix_eligible_fraction", "0");
  const auto problems = load_problems(cfg);
  CHECK(problems.size() == 9);
  for (const auto& p : problems) CHECK(p.pool == Pool::Standard);
}

}  // TEST_SUITE

#include <doctest.h>

#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "lppo/error.hpp"
#include "lppo/metrics.hpp"
#include "oracles.hpp"

using namespace lppo;

namespace {

std::filesystem::path write_config(const std::filesystem::path& dir, const std::string& body) {
  auto path = dir / "run.cfg";
  std::ofstream(path) << body;
  return path;
}

const char* kSmall =
    "synthetic.n_problems = 12\n"
    "synthetic.steps_min = 5\n"
    "synthetic.steps_max = 6\n"
    "group_size = 8\n"
    "batch_size = 6\n"
    "mini_batch = 6\n"
    "max_steps = 30\n"
    "learning_rate = 1\n";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("train writes metrics and a snapshot") {
  const auto dir = oracle::scratch_dir("cli_train");
  tools::TrainOptions opt;
  opt.config_path = write_config(dir, kSmall);
  opt.out_dir = dir / "out";
  std::filesystem::create_directories(opt.out_dir);
  std::ostringstream log;
  CHECK(tools::cmd_train(opt, log) == 0);
  const auto records = load_records(opt.out_dir / "metrics.jsonl");
  CHECK(records.size() == 30);
  CHECK(std::filesystem::exists(opt.out_dir / "snapshot.jsonl"));
  CHECK(log.str().find("metrics.csv") != std::string::npos);
}

TEST_CASE("overrides and invalid fields") {
  const auto dir = oracle::scratch_dir("cli_overrides");
  const auto path = write_config(dir, kSmall);
  CHECK(tools::resolve_config(path, {{"mode", "pg_only"}}).mode == Mode::PgOnly);
  CHECK_THROWS_WITH_AS(tools::resolve_config(path, {{"group_size", "0"}}),
                       doctest::Contains("group_size"), Error);
  CHECK_THROWS_AS(tools::split_override("novalue"), Error);
  CHECK(tools::split_override("a=b=c") == std::pair<std::string, std::string>{"a", "b=c"});

  tools::TrainOptions opt;
  opt.config_path = write_config(dir, "kappa = -2\n");
  opt.out_dir = dir / "never";
  std::ostringstream log;
  CHECK_THROWS_WITH_AS(tools::cmd_train(opt, log), doctest::Contains("kappa"), Error);
}

TEST_CASE("report converts and smooths") {
  const auto dir = oracle::scratch_dir("cli_report");
  tools::TrainOptions train;
  train.config_path = write_config(dir, kSmall);
  train.out_dir = dir;
  std::ostringstream log;
  tools::cmd_train(train, log);

  tools::ReportOptions rep;
  rep.in_path = dir / "metrics.jsonl";
  rep.out_path = dir / "smoothed.csv";
  rep.smooth = true;
  CHECK(tools::cmd_report(rep, log) == 0);
  const std::string csv = oracle::slurp(rep.out_path);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 32);
  CHECK(csv.find("smoothing_alpha") != std::string::npos);
}

TEST_CASE("ablate writes a table with one row per arm") {
  const auto dir = oracle::scratch_dir("cli_ablate");
  tools::AblateOptions opt;
  opt.config_path = write_config(dir, kSmall);
  opt.arms = {"grpo_baseline", "lppo"};
  opt.seeds = {1, 2};
  opt.out_path = dir / "table.csv";
  opt.threads = 2;
  std::ostringstream log;
  CHECK(tools::cmd_ablate(opt, log) == 0);
  const std::string table = oracle::slurp(opt.out_path);
  CHECK(table.find("\ngrpo_baseline,2,") != std::string::npos);
  CHECK(table.find("\nlppo,2,") != std::string::npos);

  opt.arms = {"lppo", "lppo"};
  CHECK_THROWS_AS(tools::cmd_ablate(opt, log), Error);
}

TEST_CASE("serve over streams") {
  const auto dir = oracle::scratch_dir("cli_serve");
  tools::ServeOptions opt;
  opt.config_path = write_config(dir, kSmall);
  opt.snapshot_path = dir / "s.jsonl";
  std::istringstream in(
      "{\"op\":\"report\",\"id\":\"p003\",\"pass_rate\":0.0,\"epoch\":1}\n"
      "{\"op\":\"prefix\",\"id\":\"p003\"}\n"
      "{\"op\":\"snapshot\"}\n");
  std::ostringstream out;
  CHECK(tools::cmd_serve(opt, in, out) == 0);
  std::istringstream lines(out.str());
  std::string line;
  std::vector<nlohmann::json> replies;
  while (std::getline(lines, line)) replies.push_back(nlohmann::json::parse(line));
  REQUIRE(replies.size() == 3);
  CHECK(replies[0].at("disposition") == "queue_prefix");
  CHECK(replies[1].contains("prefix_text"));
  CHECK(std::filesystem::exists(opt.snapshot_path));
}

}  // TEST_SUITE

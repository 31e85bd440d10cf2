#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "lppo/dataset.hpp"
#include "lppo/error.hpp"

namespace {

// LPPO_LOG selects verbosity: trace, debug, info, warn, error, off.
void setup_logging() {
  auto logger = spdlog::stderr_color_mt("lppo");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("LPPO_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

std::vector<std::pair<std::string, std::string>> parse_overrides(
    const std::vector<std::string>& items) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : items) out.push_back(lppo::tools::split_override(s));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"lppo: learning-progress weighting and prefix-guided sampling scheduler"};
  app.require_subcommand(1);

  std::vector<std::string> train_set;
  lppo::tools::TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Run one training loop on the chain environment");
  train_cmd->add_option("--config", train.config_path, "Run config file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train.out_dir, "Output directory")->capture_default_str();
  train_cmd->add_option("--set", train_set, "Override a config key (key=value)");

  std::vector<std::string> ablate_set;
  std::string ablate_arms;
  std::string ablate_seeds;
  lppo::tools::AblateOptions ablate;
  ablate.threads = std::max(1u, std::thread::hardware_concurrency());
  auto* ablate_cmd = app.add_subcommand("ablate", "Compare training modes across seeds");
  ablate_cmd->add_option("--config", ablate.config_path, "Base run config")->required()->check(CLI::ExistingFile);
  ablate_cmd->add_option("--arms", ablate_arms, "Comma-separated modes")->required();
  ablate_cmd->add_option("--seeds", ablate_seeds, "Comma-separated seeds, or a range a..b");
  ablate_cmd->add_option("--out", ablate.out_path, "Comparison table (CSV)")->capture_default_str();
  ablate_cmd->add_option("--threads", ablate.threads, "Parallel runs");
  ablate_cmd->add_option("--set", ablate_set, "Override a config key (key=value)");

  lppo::tools::ReportOptions report;
  auto* report_cmd = app.add_subcommand("report", "Convert a metrics JSONL file to CSV");
  report_cmd->add_option("--in", report.in_path, "metrics.jsonl")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--out", report.out_path, "CSV output")->required();
  report_cmd->add_flag("--smooth", report.smooth, "Apply the reporting EMA");
  report_cmd->add_option("--alpha", report.alpha, "History weight of the reporting EMA")->capture_default_str();

  std::vector<std::string> serve_set;
  std::string serve_config;
  std::string serve_socket;
  lppo::tools::ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Line-delimited JSON scheduler service");
  serve_cmd->add_option("--socket", serve_socket, "unix:<path> or [host:]port; stdin/stdout when omitted");
  serve_cmd->add_option("--config", serve_config, "Run config (dataset, weighting, prefix settings)");
  serve_cmd->add_option("--snapshot", serve.snapshot_path, "Where the snapshot op writes")->capture_default_str();
  serve_cmd->add_option("--max-connections", serve.max_connections, "Exit after this many sessions (0 = never)");
  serve_cmd->add_option("--set", serve_set, "Override a config key (key=value)");

  lppo::tools::TrainOptions gen;
  std::filesystem::path gen_out = "dataset.jsonl";
  std::vector<std::string> gen_set;
  std::string gen_config;
  auto* gen_cmd = app.add_subcommand("generate", "Write the synthetic chain dataset as JSONL");
  gen_cmd->add_option("--config", gen_config, "Run config supplying synthetic.* keys");
  gen_cmd->add_option("--out", gen_out, "Dataset output")->capture_default_str();
  gen_cmd->add_option("--set", gen_set, "Override a config key (key=value)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) {
      train.overrides = parse_overrides(train_set);
      return lppo::tools::cmd_train(train, std::cout);
    }
    if (*ablate_cmd) {
      ablate.overrides = parse_overrides(ablate_set);
      for (const auto& a : CLI::detail::split(ablate_arms, ',')) {
        if (!a.empty()) ablate.arms.push_back(CLI::detail::trim_copy(a));
      }
      if (auto dots = ablate_seeds.find(".."); dots != std::string::npos) {
        const auto lo = std::stoull(ablate_seeds.substr(0, dots));
        const auto hi = std::stoull(ablate_seeds.substr(dots + 2));
        for (auto s = lo; s <= hi; ++s) ablate.seeds.push_back(s);
      } else {
        for (const auto& s : CLI::detail::split(ablate_seeds, ',')) {
          if (!s.empty()) ablate.seeds.push_back(std::stoull(s));
        }
      }
      return lppo::tools::cmd_ablate(ablate, std::cout);
    }
    if (*report_cmd) return lppo::tools::cmd_report(report, std::cout);
    if (*serve_cmd) {
      serve.overrides = parse_overrides(serve_set);
      if (!serve_config.empty()) serve.config_path = serve_config;
      if (!serve_socket.empty()) serve.socket = serve_socket;
      return lppo::tools::cmd_serve(serve, std::cin, std::cout);
    }
    if (*gen_cmd) {
      auto cfg = lppo::tools::resolve_config(
          gen_config.empty() ? std::nullopt : std::optional<std::filesystem::path>(gen_config),
          parse_overrides(gen_set));
      lppo::save_dataset(gen_out, lppo::load_problems(cfg));
      std::cout << "wrote " << gen_out.string() << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

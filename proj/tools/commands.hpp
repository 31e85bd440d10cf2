#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lppo/run_config.hpp"

namespace lppo::tools {

struct TrainOptions {
  std::filesystem::path config_path;
  std::filesystem::path out_dir = "lppo_run";
  std::vector<std::pair<std::string, std::string>> overrides;
};

struct AblateOptions {
  std::filesystem::path config_path;
  std::vector<std::string> arms;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path out_path = "ablation.csv";
  std::vector<std::pair<std::string, std::string>> overrides;
  unsigned threads = 1;
};

struct ReportOptions {
  std::filesystem::path in_path;
  std::filesystem::path out_path;
  bool smooth = false;
  double alpha = 0.9;
};

struct ServeOptions {
  std::optional<std::filesystem::path> config_path;
  std::optional<std::string> socket;
  std::filesystem::path snapshot_path = "lppo_snapshot.jsonl";
  std::vector<std::pair<std::string, std::string>> overrides;
  std::size_t max_connections = 0;
};

/// Loads the config (or defaults when no path is given) and applies overrides.
RunConfig resolve_config(const std::optional<std::filesystem::path>& path,
                         const std::vector<std::pair<std::string, std::string>>& overrides);

/// Splits "key=value".
std::pair<std::string, std::string> split_override(const std::string& text);

int cmd_train(const TrainOptions& options, std::ostream& log);
int cmd_ablate(const AblateOptions& options, std::ostream& log);
int cmd_report(const ReportOptions& options, std::ostream& log);
int cmd_serve(const ServeOptions& options, std::istream& in, std::ostream& out);

}  // namespace lppo::tools

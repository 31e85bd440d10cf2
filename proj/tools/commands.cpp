#include "commands.hpp"

#include <fstream>
#include <iostream>

#include "lppo/error.hpp"
#include "lppo/metrics.hpp"
#include "lppo/service.hpp"
#include "lppo/trainer.hpp"
#include "socket_server.hpp"

namespace lppo::tools {

std::pair<std::string, std::string> split_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error("override \"" + text + "\" is not key=value");
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

RunConfig resolve_config(const std::optional<std::filesystem::path>& path,
                         const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig cfg = path ? load_run_config(*path) : RunConfig{};
  for (const auto& [k, v] : overrides) cfg.set(k, v);
  cfg.validate();
  return cfg;
}

int cmd_train(const TrainOptions& options, std::ostream& log) {
  const RunConfig cfg = resolve_config(options.config_path, options.overrides);
  Trainer trainer(cfg, load_problems(cfg));
  const RunResult result = trainer.run();
  const auto files = write_run_outputs(result, cfg, options.out_dir);

  log << "mode " << to_string(cfg.mode) << ", " << result.records.size() << " steps"
      << (result.exhausted ? " (dataset exhausted)" : "") << '\n';
  log << "mean pass rate " << result.initial_mean_pass_rate << " -> "
      << result.final_mean_pass_rate << '\n';
  if (result.steps_to_threshold) {
    log << "reached " << cfg.target_pass_rate << " after " << *result.steps_to_threshold
        << " steps\n";
  }
  for (const auto& f : files) log << "wrote " << f.string() << '\n';
  return 0;
}

int cmd_ablate(const AblateOptions& options, std::ostream& log) {
  const RunConfig base = resolve_config(options.config_path, options.overrides);
  std::vector<Mode> arms;
  for (const auto& a : options.arms) arms.push_back(parse_mode(a));
  std::vector<std::uint64_t> seeds = options.seeds;
  if (seeds.empty()) seeds.push_back(base.seed);

  const auto summaries = run_ablation(base, arms, seeds, options.threads);
  {
    std::ofstream out(options.out_path);
    if (!out) throw Error("cannot write " + options.out_path.string());
    write_ablation_table(out, summaries, base);
    if (!out) throw Error("error while writing " + options.out_path.string());
  }
  write_ablation_table(log, summaries, base);
  return 0;
}

int cmd_report(const ReportOptions& options, std::ostream& log) {
  nlohmann::json meta;
  auto records = load_records(options.in_path, &meta);
  if (options.smooth) {
    records = smooth_records(records, options.alpha);
    if (meta.is_object()) meta["smoothing_alpha"] = options.alpha;
  }
  export_records(records, options.out_path, ExportFormat::Csv, meta);
  log << "wrote " << records.size() << " rows to " << options.out_path.string() << '\n';
  return 0;
}

int cmd_serve(const ServeOptions& options, std::istream& in, std::ostream& out) {
  const RunConfig cfg = resolve_config(options.config_path, options.overrides);
  SchedulerService service(cfg, load_problems(cfg), options.snapshot_path);
  if (options.socket) return serve_socket(service, *options.socket, options.max_connections);
  serve_stream(service, in, out);
  return 0;
}

}  // namespace lppo::tools

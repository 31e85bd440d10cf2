#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lppo/curation.hpp"
#include "lppo/dataset.hpp"
#include "lppo/grpo.hpp"
#include "lppo/metrics.hpp"
#include "lppo/policy_table.hpp"
#include "lppo/prefix_sampler.hpp"
#include "lppo/run_config.hpp"
#include "lppo/sim_env.hpp"
#include "lppo/stats_tracker.hpp"

namespace lppo {

/// One evaluated batch entry.
struct EvaluationEvent {
  std::int64_t epoch = 0;
  std::int64_t step = 0;
  std::string id;
  bool prefixed = false;
  std::size_t prefix_len = 0;
  double lambda = 0.0;
  double pass_rate = 0.0;
  double weight = 1.0;  ///< weight applied to this entry's advantages
  Disposition disposition = Disposition::SkipOnly;
};

struct OptimizerAudit {
  std::int64_t step = 0;
  std::size_t groups = 0;
  double objective = 0.0;
  double mean_abs_ratio_dev = 0.0;
  double clip_fraction = 0.0;
  double kl = 0.0;
};

struct RunResult {
  std::vector<StepRecord> records;
  std::vector<BatchPlan> plans;
  std::vector<OptimizerAudit> audits;
  std::vector<EvaluationEvent> events;
  StatsTracker::Snapshot final_snapshot;
  double initial_mean_pass_rate = 0.0;
  double final_mean_pass_rate = 0.0;
  /// 1-based count of steps after which mean_pass_rate first reached the target.
  std::optional<std::int64_t> steps_to_threshold;
  bool exhausted = false;
};

/// The full loop on the chain environment: evaluate pass rates, classify and
/// curate, queue prefixes, update statistics, weight advantages, update the
/// policy, record metrics. Deterministic for a fixed config.
class Trainer {
 public:
  Trainer(RunConfig config, std::vector<Problem> problems);

  RunResult run();

  const PolicyTable& policy() const { return policy_; }
  const StatsTracker& tracker() const { return tracker_; }
  const CurationScheduler& scheduler() const { return scheduler_; }
  const ChainEnvironment& environment() const { return env_; }
  const RunConfig& config() const { return config_; }

 private:
  bool step(RunResult& result);

  RunConfig config_;
  std::vector<Problem> problems_;
  ChainEnvironment env_;
  PolicyTable policy_;
  StatsTracker tracker_;
  CurationScheduler scheduler_;
  std::map<std::string, TokenSeq, std::less<>> solutions_;
  Rng schedule_rng_;
};

nlohmann::json to_json(const EvaluationEvent& e);
nlohmann::json to_json(const OptimizerAudit& a);

/// Header metadata embedded in every output file.
nlohmann::json run_meta(const RunConfig& config);

/// Writes metrics.csv, metrics.jsonl, batches.jsonl, optimizer.jsonl,
/// evaluations.jsonl, report_stream.jsonl and snapshot.jsonl into `dir`.
/// Files already written are removed if a later write fails.
std::vector<std::filesystem::path> write_run_outputs(const RunResult& result,
                                                     const RunConfig& config,
                                                     const std::filesystem::path& dir);

/// Serve-protocol "report" requests for every unprefixed evaluation, in
/// evaluation order, annotated with the weight and disposition the run saw.
std::vector<nlohmann::json> report_stream(const RunResult& result);

struct ArmSummary {
  std::string arm;
  std::vector<std::optional<std::int64_t>> steps_to_threshold;  ///< per seed
  std::vector<double> final_pass_rate;                          ///< per seed
  /// Median steps; unset when the median run never reached the target.
  std::optional<double> median_steps;
  double median_final_pass_rate = 0.0;
};

/// Runs every (arm, seed) pair of `base` with the arm's mode and the seed
/// substituted for `seed`. Rejects duplicate arm names and fewer than 2 arms.
/// Runs are independent and may execute on `threads` workers.
std::vector<ArmSummary> run_ablation(const RunConfig& base, const std::vector<Mode>& arms,
                                     const std::vector<std::uint64_t>& seeds,
                                     unsigned threads = 1);

/// Median where unset entries count as +infinity.
std::optional<double> median_steps(std::vector<std::optional<std::int64_t>> values);
double median(std::vector<double> values);

void write_ablation_table(std::ostream& out, const std::vector<ArmSummary>& arms,
                          const RunConfig& base);

}  // namespace lppo

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lppo/stats_tracker.hpp"

namespace lppo {

/// Telemetry for one training step.
///
/// `mean_pass_rate` is the exact expected unhinted success probability of the
/// current policy averaged over the whole dataset; `mean_reward` is the mean
/// reward of the rollouts actually sampled during the step.
struct StepRecord {
  std::int64_t epoch = 0;
  std::int64_t step = 0;
  double mean_reward = 0.0;
  double mean_pass_rate = 0.0;
  double w_min = 0.0;
  double w_mean = 0.0;
  double w_max = 0.0;
  double kl = 0.0;
  double active_ratio = 0.0;
  double prefix_ratio = 0.0;
  std::size_t n_improving = 0;
  std::size_t n_plateauing = 0;
  std::size_t n_degrading = 0;

  bool operator==(const StepRecord&) const = default;
};

nlohmann::json to_json(const StepRecord& r);
StepRecord step_record_from_json(const nlohmann::json& j);

enum class Trend { Improving, Plateauing, Degrading, Undefined };
std::string_view to_string(Trend t);

/// Improving if progress > tau, Degrading if < -tau, Plateauing otherwise.
Trend classify_trend(std::optional<double> progress, double tau = 0.01);

struct TrendCounts {
  std::size_t improving = 0;
  std::size_t plateauing = 0;
  std::size_t degrading = 0;
};

/// Counts over every sample with defined progress.
TrendCounts count_trends(const StatsTracker::Snapshot& stats, double tau = 0.01);

/// Reporting EMA, history-weighted: s'_0 = s_0, s'_t = alpha s'_{t-1} + (1 - alpha) s_t.
std::vector<double> smooth(std::span<const double> series, double alpha = 0.9);

enum class ExportFormat { Csv, Jsonl };

/// CSV starts with a `# ...` comment line carrying `meta` (config hash etc.),
/// then the header row. JSONL starts with a {"meta": ...} line when meta is set.
void write_csv(std::ostream& out, const std::vector<StepRecord>& records,
               const nlohmann::json& meta = nullptr);
void write_jsonl(std::ostream& out, const std::vector<StepRecord>& records,
                 const nlohmann::json& meta = nullptr);
std::vector<StepRecord> read_jsonl(std::istream& in, nlohmann::json* meta = nullptr);

/// Throws lppo::Error naming the path when it cannot be written.
void export_records(const std::vector<StepRecord>& records, const std::filesystem::path& path,
                    ExportFormat format, const nlohmann::json& meta = nullptr);

std::vector<StepRecord> load_records(const std::filesystem::path& path,
                                     nlohmann::json* meta = nullptr);

/// Applies the reporting EMA to every continuous column.
std::vector<StepRecord> smooth_records(const std::vector<StepRecord>& records, double alpha = 0.9);

}  // namespace lppo

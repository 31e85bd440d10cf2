#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace lppo {

/// How the EMA pass rate is seeded on a sample's first observation.
///  - FirstObservation: ema = raw, no progress yet.
///  - Zero: the previous EMA is taken to be 0, so the first observation
///    already yields progress alpha * raw.
enum class InitMode { FirstObservation, Zero };

std::string_view to_string(InitMode mode);
InitMode parse_init_mode(std::string_view text);

struct WeightingConfig {
  double alpha = 0.5;  ///< EMA smoothing factor, in (0, 1]
  double kappa = 8.0;  ///< sigmoid sensitivity, > 0
  double bias = 0.5;   ///< weight floor, >= 0
  InitMode init_mode = InitMode::FirstObservation;

  void validate() const;
};

struct SampleStats {
  double raw_pass_rate = 0.0;
  double ema = 0.0;
  std::optional<double> ema_prev;
  std::optional<double> progress;
  double weight = 1.0;
  std::int64_t epoch_last_seen = 0;
  std::size_t observations = 0;
  bool excluded = false;

  bool operator==(const SampleStats&) const = default;
};

/// Numerically stable logistic function; sigmoid(0) is exactly 0.5.
double sigmoid(double x);

/// Learning-progress weight sigmoid(kappa * progress) + bias.
double lp_weight(double progress, double kappa, double bias);

/// Per-sample EMA pass rates, learning progress and LP weights.
///
/// Single writer. `snapshot()` returns a deep copy that can be shared freely.
class StatsTracker {
 public:
  using Snapshot = std::map<std::string, SampleStats, std::less<>>;

  explicit StatsTracker(WeightingConfig config = {});

  /// Ingests one raw pass rate. Unknown ids are registered implicitly.
  const SampleStats& update_pass_rate(std::string_view id, double raw, std::int64_t epoch);

  /// Throws lppo::Error naming the id when it was never observed.
  double weight(std::string_view id) const;

  /// Weight for registered ids, sigmoid(0) + bias otherwise.
  double weight_or_default(std::string_view id) const;

  const SampleStats* find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }
  void set_excluded(std::string_view id, bool excluded);

  Snapshot snapshot() const { return stats_; }
  void restore(Snapshot snapshot) { stats_ = std::move(snapshot); }

  const Snapshot& stats() const { return stats_; }
  std::size_t size() const { return stats_.size(); }
  const WeightingConfig& config() const { return config_; }

 private:
  void refresh(SampleStats& s) const;

  WeightingConfig config_;
  Snapshot stats_;
};

/// Snapshot JSONL: an optional leading {"meta": ...} line, then one record per
/// sample with keys id, raw, ema, ema_prev (null when absent), epoch, excluded.
void write_snapshot(std::ostream& out, const StatsTracker::Snapshot& snapshot,
                    const nlohmann::json& meta = nullptr);

/// Progress and weight are recomputed from the stored EMA pair with `config`,
/// so a restored tracker reproduces weights bit-for-bit.
StatsTracker::Snapshot read_snapshot(std::istream& in, const WeightingConfig& config);

}  // namespace lppo

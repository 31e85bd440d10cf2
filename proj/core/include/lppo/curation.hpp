#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lppo/dataset.hpp"
#include "lppo/prefix_sampler.hpp"
#include "lppo/rng.hpp"

namespace lppo {

enum class Disposition {
  UseForUpdate,   ///< 0 < rate < 1
  SkipAndRetire,  ///< rate == 1: out of this update and later epochs
  SkipOnly,       ///< rate == 0 without a usable prefix: out of this update only
  QueuePrefix,    ///< rate <= epsilon_c and prefix-eligible: retry with a prefix next step
};

/// Wire names: "update", "retire", "skip", "queue_prefix".
std::string_view to_string(Disposition d);

struct CurationConfig {
  double epsilon_c = 0.0;
  bool prefix_enabled = true;
  /// Cap on how often one problem may be re-queued after a prefixed attempt
  /// also scores at or below epsilon_c. Unset means unlimited.
  std::optional<std::size_t> max_requeue;
  /// Re-admit retired ids every k epochs; 0 keeps retirement permanent.
  std::size_t readmit_every = 0;
};

/// Disposition of an unprefixed evaluation.
Disposition classify(double raw_pass_rate, Pool pool, const CurationConfig& config = {});

/// Disposition of a prefix-guided evaluation. A perfect hinted score does not
/// retire the problem, and a zero score re-queues only while under max_requeue.
Disposition classify_prefixed(double raw_pass_rate, std::size_t requeue_count,
                              const CurationConfig& config = {});

enum class SkipReason { AllPass, AllFail, ExcludedEpoch };
std::string_view to_string(SkipReason r);

struct PrefixedEntry {
  std::string id;
  PrefixSpec prefix;
  std::size_t requeue_count = 0;  ///< 0 for the first prefixed attempt
};

struct BatchPlan {
  std::int64_t epoch = 0;
  std::int64_t step = 0;
  std::vector<std::string> standard_entries;
  std::vector<PrefixedEntry> prefixed_entries;
  std::vector<std::pair<std::string, SkipReason>> skipped;

  std::size_t size() const { return standard_entries.size() + prefixed_entries.size(); }
  nlohmann::json to_json() const;
};

struct CurationState {
  std::int64_t epoch = 1;
  std::set<std::string, std::less<>> active_ids;
  std::set<std::string, std::less<>> retired_ids;
  /// Retired during the current epoch; still counted as active until the epoch ends.
  std::set<std::string, std::less<>> retiring_ids;
  std::deque<PrefixedEntry> prefix_queue;
};

/// Moves this epoch's retirements out of the active set and bumps the epoch.
/// With readmit_every = k > 0, every k-th epoch returns retired ids to the pool.
CurationState advance_epoch(CurationState state, const CurationConfig& config = {});

/// Online curation state machine: batch construction, prefix queueing and
/// retirement. Single owner.
class CurationScheduler {
 public:
  CurationScheduler(const std::vector<Problem>& problems, CurationConfig config = {});

  /// Drains the prefix queue first, then fills the remaining slots with
  /// problems not yet visited this epoch. Starts a new epoch when the
  /// current one has no unvisited problems left. Throws TrainingExhausted
  /// when nothing remains to train on.
  BatchPlan build_batch(std::size_t batch_size, Rng& rng);

  void enqueue_prefix(std::string_view id, PrefixSpec prefix, std::size_t requeue_count = 0);
  void retire(std::string_view id);

  /// Removes and returns the oldest queued prefix for `id`, if any.
  std::optional<PrefixedEntry> take_queued(std::string_view id);

  bool epoch_complete() const { return remaining_.empty(); }
  void advance_epoch();

  Pool pool(std::string_view id) const;
  const CurationState& state() const { return state_; }
  const CurationConfig& config() const { return config_; }
  std::size_t dataset_size() const { return pools_.size(); }
  double active_ratio() const;

 private:
  void start_epoch_order(Rng& rng);

  CurationConfig config_;
  std::map<std::string, Pool, std::less<>> pools_;
  CurationState state_;
  std::deque<std::string> remaining_;
  bool order_ready_ = false;
  std::int64_t step_ = 0;
};

}  // namespace lppo

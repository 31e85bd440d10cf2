#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lppo/curation.hpp"
#include "lppo/dataset.hpp"
#include "lppo/prefix_sampler.hpp"
#include "lppo/run_config.hpp"
#include "lppo/stats_tracker.hpp"

namespace lppo {

/// Scheduler state for an external trainer, driven by newline-delimited JSON.
/// The caller owns the policy and the rollouts; this side owns statistics,
/// curation and prefix construction.
///
/// Requests:
///   {"op":"report","id":..,"pass_rate":..,"epoch":..} -> {"id","weight","disposition","epoch"}
///   {"op":"prefix","id":..}                           -> {"id","prefix_text","lambda","prefix_len"}
///   {"op":"snapshot"}                                 -> {"path":..}
/// Failures answer {"error":..} and leave the session running.
class SchedulerService {
 public:
  SchedulerService(RunConfig config, const std::vector<Problem>& problems,
                   std::filesystem::path snapshot_path);

  nlohmann::json handle(const nlohmann::json& request);

  /// Parses one protocol frame and returns the single-line response (no newline).
  std::string handle_line(std::string_view line);

  const StatsTracker& tracker() const { return tracker_; }
  const CurationScheduler& scheduler() const { return scheduler_; }

 private:
  nlohmann::json report(const nlohmann::json& request);
  nlohmann::json prefix(const nlohmann::json& request);
  nlohmann::json snapshot();
  PrefixSpec draw_prefix(const std::string& id);

  RunConfig config_;
  std::map<std::string, Problem, std::less<>> problems_;
  std::map<std::string, TokenSeq, std::less<>> solutions_;
  StatsTracker tracker_;
  CurationScheduler scheduler_;
  std::filesystem::path snapshot_path_;
  std::int64_t epoch_ = 1;
  std::uint64_t draws_ = 0;
};

/// Reads frames from `in` until EOF, writing one response line per frame.
void serve_stream(SchedulerService& service, std::istream& in, std::ostream& out);

}  // namespace lppo

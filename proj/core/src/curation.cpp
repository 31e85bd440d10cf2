#include "lppo/curation.hpp"

#include <algorithm>

#include "lppo/error.hpp"

namespace lppo {

std::string_view to_string(Disposition d) {
  switch (d) {
    case Disposition::UseForUpdate: return "update";
    case Disposition::SkipAndRetire: return "retire";
    case Disposition::SkipOnly: return "skip";
    case Disposition::QueuePrefix: return "queue_prefix";
  }
  return "unknown";
}

std::string_view to_string(SkipReason r) {
  switch (r) {
    case SkipReason::AllPass: return "all_pass";
    case SkipReason::AllFail: return "all_fail";
    case SkipReason::ExcludedEpoch: return "excluded_epoch";
  }
  return "unknown";
}

Disposition classify(double raw_pass_rate, Pool pool, const CurationConfig& config) {
  if (raw_pass_rate >= 1.0) return Disposition::SkipAndRetire;
  if (config.prefix_enabled && pool == Pool::PrefixEligible && raw_pass_rate <= config.epsilon_c) {
    return Disposition::QueuePrefix;
  }
  if (raw_pass_rate <= 0.0) return Disposition::SkipOnly;
  return Disposition::UseForUpdate;
}

Disposition classify_prefixed(double raw_pass_rate, std::size_t requeue_count,
                              const CurationConfig& config) {
  if (raw_pass_rate >= 1.0) return Disposition::SkipOnly;
  if (raw_pass_rate <= config.epsilon_c) {
    const bool may_requeue = !config.max_requeue || requeue_count < *config.max_requeue;
    if (config.prefix_enabled && may_requeue) return Disposition::QueuePrefix;
    if (raw_pass_rate <= 0.0) return Disposition::SkipOnly;
  }
  return Disposition::UseForUpdate;
}

nlohmann::json BatchPlan::to_json() const {
  nlohmann::json prefixed = nlohmann::json::array();
  for (const auto& e : prefixed_entries) {
    prefixed.push_back({{"id", e.id},
                        {"lambda", e.prefix.lambda},
                        {"raw_len", e.prefix.raw_len},
                        {"clipped_len", e.prefix.clipped_len},
                        {"requeue_count", e.requeue_count}});
  }
  nlohmann::json skipped_json = nlohmann::json::array();
  for (const auto& [id, reason] : skipped) skipped_json.push_back({{"id", id}, {"reason", to_string(reason)}});
  return {{"epoch", epoch},
          {"step", step},
          {"standard", standard_entries},
          {"prefixed", prefixed},
          {"skipped", skipped_json}};
}

CurationState advance_epoch(CurationState state, const CurationConfig& config) {
  for (const auto& id : state.retiring_ids) {
    state.active_ids.erase(id);
    state.retired_ids.insert(id);
  }
  state.retiring_ids.clear();
  ++state.epoch;
  if (config.readmit_every > 0 &&
      state.epoch % static_cast<std::int64_t>(config.readmit_every) == 0) {
    state.active_ids.merge(state.retired_ids);
  }
  return state;
}

CurationScheduler::CurationScheduler(const std::vector<Problem>& problems, CurationConfig config)
    : config_(config) {
  for (const auto& p : problems) {
    if (!pools_.emplace(p.id, p.pool).second) throw Error("duplicate id \"" + p.id + "\"");
    state_.active_ids.insert(p.id);
  }
}

Pool CurationScheduler::pool(std::string_view id) const {
  auto it = pools_.find(id);
  if (it == pools_.end()) throw Error("unknown problem id \"" + std::string(id) + "\"");
  return it->second;
}

double CurationScheduler::active_ratio() const {
  if (pools_.empty()) return 0.0;
  return static_cast<double>(state_.active_ids.size()) / static_cast<double>(pools_.size());
}

void CurationScheduler::start_epoch_order(Rng& rng) {
  remaining_.clear();
  std::vector<std::string> ids;
  for (const auto& id : state_.active_ids) {
    if (!state_.retiring_ids.contains(id)) ids.push_back(id);
  }
  for (std::size_t i = ids.size(); i > 1; --i) {
    std::swap(ids[i - 1], ids[uniform_index(rng, i)]);
  }
  remaining_.assign(ids.begin(), ids.end());
  order_ready_ = true;
}

void CurationScheduler::advance_epoch() {
  state_ = lppo::advance_epoch(std::move(state_), config_);
  remaining_.clear();
  order_ready_ = false;
}

void CurationScheduler::enqueue_prefix(std::string_view id, PrefixSpec prefix,
                                       std::size_t requeue_count) {
  if (pool(id) != Pool::PrefixEligible) {
    throw Error("cannot queue a prefix for \"" + std::string(id) + "\": no expert solution");
  }
  state_.prefix_queue.push_back(PrefixedEntry{std::string(id), std::move(prefix), requeue_count});
}

void CurationScheduler::retire(std::string_view id) {
  if (!state_.active_ids.contains(id)) return;
  state_.retiring_ids.insert(std::string(id));
}

std::optional<PrefixedEntry> CurationScheduler::take_queued(std::string_view id) {
  auto& queue = state_.prefix_queue;
  auto it = std::find_if(queue.begin(), queue.end(), [&](const PrefixedEntry& e) { return e.id == id; });
  if (it == queue.end()) return std::nullopt;
  PrefixedEntry e = std::move(*it);
  queue.erase(it);
  return e;
}

BatchPlan CurationScheduler::build_batch(std::size_t batch_size, Rng& rng) {
  if (batch_size == 0) throw Error("batch_size must be >= 1");

  if (!order_ready_) {
    start_epoch_order(rng);
  } else if (remaining_.empty()) {
    advance_epoch();
    start_epoch_order(rng);
  }

  BatchPlan plan;
  plan.epoch = state_.epoch;
  plan.step = ++step_;

  std::set<std::string, std::less<>> in_plan;
  while (!state_.prefix_queue.empty() && plan.prefixed_entries.size() < batch_size) {
    PrefixedEntry e = std::move(state_.prefix_queue.front());
    state_.prefix_queue.pop_front();
    if (!state_.active_ids.contains(e.id) || in_plan.contains(e.id)) {
      plan.skipped.emplace_back(e.id, SkipReason::ExcludedEpoch);
      continue;
    }
    in_plan.insert(e.id);
    plan.prefixed_entries.push_back(std::move(e));
  }

  // Ids already in this plan or still waiting in the queue stay in the epoch
  // order for a later step, so one problem is never queued twice.
  std::set<std::string, std::less<>> waiting;
  for (const auto& e : state_.prefix_queue) waiting.insert(e.id);
  std::deque<std::string> deferred;
  while (!remaining_.empty() && plan.size() < batch_size) {
    std::string id = std::move(remaining_.front());
    remaining_.pop_front();
    if (in_plan.contains(id) || waiting.contains(id)) {
      deferred.push_back(std::move(id));
      continue;
    }
    in_plan.insert(id);
    plan.standard_entries.push_back(std::move(id));
  }
  remaining_.insert(remaining_.begin(), deferred.begin(), deferred.end());

  if (plan.size() == 0 && state_.prefix_queue.empty()) {
    --step_;
    throw TrainingExhausted();
  }
  return plan;
}

}  // namespace lppo

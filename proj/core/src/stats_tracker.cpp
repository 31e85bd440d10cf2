#include "lppo/stats_tracker.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "lppo/error.hpp"

namespace lppo {

std::string_view to_string(InitMode mode) {
  return mode == InitMode::Zero ? "zero" : "first_observation";
}

InitMode parse_init_mode(std::string_view text) {
  if (text == "first_observation") return InitMode::FirstObservation;
  if (text == "zero") return InitMode::Zero;
  throw Error("init_mode: expected first_observation or zero, got \"" + std::string(text) + "\"");
}

void WeightingConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("alpha: must lie in (0, 1]");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw Error("kappa: must be > 0");
  if (!(bias >= 0.0) || !std::isfinite(bias)) throw Error("bias: must be >= 0");
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double lp_weight(double progress, double kappa, double bias) {
  return sigmoid(kappa * progress) + bias;
}

StatsTracker::StatsTracker(WeightingConfig config) : config_(config) { config_.validate(); }

void StatsTracker::refresh(SampleStats& s) const {
  if (s.ema_prev) {
    // Out-of-range progress is impossible for valid inputs; clamping guards
    // restored state that was edited or corrupted.
    s.progress = std::clamp(s.ema - *s.ema_prev, -1.0, 1.0);
    s.weight = lp_weight(*s.progress, config_.kappa, config_.bias);
  } else {
    s.progress.reset();
    s.weight = lp_weight(0.0, config_.kappa, config_.bias);
  }
}

const SampleStats& StatsTracker::update_pass_rate(std::string_view id, double raw,
                                                  std::int64_t epoch) {
  if (!(raw >= 0.0 && raw <= 1.0)) {
    throw Error("pass rate for \"" + std::string(id) + "\" outside [0, 1]: " + std::to_string(raw));
  }
  auto it = stats_.find(id);
  if (it == stats_.end()) {
    SampleStats s;
    s.raw_pass_rate = raw;
    s.epoch_last_seen = epoch;
    s.observations = 1;
    if (config_.init_mode == InitMode::FirstObservation) {
      s.ema = raw;
    } else {
      s.ema_prev = 0.0;
      s.ema = config_.alpha * raw + (1.0 - config_.alpha) * 0.0;
    }
    refresh(s);
    return stats_.emplace(std::string(id), s).first->second;
  }

  SampleStats& s = it->second;
  if (epoch < s.epoch_last_seen) {
    throw Error("pass rate for \"" + std::string(id) + "\" reported for epoch " +
                std::to_string(epoch) + " after epoch " + std::to_string(s.epoch_last_seen));
  }
  s.raw_pass_rate = raw;
  s.epoch_last_seen = epoch;
  ++s.observations;
  s.ema_prev = s.ema;
  s.ema = config_.alpha * raw + (1.0 - config_.alpha) * *s.ema_prev;
  refresh(s);
  return s;
}

const SampleStats* StatsTracker::find(std::string_view id) const {
  auto it = stats_.find(id);
  return it == stats_.end() ? nullptr : &it->second;
}

double StatsTracker::weight(std::string_view id) const {
  const SampleStats* s = find(id);
  if (!s) throw Error("unknown sample id \"" + std::string(id) + "\"");
  return s->weight;
}

double StatsTracker::weight_or_default(std::string_view id) const {
  const SampleStats* s = find(id);
  return s ? s->weight : lp_weight(0.0, config_.kappa, config_.bias);
}

void StatsTracker::set_excluded(std::string_view id, bool excluded) {
  auto it = stats_.find(id);
  if (it == stats_.end()) throw Error("unknown sample id \"" + std::string(id) + "\"");
  it->second.excluded = excluded;
}

void write_snapshot(std::ostream& out, const StatsTracker::Snapshot& snapshot,
                    const nlohmann::json& meta) {
  if (!meta.is_null()) out << nlohmann::json{{"meta", meta}}.dump() << '\n';
  for (const auto& [id, s] : snapshot) {
    nlohmann::json j = {{"id", id},
                        {"raw", s.raw_pass_rate},
                        {"ema", s.ema},
                        {"ema_prev", s.ema_prev ? nlohmann::json(*s.ema_prev) : nlohmann::json()},
                        {"epoch", s.epoch_last_seen},
                        {"observations", s.observations},
                        {"excluded", s.excluded}};
    out << j.dump() << '\n';
  }
}

StatsTracker::Snapshot read_snapshot(std::istream& in, const WeightingConfig& config) {
  StatsTracker::Snapshot out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      if (j.contains("meta")) continue;
      SampleStats s;
      s.raw_pass_rate = j.value("raw", 0.0);
      s.ema = j.at("ema").get<double>();
      if (!j.at("ema_prev").is_null()) s.ema_prev = j["ema_prev"].get<double>();
      s.epoch_last_seen = j.at("epoch").get<std::int64_t>();
      s.observations = j.value("observations", std::size_t{1});
      s.excluded = j.at("excluded").get<bool>();
      if (s.ema_prev) {
        s.progress = std::clamp(s.ema - *s.ema_prev, -1.0, 1.0);
        s.weight = lp_weight(*s.progress, config.kappa, config.bias);
      } else {
        s.weight = lp_weight(0.0, config.kappa, config.bias);
      }
      out[j.at("id").get<std::string>()] = s;
    } catch (const nlohmann::json::exception& e) {
      throw Error("snapshot line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace lppo

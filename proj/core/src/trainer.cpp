#include "lppo/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <thread>

#include <spdlog/spdlog.h>

#include "lppo/error.hpp"

namespace lppo {

namespace {

// Salts separating the independent random streams drawn per (id, step).
constexpr std::uint64_t kSaltStandard = 0;
constexpr std::uint64_t kSaltPrefixed = 1;
constexpr std::uint64_t kSaltLambda = 2;
constexpr std::uint64_t kSaltSchedule = 0x5c4ed;

}  // namespace

Trainer::Trainer(RunConfig config, std::vector<Problem> problems)
    : config_(std::move(config)),
      problems_(std::move(problems)),
      env_(problems_),
      tracker_(config_.weighting),
      scheduler_(problems_, config_.curation()),
      schedule_rng_(substream(config_.seed, "schedule", 0, kSaltSchedule)) {
  config_.validate();
  if (problems_.empty()) throw Error("dataset is empty");
  policy_ = env_.make_policy(config_.layout);
  policy_.freeze_reference();

  for (const auto& p : problems_) {
    if (p.pool != Pool::PrefixEligible) continue;
    TokenSeq seq = tokenize(*p.expert_solution);
    const auto& chain = env_.problem(p.id);
    if (parse_actions(seq.tokens) != chain.spec.correct_path) {
      throw Error("problem \"" + p.id + "\": expert solution does not encode the correct path");
    }
    solutions_.emplace(p.id, std::move(seq));
  }
}

RunResult Trainer::run() {
  RunResult result;
  result.initial_mean_pass_rate = mean_success_probability(policy_, env_);
  result.final_mean_pass_rate = result.initial_mean_pass_rate;
  for (std::size_t i = 0; i < config_.max_steps; ++i) {
    if (!step(result)) break;
  }
  result.final_snapshot = tracker_.snapshot();
  return result;
}

bool Trainer::step(RunResult& result) {
  BatchPlan plan;
  try {
    plan = scheduler_.build_batch(config_.batch_size, schedule_rng_);
  } catch (const TrainingExhausted&) {
    result.exhausted = true;
    spdlog::info("training exhausted after {} steps", result.records.size());
    return false;
  }
  if (config_.max_epochs > 0 && plan.epoch > static_cast<std::int64_t>(config_.max_epochs)) {
    return false;
  }

  struct Entry {
    std::string id;
    const PrefixedEntry* prefixed = nullptr;
  };
  std::vector<Entry> entries;
  for (const auto& id : plan.standard_entries) entries.push_back({id, nullptr});
  for (const auto& e : plan.prefixed_entries) entries.push_back({e.id, &e});
  // Results merge in id order so the reduction order is fixed.
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.id < b.id; });

  const CurationConfig curation = config_.curation();
  const GrpoConfig grpo = config_.grpo();
  std::vector<std::pair<RolloutGroup, AdvantageSet>> batch;
  std::vector<double> weights;
  double reward_sum = 0.0;
  std::size_t reward_count = 0;

  for (const auto& entry : entries) {
    const ChainProblem& problem = env_.problem(entry.id);
    const bool prefixed = entry.prefixed != nullptr;
    const std::size_t prefix_len =
        prefixed ? std::min(entry.prefixed->prefix.clipped_len,
                            static_cast<std::size_t>(problem.spec.steps))
                 : 0;
    Rng rng = substream(config_.seed, entry.id, static_cast<std::uint64_t>(plan.step),
                        prefixed ? kSaltPrefixed : kSaltStandard);
    PassRateResult eval = pass_rate(policy_, problem, config_.group_size, prefix_len, rng);
    reward_sum += eval.pass_rate * static_cast<double>(config_.group_size);
    reward_count += config_.group_size;

    EvaluationEvent ev;
    ev.epoch = plan.epoch;
    ev.step = plan.step;
    ev.id = entry.id;
    ev.prefixed = prefixed;
    ev.prefix_len = prefix_len;
    ev.lambda = prefixed ? entry.prefixed->prefix.lambda : 0.0;
    ev.pass_rate = eval.pass_rate;

    if (!prefixed) {
      tracker_.update_pass_rate(entry.id, eval.pass_rate, plan.epoch);
      ev.weight = config_.weighting_enabled() ? tracker_.weight(entry.id) : 1.0;
      ev.disposition = classify(eval.pass_rate, problem.pool, curation);
    } else {
      ev.weight = config_.weighting_enabled() ? tracker_.weight_or_default(entry.id) : 1.0;
      ev.disposition = classify_prefixed(eval.pass_rate, entry.prefixed->requeue_count, curation);
    }
    weights.push_back(ev.weight);

    switch (ev.disposition) {
      case Disposition::UseForUpdate: {
        auto raw = group_advantage(eval.group.rewards(), grpo.advantage_mode);
        batch.emplace_back(std::move(eval.group), apply_lp_weight(std::move(raw), ev.weight));
        break;
      }
      case Disposition::SkipAndRetire:
        scheduler_.retire(entry.id);
        tracker_.set_excluded(entry.id, true);
        plan.skipped.emplace_back(entry.id, SkipReason::AllPass);
        break;
      case Disposition::SkipOnly:
        plan.skipped.emplace_back(entry.id, eval.pass_rate >= 1.0 ? SkipReason::AllPass
                                                                   : SkipReason::AllFail);
        break;
      case Disposition::QueuePrefix: {
        Rng lambda_rng = substream(config_.seed, entry.id, static_cast<std::uint64_t>(plan.step),
                                   kSaltLambda);
        const double lambda = draw_ratio(lambda_rng, config_.beta_min, config_.beta_max);
        PrefixSpec spec = build_prefix(solutions_.at(entry.id), lambda, config_.clip_mode);
        const std::size_t requeue = prefixed ? entry.prefixed->requeue_count + 1 : 0;
        scheduler_.enqueue_prefix(entry.id, std::move(spec), requeue);
        plan.skipped.emplace_back(entry.id, SkipReason::AllFail);
        break;
      }
    }
    result.events.push_back(std::move(ev));
  }

  // Steps where curation filtered out every group leave the policy untouched.
  const UpdateStats update = batch.empty() ? UpdateStats{} : update_policy(policy_, batch, grpo);

  const TrendCounts trends = count_trends(tracker_.stats(), config_.trend_tau);
  StepRecord rec;
  rec.epoch = plan.epoch;
  rec.step = plan.step;
  rec.mean_reward = reward_count ? reward_sum / static_cast<double>(reward_count) : 0.0;
  rec.mean_pass_rate = mean_success_probability(policy_, env_);
  if (!weights.empty()) {
    rec.w_min = *std::min_element(weights.begin(), weights.end());
    rec.w_max = *std::max_element(weights.begin(), weights.end());
    double s = 0.0;
    for (double w : weights) s += w;
    rec.w_mean = s / static_cast<double>(weights.size());
  }
  rec.kl = kl_to_reference(policy_);
  rec.active_ratio = scheduler_.active_ratio();
  rec.prefix_ratio = plan.size() ? static_cast<double>(plan.prefixed_entries.size()) /
                                       static_cast<double>(plan.size())
                                 : 0.0;
  rec.n_improving = trends.improving;
  rec.n_plateauing = trends.plateauing;
  rec.n_degrading = trends.degrading;

  OptimizerAudit audit;
  audit.step = plan.step;
  audit.groups = update.groups;
  audit.objective = update.objective;
  audit.mean_abs_ratio_dev = update.mean_abs_ratio_dev;
  audit.clip_fraction = update.clip_fraction;
  audit.kl = rec.kl;

  if (!result.steps_to_threshold && rec.mean_pass_rate >= config_.target_pass_rate) {
    result.steps_to_threshold = plan.step;
  }
  result.final_mean_pass_rate = rec.mean_pass_rate;
  spdlog::debug("step {} epoch {}: pass {:.4f} reward {:.4f} batch {} update {} kl {:.5f}",
                plan.step, plan.epoch, rec.mean_pass_rate, rec.mean_reward, plan.size(),
                update.groups, rec.kl);

  result.records.push_back(rec);
  result.audits.push_back(audit);
  result.plans.push_back(std::move(plan));
  return true;
}

nlohmann::json to_json(const EvaluationEvent& e) {
  return {{"epoch", e.epoch},         {"step", e.step},
          {"id", e.id},               {"prefixed", e.prefixed},
          {"prefix_len", e.prefix_len}, {"lambda", e.lambda},
          {"pass_rate", e.pass_rate}, {"weight", e.weight},
          {"disposition", to_string(e.disposition)}};
}

nlohmann::json to_json(const OptimizerAudit& a) {
  return {{"step", a.step},
          {"groups", a.groups},
          {"objective", a.objective},
          {"mean_abs_ratio_dev", a.mean_abs_ratio_dev},
          {"clip_fraction", a.clip_fraction},
          {"kl", a.kl}};
}

nlohmann::json run_meta(const RunConfig& config) {
  return {{"config_hash", config.hash()}, {"trend_tau", config.trend_tau}, {"config", config.to_json()}};
}

std::vector<nlohmann::json> report_stream(const RunResult& result) {
  std::vector<nlohmann::json> out;
  for (const auto& e : result.events) {
    if (e.prefixed) continue;
    out.push_back({{"op", "report"},
                   {"id", e.id},
                   {"pass_rate", e.pass_rate},
                   {"epoch", e.epoch},
                   {"weight", e.weight},
                   {"disposition", to_string(e.disposition)}});
  }
  return out;
}

std::vector<std::filesystem::path> write_run_outputs(const RunResult& result,
                                                     const RunConfig& config,
                                                     const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  const nlohmann::json meta = run_meta(config);
  auto open = [&](const std::string& name) {
    auto path = dir / name;
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    written.push_back(path);
    return out;
  };
  auto write_lines = [&](const std::string& name, const auto& items, auto&& to_line) {
    auto out = open(name);
    out << nlohmann::json{{"meta", meta}}.dump() << '\n';
    for (const auto& item : items) out << to_line(item).dump() << '\n';
    if (!out) throw Error("error while writing " + (dir / name).string());
  };

  try {
    std::filesystem::create_directories(dir);
    {
      auto out = open("metrics.csv");
      write_csv(out, result.records, meta);
    }
    {
      auto out = open("metrics.jsonl");
      write_jsonl(out, result.records, meta);
    }
    write_lines("batches.jsonl", result.plans, [](const BatchPlan& p) { return p.to_json(); });
    write_lines("optimizer.jsonl", result.audits,
                [](const OptimizerAudit& a) { return to_json(a); });
    write_lines("evaluations.jsonl", result.events,
                [](const EvaluationEvent& e) { return to_json(e); });
    write_lines("report_stream.jsonl", report_stream(result),
                [](const nlohmann::json& j) { return j; });
    {
      auto out = open("snapshot.jsonl");
      write_snapshot(out, result.final_snapshot, meta);
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) std::filesystem::remove(p, ec);
    throw;
  }
  return written;
}

std::optional<double> median_steps(std::vector<std::optional<std::int64_t>> values) {
  if (values.empty()) return std::nullopt;
  std::vector<double> v;
  for (const auto& x : values) {
    v.push_back(x ? static_cast<double>(*x) : std::numeric_limits<double>::infinity());
  }
  const double m = median(std::move(v));
  if (std::isinf(m)) return std::nullopt;
  return m;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  const double a = values[n / 2 - 1];
  const double b = values[n / 2];
  if (std::isinf(a) || std::isinf(b)) return std::numeric_limits<double>::infinity();
  return 0.5 * (a + b);
}

std::vector<ArmSummary> run_ablation(const RunConfig& base, const std::vector<Mode>& arms,
                                     const std::vector<std::uint64_t>& seeds, unsigned threads) {
  if (arms.size() < 2) throw Error("ablation needs at least 2 arms");
  std::set<Mode> unique(arms.begin(), arms.end());
  if (unique.size() != arms.size()) throw Error("ablation: duplicate arm names");
  if (seeds.empty()) throw Error("ablation needs at least one seed");

  const std::vector<Problem> problems = load_problems(base);
  const std::size_t n_runs = arms.size() * seeds.size();
  std::vector<std::optional<std::int64_t>> steps(n_runs);
  std::vector<double> finals(n_runs);
  std::vector<std::exception_ptr> errors(n_runs);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n_runs; i = next++) {
      try {
        RunConfig cfg = base;
        cfg.mode = arms[i / seeds.size()];
        cfg.seed = seeds[i % seeds.size()];
        Trainer trainer(cfg, problems);
        RunResult r = trainer.run();
        steps[i] = r.steps_to_threshold;
        finals[i] = r.final_mean_pass_rate;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_runs)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<ArmSummary> out;
  for (std::size_t a = 0; a < arms.size(); ++a) {
    ArmSummary s;
    s.arm = std::string(to_string(arms[a]));
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      s.steps_to_threshold.push_back(steps[a * seeds.size() + k]);
      s.final_pass_rate.push_back(finals[a * seeds.size() + k]);
    }
    s.median_steps = median_steps(s.steps_to_threshold);
    s.median_final_pass_rate = median(s.final_pass_rate);
    out.push_back(std::move(s));
  }
  return out;
}

void write_ablation_table(std::ostream& out, const std::vector<ArmSummary>& arms,
                          const RunConfig& base) {
  out << "# " << run_meta(base).dump() << '\n';
  out << "arm,n_seeds,n_reached,median_steps_to_threshold,median_final_pass_rate\n";
  for (const auto& a : arms) {
    const auto reached = std::count_if(a.steps_to_threshold.begin(), a.steps_to_threshold.end(),
                                       [](const auto& s) { return s.has_value(); });
    out << a.arm << ',' << a.steps_to_threshold.size() << ',' << reached << ',';
    if (a.median_steps) {
      out << *a.median_steps;
    } else {
      out << "inf";
    }
    out.precision(6);
    out << ',' << std::fixed << a.median_final_pass_rate << std::defaultfloat << '\n';
  }
}

}  // namespace lppo

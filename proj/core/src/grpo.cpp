#include "lppo/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "lppo/error.hpp"

namespace lppo {

std::vector<double> RolloutGroup::rewards() const {
  std::vector<double> out;
  out.reserve(rollouts.size());
  for (const auto& r : rollouts) out.push_back(static_cast<double>(r.reward));
  return out;
}

std::string_view to_string(AdvantageMode mode) {
  return mode == AdvantageMode::MeanCentered ? "mean_centered" : "std_normalized";
}

AdvantageMode parse_advantage_mode(std::string_view text) {
  if (text == "std_normalized") return AdvantageMode::StdNormalized;
  if (text == "mean_centered") return AdvantageMode::MeanCentered;
  throw Error("advantage_mode: expected std_normalized or mean_centered, got \"" +
              std::string(text) + "\"");
}

std::vector<double> group_advantage(std::span<const double> rewards, AdvantageMode mode) {
  const std::size_t g = rewards.size();
  if (g < 2) throw Error("group_advantage: group size must be >= 2, got " + std::to_string(g));

  std::vector<double> out(g, 0.0);
  if (std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards[0]; })) {
    return out;
  }
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(g);
  for (std::size_t k = 0; k < g; ++k) out[k] = rewards[k] - mean;
  if (mode == AdvantageMode::StdNormalized) {
    double var = 0.0;
    for (double d : out) var += d * d;
    const double denom = std::sqrt(var / static_cast<double>(g)) + 1e-8;
    for (double& d : out) d /= denom;
  }
  return out;
}

AdvantageSet apply_lp_weight(std::vector<double> raw, double w) {
  if (!(w > 0.0) || !std::isfinite(w)) {
    throw Error("apply_lp_weight: weight must be positive and finite, got " + std::to_string(w));
  }
  AdvantageSet out;
  out.weight_applied = w;
  out.weighted.resize(raw.size());
  std::transform(raw.begin(), raw.end(), out.weighted.begin(), [w](double a) { return w * a; });
  out.raw = std::move(raw);
  return out;
}

void GrpoConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error("learning_rate: must be > 0");
  if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw Error("clip_eps: must lie in (0, 1)");
  if (!std::isfinite(entropy_coef)) throw Error("entropy_coef: must be finite");
}

SurrogateResult surrogate_objective(const RolloutGroup& group, const AdvantageSet& adv,
                                    const PolicyTable& policy, double clip_eps,
                                    double entropy_coef) {
  const std::size_t g = group.group_size();
  if (g == 0) throw Error("surrogate_objective: empty group");
  if (adv.weighted.size() != g) throw Error("surrogate_objective: advantage count != group size");

  const auto b = static_cast<std::size_t>(policy.branching());
  SurrogateResult res;
  res.gradient.assign(policy.parameters().size(), 0.0);
  std::vector<double> probs(b);

  const double inv_g = 1.0 / static_cast<double>(g);
  std::size_t clipped_count = 0;
  double entropy_sum = 0.0;
  std::size_t entropy_steps = 0;

  for (std::size_t k = 0; k < g; ++k) {
    const ChainRollout& r = group.rollouts[k];
    if (!std::isfinite(r.logprob_old)) {
      throw Error("surrogate_objective: non-finite old log-prob at rollout " + std::to_string(k));
    }
    double logp = 0.0;
    for (std::size_t j = 0; j < r.actions.size(); ++j) {
      logp += policy.log_prob(policy.state(group.slot, r.prefix_len + j), r.actions[j]);
    }
    if (!std::isfinite(logp)) {
      throw Error("surrogate_objective: non-finite log-prob at rollout " + std::to_string(k));
    }
    const double ratio = std::exp(logp - r.logprob_old);
    const double a = adv.weighted[k];
    const double unclipped = ratio * a;
    const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * a;
    res.mean_abs_ratio_dev += std::abs(ratio - 1.0) * inv_g;

    double coef = 0.0;
    if (unclipped <= clipped) {
      res.objective += unclipped * inv_g;
      coef = unclipped * inv_g;  // d(rho A)/dz = rho A dlogp/dz
    } else {
      res.objective += clipped * inv_g;
      ++clipped_count;
    }
    if (coef == 0.0) continue;
    for (std::size_t j = 0; j < r.actions.size(); ++j) {
      const std::size_t s = policy.state(group.slot, r.prefix_len + j);
      policy.probabilities(s, probs);
      double* grad = res.gradient.data() + s * b;
      for (std::size_t act = 0; act < b; ++act) grad[act] -= coef * probs[act];
      grad[static_cast<std::size_t>(r.actions[j])] += coef;
    }
  }
  res.clip_fraction = static_cast<double>(clipped_count) * inv_g;

  if (entropy_coef != 0.0) {
    std::vector<std::size_t> states;
    for (const auto& r : group.rollouts) {
      for (std::size_t j = 0; j < r.actions.size(); ++j) {
        states.push_back(policy.state(group.slot, r.prefix_len + j));
      }
    }
    entropy_steps = states.size();
    if (entropy_steps > 0) {
      const double scale = entropy_coef / static_cast<double>(entropy_steps);
      for (std::size_t s : states) {
        policy.probabilities(s, probs);
        double h = 0.0;
        for (double p : probs) h -= p > 0.0 ? p * std::log(p) : 0.0;
        entropy_sum += h;
        // dH/dz_a = -p_a (log p_a + H)
        double* grad = res.gradient.data() + s * b;
        for (std::size_t act = 0; act < b; ++act) {
          const double lp = probs[act] > 0.0 ? std::log(probs[act]) : 0.0;
          grad[act] += scale * (-probs[act] * (lp + h));
        }
      }
      res.objective += entropy_coef * entropy_sum / static_cast<double>(entropy_steps);
    }
  }
  return res;
}

UpdateStats update_policy(PolicyTable& policy,
                          const std::vector<std::pair<RolloutGroup, AdvantageSet>>& batch,
                          const GrpoConfig& config) {
  UpdateStats stats;
  if (batch.empty()) {
    spdlog::warn("update_policy: empty batch, policy unchanged");
    return stats;
  }
  const std::size_t chunk = config.mini_batch == 0 ? batch.size() : config.mini_batch;
  auto& params = policy.parameters();
  std::vector<double> grad(params.size());

  for (std::size_t begin = 0; begin < batch.size(); begin += chunk) {
    const std::size_t end = std::min(batch.size(), begin + chunk);
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = begin; i < end; ++i) {
      const auto& [group, adv] = batch[i];
      SurrogateResult r =
          surrogate_objective(group, adv, policy, config.clip_eps, config.entropy_coef);
      for (std::size_t p = 0; p < grad.size(); ++p) grad[p] += r.gradient[p];
      stats.objective += r.objective;
      stats.mean_abs_ratio_dev += r.mean_abs_ratio_dev;
      stats.clip_fraction += r.clip_fraction;
    }
    const double step = config.learning_rate / static_cast<double>(end - begin);
    for (std::size_t p = 0; p < params.size(); ++p) params[p] += step * grad[p];
    ++stats.ascent_steps;
  }
  stats.groups = batch.size();
  const double n = static_cast<double>(batch.size());
  stats.objective /= n;
  stats.mean_abs_ratio_dev /= n;
  stats.clip_fraction /= n;
  return stats;
}

double kl_to_reference(const PolicyTable& policy) {
  if (!policy.has_reference()) throw Error("kl_to_reference: no reference snapshot");
  const auto b = static_cast<std::size_t>(policy.branching());
  const std::size_t n = policy.num_states();
  if (n == 0) return 0.0;
  double total = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    auto cur = policy.logits(s);
    auto ref = policy.reference_logits(s);
    const double lse_cur = log_sum_exp(cur);
    const double lse_ref = log_sum_exp(ref);
    double kl = 0.0;
    for (std::size_t a = 0; a < b; ++a) {
      const double logp = cur[a] - lse_cur;
      const double logq = ref[a] - lse_ref;
      kl += std::exp(logp) * (logp - logq);
    }
    total += kl;
  }
  return total / static_cast<double>(n);
}

double mean_entropy(const PolicyTable& policy) {
  const auto b = static_cast<std::size_t>(policy.branching());
  const std::size_t n = policy.num_states();
  if (n == 0) return 0.0;
  std::vector<double> probs(b);
  double total = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    policy.probabilities(s, probs);
    for (double p : probs) total -= p > 0.0 ? p * std::log(p) : 0.0;
  }
  return total / static_cast<double>(n);
}

}  // namespace lppo

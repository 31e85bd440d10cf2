#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lppo/policy_table.hpp"

namespace lppo {

/// One sampled completion. Steps [0, prefix_len) are given by the prefix;
/// `actions` covers the generated remainder only.
struct ChainRollout {
  std::string problem_id;
  std::size_t prefix_len = 0;
  std::vector<int> actions;
  double logprob_old = 0.0;  ///< summed over generated steps
  int reward = 0;

  bool operator==(const ChainRollout&) const = default;
};

/// G rollouts of one problem under the same old policy.
struct RolloutGroup {
  std::string problem_id;
  std::size_t slot = 0;  ///< problem index in the policy table
  std::size_t prefix_len = 0;
  std::vector<ChainRollout> rollouts;

  std::size_t group_size() const { return rollouts.size(); }
  std::vector<double> rewards() const;
};

enum class AdvantageMode { StdNormalized, MeanCentered };

std::string_view to_string(AdvantageMode mode);
AdvantageMode parse_advantage_mode(std::string_view text);

/// Group-relative advantages. StdNormalized divides by the population std
/// plus 1e-8; all-equal rewards give all zeros in both modes. Requires G >= 2.
std::vector<double> group_advantage(std::span<const double> rewards,
                                    AdvantageMode mode = AdvantageMode::StdNormalized);

struct AdvantageSet {
  std::vector<double> raw;
  std::vector<double> weighted;
  double weight_applied = 1.0;
};

/// Scales every advantage by the LP weight. Rejects w <= 0.
AdvantageSet apply_lp_weight(std::vector<double> raw, double w);

struct GrpoConfig {
  double learning_rate = 0.1;
  double clip_eps = 0.2;
  AdvantageMode advantage_mode = AdvantageMode::StdNormalized;
  /// Coefficient on mean per-step policy entropy added to the objective.
  double entropy_coef = 0.0;
  /// Groups per sequential ascent step under one old policy; 0 = whole batch.
  std::size_t mini_batch = 0;

  void validate() const;
};

struct SurrogateResult {
  double objective = 0.0;
  std::vector<double> gradient;  ///< dense, same layout as PolicyTable::parameters()
  double mean_abs_ratio_dev = 0.0;
  double clip_fraction = 0.0;  ///< rollouts whose min() picked the clipped branch
};

/// Clipped surrogate (1/G) sum_k min(rho_k A'_k, clip(rho_k, 1-eps, 1+eps) A'_k)
/// plus entropy_coef times mean entropy over generated steps, with its
/// analytic gradient through the softmax. No KL term.
SurrogateResult surrogate_objective(const RolloutGroup& group, const AdvantageSet& adv,
                                    const PolicyTable& policy, double clip_eps,
                                    double entropy_coef = 0.0);

struct UpdateStats {
  std::size_t groups = 0;
  std::size_t ascent_steps = 0;
  double objective = 0.0;  ///< mean over groups, evaluated before each ascent step
  double mean_abs_ratio_dev = 0.0;
  double clip_fraction = 0.0;
};

/// Gradient ascent on the mean surrogate across groups, split into
/// mini-batches that are stepped sequentially. Empty batch: no-op with a warning.
UpdateStats update_policy(PolicyTable& policy,
                          const std::vector<std::pair<RolloutGroup, AdvantageSet>>& batch,
                          const GrpoConfig& config);

/// Mean over states of KL(pi || pi_ref), by exact summation over actions.
double kl_to_reference(const PolicyTable& policy);

/// Mean entropy of pi over all states.
double mean_entropy(const PolicyTable& policy);

}  // namespace lppo

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lppo/dataset.hpp"
#include "lppo/grpo.hpp"
#include "lppo/policy_table.hpp"
#include "lppo/rng.hpp"

namespace lppo {

/// A dataset problem parsed into its chain spec, bound to a policy slot.
struct ChainProblem {
  std::string id;
  std::size_t slot = 0;
  ChainProblemSpec spec;
  Pool pool = Pool::Standard;
};

/// The chain environment over a dataset whose questions are chain specs.
/// All problems must share one branching factor.
class ChainEnvironment {
 public:
  explicit ChainEnvironment(const std::vector<Problem>& problems);

  const ChainProblem& problem(std::string_view id) const;
  const std::vector<ChainProblem>& problems() const { return problems_; }
  std::size_t size() const { return problems_.size(); }
  int branching() const { return branching_; }

  /// Uniform (all-zero logits) policy sized for this environment.
  PolicyTable make_policy(StateLayout layout = StateLayout::PerProblem) const;

 private:
  std::vector<ChainProblem> problems_;
  std::map<std::string, std::size_t, std::less<>> index_;
  int branching_ = 0;
};

/// Copies the first `prefix_len` steps from the correct path and samples the
/// rest from the policy. Throws if prefix_len exceeds the chain length.
ChainRollout rollout(const PolicyTable& policy, const ChainProblem& problem,
                     std::size_t prefix_len, Rng& rng);

/// Binary all-or-nothing reward on the completed path. Throws on length mismatch.
int verify(const ChainRollout& rollout, const ChainProblem& problem);

struct PassRateResult {
  double pass_rate = 0.0;
  RolloutGroup group;
};

PassRateResult pass_rate(const PolicyTable& policy, const ChainProblem& problem,
                         std::size_t group_size, std::size_t prefix_len, Rng& rng);

/// Exact probability that an unhinted rollout (after `prefix_len` given
/// steps) is correct: the product of correct-action probabilities.
double success_probability(const PolicyTable& policy, const ChainProblem& problem,
                           std::size_t prefix_len = 0);

/// Dataset mean of success_probability with no prefix.
double mean_success_probability(const PolicyTable& policy, const ChainEnvironment& env);

/// Parses whitespace-separated action tokens, e.g. an expert solution.
std::vector<int> parse_actions(const std::vector<std::string>& tokens);

}  // namespace lppo

#include "lppo/sim_env.hpp"

#include <charconv>
#include <cmath>

#include "lppo/error.hpp"

namespace lppo {

ChainEnvironment::ChainEnvironment(const std::vector<Problem>& problems) {
  problems_.reserve(problems.size());
  for (const auto& p : problems) {
    ChainProblem cp;
    cp.id = p.id;
    cp.slot = problems_.size();
    cp.pool = p.pool;
    try {
      cp.spec = ChainProblemSpec::from_json(p.question);
    } catch (const Error& e) {
      throw Error("problem \"" + p.id + "\": " + e.what());
    }
    if (branching_ == 0) {
      branching_ = cp.spec.branching;
    } else if (cp.spec.branching != branching_) {
      throw Error("problem \"" + p.id + "\": branching " + std::to_string(cp.spec.branching) +
                  " differs from dataset branching " + std::to_string(branching_));
    }
    if (!index_.emplace(p.id, cp.slot).second) throw Error("duplicate id \"" + p.id + "\"");
    problems_.push_back(std::move(cp));
  }
}

const ChainProblem& ChainEnvironment::problem(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error("unknown problem id \"" + std::string(id) + "\"");
  return problems_[it->second];
}

PolicyTable ChainEnvironment::make_policy(StateLayout layout) const {
  std::vector<int> steps;
  steps.reserve(problems_.size());
  for (const auto& p : problems_) steps.push_back(p.spec.steps);
  return PolicyTable(steps, branching_ == 0 ? 2 : branching_, layout);
}

ChainRollout rollout(const PolicyTable& policy, const ChainProblem& problem,
                     std::size_t prefix_len, Rng& rng) {
  const auto t = static_cast<std::size_t>(problem.spec.steps);
  if (prefix_len > t) {
    throw Error("rollout: prefix_len " + std::to_string(prefix_len) + " exceeds chain length " +
                std::to_string(t));
  }
  ChainRollout r;
  r.problem_id = problem.id;
  r.prefix_len = prefix_len;
  r.actions.reserve(t - prefix_len);

  std::vector<double> probs(static_cast<std::size_t>(policy.branching()));
  for (std::size_t step = prefix_len; step < t; ++step) {
    const std::size_t s = policy.state(problem.slot, step);
    policy.probabilities(s, probs);
    const double u = uniform01(rng);
    double acc = 0.0;
    int action = static_cast<int>(probs.size()) - 1;
    for (std::size_t a = 0; a < probs.size(); ++a) {
      acc += probs[a];
      if (u < acc) {
        action = static_cast<int>(a);
        break;
      }
    }
    r.actions.push_back(action);
    r.logprob_old += policy.log_prob(s, action);
  }
  r.reward = verify(r, problem);
  return r;
}

int verify(const ChainRollout& rollout, const ChainProblem& problem) {
  const auto t = static_cast<std::size_t>(problem.spec.steps);
  if (rollout.prefix_len > t || rollout.actions.size() != t - rollout.prefix_len) {
    throw Error("verify: malformed rollout for \"" + problem.id + "\" (" +
                std::to_string(rollout.prefix_len) + " prefix + " +
                std::to_string(rollout.actions.size()) + " generated != " + std::to_string(t) +
                " steps)");
  }
  // The prefix is copied from the expert solution, which is the correct path.
  for (std::size_t j = 0; j < rollout.actions.size(); ++j) {
    if (rollout.actions[j] != problem.spec.correct_path[rollout.prefix_len + j]) return 0;
  }
  return 1;
}

PassRateResult pass_rate(const PolicyTable& policy, const ChainProblem& problem,
                         std::size_t group_size, std::size_t prefix_len, Rng& rng) {
  if (group_size == 0) throw Error("pass_rate: group size must be >= 1");
  PassRateResult res;
  res.group.problem_id = problem.id;
  res.group.slot = problem.slot;
  res.group.prefix_len = prefix_len;
  res.group.rollouts.reserve(group_size);
  std::size_t correct = 0;
  for (std::size_t k = 0; k < group_size; ++k) {
    res.group.rollouts.push_back(rollout(policy, problem, prefix_len, rng));
    correct += static_cast<std::size_t>(res.group.rollouts.back().reward);
  }
  res.pass_rate = static_cast<double>(correct) / static_cast<double>(group_size);
  return res;
}

double success_probability(const PolicyTable& policy, const ChainProblem& problem,
                           std::size_t prefix_len) {
  double logp = 0.0;
  for (std::size_t step = prefix_len; step < static_cast<std::size_t>(problem.spec.steps); ++step) {
    logp += policy.log_prob(policy.state(problem.slot, step), problem.spec.correct_path[step]);
  }
  return std::exp(logp);
}

double mean_success_probability(const PolicyTable& policy, const ChainEnvironment& env) {
  if (env.size() == 0) return 0.0;
  double total = 0.0;
  for (const auto& p : env.problems()) total += success_probability(policy, p);
  return total / static_cast<double>(env.size());
}

std::vector<int> parse_actions(const std::vector<std::string>& tokens) {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& tok : tokens) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw Error("parse_actions: token \"" + tok + "\" is not an action index");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace lppo

#include "lppo/policy_table.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lppo/error.hpp"

namespace lppo {

std::string_view to_string(StateLayout layout) {
  return layout == StateLayout::SharedStep ? "shared_step" : "per_problem";
}

StateLayout parse_state_layout(std::string_view text) {
  if (text == "per_problem") return StateLayout::PerProblem;
  if (text == "shared_step") return StateLayout::SharedStep;
  throw Error("layout: expected per_problem or shared_step, got \"" + std::string(text) + "\"");
}

void softmax(std::span<const double> logits, std::span<double> out) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t a = 0; a < logits.size(); ++a) {
    out[a] = std::exp(logits[a] - mx);
    z += out[a];
  }
  for (std::size_t a = 0; a < logits.size(); ++a) out[a] /= z;
}

double log_sum_exp(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - mx);
  return mx + std::log(z);
}

PolicyTable::PolicyTable(std::span<const int> steps_per_problem, int branching, StateLayout layout)
    : branching_(branching), layout_(layout) {
  if (branching < 1) throw Error("policy table: branching must be >= 1");
  std::size_t max_steps = 0;
  for (int t : steps_per_problem) {
    if (t < 1) throw Error("policy table: every problem needs >= 1 step");
    offsets_.push_back(num_states_);
    steps_.push_back(static_cast<std::size_t>(t));
    if (layout == StateLayout::PerProblem) num_states_ += static_cast<std::size_t>(t);
    max_steps = std::max(max_steps, static_cast<std::size_t>(t));
  }
  if (layout == StateLayout::SharedStep) {
    std::fill(offsets_.begin(), offsets_.end(), 0);
    num_states_ = max_steps;
  }
  logits_.assign(num_states_ * static_cast<std::size_t>(branching_), 0.0);
}

std::size_t PolicyTable::state(std::size_t problem_slot, std::size_t step) const {
  if (problem_slot >= offsets_.size() || step >= steps_[problem_slot]) {
    throw Error("policy table: state (" + std::to_string(problem_slot) + ", " +
                std::to_string(step) + ") out of range");
  }
  return offsets_[problem_slot] + step;
}

std::span<double> PolicyTable::logits(std::size_t state) {
  return {logits_.data() + state * static_cast<std::size_t>(branching_),
          static_cast<std::size_t>(branching_)};
}

std::span<const double> PolicyTable::logits(std::size_t state) const {
  return {logits_.data() + state * static_cast<std::size_t>(branching_),
          static_cast<std::size_t>(branching_)};
}

std::span<const double> PolicyTable::reference_logits(std::size_t state) const {
  if (!reference_) throw Error("policy table: no reference snapshot");
  return {reference_->data() + state * static_cast<std::size_t>(branching_),
          static_cast<std::size_t>(branching_)};
}

void PolicyTable::probabilities(std::size_t state, std::span<double> out) const {
  softmax(logits(state), out);
}

double PolicyTable::log_prob(std::size_t state, int action) const {
  auto l = logits(state);
  return l[static_cast<std::size_t>(action)] - log_sum_exp(l);
}

}  // namespace lppo

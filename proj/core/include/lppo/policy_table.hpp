#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace lppo {

/// PerProblem: one softmax state per (problem, step).
/// SharedStep: one state per step index, shared by every problem.
enum class StateLayout { PerProblem, SharedStep };

std::string_view to_string(StateLayout layout);
StateLayout parse_state_layout(std::string_view text);

/// Tabular softmax policy over `branching` actions per state, with an
/// optional frozen reference copy used only for KL monitoring.
class PolicyTable {
 public:
  PolicyTable() = default;
  PolicyTable(std::span<const int> steps_per_problem, int branching,
              StateLayout layout = StateLayout::PerProblem);

  std::size_t state(std::size_t problem_slot, std::size_t step) const;
  std::size_t num_states() const { return num_states_; }
  std::size_t num_problems() const { return offsets_.size(); }
  int branching() const { return branching_; }
  StateLayout layout() const { return layout_; }

  std::span<double> logits(std::size_t state);
  std::span<const double> logits(std::size_t state) const;
  std::vector<double>& parameters() { return logits_; }
  const std::vector<double>& parameters() const { return logits_; }

  /// Softmax of one state's logits into `out` (size branching).
  void probabilities(std::size_t state, std::span<double> out) const;
  double log_prob(std::size_t state, int action) const;

  void freeze_reference() { reference_ = logits_; }
  void drop_reference() { reference_.reset(); }
  bool has_reference() const { return reference_.has_value(); }
  std::span<const double> reference_logits(std::size_t state) const;

 private:
  int branching_ = 0;
  StateLayout layout_ = StateLayout::PerProblem;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> steps_;
  std::size_t num_states_ = 0;
  std::vector<double> logits_;
  std::optional<std::vector<double>> reference_;
};

/// Stable softmax of `logits` into `out`.
void softmax(std::span<const double> logits, std::span<double> out);

/// log-sum-exp of `logits`.
double log_sum_exp(std::span<const double> logits);

}  // namespace lppo

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lppo/curation.hpp"
#include "lppo/dataset.hpp"
#include "lppo/grpo.hpp"
#include "lppo/policy_table.hpp"
#include "lppo/prefix_sampler.hpp"
#include "lppo/stats_tracker.hpp"

namespace lppo {

/// Which mechanisms are active. Online curation is on in every mode.
///   lppo          - prefix guidance and LP weighting
///   lp_only       - LP weighting only
///   pg_only       - prefix guidance only
///   grpo_baseline - neither
enum class Mode { Lppo, LpOnly, PgOnly, GrpoBaseline };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

/// Everything a training run needs. Defaults reproduce the reference recipe
/// (G=32, batch 128, mini-batch 64, beta in [0.3, 0.8], kappa 8, b 0.5,
/// epsilon_c 0, entropy coefficient -0.001) except the learning rate, which
/// is sized for a tabular softmax policy.
struct RunConfig {
  std::optional<std::filesystem::path> dataset_path;  ///< unset: synthetic
  DatasetConfig synthetic;
  WeightingConfig weighting;
  double beta_min = 0.3;
  double beta_max = 0.8;
  ClipMode clip_mode = ClipMode::AtOrBefore;
  double epsilon_c = 0.0;
  std::size_t group_size = 32;
  std::size_t batch_size = 128;
  std::size_t mini_batch = 64;
  std::size_t max_steps = 300;
  std::size_t max_epochs = 0;  ///< 0: bounded by max_steps only
  double learning_rate = 0.1;
  double clip_eps = 0.2;
  AdvantageMode advantage_mode = AdvantageMode::StdNormalized;
  double entropy_coef = -0.001;
  std::uint64_t seed = 0;
  Mode mode = Mode::Lppo;
  std::optional<std::size_t> max_requeue;
  std::size_t readmit_every = 0;
  double trend_tau = 0.01;
  StateLayout layout = StateLayout::PerProblem;
  double target_pass_rate = 0.8;

  bool prefix_enabled() const { return mode == Mode::Lppo || mode == Mode::PgOnly; }
  bool weighting_enabled() const { return mode == Mode::Lppo || mode == Mode::LpOnly; }

  CurationConfig curation() const;
  GrpoConfig grpo() const;

  /// Throws lppo::Error naming the offending field.
  void validate() const;

  /// Sets one field from its text form. Throws naming the key on unknown
  /// keys or malformed values.
  void set(std::string_view key, std::string_view value);

  /// Canonical key = value listing, in a fixed order.
  std::vector<std::pair<std::string, std::string>> to_key_values() const;
  std::string to_text() const;
  nlohmann::json to_json() const;
  /// FNV-1a of to_text(), as 16 hex digits.
  std::string hash() const;
};

/// Flat `key = value` lines; `#` starts a comment. Relative dataset paths are
/// resolved against `base_dir`.
RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Loads the configured dataset, or generates the synthetic one.
std::vector<Problem> load_problems(const RunConfig& config);

}  // namespace lppo

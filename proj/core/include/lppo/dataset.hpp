#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace lppo {

enum class Pool { Standard, PrefixEligible };

std::string_view to_string(Pool pool);

/// One training sample. `question` is opaque to the engine unless the
/// simulation environment parses it as a chain spec.
struct Problem {
  std::string id;
  nlohmann::json question;
  std::string gold_answer;
  std::optional<std::string> expert_solution;
  Pool pool = Pool::Standard;

  bool operator==(const Problem&) const = default;
};

/// A T-step, B-way chain with exactly one correct action per step.
struct ChainProblemSpec {
  int steps = 0;
  int branching = 0;
  std::vector<int> correct_path;

  void validate() const;

  /// One action token per step, each followed by a newline.
  std::string render_solution() const;
  /// Space-separated action indices.
  std::string render_answer() const;

  nlohmann::json to_json() const;
  static ChainProblemSpec from_json(const nlohmann::json& j);

  bool operator==(const ChainProblemSpec&) const = default;
};

struct DatasetConfig {
  std::size_t n_problems = 64;
  int steps_min = 4;
  int steps_max = 8;
  int branching = 4;
  double prefix_eligible_fraction = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Parses JSON-lines. Blank lines are ignored. Errors carry the 1-based line number.
std::vector<Problem> parse_dataset(std::istream& in);
std::vector<Problem> load_dataset(const std::filesystem::path& path);

nlohmann::json to_json(const Problem& problem);
void write_dataset(std::ostream& out, const std::vector<Problem>& problems);
void save_dataset(const std::filesystem::path& path, const std::vector<Problem>& problems);

/// Deterministic for a fixed config. Ids are zero-padded so lexical order
/// equals generation order.
std::vector<Problem> generate_synthetic(const DatasetConfig& config);

}  // namespace lppo

#include "lppo/run_config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lppo/error.hpp"
#include "lppo/rng.hpp"

namespace lppo {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Lppo: return "lppo";
    case Mode::LpOnly: return "lp_only";
    case Mode::PgOnly: return "pg_only";
    case Mode::GrpoBaseline: return "grpo_baseline";
  }
  return "lppo";
}

Mode parse_mode(std::string_view text) {
  if (text == "lppo") return Mode::Lppo;
  if (text == "lp_only") return Mode::LpOnly;
  if (text == "pg_only") return Mode::PgOnly;
  if (text == "grpo_baseline") return Mode::GrpoBaseline;
  throw Error("mode: expected lppo, lp_only, pg_only or grpo_baseline, got \"" +
              std::string(text) + "\"");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(std::string_view key, std::string_view v) {
  std::string buf(v);
  char* end = nullptr;
  const double d = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size()) {
    throw Error(std::string(key) + ": expected a number, got \"" + buf + "\"");
  }
  return d;
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error(std::string(key) + ": expected a non-negative integer, got \"" + std::string(v) +
                "\"");
  }
  return out;
}

int to_int(std::string_view key, std::string_view v) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw Error(std::string(key) + ": expected an integer, got \"" + std::string(v) + "\"");
  }
  return out;
}

// Shortest text that parses back to the same double.
std::string num(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

CurationConfig RunConfig::curation() const {
  CurationConfig c;
  c.epsilon_c = epsilon_c;
  c.prefix_enabled = prefix_enabled();
  c.max_requeue = max_requeue;
  c.readmit_every = readmit_every;
  return c;
}

GrpoConfig RunConfig::grpo() const {
  GrpoConfig g;
  g.learning_rate = learning_rate;
  g.clip_eps = clip_eps;
  g.advantage_mode = advantage_mode;
  g.entropy_coef = entropy_coef;
  g.mini_batch = mini_batch;
  return g;
}

void RunConfig::validate() const {
  if (!dataset_path) synthetic.validate();
  weighting.validate();
  if (!(beta_min >= 0.0 && beta_min <= 1.0)) throw Error("beta_min: must lie in [0, 1]");
  if (!(beta_max >= 0.0 && beta_max <= 1.0)) throw Error("beta_max: must lie in [0, 1]");
  if (beta_min > beta_max) throw Error("beta_min: must not exceed beta_max");
  if (!(epsilon_c >= 0.0 && epsilon_c < 1.0)) throw Error("epsilon_c: must lie in [0, 1)");
  if (group_size < 2) throw Error("group_size: must be >= 2");
  if (batch_size < 1) throw Error("batch_size: must be >= 1");
  if (max_steps < 1) throw Error("max_steps: must be >= 1");
  if (!(trend_tau >= 0.0)) throw Error("trend_tau: must be >= 0");
  if (!(target_pass_rate > 0.0 && target_pass_rate <= 1.0)) {
    throw Error("target_pass_rate: must lie in (0, 1]");
  }
  grpo().validate();
}

void RunConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "dataset") {
    if (value.empty() || value == "synthetic") {
      dataset_path.reset();
    } else {
      dataset_path = std::filesystem::path(std::string(value));
    }
  } else if (key == "synthetic.n_problems") {
    synthetic.n_problems = to_uint(key, value);
  } else if (key == "synthetic.steps_min") {
    synthetic.steps_min = to_int(key, value);
  } else if (key == "synthetic.steps_max") {
    synthetic.steps_max = to_int(key, value);
  } else if (key == "synthetic.branching") {
    synthetic.branching = to_int(key, value);
  } else if (key == "synthetic.prefix_eligible_fraction") {
    synthetic.prefix_eligible_fraction = to_double(key, value);
  } else if (key == "synthetic.seed") {
    synthetic.seed = to_uint(key, value);
  } else if (key == "alpha") {
    weighting.alpha = to_double(key, value);
  } else if (key == "kappa") {
    weighting.kappa = to_double(key, value);
  } else if (key == "bias") {
    weighting.bias = to_double(key, value);
  } else if (key == "init_mode") {
    weighting.init_mode = parse_init_mode(value);
  } else if (key == "beta_min") {
    beta_min = to_double(key, value);
  } else if (key == "beta_max") {
    beta_max = to_double(key, value);
  } else if (key == "clip_mode") {
    clip_mode = parse_clip_mode(value);
  } else if (key == "epsilon_c") {
    epsilon_c = to_double(key, value);
  } else if (key == "group_size") {
    group_size = to_uint(key, value);
  } else if (key == "batch_size") {
    batch_size = to_uint(key, value);
  } else if (key == "mini_batch") {
    mini_batch = to_uint(key, value);
  } else if (key == "max_steps") {
    max_steps = to_uint(key, value);
  } else if (key == "max_epochs") {
    max_epochs = to_uint(key, value);
  } else if (key == "learning_rate") {
    learning_rate = to_double(key, value);
  } else if (key == "clip_eps") {
    clip_eps = to_double(key, value);
  } else if (key == "advantage_mode") {
    advantage_mode = parse_advantage_mode(value);
  } else if (key == "entropy_coef") {
    entropy_coef = to_double(key, value);
  } else if (key == "seed") {
    seed = to_uint(key, value);
  } else if (key == "mode") {
    mode = parse_mode(value);
  } else if (key == "max_requeue") {
    if (value == "unlimited") {
      max_requeue.reset();
    } else {
      max_requeue = to_uint(key, value);
    }
  } else if (key == "readmit_every") {
    readmit_every = to_uint(key, value);
  } else if (key == "trend_tau") {
    trend_tau = to_double(key, value);
  } else if (key == "layout") {
    layout = parse_state_layout(value);
  } else if (key == "target_pass_rate") {
    target_pass_rate = to_double(key, value);
  } else {
    throw Error("unknown config key \"" + std::string(key) + "\"");
  }
}

std::vector<std::pair<std::string, std::string>> RunConfig::to_key_values() const {
  return {
      {"dataset", dataset_path ? dataset_path->string() : "synthetic"},
      {"synthetic.n_problems", std::to_string(synthetic.n_problems)},
      {"synthetic.steps_min", std::to_string(synthetic.steps_min)},
      {"synthetic.steps_max", std::to_string(synthetic.steps_max)},
      {"synthetic.branching", std::to_string(synthetic.branching)},
      {"synthetic.prefix_eligible_fraction", num(synthetic.prefix_eligible_fraction)},
      {"synthetic.seed", std::to_string(synthetic.seed)},
      {"alpha", num(weighting.alpha)},
      {"kappa", num(weighting.kappa)},
      {"bias", num(weighting.bias)},
      {"init_mode", std::string(to_string(weighting.init_mode))},
      {"beta_min", num(beta_min)},
      {"beta_max", num(beta_max)},
      {"clip_mode", std::string(to_string(clip_mode))},
      {"epsilon_c", num(epsilon_c)},
      {"group_size", std::to_string(group_size)},
      {"batch_size", std::to_string(batch_size)},
      {"mini_batch", std::to_string(mini_batch)},
      {"max_steps", std::to_string(max_steps)},
      {"max_epochs", std::to_string(max_epochs)},
      {"learning_rate", num(learning_rate)},
      {"clip_eps", num(clip_eps)},
      {"advantage_mode", std::string(to_string(advantage_mode))},
      {"entropy_coef", num(entropy_coef)},
      {"seed", std::to_string(seed)},
      {"mode", std::string(to_string(mode))},
      {"max_requeue", max_requeue ? std::to_string(*max_requeue) : "unlimited"},
      {"readmit_every", std::to_string(readmit_every)},
      {"trend_tau", num(trend_tau)},
      {"layout", std::string(to_string(layout))},
      {"target_pass_rate", num(target_pass_rate)},
  };
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : to_key_values()) out += k + " = " + v + "\n";
  return out;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : to_key_values()) j[k] = v;
  return j;
}

std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_text())));
  return buf;
}

RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = line;
    if (auto hash = sv.find('#'); hash != std::string_view::npos) sv = sv.substr(0, hash);
    sv = trim(sv);
    if (sv.empty()) continue;
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos) {
      throw Error("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const auto key = trim(sv.substr(0, eq));
    try {
      cfg.set(key, sv.substr(eq + 1));
    } catch (const Error& e) {
      throw Error("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (cfg.dataset_path && cfg.dataset_path->is_relative() && !base_dir.empty()) {
    cfg.dataset_path = base_dir / *cfg.dataset_path;
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  return parse_run_config(in, path.parent_path());
}

std::vector<Problem> load_problems(const RunConfig& config) {
  if (config.dataset_path) return load_dataset(*config.dataset_path);
  return generate_synthetic(config.synthetic);
}

}  // namespace lppo

#include "lppo/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "lppo/error.hpp"
#include "lppo/rng.hpp"

namespace lppo {

std::string_view to_string(Pool pool) {
  return pool == Pool::PrefixEligible ? "prefix_eligible" : "standard";
}

void ChainProblemSpec::validate() const {
  if (steps < 1) throw Error("chain spec: steps must be >= 1");
  if (branching < 1) throw Error("chain spec: branching must be >= 1");
  if (correct_path.size() != static_cast<std::size_t>(steps)) {
    throw Error("chain spec: correct_path length " + std::to_string(correct_path.size()) +
                " != steps " + std::to_string(steps));
  }
  for (int a : correct_path) {
    if (a < 0 || a >= branching) {
      throw Error("chain spec: action " + std::to_string(a) + " outside [0, " +
                  std::to_string(branching) + ")");
    }
  }
}

std::string ChainProblemSpec::render_solution() const {
  std::string out;
  for (int a : correct_path) {
    out += std::to_string(a);
    out += '\n';
  }
  return out;
}

std::string ChainProblemSpec::render_answer() const {
  std::string out;
  for (std::size_t i = 0; i < correct_path.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(correct_path[i]);
  }
  return out;
}

nlohmann::json ChainProblemSpec::to_json() const {
  return {{"steps", steps}, {"branching", branching}, {"correct_path", correct_path}};
}

ChainProblemSpec ChainProblemSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("chain spec: question is not an object");
  ChainProblemSpec spec;
  try {
    spec.steps = j.at("steps").get<int>();
    spec.branching = j.at("branching").get<int>();
    spec.correct_path = j.at("correct_path").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("chain spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

void DatasetConfig::validate() const {
  if (steps_min < 1) throw Error("dataset config: steps_min must be >= 1");
  if (steps_max < steps_min) throw Error("dataset config: steps_max < steps_min");
  if (branching < 2) throw Error("dataset config: branching must be >= 2 (degenerate chain)");
  if (!(prefix_eligible_fraction >= 0.0 && prefix_eligible_fraction <= 1.0)) {
    throw Error("dataset config: prefix_eligible_fraction must lie in [0, 1]");
  }
}

namespace {

Problem parse_line(const std::string& line, std::size_t line_no) {
  const auto where = [&] { return "line " + std::to_string(line_no) + ": "; };
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(where() + "invalid JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw Error(where() + "expected a JSON object");
  for (const char* key : {"id", "question", "answer"}) {
    if (!j.contains(key)) throw Error(where() + "missing required key \"" + key + "\"");
  }
  if (!j["id"].is_string()) throw Error(where() + "\"id\" must be a string");
  if (!j["question"].is_string() && !j["question"].is_object()) {
    throw Error(where() + "\"question\" must be a string or object");
  }
  if (!j["answer"].is_string()) throw Error(where() + "\"answer\" must be a string");

  Problem p;
  p.id = j["id"].get<std::string>();
  p.question = j["question"];
  p.gold_answer = j["answer"].get<std::string>();
  if (j.contains("expert_solution") && !j["expert_solution"].is_null()) {
    if (!j["expert_solution"].is_string()) {
      throw Error(where() + "\"expert_solution\" must be a string");
    }
    auto sol = j["expert_solution"].get<std::string>();
    if (sol.find_first_not_of(" \t\r\n") == std::string::npos) {
      throw Error(where() + "\"expert_solution\" is empty");
    }
    p.expert_solution = std::move(sol);
    p.pool = Pool::PrefixEligible;
  }
  return p;
}

}  // namespace

std::vector<Problem> parse_dataset(std::istream& in) {
  std::vector<Problem> out;
  std::set<std::string, std::less<>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Problem p = parse_line(line, line_no);
    if (!seen.insert(p.id).second) {
      throw Error("line " + std::to_string(line_no) + ": duplicate id \"" + p.id + "\"");
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Problem> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset " + path.string());
  return parse_dataset(in);
}

nlohmann::json to_json(const Problem& problem) {
  nlohmann::json j = {{"id", problem.id}, {"question", problem.question}, {"answer", problem.gold_answer}};
  if (problem.expert_solution) j["expert_solution"] = *problem.expert_solution;
  return j;
}

void write_dataset(std::ostream& out, const std::vector<Problem>& problems) {
  for (const auto& p : problems) out << to_json(p).dump() << '\n';
}

void save_dataset(const std::filesystem::path& path, const std::vector<Problem>& problems) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset " + path.string());
  write_dataset(out, problems);
}

std::vector<Problem> generate_synthetic(const DatasetConfig& config) {
  config.validate();
  Rng rng(splitmix64(config.seed));

  const std::size_t n = config.n_problems;
  const auto n_eligible = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * config.prefix_eligible_fraction));

  // Which problems get expert solutions: a seeded Fisher-Yates over indices.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[uniform_index(rng, i)]);
  }
  std::vector<bool> eligible(n, false);
  for (std::size_t i = 0; i < n_eligible; ++i) eligible[order[i]] = true;

  const std::size_t width = std::max<std::size_t>(3, std::to_string(n).size());
  const auto span = static_cast<std::uint64_t>(config.steps_max - config.steps_min + 1);

  std::vector<Problem> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    ChainProblemSpec spec;
    spec.branching = config.branching;
    spec.steps = config.steps_min + static_cast<int>(uniform_index(rng, span));
    spec.correct_path.resize(static_cast<std::size_t>(spec.steps));
    for (auto& a : spec.correct_path) {
      a = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(config.branching)));
    }

    std::string idx = std::to_string(i);
    Problem p;
    p.id = "p" + std::string(width - idx.size(), '0') + idx;
    p.question = spec.to_json();
    p.gold_answer = spec.render_answer();
    if (eligible[i]) {
      p.expert_solution = spec.render_solution();
      p.pool = Pool::PrefixEligible;
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace lppo

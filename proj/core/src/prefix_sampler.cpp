#include "lppo/prefix_sampler.hpp"

#include <algorithm>
#include <cmath>

#include "lppo/error.hpp"

namespace lppo {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::vector<std::size_t> TokenSeq::newline_marks() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < line_end.size(); ++i) {
    if (line_end[i]) out.push_back(i + 1);
  }
  return out;
}

std::string TokenSeq::text(std::size_t n) const {
  n = std::min(n, size());
  std::string out = n ? leading : std::string();
  for (std::size_t i = 0; i < n; ++i) {
    out += tokens[i];
    out += separators[i];
  }
  return out;
}

TokenSeq TokenSeq::prefix(std::size_t n) const {
  n = std::min(n, size());
  TokenSeq out;
  if (n) out.leading = leading;
  out.tokens.assign(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(n));
  out.separators.assign(separators.begin(), separators.begin() + static_cast<std::ptrdiff_t>(n));
  out.line_end.assign(line_end.begin(), line_end.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

TokenSeq WhitespaceTokenizer::tokenize(std::string_view text) const {
  TokenSeq seq;
  std::size_t i = 0;
  while (i < text.size() && is_space(text[i])) ++i;
  seq.leading = std::string(text.substr(0, i));
  while (i < text.size()) {
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    seq.tokens.emplace_back(text.substr(start, i - start));
    std::size_t sep_start = i;
    while (i < text.size() && is_space(text[i])) ++i;
    std::string_view sep = text.substr(sep_start, i - sep_start);
    seq.line_end.push_back(sep.find('\n') != std::string_view::npos);
    seq.separators.emplace_back(sep);
  }
  if (seq.tokens.empty()) throw Error("tokenize: expert solution is empty");
  return seq;
}

TokenSeq tokenize(std::string_view text) { return WhitespaceTokenizer{}.tokenize(text); }

std::string_view to_string(ClipMode mode) {
  return mode == ClipMode::StrictlyBefore ? "strictly_before" : "at_or_before";
}

ClipMode parse_clip_mode(std::string_view text) {
  if (text == "at_or_before") return ClipMode::AtOrBefore;
  if (text == "strictly_before") return ClipMode::StrictlyBefore;
  throw Error("clip_mode: expected at_or_before or strictly_before, got \"" + std::string(text) +
              "\"");
}

double draw_ratio(Rng& rng, double beta_min, double beta_max) {
  if (!(beta_min >= 0.0 && beta_max <= 1.0)) throw Error("draw_ratio: bounds must lie in [0, 1]");
  if (beta_min > beta_max) throw Error("draw_ratio: beta_min > beta_max");
  const double u = uniform01(rng);
  return beta_min + (beta_max - beta_min) * u;
}

PrefixSpec build_prefix(const TokenSeq& solution, double lambda, ClipMode mode) {
  PrefixSpec spec;
  spec.lambda = std::clamp(lambda, 0.0, 1.0);
  const std::size_t m = solution.size();
  spec.raw_len = std::min(m, static_cast<std::size_t>(std::floor(spec.lambda * static_cast<double>(m))));

  spec.clipped_len = spec.raw_len;
  const std::size_t bound = mode == ClipMode::AtOrBefore ? spec.raw_len : spec.raw_len - (spec.raw_len > 0);
  for (std::size_t idx = bound; idx >= 1; --idx) {
    if (solution.line_end[idx - 1]) {
      spec.clipped_len = idx;
      break;
    }
  }
  spec.prefix = solution.prefix(spec.clipped_len);
  return spec;
}

std::string AugmentedPrompt::context() const {
  std::string q = question.is_string() ? question.get<std::string>() : question.dump();
  return q + prefix_text;
}

nlohmann::json AugmentedPrompt::to_json() const {
  return {{"id", id}, {"prefix_text", prefix_text}, {"prefix_len", prefix_len}, {"lambda", lambda}};
}

AugmentedPrompt augment(const Problem& problem, const PrefixSpec& prefix) {
  if (problem.pool != Pool::PrefixEligible || !problem.expert_solution) {
    throw Error("problem \"" + problem.id + "\": no expert solution");
  }
  AugmentedPrompt out;
  out.id = problem.id;
  out.question = problem.question;
  out.prefix_text = prefix.prefix.text();
  out.prefix_len = prefix.clipped_len;
  out.lambda = prefix.lambda;
  return out;
}

AugmentedPrompt bare_prompt(const Problem& problem) {
  AugmentedPrompt out;
  out.id = problem.id;
  out.question = problem.question;
  return out;
}

}  // namespace lppo

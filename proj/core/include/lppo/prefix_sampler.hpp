#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lppo/dataset.hpp"
#include "lppo/rng.hpp"

namespace lppo {

/// Token sequence that remembers the exact whitespace around each token, so
/// `text()` reproduces the source byte-for-byte.
struct TokenSeq {
  std::string leading;                  ///< whitespace before the first token
  std::vector<std::string> tokens;
  std::vector<std::string> separators;  ///< whitespace after each token
  std::vector<bool> line_end;           ///< token is followed by a line break

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }

  /// 1-based indices of tokens followed by a line break.
  std::vector<std::size_t> newline_marks() const;

  /// Source text of the first `n` tokens, trailing separator included.
  std::string text(std::size_t n) const;
  std::string text() const { return text(size()); }

  TokenSeq prefix(std::size_t n) const;

  bool operator==(const TokenSeq&) const = default;
};

/// Pluggable tokenization; external trainers can supply their own unit.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual TokenSeq tokenize(std::string_view text) const = 0;
};

class WhitespaceTokenizer final : public Tokenizer {
 public:
  TokenSeq tokenize(std::string_view text) const override;
};

/// Whitespace tokenization. Throws on text with no tokens.
TokenSeq tokenize(std::string_view text);

/// Where newline clipping may land relative to the raw length.
enum class ClipMode { AtOrBefore, StrictlyBefore };

std::string_view to_string(ClipMode mode);
ClipMode parse_clip_mode(std::string_view text);

struct PrefixSpec {
  double lambda = 0.0;
  std::size_t raw_len = 0;      ///< floor(lambda * M)
  std::size_t clipped_len = 0;  ///< after clipping to the last line end
  TokenSeq prefix;

  bool operator==(const PrefixSpec&) const = default;
};

/// lambda ~ U(beta_min, beta_max). Consumes exactly one draw from `rng`.
double draw_ratio(Rng& rng, double beta_min, double beta_max);

/// Truncates the solution to floor(lambda * M) tokens, then pulls the cut
/// back to the last line end within bound. When no line end exists within
/// bound the raw length is kept.
PrefixSpec build_prefix(const TokenSeq& solution, double lambda,
                        ClipMode mode = ClipMode::AtOrBefore);

/// Conditioning context for prefix-guided generation: question followed by
/// the prefix. `prefix_len` counts prefix tokens; generation covers the rest.
struct AugmentedPrompt {
  std::string id;
  nlohmann::json question;
  std::string prefix_text;
  std::size_t prefix_len = 0;
  double lambda = 0.0;

  /// Question payload (objects serialized compactly) concatenated with the prefix.
  std::string context() const;

  /// Wire form used by the serve protocol.
  nlohmann::json to_json() const;

  bool operator==(const AugmentedPrompt&) const = default;
};

/// Throws for Standard-pool problems.
AugmentedPrompt augment(const Problem& problem, const PrefixSpec& prefix);

/// The unaugmented prompt, i.e. augment() with an empty prefix.
AugmentedPrompt bare_prompt(const Problem& problem);

}  // namespace lppo

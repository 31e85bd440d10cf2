#include <doctest.h>

#include <random>

#include "lppo/dataset.hpp"
#include "lppo/error.hpp"
#include "lppo/prefix_sampler.hpp"

using namespace lppo;

namespace {

// Ten tokens with line ends after tokens 3 and 8.
TokenSeq ten_tokens() { return tokenize("t1 t2 t3\nt4 t5 t6 t7 t8\nt9 t10"); }

}  // namespace

TEST_SUITE("prefix_sampler") {

TEST_CASE("tokenizer marks line ends") {
  const auto a = tokenize("a b\nc");
  CHECK(a.tokens == std::vector<std::string>{"a", "b", "c"});
  CHECK(a.newline_marks() == std::vector<std::size_t>{2});

  const auto x = tokenize("x\n");
  CHECK(x.size() == 1);
  CHECK(x.newline_marks() == std::vector<std::size_t>{1});

  std::string hundred;
  for (int i = 0; i < 100; ++i) hundred += "w" + std::to_string(i) + (i % 7 ? " " : "\t");
  CHECK(tokenize(hundred).size() == 100);

  CHECK_THROWS_AS(tokenize("  \n "), Error);
}

TEST_CASE("text reproduces the source") {
  const std::string src = "  alpha  beta\r\n\tgamma \n\ndelta";
  const auto seq = WhitespaceTokenizer().tokenize(src);
  CHECK(seq.text() == src);
  CHECK(seq.text(1) == "  alpha  ");
  CHECK(seq.text(0).empty());
}

TEST_CASE("ratio draws") {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) CHECK(draw_ratio(rng, 0.5, 0.5) == 0.5);

  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(draw_ratio(a, 0.3, 0.8) == draw_ratio(b, 0.3, 0.8));

  Rng r(7);
  double sum = 0.0, lo = 1.0, hi = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double l = draw_ratio(r, 0.3, 0.8);
    sum += l;
    lo = std::min(lo, l);
    hi = std::max(hi, l);
  }
  CHECK(std::abs(sum / n - 0.55) < 0.01);
  CHECK(lo >= 0.3);
  CHECK(hi < 0.8);

  CHECK_THROWS_AS(draw_ratio(r, 0.8, 0.3), Error);
  CHECK_THROWS_AS(draw_ratio(r, -0.1, 0.3), Error);
  CHECK_THROWS_AS(draw_ratio(r, 0.1, 1.3), Error);
}

TEST_CASE("clip to the last line end") {
  const auto seq = ten_tokens();
  REQUIRE(seq.size() == 10);
  REQUIRE(seq.newline_marks() == std::vector<std::size_t>{3, 8});

  const auto p = build_prefix(seq, 0.55);
  CHECK(p.raw_len == 5);
  CHECK(p.clipped_len == 3);
  CHECK(p.prefix.tokens == std::vector<std::string>{"t1", "t2", "t3"});

  const auto zero = build_prefix(seq, 0.0);
  CHECK(zero.raw_len == 0);
  CHECK(zero.clipped_len == 0);
  CHECK(zero.prefix.empty());

  const auto full = build_prefix(seq, 1.0);
  CHECK(full.clipped_len == 8);
}

TEST_CASE("strictly-before mode") {
  const auto seq = ten_tokens();
  CHECK(build_prefix(seq, 0.8, ClipMode::AtOrBefore).clipped_len == 8);
  CHECK(build_prefix(seq, 0.8, ClipMode::StrictlyBefore).clipped_len == 3);
  // No line end strictly before the cut: the raw length stands.
  CHECK(build_prefix(seq, 0.3, ClipMode::StrictlyBefore).clipped_len == 3);
  CHECK(build_prefix(seq, 0.2, ClipMode::StrictlyBefore).clipped_len == 2);
}

TEST_CASE("no line end within bound keeps the raw length") {
  const auto seq = tokenize("a b c d e f\n");
  const auto p = build_prefix(seq, 0.5);
  CHECK(p.raw_len == 3);
  CHECK(p.clipped_len == 3);
}

TEST_CASE("chain solutions cut on every boundary") {
  ChainProblemSpec spec{6, 4, {0, 1, 2, 3, 0, 1}};
  const auto seq = tokenize(spec.render_solution());
  const auto p = build_prefix(seq, 0.5);
  CHECK(p.raw_len == 3);
  CHECK(p.clipped_len == 3);
}

TEST_CASE("prefix properties over random token sequences") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> len(1, 40);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text;
    const int m = len(rng);
    for (int i = 0; i < m; ++i) {
      text += "w" + std::to_string(i);
      text += u(rng) < 0.25 ? "\n" : " ";
    }
    const auto seq = tokenize(text);
    const double lambda = trial % 10 == 0 ? 0.0 : u(rng);
    for (ClipMode mode : {ClipMode::AtOrBefore, ClipMode::StrictlyBefore}) {
      const auto p = build_prefix(seq, lambda, mode);
      const auto bound = static_cast<std::size_t>(std::floor(lambda * static_cast<double>(seq.size())));
      CHECK(p.raw_len == bound);
      CHECK(p.clipped_len <= bound);
      REQUIRE(p.prefix.size() == p.clipped_len);
      for (std::size_t i = 0; i < p.clipped_len; ++i) CHECK(p.prefix.tokens[i] == seq.tokens[i]);
      CHECK(seq.text().rfind(p.prefix.text(), 0) == 0);
      if (lambda == 0.0) CHECK(p.prefix.empty());

      const std::size_t limit = mode == ClipMode::AtOrBefore ? bound : (bound ? bound - 1 : 0);
      bool mark_in_bound = false;
      for (std::size_t i = 1; i <= limit; ++i) mark_in_bound = mark_in_bound || seq.line_end[i - 1];
      if (mark_in_bound) {
        REQUIRE(p.clipped_len >= 1);
        CHECK(seq.line_end[p.clipped_len - 1]);
      } else {
        CHECK(p.clipped_len == bound);
      }
    }
  }
}

TEST_CASE("augmentation") {
  Problem p;
  p.id = "q1";
  p.question = "Solve it.";
  p.expert_solution = "step one\nstep two\n";
  p.pool = Pool::PrefixEligible;
  const auto seq = tokenize(*p.expert_solution);

  const auto empty = augment(p, build_prefix(seq, 0.0));
  CHECK(empty == bare_prompt(p));
  CHECK(empty.context() == "Solve it.");

  const auto half = augment(p, build_prefix(seq, 0.5));
  CHECK(half.prefix_len == 2);
  CHECK(half.prefix_text == "step one\n");
  CHECK(half.context() == "Solve it.step one\n");
  CHECK(half.to_json().at("prefix_len") == 2);

  const auto whole = augment(p, build_prefix(seq, 1.0));
  CHECK(whole.prefix_text == *p.expert_solution);

  Problem standard = p;
  standard.pool = Pool::Standard;
  standard.expert_solution.reset();
  CHECK_THROWS_WITH_AS(augment(standard, build_prefix(seq, 0.5)),
                       doctest::Contains("no expert solution"), Error);
}

}  // TEST_SUITE

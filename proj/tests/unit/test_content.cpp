#include "tutorweb/content.hpp"

#include "doctest.h"

#include <algorithm>
#include <array>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

using namespace tutorweb;

namespace {

const char* kSample = R"(% lecture 1
\question{What is $2+2$?}
\truechoice{4}
\falsechoice{3}
\falsechoice{5}
\falsechoice{22}
\explanation{Add the numbers.}
)";

ParseError parse_error(std::string_view text) {
  try {
    parse_tex_questions(text);
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a ParseError");
  return ParseError(ParseError::Kind::MalformedBlock, 0, "unreachable");
}

std::string random_tex(std::mt19937_64& rng) {
  static const std::array<std::string, 12> atoms = {
      "x", "$\\frac{1}{2}$", "{a}", "\\{", "\\}", " ", "\n", "$\\int_0^1 x\\,dx$", "%", "\\%", "é", "{{b}c}"};
  std::uniform_int_distribution<std::size_t> pick(0, atoms.size() - 1);
  std::uniform_int_distribution<int> len(1, 8);
  std::string s = "t";
  for (int i = len(rng); i > 0; --i) s += atoms[pick(rng)];
  return s;
}

}  // namespace

TEST_CASE("single block parses into four choices") {
  const auto qs = parse_tex_questions(kSample);
  REQUIRE(qs.size() == 1);
  CHECK(qs[0].stem == "What is $2+2$?");
  REQUIRE(qs[0].choices.size() == 4);
  CHECK(qs[0].choices[0].correct);
  CHECK(qs[0].correct_index() == 0);
  CHECK(qs[0].explanation == "Add the numbers.");
  CHECK_FALSE(qs[0].image_url.has_value());
  CHECK(qs[0].id == question_id(qs[0].stem, qs[0].choices, qs[0].explanation));
}

TEST_CASE("true choice position is kept") {
  const auto qs = parse_tex_questions(
      "\\question{s}\\falsechoice{a}\\falsechoice{b}\\truechoice{c}\\explanation{e}");
  REQUIRE(qs.size() == 1);
  CHECK(qs[0].correct_index() == 2);
}

TEST_CASE("empty input gives no questions") {
  CHECK(parse_tex_questions("").empty());
  CHECK(parse_tex_questions("\n  \n% only a comment\n").empty());
}

TEST_CASE("nested braces are preserved byte for byte") {
  const std::string src =
      "\\question{$\\int_0^1 x\\,dx$?}\n\\truechoice{$\\frac{1}{2}$}\n\\falsechoice{$1$}\n"
      "\\explanation{Use $\\left\\{ x \\right\\}$ and {nested {groups}}.}\n";
  const auto qs = parse_tex_questions(src);
  REQUIRE(qs.size() == 1);
  CHECK(qs[0].stem == "$\\int_0^1 x\\,dx$?");
  CHECK(qs[0].choices[0].text == "$\\frac{1}{2}$");
  CHECK(qs[0].explanation == "Use $\\left\\{ x \\right\\}$ and {nested {groups}}.");
  const auto again = parse_tex_questions(serialize_tex_questions(qs));
  CHECK(again == qs);
  CHECK(serialize_tex_questions(again) == serialize_tex_questions(qs));
}

TEST_CASE("round trip is a fixpoint on random questions") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Question> qs;
    const int n = static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) {
      Question q;
      q.stem = random_tex(rng);
      const std::size_t k = 2 + rng() % 5;
      const std::size_t right = rng() % k;
      for (std::size_t c = 0; c < k; ++c) q.choices.push_back({random_tex(rng), c == right});
      q.explanation = random_tex(rng);
      q.id = question_id(q.stem, q.choices, q.explanation);
      qs.push_back(q);
    }
    const auto text = serialize_tex_questions(qs);
    const auto parsed = parse_tex_questions(text);
    REQUIRE(parsed == qs);
    CHECK(serialize_tex_questions(parsed) == text);
  }
}

TEST_CASE("question id changes with any byte") {
  const auto q = parse_tex_questions(kSample)[0];
  CHECK(q.id.size() == 33);
  CHECK(q.id.front() == 'q');
  auto changed = q.choices;
  changed[1].text += " ";
  CHECK(question_id(q.stem, changed, q.explanation) != q.id);
  CHECK(question_id(q.stem + " ", q.choices, q.explanation) != q.id);
  CHECK(question_id(q.stem, q.choices, q.explanation + ".") != q.id);
  auto flipped = q.choices;
  std::swap(flipped[0].correct, flipped[1].correct);
  CHECK(question_id(q.stem, flipped, q.explanation) != q.id);
  // Field boundaries matter.
  CHECK(question_id("ab", {{"c", true}, {"d", false}}, "e") != question_id("a", {{"bc", true}, {"d", false}}, "e"));
}

TEST_CASE("choice count errors carry the block line") {
  SUBCASE("no true choice") {
    const auto e = parse_error("\n\n\\question{s}\n\\falsechoice{a}\n\\falsechoice{b}\n\\explanation{e}\n");
    CHECK(e.kind() == ParseError::Kind::ChoiceCountError);
    CHECK(e.line() == 3);
  }
  SUBCASE("two true choices") {
    const auto e = parse_error("\\question{s}\\truechoice{a}\\truechoice{b}\\explanation{e}");
    CHECK(e.kind() == ParseError::Kind::ChoiceCountError);
    CHECK(e.line() == 1);
  }
  SUBCASE("a single choice") {
    const auto e = parse_error("\\question{s}\\truechoice{a}\\explanation{e}");
    CHECK(e.kind() == ParseError::Kind::ChoiceCountError);
  }
}

TEST_CASE("malformed blocks") {
  CHECK(parse_error("\\question{unclosed\n\\truechoice{a}").kind() == ParseError::Kind::MalformedBlock);
  CHECK(parse_error("\\question{s}\\truechoice{a}\\falsechoice{b}").kind() == ParseError::Kind::MalformedBlock);
  CHECK(parse_error("stray text").kind() == ParseError::Kind::MalformedBlock);
  CHECK(parse_error("\\question{s}\\truechoice{ }\\falsechoice{b}\\explanation{e}").kind() ==
        ParseError::Kind::MalformedBlock);
  const auto e = parse_error(std::string(kSample) + "\n\\question{ok}\n\\truechoice{a}\n\\bogus{b}\n");
  CHECK(e.kind() == ParseError::Kind::MalformedBlock);
  CHECK(e.line() == 11);
}

TEST_CASE("validate_question") {
  auto q = parse_tex_questions(kSample)[0];
  CHECK_NOTHROW(validate_question(q));
  q.choices[1].correct = true;
  CHECK_THROWS_AS(validate_question(q), std::invalid_argument);
}

TEST_CASE("shuffle with one choice") {
  Question q;
  q.id = "q1";
  q.choices = {{"only", true}};
  for (std::uint64_t seed = 0; seed < 10; ++seed) CHECK(shuffle_choices(q, seed) == std::vector<std::size_t>{0});
}

TEST_CASE("shuffle is a deterministic permutation") {
  const auto q = parse_tex_questions(kSample)[0];
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto a = shuffle_choices(q, seed);
    CHECK(a == shuffle_choices(q, seed));
    auto sorted = a;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> iota(q.choices.size());
    std::iota(iota.begin(), iota.end(), 0);
    CHECK(sorted == iota);
  }
}

TEST_CASE("correct choice position is uniform") {
  const auto q = parse_tex_questions(kSample)[0];
  std::array<int, 4> counts{};
  std::mt19937_64 seeds(2024);
  for (int i = 0; i < 40000; ++i) {
    const auto order = shuffle_choices(q, seeds());
    const auto pos = std::find(order.begin(), order.end(), q.correct_index()) - order.begin();
    ++counts[static_cast<std::size_t>(pos)];
  }
  for (int c : counts) {
    CHECK(c >= 9600);
    CHECK(c <= 10400);
  }
}

TEST_CASE("all permutations of three choices occur") {
  Question q;
  q.id = "q3";
  q.choices = {{"a", true}, {"b", false}, {"c", false}};
  std::set<std::vector<std::size_t>> seen;
  for (std::uint64_t seed = 0; seed < 500; ++seed) seen.insert(shuffle_choices(q, seed));
  CHECK(seen.size() == 6);
}

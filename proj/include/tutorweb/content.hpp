#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tutorweb {

struct Choice {
  std::string text;  // opaque TeX
  bool correct = false;

  bool operator==(const Choice&) const = default;
};

struct Question {
  std::string id;
  std::string stem;
  std::vector<Choice> choices;
  std::string explanation;
  // Reserved for the wire format; the importer never fills it.
  std::optional<std::string> image_url;

  std::size_t correct_index() const;
  bool operator==(const Question&) const = default;
};

struct Lecture {
  std::string id;
  std::string title;
  std::vector<std::string> question_ids;
};

struct Tutorial {
  std::string id;
  std::string title;
  std::vector<Lecture> lectures;
};

struct Course {
  std::string id;
  std::string title;
  std::vector<Tutorial> tutorials;
};

class ParseError : public std::runtime_error {
 public:
  enum class Kind { MalformedBlock, ChoiceCountError };

  ParseError(Kind kind, std::size_t line, const std::string& what);

  Kind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

/// Content-hash id over the exact stem, choice texts/flags (file order) and
/// explanation. Any byte change yields a different id.
std::string question_id(std::string_view stem, const std::vector<Choice>& choices,
                        std::string_view explanation);

/// Throws std::invalid_argument when the question breaks the model invariants
/// (exactly one correct choice, at least two choices, non-blank texts).
void validate_question(const Question& q);

/// Parses the question-file grammar:
///
///   file     := (question_block)*
///   block    := "\question{" balanced "}" ws choice+ ws "\explanation{" balanced "}"
///   choice   := ("\truechoice{" | "\falsechoice{") balanced "}"
///
/// Brace contents are opaque; `\{` and `\}` do not count toward nesting.
/// Lines starting with `%` between blocks are comments.
std::vector<Question> parse_tex_questions(std::string_view source);

/// Inverse of parse_tex_questions: parse(serialize(qs)) == qs.
std::string serialize_tex_questions(const std::vector<Question>& questions);

/// Presentation order for the choices: result[position] = canonical index.
std::vector<std::size_t> shuffle_choices(const Question& q, std::uint64_t seed);

}  // namespace tutorweb

#include "tutorweb/content.hpp"

#include "tutorweb/crypto.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <random>

namespace tutorweb {

namespace {

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

void append_field(std::string& out, char tag, std::string_view value) {
  out.push_back(tag);
  out += std::to_string(value.size());
  out.push_back(':');
  out.append(value);
}

class Cursor {
 public:
  explicit Cursor(std::string_view src) : src_(src) {}

  bool done() const { return pos_ >= src_.size(); }
  std::size_t line() const { return line_; }
  char peek() const { return src_[pos_]; }
  bool at_line_start() const { return pos_ == 0 || src_[pos_ - 1] == '\n'; }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') ++line_;
      ++pos_;
    }
  }

  void skip_ws() {
    while (!done() && std::isspace(static_cast<unsigned char>(peek()))) advance();
  }

  // Whitespace and whole-line `%` comments between blocks.
  void skip_ws_and_comments() {
    for (;;) {
      skip_ws();
      if (!done() && peek() == '%' && at_line_start()) {
        while (!done() && peek() != '\n') advance();
        continue;
      }
      return;
    }
  }

  bool consume(std::string_view lit) {
    if (src_.substr(pos_, lit.size()) != lit) return false;
    advance(lit.size());
    return true;
  }

  bool starts_with(std::string_view lit) const { return src_.substr(pos_, lit.size()) == lit; }

  // Called just after an opening brace; returns the text up to the matching
  // close brace and consumes that brace.
  std::string balanced(std::size_t open_line) {
    const std::size_t start = pos_;
    int depth = 1;
    while (!done()) {
      const char c = peek();
      if (c == '\\') {
        advance(2);
        continue;
      }
      if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          std::string body(src_.substr(start, pos_ - start));
          advance();
          return body;
        }
      }
      advance();
    }
    throw ParseError(ParseError::Kind::MalformedBlock, open_line, "unbalanced braces");
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

std::string describe_next(const Cursor& cur) {
  if (cur.done()) return "end of file";
  return std::string("'") + cur.peek() + "'";
}

}  // namespace

ParseError::ParseError(Kind kind, std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), kind_(kind), line_(line) {}

std::size_t Question::correct_index() const {
  for (std::size_t i = 0; i < choices.size(); ++i) {
    if (choices[i].correct) return i;
  }
  throw std::logic_error("question " + id + " has no correct choice");
}

std::string question_id(std::string_view stem, const std::vector<Choice>& choices,
                        std::string_view explanation) {
  std::string buf;
  append_field(buf, 'S', stem);
  for (const auto& c : choices) append_field(buf, c.correct ? 'T' : 'F', c.text);
  append_field(buf, 'E', explanation);
  return "q" + sha256_hex(buf).substr(0, 32);
}

void validate_question(const Question& q) {
  if (q.choices.size() < 2) throw std::invalid_argument("question needs at least 2 choices");
  const auto n_correct =
      std::count_if(q.choices.begin(), q.choices.end(), [](const Choice& c) { return c.correct; });
  if (n_correct != 1) throw std::invalid_argument("question needs exactly one correct choice");
  for (const auto& c : q.choices) {
    if (is_blank(c.text)) throw std::invalid_argument("choice text is blank");
  }
}

std::vector<Question> parse_tex_questions(std::string_view source) {
  std::vector<Question> out;
  Cursor cur(source);

  for (;;) {
    cur.skip_ws_and_comments();
    if (cur.done()) break;

    const std::size_t block_line = cur.line();
    if (!cur.consume("\\question{")) {
      throw ParseError(ParseError::Kind::MalformedBlock, cur.line(),
                       "expected \\question{, found " + describe_next(cur));
    }
    Question q;
    q.stem = cur.balanced(block_line);

    std::size_t n_true = 0;
    std::size_t n_false = 0;
    for (;;) {
      cur.skip_ws();
      const std::size_t choice_line = cur.line();
      bool correct = false;
      if (cur.consume("\\truechoice{")) {
        correct = true;
        ++n_true;
      } else if (cur.consume("\\falsechoice{")) {
        ++n_false;
      } else {
        break;
      }
      Choice c{cur.balanced(choice_line), correct};
      if (is_blank(c.text)) {
        throw ParseError(ParseError::Kind::MalformedBlock, choice_line, "empty choice text");
      }
      q.choices.push_back(std::move(c));
    }

    if (!cur.starts_with("\\explanation{")) {
      throw ParseError(ParseError::Kind::MalformedBlock, cur.line(),
                       "missing \\explanation for question starting here at line " +
                           std::to_string(block_line));
    }
    if (n_true != 1) {
      throw ParseError(ParseError::Kind::ChoiceCountError, block_line,
                       "expected exactly one \\truechoice, found " + std::to_string(n_true));
    }
    if (n_false == 0) {
      throw ParseError(ParseError::Kind::ChoiceCountError, block_line,
                       "expected at least one \\falsechoice");
    }
    const std::size_t expl_line = cur.line();
    cur.consume("\\explanation{");
    q.explanation = cur.balanced(expl_line);
    q.id = question_id(q.stem, q.choices, q.explanation);
    out.push_back(std::move(q));
  }
  return out;
}

std::string serialize_tex_questions(const std::vector<Question>& questions) {
  std::string out;
  for (const auto& q : questions) {
    out += "\\question{" + q.stem + "}\n";
    for (const auto& c : q.choices) {
      out += (c.correct ? "\\truechoice{" : "\\falsechoice{") + c.text + "}\n";
    }
    out += "\\explanation{" + q.explanation + "}\n\n";
  }
  return out;
}

std::vector<std::size_t> shuffle_choices(const Question& q, std::uint64_t seed) {
  std::vector<std::size_t> perm(q.choices.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  const std::uint64_t id_hash = fnv1a64(q.id);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id_hash), static_cast<std::uint32_t>(id_hash >> 32)};
  std::mt19937_64 rng(seq);
  for (std::size_t i = perm.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(perm[i - 1], perm[pick(rng)]);
  }
  return perm;
}

}  // namespace tutorweb

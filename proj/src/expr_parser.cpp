#include "sparsedae/expr_parser.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <vector>

#include "sparsedae/errors.hpp"

namespace sparsedae {

std::optional<std::size_t> default_unknown_resolver(std::string_view name) {
  if (name.size() < 2 || name[0] != 'u') return std::nullopt;
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), value);
  if (ec != std::errc() || ptr != name.data() + name.size() || value == 0) return std::nullopt;
  return value - 1;
}

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, Cmp, End };

struct Token {
  Tok kind = Tok::End;
  std::string_view text;
  double number = 0.0;
  Compare cmp = Compare::Less;
  std::size_t pos = 0;
};

class Lexer {
 public:
  Lexer(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    std::size_t i = 0;
    while (true) {
      while (i < text_.size() && std::isspace(static_cast<unsigned char>(text_[i]))) ++i;
      Token t;
      t.pos = i;
      if (i >= text_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      const char c = text_[i];
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        // strtod needs a terminated buffer; copy the candidate span.
        std::size_t j = i;
        while (j < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[j])) || text_[j] == '.' ||
                                    ((text_[j] == '+' || text_[j] == '-') && j > i &&
                                     (text_[j - 1] == 'e' || text_[j - 1] == 'E')))) {
          ++j;
        }
        const std::string buf(text_.substr(i, j - i));
        char* end = nullptr;
        t.number = std::strtod(buf.c_str(), &end);
        if (end != buf.c_str() + buf.size()) fail("malformed number '" + buf + "'", i);
        t.kind = Tok::Number;
        t.text = text_.substr(i, j - i);
        i = j;
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t j = i;
        while (j < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[j])) || text_[j] == '_')) ++j;
        t.kind = Tok::Ident;
        t.text = text_.substr(i, j - i);
        i = j;
      } else if (c == '<' || c == '>') {
        const bool eq = i + 1 < text_.size() && text_[i + 1] == '=';
        t.kind = Tok::Cmp;
        t.cmp = c == '<' ? (eq ? Compare::LessEqual : Compare::Less) : (eq ? Compare::GreaterEqual : Compare::Greater);
        t.text = text_.substr(i, eq ? 2 : 1);
        i += eq ? 2 : 1;
      } else {
        switch (c) {
          case '+': t.kind = Tok::Plus; break;
          case '-': t.kind = Tok::Minus; break;
          case '*': t.kind = Tok::Star; break;
          case '/': t.kind = Tok::Slash; break;
          case '^': t.kind = Tok::Caret; break;
          case '(': t.kind = Tok::LParen; break;
          case ')': t.kind = Tok::RParen; break;
          case ',': t.kind = Tok::Comma; break;
          default: fail(std::string("unexpected character '") + c + "'", i);
        }
        t.text = text_.substr(i, 1);
        ++i;
      }
      out.push_back(t);
    }
  }

 private:
  [[noreturn]] void fail(const std::string& what, std::size_t pos) const {
    throw ParseError(what + " at column " + std::to_string(pos + 1), line_);
  }

  std::string_view text_;
  std::size_t line_;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, const UnknownResolver& resolver, std::size_t line)
      : toks_(std::move(tokens)), resolver_(resolver), line_(line) {}

  Expr parse_all() {
    Expr e = parse_sum();
    if (peek().kind != Tok::End) fail("unexpected '" + std::string(peek().text) + "'");
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  void expect(Tok k, const char* what) {
    if (!accept(k)) fail(std::string("expected ") + what);
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " at column " + std::to_string(peek().pos + 1), line_);
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    while (true) {
      if (accept(Tok::Plus)) {
        lhs = lhs + parse_product();
      } else if (accept(Tok::Minus)) {
        lhs = lhs - parse_product();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    while (true) {
      if (accept(Tok::Star)) {
        lhs = lhs * parse_unary();
      } else if (accept(Tok::Slash)) {
        lhs = lhs / parse_unary();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept(Tok::Minus)) return -parse_unary();
    if (accept(Tok::Plus)) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (accept(Tok::Caret)) {
      Expr exponent = parse_unary();
      return Expr::general_pow(base, exponent);
    }
    return base;
  }

  Expr parse_atom() {
    const Token& t = next();
    switch (t.kind) {
      case Tok::Number:
        return Expr(t.number);
      case Tok::LParen: {
        Expr e = parse_sum();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident:
        if (peek().kind == Tok::LParen) return parse_call(t.text);
        if (auto idx = resolver_ ? resolver_(t.text) : std::nullopt) return Expr::unknown(*idx);
        return Expr::parameter(std::string(t.text));
      default:
        --pos_;
        fail(t.kind == Tok::End ? "unexpected end of expression" : "unexpected '" + std::string(t.text) + "'");
    }
  }

  Expr parse_call(std::string_view fn) {
    expect(Tok::LParen, "'('");
    if (fn == "exp" || fn == "ln" || fn == "log") {
      Expr arg = parse_sum();
      expect(Tok::RParen, "')'");
      return fn == "exp" ? Expr::exp(arg) : Expr::ln(arg);
    }
    if (fn == "piecewise") return parse_piecewise();
    fail("unknown function '" + std::string(fn) + "'");
  }

  // piecewise(c1, e1, c2, e2, ..., default)
  Expr parse_piecewise() {
    std::vector<PiecewiseBranch> branches;
    while (true) {
      Expr first = parse_sum();
      if (peek().kind == Tok::Cmp) {
        const Compare op = next().cmp;
        Expr rhs = parse_sum();
        Condition cond = make_condition(first, op, rhs);
        expect(Tok::Comma, "',' after piecewise condition");
        Expr value = parse_sum();
        branches.push_back({std::move(cond), std::move(value)});
        if (accept(Tok::Comma)) continue;
        fail("piecewise needs a default branch");
      }
      expect(Tok::RParen, "')' closing piecewise");
      if (branches.empty()) fail("piecewise needs at least one condition");
      return Expr::piecewise(std::move(branches), first);
    }
  }

  Condition make_condition(const Expr& lhs, Compare op, const Expr& rhs) {
    if (rhs.is_constant()) return Condition{lhs, op, rhs.value()};
    if (lhs.is_constant()) {
      // c <= e  is  e >= c
      Compare flipped = op;
      switch (op) {
        case Compare::Less: flipped = Compare::Greater; break;
        case Compare::LessEqual: flipped = Compare::GreaterEqual; break;
        case Compare::Greater: flipped = Compare::Less; break;
        case Compare::GreaterEqual: flipped = Compare::LessEqual; break;
      }
      return Condition{rhs, flipped, lhs.value()};
    }
    fail("piecewise condition must compare an expression with a constant");
  }

  std::vector<Token> toks_;
  const UnknownResolver& resolver_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expression(std::string_view text, const UnknownResolver& resolver, std::size_t line) {
  Lexer lexer(text, line);
  Parser parser(lexer.run(), resolver, line);
  return parser.parse_all();
}

}  // namespace sparsedae

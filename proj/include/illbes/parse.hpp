#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "illbes/errors.hpp"
#include "illbes/formula.hpp"

namespace illbes {

// Concrete syntax:
//   formula  := lolli
//   lolli    := plus ("-o" lolli)?                 right-associative
//   plus     := with ("+" with)*                   left-associative
//   with     := tensor ("&" tensor)*               left-associative
//   tensor   := unary ("*" unary)*                 left-associative
//   unary    := "!" unary | "1" | "0" | "top" | atom | "(" formula ")"
//   sequent  := (formula ("," formula)*)? "|-" formula
namespace detail {

struct Token {
  enum class Kind { Atom, Bang, Star, Amp, Plus, Lolli, One, Zero, Top, LParen, RParen, Comma, Turnstile, End };
  Kind kind;
  std::string text;
  std::size_t pos;
};

inline std::vector<Token> tokenize(const std::string& in) {
  using K = Token::Kind;
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < in.size()) {
    char c = in[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    auto push = [&](K k, std::size_t len) {
      out.push_back({k, in.substr(start, len), start});
      i += len;
    };
    if (c == '!') { push(K::Bang, 1); continue; }
    if (c == '*') { push(K::Star, 1); continue; }
    if (c == '&') { push(K::Amp, 1); continue; }
    if (c == '+') { push(K::Plus, 1); continue; }
    if (c == '(') { push(K::LParen, 1); continue; }
    if (c == ')') { push(K::RParen, 1); continue; }
    if (c == ',') { push(K::Comma, 1); continue; }
    if (c == '1') { push(K::One, 1); continue; }
    if (c == '0') { push(K::Zero, 1); continue; }
    if (c == '-') {
      if (i + 1 < in.size() && in[i + 1] == 'o') { push(K::Lolli, 2); continue; }
      throw ParseError("expected '-o'", i);
    }
    if (c == '|') {
      if (i + 1 < in.size() && in[i + 1] == '-') { push(K::Turnstile, 2); continue; }
      throw ParseError("expected '|-'", i);
    }
    if (c == '#' || std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i + (c == '#' ? 1 : 0);
      while (j < in.size() &&
             (std::isalnum(static_cast<unsigned char>(in[j])) || in[j] == '_'))
        ++j;
      std::string word = in.substr(i, j - i);
      i = j;
      if (word == "top") {
        out.push_back({K::Top, word, start});
      } else {
        out.push_back({K::Atom, word, start});
      }
      continue;
    }
    throw ParseError(std::string("unknown token '") + c + "'", i);
  }
  out.push_back({K::End, "", in.size()});
  return out;
}

class FormulaParser {
 public:
  explicit FormulaParser(const std::string& in) : toks_(tokenize(in)) {}

  Formula parse_formula_all() {
    Formula f = parse_lolli();
    expect_end();
    return f;
  }

  Sequent parse_sequent_all() {
    using K = Token::Kind;
    Sequent s{Multiset<Formula>{}, Formula::one()};
    if (peek().kind != K::Turnstile) {
      s.context.insert(parse_lolli());
      while (peek().kind == K::Comma) {
        ++pos_;
        s.context.insert(parse_lolli());
      }
    }
    if (peek().kind != K::Turnstile) throw ParseError("expected '|-'", peek().pos);
    ++pos_;
    s.conclusion = parse_lolli();
    expect_end();
    return s;
  }

 private:
  using K = Token::Kind;
  const Token& peek() const { return toks_[pos_]; }

  void expect_end() {
    if (peek().kind != K::End) throw ParseError("unexpected trailing input", peek().pos);
  }

  Formula parse_lolli() {
    Formula l = parse_plus();
    if (peek().kind == K::Lolli) {
      ++pos_;
      return Formula::lolli(std::move(l), parse_lolli());
    }
    return l;
  }
  Formula parse_plus() {
    Formula l = parse_with();
    while (peek().kind == K::Plus) {
      ++pos_;
      l = Formula::plus(std::move(l), parse_with());
    }
    return l;
  }
  Formula parse_with() {
    Formula l = parse_tensor();
    while (peek().kind == K::Amp) {
      ++pos_;
      l = Formula::with(std::move(l), parse_tensor());
    }
    return l;
  }
  Formula parse_tensor() {
    Formula l = parse_unary();
    while (peek().kind == K::Star) {
      ++pos_;
      l = Formula::tensor(std::move(l), parse_unary());
    }
    return l;
  }
  Formula parse_unary() {
    const Token& t = peek();
    switch (t.kind) {
      case K::Bang:
        ++pos_;
        return Formula::bang(parse_unary());
      case K::One:
        ++pos_;
        return Formula::one();
      case K::Zero:
        ++pos_;
        return Formula::zero();
      case K::Top:
        ++pos_;
        return Formula::top();
      case K::Atom: {
        ++pos_;
        try {
          return Formula::atom(atom_from_text(t.text));
        } catch (const IoError& e) {
          throw ParseError(e.what(), t.pos);
        }
      }
      case K::LParen: {
        ++pos_;
        Formula f = parse_lolli();
        if (peek().kind != K::RParen) throw ParseError("expected ')'", peek().pos);
        ++pos_;
        return f;
      }
      default:
        throw ParseError("expected a formula", t.pos);
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Formula parse_formula(const std::string& text) {
  return detail::FormulaParser(text).parse_formula_all();
}

inline Sequent parse_sequent(const std::string& text) {
  return detail::FormulaParser(text).parse_sequent_all();
}

// Atomic sequent syntax: "p, q |- r" with atom tokens only.
inline std::pair<Multiset<AtomId>, AtomId> parse_atomic_sequent(const std::string& text) {
  Sequent s = parse_sequent(text);
  Multiset<AtomId> ctx;
  for (const auto& [f, c] : s.context.entries()) {
    if (!f.is_atom()) throw ParseError("atomic sequent context must contain atoms only", 0);
    ctx.insert(f.atom_id(), c);
  }
  if (!s.conclusion.is_atom())
    throw ParseError("atomic sequent conclusion must be an atom", 0);
  return {std::move(ctx), s.conclusion.atom_id()};
}

}  // namespace illbes

#pragma once

#include <cctype>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "illbes/atoms.hpp"
#include "illbes/errors.hpp"
#include "illbes/formula.hpp"

namespace illbes {

enum class IPLKind : unsigned char { Atom, And, Or, Implies, Bottom };

// Intuitionistic propositional formulas, the source of the translation.
class IPLFormula {
 public:
  IPLFormula() : IPLFormula(bottom()) {}

  static IPLFormula atom(AtomId a) { return make(IPLKind::Atom, std::move(a), {}, {}); }
  static IPLFormula atom(const std::string& name) { return atom(AtomId::user(name)); }
  static IPLFormula bottom() { return make(IPLKind::Bottom, AtomId(), {}, {}); }
  static IPLFormula conj(IPLFormula l, IPLFormula r) {
    return make(IPLKind::And, AtomId(), std::move(l.node_), std::move(r.node_));
  }
  static IPLFormula disj(IPLFormula l, IPLFormula r) {
    return make(IPLKind::Or, AtomId(), std::move(l.node_), std::move(r.node_));
  }
  static IPLFormula implies(IPLFormula l, IPLFormula r) {
    return make(IPLKind::Implies, AtomId(), std::move(l.node_), std::move(r.node_));
  }

  IPLKind kind() const { return node_->kind; }
  const AtomId& atom_id() const { return node_->atom; }
  IPLFormula left() const { return IPLFormula(node_->left); }
  IPLFormula right() const { return IPLFormula(node_->right); }

  std::string text() const { return render(0); }

 private:
  struct Node {
    IPLKind kind;
    AtomId atom;
    std::shared_ptr<const Node> left;
    std::shared_ptr<const Node> right;
  };
  explicit IPLFormula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static IPLFormula make(IPLKind k, AtomId a, std::shared_ptr<const Node> l,
                         std::shared_ptr<const Node> r) {
    return IPLFormula(
        std::make_shared<const Node>(Node{k, std::move(a), std::move(l), std::move(r)}));
  }

  // Precedence: & = 3, | = 2, -> = 1 (right-associative).
  static int prec(IPLKind k) {
    switch (k) {
      case IPLKind::Implies: return 1;
      case IPLKind::Or: return 2;
      case IPLKind::And: return 3;
      default: return 4;
    }
  }
  std::string render(int min_prec) const {
    switch (kind()) {
      case IPLKind::Atom: return atom_id().text();
      case IPLKind::Bottom: return "bot";
      default: break;
    }
    int p = prec(kind());
    const char* op = kind() == IPLKind::And ? " & " : kind() == IPLKind::Or ? " | " : " -> ";
    std::string s = kind() == IPLKind::Implies ? left().render(p + 1) + op + right().render(p)
                                               : left().render(p) + op + right().render(p + 1);
    return p < min_prec ? "(" + s + ")" : s;
  }

  std::shared_ptr<const Node> node_;
};

// Parses "a & b -> c | bot" style input; & binds tighter than |, which binds
// tighter than ->; -> is right-associative.
inline IPLFormula parse_ipl_formula(const std::string& in) {
  std::size_t i = 0;
  auto skip = [&] {
    while (i < in.size() && std::isspace(static_cast<unsigned char>(in[i]))) ++i;
  };
  auto parse_implies = [&](auto&& self) -> IPLFormula {
    auto parse_primary = [&](auto&& outer) -> IPLFormula {
      skip();
      if (i >= in.size()) throw ParseError("expected a formula", i);
      if (in[i] == '(') {
        ++i;
        IPLFormula f = outer(outer);
        skip();
        if (i >= in.size() || in[i] != ')') throw ParseError("expected ')'", i);
        ++i;
        return f;
      }
      if (std::isalpha(static_cast<unsigned char>(in[i]))) {
        std::size_t start = i;
        while (i < in.size() &&
               (std::isalnum(static_cast<unsigned char>(in[i])) || in[i] == '_'))
          ++i;
        std::string word = in.substr(start, i - start);
        if (word == "bot") return IPLFormula::bottom();
        try {
          return IPLFormula::atom(atom_from_text(word));
        } catch (const IoError& e) {
          throw ParseError(e.what(), start);
        }
      }
      throw ParseError("expected a formula", i);
    };
    auto parse_and = [&](auto&& outer) -> IPLFormula {
      IPLFormula l = parse_primary(outer);
      while (true) {
        skip();
        if (i < in.size() && in[i] == '&') {
          ++i;
          l = IPLFormula::conj(std::move(l), parse_primary(outer));
        } else {
          return l;
        }
      }
    };
    auto parse_or = [&](auto&& outer) -> IPLFormula {
      IPLFormula l = parse_and(outer);
      while (true) {
        skip();
        if (i < in.size() && in[i] == '|') {
          ++i;
          l = IPLFormula::disj(std::move(l), parse_and(outer));
        } else {
          return l;
        }
      }
    };
    IPLFormula l = parse_or(self);
    skip();
    if (i + 1 < in.size() && in[i] == '-' && in[i + 1] == '>') {
      i += 2;
      return IPLFormula::implies(std::move(l), self(self));
    }
    return l;
  };
  IPLFormula f = parse_implies(parse_implies);
  skip();
  if (i != in.size()) throw ParseError("unexpected trailing input", i);
  return f;
}

// The embedding of intuitionistic propositional logic:
//   p       -> p
//   a & b   -> <a> & <b>
//   a | b   -> !<a> + !<b>
//   a -> b  -> !<a> -o <b>
//   bot     -> 0
inline Formula girard_translate(const IPLFormula& f) {
  switch (f.kind()) {
    case IPLKind::Atom: return Formula::atom(f.atom_id());
    case IPLKind::Bottom: return Formula::zero();
    case IPLKind::And:
      return Formula::with(girard_translate(f.left()), girard_translate(f.right()));
    case IPLKind::Or:
      return Formula::plus(Formula::bang(girard_translate(f.left())),
                           Formula::bang(girard_translate(f.right())));
    case IPLKind::Implies:
      return Formula::lolli(Formula::bang(girard_translate(f.left())),
                            girard_translate(f.right()));
  }
  throw CheckError("unknown formula kind");
}

}  // namespace illbes

#pragma once

#include <compare>
#include <memory>
#include <string>
#include <utility>

#include "illbes/atoms.hpp"
#include "illbes/multiset.hpp"

namespace illbes {

enum class FormulaKind : unsigned char { Atom, Top, Zero, One, Lolli, Tensor, With, Plus, Bang };

// Immutable formula tree with shared subterms; copying is cheap. The degree
// (recursion measure of the support relation) is computed at construction.
class Formula {
 public:
  Formula() : Formula(one()) {}

  static Formula atom(AtomId a) {
    return Formula(std::make_shared<const Node>(Node{FormulaKind::Atom, std::move(a), {}, {}, 1}));
  }
  static Formula atom(const std::string& name) { return atom(AtomId::user(name)); }
  static Formula top() { return nullary(FormulaKind::Top); }
  static Formula zero() { return nullary(FormulaKind::Zero); }
  static Formula one() { return nullary(FormulaKind::One); }
  static Formula lolli(Formula l, Formula r) { return binary(FormulaKind::Lolli, std::move(l), std::move(r)); }
  static Formula tensor(Formula l, Formula r) { return binary(FormulaKind::Tensor, std::move(l), std::move(r)); }
  static Formula with(Formula l, Formula r) { return binary(FormulaKind::With, std::move(l), std::move(r)); }
  static Formula plus(Formula l, Formula r) { return binary(FormulaKind::Plus, std::move(l), std::move(r)); }
  static Formula bang(Formula f) {
    std::size_t d = f.degree() + 1;
    return Formula(std::make_shared<const Node>(
        Node{FormulaKind::Bang, AtomId(), std::move(f.node_), {}, d}));
  }

  FormulaKind kind() const { return node_->kind; }
  bool is_atom() const { return kind() == FormulaKind::Atom; }
  bool is_bang() const { return kind() == FormulaKind::Bang; }
  bool is_binary() const {
    auto k = kind();
    return k == FormulaKind::Lolli || k == FormulaKind::Tensor || k == FormulaKind::With ||
           k == FormulaKind::Plus;
  }
  const AtomId& atom_id() const { return node_->atom; }
  Formula left() const { return Formula(node_->left); }
  Formula right() const { return Formula(node_->right); }
  // For Bang, the child; for binary kinds, the left operand.
  Formula child() const { return Formula(node_->left); }

  // Atoms have degree 1, units 2, binary connectives deg(l)+deg(r)+1,
  // bang deg(child)+1.
  std::size_t degree() const { return node_->degree; }

  friend bool operator==(const Formula& a, const Formula& b) {
    if (a.node_ == b.node_) return true;
    return compare(a, b) == std::strong_ordering::equal;
  }
  friend std::strong_ordering operator<=>(const Formula& a, const Formula& b) {
    return compare(a, b);
  }

  std::string text() const { return render(0); }

 private:
  struct Node {
    FormulaKind kind;
    AtomId atom;
    std::shared_ptr<const Node> left;
    std::shared_ptr<const Node> right;
    std::size_t degree;
  };

  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static Formula nullary(FormulaKind k) {
    return Formula(std::make_shared<const Node>(Node{k, AtomId(), {}, {}, 2}));
  }
  static Formula binary(FormulaKind k, Formula l, Formula r) {
    std::size_t d = l.degree() + r.degree() + 1;
    return Formula(std::make_shared<const Node>(
        Node{k, AtomId(), std::move(l.node_), std::move(r.node_), d}));
  }

  static std::strong_ordering compare(const Formula& a, const Formula& b) {
    if (a.node_ == b.node_) return std::strong_ordering::equal;
    if (auto c = a.kind() <=> b.kind(); c != 0) return c;
    switch (a.kind()) {
      case FormulaKind::Atom:
        return a.atom_id() <=> b.atom_id();
      case FormulaKind::Top:
      case FormulaKind::Zero:
      case FormulaKind::One:
        return std::strong_ordering::equal;
      case FormulaKind::Bang:
        return compare(a.child(), b.child());
      default:
        if (auto c = compare(a.left(), b.left()); c != 0) return c;
        return compare(a.right(), b.right());
    }
  }

  // Precedence levels: -o = 1, + = 2, & = 3, * = 4, ! = 5.
  static int prec(FormulaKind k) {
    switch (k) {
      case FormulaKind::Lolli: return 1;
      case FormulaKind::Plus: return 2;
      case FormulaKind::With: return 3;
      case FormulaKind::Tensor: return 4;
      case FormulaKind::Bang: return 5;
      default: return 6;
    }
  }

  std::string render(int min_prec) const {
    switch (kind()) {
      case FormulaKind::Atom: return atom_id().text();
      case FormulaKind::Top: return "top";
      case FormulaKind::Zero: return "0";
      case FormulaKind::One: return "1";
      case FormulaKind::Bang: return wrap(min_prec, "!" + child().render(prec(FormulaKind::Bang)));
      default: break;
    }
    int p = prec(kind());
    const char* op = kind() == FormulaKind::Lolli   ? " -o "
                     : kind() == FormulaKind::Tensor ? " * "
                     : kind() == FormulaKind::With   ? " & "
                                                     : " + ";
    // -o is right-associative, the rest left-associative.
    std::string s = kind() == FormulaKind::Lolli
                        ? left().render(p + 1) + op + right().render(p)
                        : left().render(p) + op + right().render(p + 1);
    return p < min_prec ? "(" + s + ")" : s;
  }
  static std::string wrap(int min_prec, std::string s) {
    return prec(FormulaKind::Bang) < min_prec ? "(" + std::move(s) + ")" : s;
  }

  std::shared_ptr<const Node> node_;
};

// A single-conclusion sequent (Gamma : phi); the context is a multiset.
struct Sequent {
  Multiset<Formula> context;
  Formula conclusion;

  friend bool operator==(const Sequent& a, const Sequent& b) {
    return a.context == b.context && a.conclusion == b.conclusion;
  }
  friend auto operator<=>(const Sequent& a, const Sequent& b) {
    if (auto c = a.context <=> b.context; c != 0) return c;
    return a.conclusion <=> b.conclusion;
  }

  std::string text() const {
    std::string s;
    bool first = true;
    for (const Formula& f : context.expand()) {
      if (!first) s += ", ";
      s += f.text();
      first = false;
    }
    if (!s.empty()) s += " ";
    return s + "|- " + conclusion.text();
  }
};

// Splits a context into the occurrences with a top-level bang and the rest;
// bangPart . rest = input (multiplicities preserved).
inline std::pair<Multiset<Formula>, Multiset<Formula>> split_bang_context(
    const Multiset<Formula>& ctx) {
  Multiset<Formula> bangs, rest;
  for (const auto& [f, c] : ctx.entries()) (f.is_bang() ? bangs : rest).insert(f, c);
  return {bangs, rest};
}

}  // namespace illbes

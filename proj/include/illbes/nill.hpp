#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "illbes/errors.hpp"
#include "illbes/formula.hpp"

namespace illbes {

// Rules of the natural deduction system in sequent style. TopI, ZeroE and
// Prom are n-indexed families (n >= 0, read off the premise count).
enum class NILLRule : unsigned char {
  Ax, LolliI, LolliE, TensorI, TensorE, OneI, OneE, WithI, WithE1, WithE2,
  PlusI1, PlusI2, PlusE, TopI, ZeroE, Prom, Der, Wk, Ctr
};

inline const char* nill_rule_name(NILLRule r) {
  switch (r) {
    case NILLRule::Ax: return "ax";
    case NILLRule::LolliI: return "lolli_i";
    case NILLRule::LolliE: return "lolli_e";
    case NILLRule::TensorI: return "tensor_i";
    case NILLRule::TensorE: return "tensor_e";
    case NILLRule::OneI: return "one_i";
    case NILLRule::OneE: return "one_e";
    case NILLRule::WithI: return "with_i";
    case NILLRule::WithE1: return "with_e1";
    case NILLRule::WithE2: return "with_e2";
    case NILLRule::PlusI1: return "plus_i1";
    case NILLRule::PlusI2: return "plus_i2";
    case NILLRule::PlusE: return "plus_e";
    case NILLRule::TopI: return "top_i";
    case NILLRule::ZeroE: return "zero_e";
    case NILLRule::Prom: return "prom";
    case NILLRule::Der: return "der";
    case NILLRule::Wk: return "wk";
    case NILLRule::Ctr: return "ctr";
  }
  return "?";
}

// A derivation tree over the sequent-style rules. `params` holds the
// instantiating formulas a node cannot recover from its premises:
//   Ax      [phi]        the axiom formula
//   LolliI  [phi]        the discharged antecedent
//   PlusI1  [psi]        the absent right disjunct
//   PlusI2  [phi]        the absent left disjunct
//   ZeroE   [chi]        the concluded formula
// All other rules take no parameters.
class NILLDerivation {
 public:
  NILLDerivation() : NILLDerivation(NILLRule::Ax, {Formula::one()}, {}) {}
  NILLDerivation(NILLRule rule, std::vector<Formula> params,
                 std::vector<NILLDerivation> premises)
      : node_(std::make_shared<const Node>(
            Node{rule, std::move(params), std::move(premises)})) {}

  NILLRule rule() const { return node_->rule; }
  const std::vector<Formula>& params() const { return node_->params; }
  const std::vector<NILLDerivation>& premises() const { return node_->premises; }

  std::size_t depth() const {
    std::size_t d = 0;
    for (const auto& p : node_->premises) d = std::max(d, p.depth());
    return d + 1;
  }

 private:
  struct Node {
    NILLRule rule;
    std::vector<Formula> params;
    std::vector<NILLDerivation> premises;
  };
  std::shared_ptr<const Node> node_;
};

namespace nill {

inline NILLDerivation ax(Formula phi) { return {NILLRule::Ax, {std::move(phi)}, {}}; }
inline NILLDerivation lolli_i(Formula phi, NILLDerivation prem) {
  return {NILLRule::LolliI, {std::move(phi)}, {std::move(prem)}};
}
inline NILLDerivation lolli_e(NILLDerivation fn, NILLDerivation arg) {
  return {NILLRule::LolliE, {}, {std::move(fn), std::move(arg)}};
}
inline NILLDerivation tensor_i(NILLDerivation l, NILLDerivation r) {
  return {NILLRule::TensorI, {}, {std::move(l), std::move(r)}};
}
inline NILLDerivation tensor_e(NILLDerivation major, NILLDerivation minor) {
  return {NILLRule::TensorE, {}, {std::move(major), std::move(minor)}};
}
inline NILLDerivation one_i() { return {NILLRule::OneI, {}, {}}; }
inline NILLDerivation one_e(NILLDerivation major, NILLDerivation minor) {
  return {NILLRule::OneE, {}, {std::move(major), std::move(minor)}};
}
inline NILLDerivation with_i(NILLDerivation l, NILLDerivation r) {
  return {NILLRule::WithI, {}, {std::move(l), std::move(r)}};
}
inline NILLDerivation with_e1(NILLDerivation prem) { return {NILLRule::WithE1, {}, {std::move(prem)}}; }
inline NILLDerivation with_e2(NILLDerivation prem) { return {NILLRule::WithE2, {}, {std::move(prem)}}; }
inline NILLDerivation plus_i1(Formula psi, NILLDerivation prem) {
  return {NILLRule::PlusI1, {std::move(psi)}, {std::move(prem)}};
}
inline NILLDerivation plus_i2(Formula phi, NILLDerivation prem) {
  return {NILLRule::PlusI2, {std::move(phi)}, {std::move(prem)}};
}
inline NILLDerivation plus_e(NILLDerivation major, NILLDerivation l, NILLDerivation r) {
  return {NILLRule::PlusE, {}, {std::move(major), std::move(l), std::move(r)}};
}
inline NILLDerivation top_i(std::vector<NILLDerivation> premises) {
  return {NILLRule::TopI, {}, std::move(premises)};
}
inline NILLDerivation zero_e(Formula chi, std::vector<NILLDerivation> premises) {
  return {NILLRule::ZeroE, {std::move(chi)}, std::move(premises)};
}
inline NILLDerivation prom(std::vector<NILLDerivation> premises) {
  return {NILLRule::Prom, {}, std::move(premises)};
}
inline NILLDerivation der(NILLDerivation major, NILLDerivation minor) {
  return {NILLRule::Der, {}, {std::move(major), std::move(minor)}};
}
inline NILLDerivation wk(NILLDerivation major, NILLDerivation minor) {
  return {NILLRule::Wk, {}, {std::move(major), std::move(minor)}};
}
inline NILLDerivation ctr(NILLDerivation major, NILLDerivation minor) {
  return {NILLRule::Ctr, {}, {std::move(major), std::move(minor)}};
}

}  // namespace nill

namespace detail {

[[noreturn]] inline void check_fail(const char* rule, const std::string& what) {
  throw CheckError(std::string(rule) + ": " + what);
}

inline void need_params(const NILLDerivation& d, std::size_t n) {
  if (d.params().size() != n)
    check_fail(nill_rule_name(d.rule()),
               "expected " + std::to_string(n) + " parameter(s), got " +
                   std::to_string(d.params().size()));
}

inline void need_premises(const NILLDerivation& d, std::size_t n) {
  if (d.premises().size() != n)
    check_fail(nill_rule_name(d.rule()),
               "expected " + std::to_string(n) + " premise(s), got " +
                   std::to_string(d.premises().size()));
}

// Removes `occ` from `ctx` or reports which rule/side condition failed.
inline Multiset<Formula> discharge(const char* rule, const Multiset<Formula>& ctx,
                                   const Formula& occ, std::size_t n = 1) {
  Multiset<Formula> r = ctx;
  for (std::size_t i = 0; i < n; ++i)
    if (!r.erase_one(occ))
      check_fail(rule, "premise context lacks discharged occurrence of " + occ.text());
  return r;
}

}  // namespace detail

// Checks a derivation bottom-up; returns its endsequent or throws CheckError
// naming the offending rule and side condition.
inline Sequent check_nill(const NILLDerivation& d) {
  using detail::check_fail;
  const char* rn = nill_rule_name(d.rule());
  std::vector<Sequent> prem;
  prem.reserve(d.premises().size());
  for (const auto& p : d.premises()) prem.push_back(check_nill(p));

  switch (d.rule()) {
    case NILLRule::Ax: {
      detail::need_params(d, 1);
      detail::need_premises(d, 0);
      return {Multiset<Formula>::singleton(d.params()[0]), d.params()[0]};
    }
    case NILLRule::LolliI: {
      detail::need_params(d, 1);
      detail::need_premises(d, 1);
      const Formula& phi = d.params()[0];
      Multiset<Formula> ctx = detail::discharge(rn, prem[0].context, phi);
      return {std::move(ctx), Formula::lolli(phi, prem[0].conclusion)};
    }
    case NILLRule::LolliE: {
      detail::need_premises(d, 2);
      if (prem[0].conclusion.kind() != FormulaKind::Lolli)
        check_fail(rn, "major premise must conclude a -o formula");
      if (!(prem[0].conclusion.left() == prem[1].conclusion))
        check_fail(rn, "argument premise mismatch: wanted " + prem[0].conclusion.left().text() +
                           ", got " + prem[1].conclusion.text());
      return {mset_union(prem[0].context, prem[1].context), prem[0].conclusion.right()};
    }
    case NILLRule::TensorI: {
      detail::need_premises(d, 2);
      return {mset_union(prem[0].context, prem[1].context),
              Formula::tensor(prem[0].conclusion, prem[1].conclusion)};
    }
    case NILLRule::TensorE: {
      detail::need_premises(d, 2);
      if (prem[0].conclusion.kind() != FormulaKind::Tensor)
        check_fail(rn, "major premise must conclude a * formula");
      Multiset<Formula> minor = detail::discharge(rn, prem[1].context, prem[0].conclusion.left());
      minor = detail::discharge(rn, minor, prem[0].conclusion.right());
      return {mset_union(prem[0].context, minor), prem[1].conclusion};
    }
    case NILLRule::OneI: {
      detail::need_premises(d, 0);
      return {{}, Formula::one()};
    }
    case NILLRule::OneE: {
      detail::need_premises(d, 2);
      if (prem[0].conclusion.kind() != FormulaKind::One)
        check_fail(rn, "major premise must conclude 1");
      return {mset_union(prem[0].context, prem[1].context), prem[1].conclusion};
    }
    case NILLRule::WithI: {
      detail::need_premises(d, 2);
      if (!(prem[0].context == prem[1].context))
        check_fail(rn, "premises must share one context");
      return {prem[0].context, Formula::with(prem[0].conclusion, prem[1].conclusion)};
    }
    case NILLRule::WithE1:
    case NILLRule::WithE2: {
      detail::need_premises(d, 1);
      if (prem[0].conclusion.kind() != FormulaKind::With)
        check_fail(rn, "premise must conclude a & formula");
      return {prem[0].context, d.rule() == NILLRule::WithE1 ? prem[0].conclusion.left()
                                                            : prem[0].conclusion.right()};
    }
    case NILLRule::PlusI1: {
      detail::need_params(d, 1);
      detail::need_premises(d, 1);
      return {prem[0].context, Formula::plus(prem[0].conclusion, d.params()[0])};
    }
    case NILLRule::PlusI2: {
      detail::need_params(d, 1);
      detail::need_premises(d, 1);
      return {prem[0].context, Formula::plus(d.params()[0], prem[0].conclusion)};
    }
    case NILLRule::PlusE: {
      detail::need_premises(d, 3);
      if (prem[0].conclusion.kind() != FormulaKind::Plus)
        check_fail(rn, "major premise must conclude a + formula");
      Multiset<Formula> dl = detail::discharge(rn, prem[1].context, prem[0].conclusion.left());
      Multiset<Formula> dr = detail::discharge(rn, prem[2].context, prem[0].conclusion.right());
      if (!(dl == dr)) check_fail(rn, "minor premises must share one residual context");
      if (!(prem[1].conclusion == prem[2].conclusion))
        check_fail(rn, "minor premises must share one conclusion");
      return {mset_union(prem[0].context, dl), prem[1].conclusion};
    }
    case NILLRule::TopI: {
      Multiset<Formula> ctx;
      for (const Sequent& s : prem) ctx = mset_union(ctx, s.context);
      return {std::move(ctx), Formula::top()};
    }
    case NILLRule::ZeroE: {
      detail::need_params(d, 1);
      if (prem.empty()) check_fail(rn, "needs the 0 premise");
      if (prem.back().conclusion.kind() != FormulaKind::Zero)
        check_fail(rn, "last premise must conclude 0");
      Multiset<Formula> ctx;
      for (const Sequent& s : prem) ctx = mset_union(ctx, s.context);
      return {std::move(ctx), d.params()[0]};
    }
    case NILLRule::Prom: {
      if (prem.empty()) check_fail(rn, "needs the closed premise");
      Multiset<Formula> bangs;
      Multiset<Formula> ctx;
      for (std::size_t i = 0; i + 1 < prem.size(); ++i) {
        if (!prem[i].conclusion.is_bang())
          check_fail(rn, "premise " + std::to_string(i + 1) + " must conclude a ! formula");
        bangs.insert(prem[i].conclusion);
        ctx = mset_union(ctx, prem[i].context);
      }
      if (!(prem.back().context == bangs))
        check_fail(rn, "closed premise context must be exactly the promoted ! formulas");
      return {std::move(ctx), Formula::bang(prem.back().conclusion)};
    }
    case NILLRule::Der: {
      detail::need_premises(d, 2);
      if (!prem[0].conclusion.is_bang()) check_fail(rn, "major premise must conclude a ! formula");
      Multiset<Formula> minor =
          detail::discharge(rn, prem[1].context, prem[0].conclusion.child());
      return {mset_union(prem[0].context, minor), prem[1].conclusion};
    }
    case NILLRule::Wk: {
      detail::need_premises(d, 2);
      if (!prem[0].conclusion.is_bang()) check_fail(rn, "major premise must conclude a ! formula");
      return {mset_union(prem[0].context, prem[1].context), prem[1].conclusion};
    }
    case NILLRule::Ctr: {
      detail::need_premises(d, 2);
      if (!prem[0].conclusion.is_bang()) check_fail(rn, "major premise must conclude a ! formula");
      Multiset<Formula> minor =
          detail::discharge(rn, prem[1].context, prem[0].conclusion, 2);
      return {mset_union(prem[0].context, minor), prem[1].conclusion};
    }
  }
  check_fail(rn, "unknown rule");
}

}  // namespace illbes

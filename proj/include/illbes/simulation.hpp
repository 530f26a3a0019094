#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "illbes/atomic.hpp"
#include "illbes/base.hpp"
#include "illbes/errors.hpp"
#include "illbes/formula.hpp"
#include "illbes/nill.hpp"

namespace illbes {

// Least subformula-closed set containing the context and conclusion.
inline std::set<Formula> subformula_closure(const Sequent& s) {
  std::set<Formula> out;
  auto add = [&](auto&& self, const Formula& f) -> void {
    if (!out.insert(f).second) return;
    switch (f.kind()) {
      case FormulaKind::Bang:
        self(self, f.child());
        break;
      case FormulaKind::Lolli:
      case FormulaKind::Tensor:
      case FormulaKind::With:
      case FormulaKind::Plus:
        self(self, f.left());
        self(self, f.right());
        break;
      default:
        break;
    }
  };
  for (const auto& [f, c] : s.context.entries()) add(add, f);
  add(add, s.conclusion);
  return out;
}

// The injection from a subformula-closed set into atoms: the identity on
// atoms, the fixed mirrors for the units, and fresh atoms "#k" (indexed by
// the canonical order of the domain) elsewhere. `deflatten` is its left
// inverse, extended as the identity on atoms outside the image.
class FlatteningMap {
 public:
  FlatteningMap() = default;

  static FlatteningMap over(const std::set<Formula>& xi) {
    FlatteningMap m;
    m.domain_ = xi;
    std::size_t next = 0;
    for (const Formula& f : xi) {
      AtomId a;
      switch (f.kind()) {
        case FormulaKind::Atom: a = f.atom_id(); break;
        case FormulaKind::Top: a = AtomId::top_mirror(); break;
        case FormulaKind::One: a = AtomId::one_mirror(); break;
        case FormulaKind::Zero: a = AtomId::zero_mirror(); break;
        default: a = AtomId::fresh(next++); break;
      }
      m.forward_.emplace(f, a);
      m.inverse_.emplace(a, f);
    }
    return m;
  }

  const std::set<Formula>& domain() const { return domain_; }

  AtomId flatten(const Formula& f) const {
    auto it = forward_.find(f);
    if (it == forward_.end())
      throw CheckError("formula " + f.text() + " outside the flattening domain");
    return it->second;
  }

  Formula deflatten(const AtomId& a) const {
    auto it = inverse_.find(a);
    if (it != inverse_.end()) return it->second;
    if (a.is_flattened())
      throw CheckError("flattened atom " + a.text() + " outside the image");
    return Formula::atom(a);
  }

  Multiset<AtomId> flatten(const Multiset<Formula>& gamma) const {
    Multiset<AtomId> out;
    for (const auto& [f, c] : gamma.entries()) out.insert(flatten(f), c);
    return out;
  }
  Multiset<Formula> deflatten(const Multiset<AtomId>& l) const {
    Multiset<Formula> out;
    for (const auto& [a, c] : l.entries()) out.insert(deflatten(a), c);
    return out;
  }

  // The local atom alphabet: the image of the domain.
  std::vector<AtomId> alphabet() const {
    std::vector<AtomId> out;
    for (const auto& [a, f] : inverse_) out.push_back(a);
    return out;
  }

 private:
  std::set<Formula> domain_;
  std::map<Formula, AtomId> forward_;
  std::map<AtomId, Formula> inverse_;
};

// Which flattened rule an atomic rule of the simulation base instantiates.
enum class SimRuleKind : unsigned char {
  LolliI, LolliE, TensorI, TensorE, OneI, OneE, WithI, WithE1, WithE2,
  PlusI1, PlusI2, PlusE, Prom, Der, Wk, Ctr
};

struct SimRuleInfo {
  SimRuleKind kind;
  Formula source;  // the domain formula whose top connective produced the rule
  Formula aux;     // Der: the concluded domain formula psi
  AtomId target;   // E-style rules: the schematic conclusion atom p
};

// The simulation base for a subformula-closed set: per element, the
// flattened instances of the natural deduction rules, with the n-indexed
// families for the top and zero machinery represented lazily on the Base.
struct SimulationBase {
  Base base;
  FlatteningMap map;
  std::map<AtomicRule, SimRuleInfo> provenance;
  std::vector<AtomId> alphabet;
};

inline SimulationBase build_simulation_base(const std::set<Formula>& xi, const FlatteningMap& m) {
  SimulationBase nb;
  nb.map = m;
  nb.alphabet = m.alphabet();
  auto add = [&](AtomicRule r, SimRuleKind kind, const Formula& source, Formula aux,
                 AtomId target) {
    nb.provenance.emplace(r, SimRuleInfo{kind, source, std::move(aux), std::move(target)});
    nb.base.rules.insert(std::move(r));
  };
  auto box1 = [](AtomicSequent s) { return AdditiveBox{{std::move(s)}}; };
  auto closed = [&](const Formula& f) { return AtomicSequent{{}, m.flatten(f)}; };

  for (const Formula& f : xi) {
    AtomId head = m.flatten(f);
    switch (f.kind()) {
      case FormulaKind::Atom:
        break;
      case FormulaKind::Top:
        nb.base.top_families.insert(head);
        break;
      case FormulaKind::Zero:
        nb.base.zero_families.insert(head);
        break;
      case FormulaKind::One: {
        add(AtomicRule({}, {}, head), SimRuleKind::OneI, f, f, head);
        for (const AtomId& p : nb.alphabet)
          add(AtomicRule({box1(closed(f)), box1(AtomicSequent{{}, p})}, {}, p), SimRuleKind::OneE,
              f, f, p);
        break;
      }
      case FormulaKind::Lolli: {
        AtomId l = m.flatten(f.left()), r = m.flatten(f.right());
        add(AtomicRule({box1(AtomicSequent{Multiset<AtomId>::singleton(l), r})}, {}, head),
            SimRuleKind::LolliI, f, f, head);
        add(AtomicRule({box1(closed(f)), box1(AtomicSequent{{}, l})}, {}, r), SimRuleKind::LolliE,
            f, f, r);
        break;
      }
      case FormulaKind::Tensor: {
        AtomId l = m.flatten(f.left()), r = m.flatten(f.right());
        add(AtomicRule({box1(AtomicSequent{{}, l}), box1(AtomicSequent{{}, r})}, {}, head),
            SimRuleKind::TensorI, f, f, head);
        for (const AtomId& p : nb.alphabet) {
          Multiset<AtomId> both;
          both.insert(l);
          both.insert(r);
          add(AtomicRule({box1(closed(f)), box1(AtomicSequent{std::move(both), p})}, {}, p),
              SimRuleKind::TensorE, f, f, p);
        }
        break;
      }
      case FormulaKind::With: {
        AtomId l = m.flatten(f.left()), r = m.flatten(f.right());
        add(AtomicRule({AdditiveBox{{AtomicSequent{{}, l}, AtomicSequent{{}, r}}}}, {}, head),
            SimRuleKind::WithI, f, f, head);
        add(AtomicRule({box1(closed(f))}, {}, l), SimRuleKind::WithE1, f, f, l);
        add(AtomicRule({box1(closed(f))}, {}, r), SimRuleKind::WithE2, f, f, r);
        break;
      }
      case FormulaKind::Plus: {
        AtomId l = m.flatten(f.left()), r = m.flatten(f.right());
        add(AtomicRule({box1(AtomicSequent{{}, l})}, {}, head), SimRuleKind::PlusI1, f, f, head);
        add(AtomicRule({box1(AtomicSequent{{}, r})}, {}, head), SimRuleKind::PlusI2, f, f, head);
        for (const AtomId& p : nb.alphabet)
          add(AtomicRule({box1(closed(f)),
                          AdditiveBox{{AtomicSequent{Multiset<AtomId>::singleton(l), p},
                                       AtomicSequent{Multiset<AtomId>::singleton(r), p}}}},
                         {}, p),
              SimRuleKind::PlusE, f, f, p);
        break;
      }
      case FormulaKind::Bang: {
        AtomId body = m.flatten(f.child());
        add(AtomicRule({}, AdditiveBox{{AtomicSequent{{}, body}}}, head), SimRuleKind::Prom, f, f,
            head);
        for (const Formula& psi : xi)
          add(AtomicRule({box1(closed(f)),
                          box1(AtomicSequent{Multiset<AtomId>::singleton(body), m.flatten(psi)})},
                         {}, m.flatten(psi)),
              SimRuleKind::Der, f, psi, m.flatten(psi));
        for (const AtomId& p : nb.alphabet) {
          add(AtomicRule({box1(closed(f)), box1(AtomicSequent{{}, p})}, {}, p), SimRuleKind::Wk,
              f, f, p);
          Multiset<AtomId> two;
          two.insert(head, 2);
          add(AtomicRule({box1(closed(f)), box1(AtomicSequent{std::move(two), p})}, {}, p),
              SimRuleKind::Ctr, f, f, p);
        }
        break;
      }
    }
  }
  return nb;
}

inline SimulationBase simulation_base_for(const Sequent& s) {
  std::set<Formula> xi = subformula_closure(s);
  return build_simulation_base(xi, FlatteningMap::over(xi));
}

namespace detail {

// Match `expected` boxes (in construction order) to indices of `rule.boxes`,
// consuming duplicates left to right.
inline std::vector<std::size_t> locate_boxes(const AtomicRule& rule,
                                             const std::vector<AdditiveBox>& expected) {
  std::vector<bool> used(rule.boxes.size(), false);
  std::vector<std::size_t> idx;
  for (const AdditiveBox& want : expected) {
    bool found = false;
    for (std::size_t i = 0; i < rule.boxes.size() && !found; ++i) {
      if (used[i] || !(rule.boxes[i] == want)) continue;
      used[i] = true;
      idx.push_back(i);
      found = true;
    }
    if (!found) throw CheckError("simulation rule box shape mismatch");
  }
  return idx;
}

inline std::size_t locate_sequent(const AdditiveBox& box, const AtomicSequent& want,
                                  std::vector<bool>& used) {
  for (std::size_t j = 0; j < box.sequents.size(); ++j)
    if (!used[j] && box.sequents[j] == want) {
      used[j] = true;
      return j;
    }
  throw CheckError("simulation rule sequent shape mismatch");
}

}  // namespace detail

// De-flattens an atomic derivation over the simulation base into a kernel
// derivation with endsequent (deflatten(L) : deflatten(p)). Persistent atoms
// of the simulation base de-flatten to !-formulas, so a non-promotion App
// carrying persistent slots becomes the core rule under a chain of Wk steps,
// while a promotion App consumes its persistent multiset as the premises of
// the n-ary promotion rule.
inline NILLDerivation deflat_derivation(const SimulationBase& nb, const AtomicDerivation& d) {
  const FlatteningMap& m = nb.map;
  if (d.is_ref()) return nill::ax(m.deflatten(d.ref_atom()));

  const AtomicRule& rule = d.rule();
  auto sub = [&](std::size_t box, std::size_t seq) {
    return deflat_derivation(nb, d.box_subs()[box][seq]);
  };

  NILLDerivation core;
  bool is_prom = false;

  if (matches_top_family(nb.base, rule) && !nb.provenance.contains(rule)) {
    std::vector<NILLDerivation> subs;
    for (std::size_t i = 0; i < rule.boxes.size(); ++i) subs.push_back(sub(i, 0));
    core = nill::top_i(std::move(subs));
  } else if (matches_zero_family(nb.base, rule) && !nb.provenance.contains(rule)) {
    // One box concluding the zero mirror becomes the 0 premise; the rest are
    // the side premises.
    std::size_t zero_idx = rule.boxes.size();
    for (std::size_t i = rule.boxes.size(); i-- > 0;)
      if (nb.base.zero_families.contains(rule.boxes[i].sequents[0].conclusion)) {
        zero_idx = i;
        break;
      }
    std::vector<NILLDerivation> subs;
    for (std::size_t i = 0; i < rule.boxes.size(); ++i)
      if (i != zero_idx) subs.push_back(sub(i, 0));
    subs.push_back(sub(zero_idx, 0));
    core = nill::zero_e(m.deflatten(rule.conclusion), std::move(subs));
  } else {
    auto pit = nb.provenance.find(rule);
    if (pit == nb.provenance.end())
      throw CheckError("derivation uses a rule outside the simulation base");
    const SimRuleInfo& info = pit->second;
    const Formula& src = info.source;
    auto closed_box = [&](const Formula& f) {
      return AdditiveBox{{AtomicSequent{{}, m.flatten(f)}}};
    };

    switch (info.kind) {
      case SimRuleKind::Prom: {
        is_prom = true;
        std::vector<NILLDerivation> subs;
        for (std::size_t i = 0; i < d.d_atoms().size(); ++i)
          subs.push_back(deflat_derivation(nb, d.d_subs()[i]));
        if (d.modal_subs().size() != 1) throw CheckError("promotion expects one modal premise");
        subs.push_back(deflat_derivation(nb, d.modal_subs()[0]));
        core = nill::prom(std::move(subs));
        break;
      }
      case SimRuleKind::LolliI:
        core = nill::lolli_i(src.left(), sub(0, 0));
        break;
      case SimRuleKind::LolliE: {
        auto idx = detail::locate_boxes(
            rule, {closed_box(src), AdditiveBox{{AtomicSequent{{}, m.flatten(src.left())}}}});
        core = nill::lolli_e(sub(idx[0], 0), sub(idx[1], 0));
        break;
      }
      case SimRuleKind::TensorI: {
        auto idx = detail::locate_boxes(rule,
                                        {AdditiveBox{{AtomicSequent{{}, m.flatten(src.left())}}},
                                         AdditiveBox{{AtomicSequent{{}, m.flatten(src.right())}}}});
        core = nill::tensor_i(sub(idx[0], 0), sub(idx[1], 0));
        break;
      }
      case SimRuleKind::TensorE: {
        Multiset<AtomId> both;
        both.insert(m.flatten(src.left()));
        both.insert(m.flatten(src.right()));
        auto idx = detail::locate_boxes(
            rule, {closed_box(src), AdditiveBox{{AtomicSequent{both, info.target}}}});
        core = nill::tensor_e(sub(idx[0], 0), sub(idx[1], 0));
        break;
      }
      case SimRuleKind::OneI:
        core = nill::one_i();
        break;
      case SimRuleKind::OneE: {
        auto idx = detail::locate_boxes(
            rule, {closed_box(src), AdditiveBox{{AtomicSequent{{}, info.target}}}});
        core = nill::one_e(sub(idx[0], 0), sub(idx[1], 0));
        break;
      }
      case SimRuleKind::WithI: {
        const AdditiveBox& box = rule.boxes[0];
        std::vector<bool> used(box.sequents.size(), false);
        std::size_t jl =
            detail::locate_sequent(box, AtomicSequent{{}, m.flatten(src.left())}, used);
        std::size_t jr =
            detail::locate_sequent(box, AtomicSequent{{}, m.flatten(src.right())}, used);
        core = nill::with_i(sub(0, jl), sub(0, jr));
        break;
      }
      case SimRuleKind::WithE1:
        core = nill::with_e1(sub(0, 0));
        break;
      case SimRuleKind::WithE2:
        core = nill::with_e2(sub(0, 0));
        break;
      case SimRuleKind::PlusI1:
        core = nill::plus_i1(src.right(), sub(0, 0));
        break;
      case SimRuleKind::PlusI2:
        core = nill::plus_i2(src.left(), sub(0, 0));
        break;
      case SimRuleKind::PlusE: {
        AtomicSequent sl{Multiset<AtomId>::singleton(m.flatten(src.left())), info.target};
        AtomicSequent sr{Multiset<AtomId>::singleton(m.flatten(src.right())), info.target};
        auto idx = detail::locate_boxes(rule, {closed_box(src), AdditiveBox{{sl, sr}}});
        const AdditiveBox& minor = rule.boxes[idx[1]];
        std::vector<bool> used(minor.sequents.size(), false);
        std::size_t jl = detail::locate_sequent(minor, sl, used);
        std::size_t jr = detail::locate_sequent(minor, sr, used);
        core = nill::plus_e(sub(idx[0], 0), sub(idx[1], jl), sub(idx[1], jr));
        break;
      }
      case SimRuleKind::Der: {
        AtomicSequent minor{Multiset<AtomId>::singleton(m.flatten(src.child())),
                            m.flatten(info.aux)};
        auto idx = detail::locate_boxes(rule, {closed_box(src), AdditiveBox{{minor}}});
        core = nill::der(sub(idx[0], 0), sub(idx[1], 0));
        break;
      }
      case SimRuleKind::Wk: {
        auto idx = detail::locate_boxes(
            rule, {closed_box(src), AdditiveBox{{AtomicSequent{{}, info.target}}}});
        core = nill::wk(sub(idx[0], 0), sub(idx[1], 0));
        break;
      }
      case SimRuleKind::Ctr: {
        Multiset<AtomId> two;
        two.insert(m.flatten(src), 2);
        auto idx = detail::locate_boxes(
            rule, {closed_box(src), AdditiveBox{{AtomicSequent{two, info.target}}}});
        core = nill::ctr(sub(idx[0], 0), sub(idx[1], 0));
        break;
      }
    }
  }

  if (!is_prom)
    for (std::size_t i = 0; i < d.d_atoms().size(); ++i)
      core = nill::wk(deflat_derivation(nb, d.d_subs()[i]), std::move(core));
  return core;
}

// The completeness pipeline for one sequent: closure, flattening, simulation
// base, atomic search, de-flattening, kernel check. nullopt is bound-relative.
inline std::optional<NILLDerivation> check_validity(const Sequent& s, std::size_t depth_bound) {
  SimulationBase nb = simulation_base_for(s);
  Multiset<AtomId> ctx = nb.map.flatten(s.context);
  AtomId goal = nb.map.flatten(s.conclusion);
  std::optional<AtomicDerivation> atomic = derive(nb.base, ctx, goal, depth_bound);
  if (!atomic) return std::nullopt;
  NILLDerivation nd = deflat_derivation(nb, *atomic);
  Sequent end = check_nill(nd);
  if (!(end == s))
    throw CheckError("internal: de-flattened proof concludes " + end.text() + ", wanted " +
                     s.text());
  return nd;
}

// --- the structural-cut transformer ----------------------------------------

namespace detail {

inline AtomicRule sim_rule(const SimulationBase& nb, SimRuleKind kind, const Formula& source,
                           const Formula& aux, const AtomId& target) {
  for (const auto& [rule, info] : nb.provenance)
    if (info.kind == kind && info.source == source && info.aux == aux && info.target == target)
      return rule;
  throw CheckError("required simulation rule instance is missing");
}

// {m(!phi)} |- m(phi) via the dereliction instance.
inline AtomicDerivation derelict_self(const SimulationBase& nb, const Formula& bang_phi) {
  AtomId head = nb.map.flatten(bang_phi);
  AtomId body = nb.map.flatten(bang_phi.child());
  AtomicRule rule = sim_rule(nb, SimRuleKind::Der, bang_phi, bang_phi.child(), body);
  auto idx = locate_boxes(
      rule, {AdditiveBox{{AtomicSequent{{}, head}}},
             AdditiveBox{{AtomicSequent{Multiset<AtomId>::singleton(body), body}}}});
  std::vector<Multiset<AtomId>> ctxs(2);
  std::vector<std::vector<AtomicDerivation>> subs(2);
  ctxs[idx[0]] = Multiset<AtomId>::singleton(head);
  subs[idx[0]] = {AtomicDerivation(head)};
  ctxs[idx[1]] = {};
  subs[idx[1]] = {AtomicDerivation(body)};
  return AtomicDerivation(rule, std::move(ctxs), std::move(subs), {}, {}, {}, {});
}

// Wk instance: from (ctx1 |- m(!chi)) and (ctx2 |- p) conclude ctx1+ctx2 |- p.
inline AtomicDerivation weaken_in(const SimulationBase& nb, const Formula& bang_chi,
                                  AtomicDerivation major, AtomicDerivation minor,
                                  const AtomId& p) {
  AtomId head = nb.map.flatten(bang_chi);
  AtomicRule rule = sim_rule(nb, SimRuleKind::Wk, bang_chi, bang_chi, p);
  auto idx = locate_boxes(rule, {AdditiveBox{{AtomicSequent{{}, head}}},
                                 AdditiveBox{{AtomicSequent{{}, p}}}});
  std::vector<Multiset<AtomId>> ctxs(2);
  std::vector<std::vector<AtomicDerivation>> subs(2);
  ctxs[idx[0]] = major.endsequent().context;
  subs[idx[0]] = {std::move(major)};
  ctxs[idx[1]] = minor.endsequent().context;
  subs[idx[1]] = {std::move(minor)};
  return AtomicDerivation(rule, std::move(ctxs), std::move(subs), {}, {}, {}, {});
}

// Ctr instance: contracts two occurrences of m(!phi) in `body`'s context.
inline AtomicDerivation contract_once(const SimulationBase& nb, const Formula& bang_phi,
                                      AtomicDerivation body, const AtomId& p) {
  AtomId head = nb.map.flatten(bang_phi);
  Multiset<AtomId> two;
  two.insert(head, 2);
  AtomicRule rule = sim_rule(nb, SimRuleKind::Ctr, bang_phi, bang_phi, p);
  auto idx = locate_boxes(rule, {AdditiveBox{{AtomicSequent{{}, head}}},
                                 AdditiveBox{{AtomicSequent{two, p}}}});
  Multiset<AtomId> residual = body.endsequent().context.difference(two);
  std::vector<Multiset<AtomId>> ctxs(2);
  std::vector<std::vector<AtomicDerivation>> subs(2);
  ctxs[idx[0]] = Multiset<AtomId>::singleton(head);
  subs[idx[0]] = {AtomicDerivation(head)};
  ctxs[idx[1]] = std::move(residual);
  subs[idx[1]] = {std::move(body)};
  return AtomicDerivation(rule, std::move(ctxs), std::move(subs), {}, {}, {}, {});
}

}  // namespace detail

// Direction (1) => (2) of the structural-cut equivalence: from a derivation
// of m(!phi) + K |-_B p and a closed derivation of m(phi) in a superset C,
// produce K |-_C p. Promotion with an empty persistent multiset turns the
// closed derivation into one of m(!phi), which is then cut in.
inline AtomicDerivation structural_cut_forward(const SimulationBase& nb, const Base& b,
                                               const Formula& bang_phi,
                                               const AtomicDerivation& with_bang, const Base& c,
                                               const AtomicDerivation& closed_phi) {
  if (!bang_phi.is_bang()) throw CheckError("structural cut needs a !-formula");
  AtomId head = nb.map.flatten(bang_phi);
  AtomicRule prom = detail::sim_rule(nb, SimRuleKind::Prom, bang_phi, bang_phi, head);
  AtomicDerivation promoted(prom, {}, {}, {}, {}, {}, {closed_phi});
  check_atomic(c, promoted);
  return cut_compose(b, with_bang, {head}, {promoted}, c);
}

// Direction (2) => (1): the hypothesis-closure data is a derivation of
// K |-_{B u {<0,0,m(phi)>}} p; the transformation threads one assumption of
// m(!phi) through it, replacing uses of the added axiom by dereliction and
// collapsing the copies with contraction.
inline AtomicDerivation structural_cut_backward(const SimulationBase& nb, const Base& b,
                                                const Formula& bang_phi,
                                                const AtomicDerivation& hyp_closure) {
  if (!bang_phi.is_bang()) throw CheckError("structural cut needs a !-formula");
  AtomId head = nb.map.flatten(bang_phi);
  AtomId body = nb.map.flatten(bang_phi.child());
  AtomicRule added({}, {}, body);

  auto transform = [&](auto&& self, const AtomicDerivation& d) -> AtomicDerivation {
    AtomId goal = d.endsequent().conclusion;
    if (d.is_ref()) {
      // Wk the bang atom into the reflexive derivation.
      return detail::weaken_in(nb, bang_phi, AtomicDerivation(head), AtomicDerivation(goal),
                               goal);
    }
    if (d.rule() == added) {
      // Uses of the added axiom: conclude m(phi) from m(!phi) by dereliction,
      // weakening in any persistent slots, then contract.
      AtomicDerivation cur = detail::derelict_self(nb, bang_phi);
      std::size_t copies = 1;
      for (std::size_t i = 0; i < d.d_atoms().size(); ++i) {
        Formula dsrc = nb.map.deflatten(d.d_atoms()[i]);
        if (!dsrc.is_bang())
          throw CheckError("persistent atom outside the simulation image");
        cur = detail::weaken_in(nb, dsrc, self(self, d.d_subs()[i]), std::move(cur), body);
        ++copies;
      }
      for (; copies > 1; --copies) cur = detail::contract_once(nb, bang_phi, std::move(cur), body);
      return cur;
    }

    // A rule of B (or a family instance): push the assumption into every
    // open slot, add one persistent slot deriving m(!phi) reflexively, and
    // contract the accumulated copies afterwards.
    std::size_t copies = 0;
    std::vector<Multiset<AtomId>> box_ctxs = d.box_contexts();
    std::vector<std::vector<AtomicDerivation>> box_subs = d.box_subs();
    for (std::size_t i = 0; i < d.rule().boxes.size(); ++i) {
      if (d.rule().boxes[i].empty()) continue;
      box_ctxs[i].insert(head);
      ++copies;
      for (std::size_t j = 0; j < box_subs[i].size(); ++j)
        box_subs[i][j] = self(self, d.box_subs()[i][j]);
    }
    std::vector<std::pair<AtomId, std::pair<Multiset<AtomId>, AtomicDerivation>>> dslots;
    for (std::size_t i = 0; i < d.d_atoms().size(); ++i) {
      Multiset<AtomId> ctx = d.d_contexts()[i];
      ctx.insert(head);
      ++copies;
      dslots.push_back({d.d_atoms()[i], {std::move(ctx), self(self, d.d_subs()[i])}});
    }
    dslots.push_back({head, {Multiset<AtomId>::singleton(head), AtomicDerivation(head)}});
    ++copies;
    std::stable_sort(dslots.begin(), dslots.end(),
                     [](const auto& a, const auto& b2) { return a.first < b2.first; });
    std::vector<AtomId> d_atoms;
    std::vector<Multiset<AtomId>> d_ctxs;
    std::vector<AtomicDerivation> d_subs;
    for (auto& [a, cs] : dslots) {
      d_atoms.push_back(a);
      d_ctxs.push_back(std::move(cs.first));
      d_subs.push_back(std::move(cs.second));
    }

    std::vector<AtomicDerivation> modal_subs;
    for (const AtomicDerivation& ms : d.modal_subs()) modal_subs.push_back(self(self, ms));

    AtomicDerivation cur(d.rule(), std::move(box_ctxs), std::move(box_subs), std::move(d_atoms),
                         std::move(d_ctxs), std::move(d_subs), std::move(modal_subs));
    for (; copies > 1; --copies)
      cur = detail::contract_once(nb, bang_phi, std::move(cur), goal);
    return cur;
  };

  AtomicDerivation out = transform(transform, hyp_closure);
  check_atomic(b, out);
  return out;
}

// --- definitional behaviour of the simulated connectives --------------------

struct DefnCheckReport {
  std::string clause;
  std::size_t instances = 0;
  std::vector<std::string> failures;
  bool passed() const { return failures.empty(); }
};

// Verifies both directions of the definitional clauses of the simulated
// connectives on bounded instances: base quantifiers range over the
// simulation base extended by subsets of axiom rules <0,0,q>, resource
// multisets over the local alphabet up to `mset_bound`, and derivability is
// bounded by `depth`. Constructive directions also rebuild the witness
// derivation and check it.
inline std::vector<DefnCheckReport> sim_base_definition_checks(const SimulationBase& nb,
                                                               std::size_t mset_bound,
                                                               std::size_t depth) {
  std::vector<AtomicRule> extras;
  for (const AtomId& q : nb.alphabet) {
    AtomicRule ax({}, {}, q);
    if (!nb.base.rules.contains(ax)) extras.push_back(ax);
  }
  std::vector<Base> bases;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << extras.size()); ++mask) {
    Base b = nb.base;
    for (std::size_t i = 0; i < extras.size(); ++i)
      if (mask & (std::uint64_t{1} << i)) b.rules.insert(extras[i]);
    bases.push_back(std::move(b));
  }
  std::vector<Multiset<AtomId>> msets = multisets_up_to(nb.alphabet, mset_bound);

  std::map<std::tuple<const Base*, Multiset<AtomId>, AtomId>, bool> memo;
  auto der = [&](const Base& b, const Multiset<AtomId>& l, const AtomId& p) {
    auto key = std::make_tuple(&b, l, p);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    bool r = derive(b, l, p, depth).has_value();
    memo.emplace(std::move(key), r);
    return r;
  };
  auto supersets = [&](std::size_t bi) {
    std::vector<std::size_t> out;
    for (std::size_t ci = 0; ci < bases.size(); ++ci)
      if (bases[bi].subset_of(bases[ci])) out.push_back(ci);
    return out;
  };

  std::vector<DefnCheckReport> reports;
  auto mset_text = [](const Multiset<AtomId>& m) {
    std::string s = "{";
    for (const AtomId& a : m.expand()) s += a.text() + ",";
    if (s.size() > 1) s.pop_back();
    return s + "}";
  };
  auto run_clause = [&](const std::string& clause, const Formula& f, auto&& rhs) {
    DefnCheckReport rep{clause + " " + f.text(), 0, {}};
    AtomId head = nb.map.flatten(f);
    for (std::size_t bi = 0; bi < bases.size(); ++bi)
      for (const auto& l : msets) {
        ++rep.instances;
        bool lhs = der(bases[bi], l, head);
        bool r = rhs(bi, l);
        if (lhs != r && rep.failures.size() < 10)
          rep.failures.push_back("L=" + mset_text(l) + " base#" + std::to_string(bi) +
                                 ": derive=" + (lhs ? "yes" : "no") +
                                 " clause=" + (r ? "yes" : "no"));
      }
    reports.push_back(std::move(rep));
  };

  for (const Formula& f : nb.map.domain()) {
    switch (f.kind()) {
      case FormulaKind::Tensor: {
        Multiset<AtomId> both;
        both.insert(nb.map.flatten(f.left()));
        both.insert(nb.map.flatten(f.right()));
        run_clause("tensor", f, [&](std::size_t bi, const Multiset<AtomId>& l) {
          for (std::size_t ci : supersets(bi))
            for (const auto& k : msets)
              for (const AtomId& p : nb.alphabet)
                if (der(bases[ci], mset_union(both, k), p) &&
                    !der(bases[ci], mset_union(l, k), p))
                  return false;
          return true;
        });
        break;
      }
      case FormulaKind::Lolli: {
        AtomId la = nb.map.flatten(f.left());
        AtomId ra = nb.map.flatten(f.right());
        run_clause("lolli", f, [&](std::size_t bi, const Multiset<AtomId>& l) {
          Multiset<AtomId> lx = l;
          lx.insert(la);
          return der(bases[bi], lx, ra);
        });
        break;
      }
      case FormulaKind::One:
        run_clause("one", f, [&](std::size_t bi, const Multiset<AtomId>& l) {
          for (std::size_t ci : supersets(bi))
            for (const auto& k : msets)
              for (const AtomId& p : nb.alphabet)
                if (der(bases[ci], k, p) && !der(bases[ci], mset_union(l, k), p)) return false;
          return true;
        });
        break;
      case FormulaKind::With: {
        AtomId la = nb.map.flatten(f.left());
        AtomId ra = nb.map.flatten(f.right());
        run_clause("with", f, [&](std::size_t bi, const Multiset<AtomId>& l) {
          return der(bases[bi], l, la) && der(bases[bi], l, ra);
        });
        break;
      }
      case FormulaKind::Plus: {
        AtomId la = nb.map.flatten(f.left());
        AtomId ra = nb.map.flatten(f.right());
        run_clause("plus", f, [&](std::size_t bi, const Multiset<AtomId>& l) {
          for (std::size_t ci : supersets(bi))
            for (const auto& k : msets)
              for (const AtomId& p : nb.alphabet) {
                Multiset<AtomId> kl = k, kr = k;
                kl.insert(la);
                kr.insert(ra);
                if (der(bases[ci], kl, p) && der(bases[ci], kr, p) &&
                    !der(bases[ci], mset_union(l, k), p))
                  return false;
              }
          return true;
        });
        break;
      }
      case FormulaKind::Top:
        run_clause("top", f, [&](std::size_t, const Multiset<AtomId>&) { return true; });
        break;
      case FormulaKind::Zero:
        run_clause("zero", f, [&](std::size_t bi, const Multiset<AtomId>& l) {
          for (const auto& k : msets)
            for (const AtomId& p : nb.alphabet)
              if (!der(bases[bi], mset_union(l, k), p)) return false;
          return true;
        });
        break;
      case FormulaKind::Bang: {
        AtomId body = nb.map.flatten(f.child());
        run_clause("bang", f, [&](std::size_t bi, const Multiset<AtomId>& l) {
          for (std::size_t ci : supersets(bi))
            for (const auto& k : msets)
              for (const AtomId& p : nb.alphabet) {
                bool antecedent = true;
                for (std::size_t di : supersets(ci))
                  if (der(bases[di], {}, body) && !der(bases[di], k, p)) antecedent = false;
                if (antecedent && !der(bases[ci], mset_union(l, k), p)) return false;
              }
          return true;
        });
        break;
      }
      case FormulaKind::Atom:
        break;
    }
  }
  return reports;
}

}  // namespace illbes

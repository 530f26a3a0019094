#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "illbes/atomic.hpp"
#include "illbes/base.hpp"
#include "illbes/formula.hpp"

namespace illbes {

// A finite approximation of the base-extension quantifiers: every "for all
// C >= B" ranges over subsets of `candidate_rules` containing B, every
// quantified atomic multiset over `atoms` with size <= `mset_bound`, and the
// (At) clause delegates to `derive` at `deriv_depth`.
struct BoundedUniverse {
  std::vector<AtomId> atoms;
  std::vector<AtomicRule> candidate_rules;
  std::size_t mset_bound = 2;
  std::size_t deriv_depth = 4;

  // The closure requirement: for every atom q the pool offers the axiom rule
  // <0,0,q> and the persistence rule <0,{=>q},q>, the shapes the base
  // constructions of the bounded lemma checks instantiate.
  bool closed() const {
    for (const AtomId& q : atoms) {
      AtomicRule axiom({}, {}, q);
      AtomicRule persist({}, AdditiveBox{{AtomicSequent{{}, q}}}, q);
      if (std::find(candidate_rules.begin(), candidate_rules.end(), axiom) ==
              candidate_rules.end() ||
          std::find(candidate_rules.begin(), candidate_rules.end(), persist) ==
              candidate_rules.end())
        return false;
    }
    return true;
  }
};

// Builds the universe with closure rules for `atoms` plus `extra` rules.
inline BoundedUniverse make_closed_universe(std::vector<AtomId> atoms,
                                            std::vector<AtomicRule> extra = {},
                                            std::size_t mset_bound = 2,
                                            std::size_t deriv_depth = 4) {
  BoundedUniverse u;
  u.atoms = std::move(atoms);
  u.mset_bound = mset_bound;
  u.deriv_depth = deriv_depth;
  for (const AtomId& q : u.atoms) {
    u.candidate_rules.push_back(AtomicRule({}, {}, q));
    u.candidate_rules.push_back(AtomicRule({}, AdditiveBox{{AtomicSequent{{}, q}}}, q));
  }
  for (AtomicRule& r : extra) u.candidate_rules.push_back(std::move(r));
  std::sort(u.candidate_rules.begin(), u.candidate_rules.end());
  u.candidate_rules.erase(std::unique(u.candidate_rules.begin(), u.candidate_rules.end()),
                          u.candidate_rules.end());
  return u;
}

enum class SequentMode { Inf, GenInf };

// Evaluates the support clauses over a bounded universe. Bases are bitmasks
// over the candidate rules; all quantifiers are bounded as described on
// BoundedUniverse. Results are memoized per evaluator, so one evaluator
// should be reused across the instances of a check. Not thread-safe; use one
// evaluator per thread.
class SupportEvaluator {
 public:
  explicit SupportEvaluator(const BoundedUniverse& u) : u_(u) {
    if (u_.candidate_rules.size() > 30)
      throw IoError("universe too large: more than 30 candidate rules");
    for (const AtomId& a : u_.atoms) {
      if (atom_index_.count(a)) throw IoError("duplicate atom in universe");
      atom_index_[a] = k_candidates_.size();
    }
    k_candidates_ = multisets_up_to(u_.atoms, u_.mset_bound);
    full_mask_ = (std::uint32_t{1} << u_.candidate_rules.size()) - 1;
  }

  const BoundedUniverse& universe() const { return u_; }

  std::uint32_t mask_of(const Base& b) const {
    if (!b.top_families.empty() || !b.zero_families.empty())
      throw IoError("universe bases carry no rule families");
    std::uint32_t m = 0;
    for (const AtomicRule& r : b.rules) {
      auto it = std::find(u_.candidate_rules.begin(), u_.candidate_rules.end(), r);
      if (it == u_.candidate_rules.end())
        throw IoError("base rule outside the universe's candidate set");
      m |= std::uint32_t{1} << (it - u_.candidate_rules.begin());
    }
    return m;
  }

  Base base_of(std::uint32_t mask) const {
    Base b;
    for (std::size_t i = 0; i < u_.candidate_rules.size(); ++i)
      if (mask & (std::uint32_t{1} << i)) b.rules.insert(u_.candidate_rules[i]);
    return b;
  }

  std::uint32_t full_mask() const { return full_mask_; }

  std::vector<std::uint32_t> supersets_of(std::uint32_t mask) const {
    std::vector<std::uint32_t> out;
    std::uint32_t comp = full_mask_ & ~mask;
    std::uint32_t sub = comp;
    while (true) {
      out.push_back(mask | sub);
      if (sub == 0) break;
      sub = (sub - 1) & comp;
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  const std::vector<Multiset<AtomId>>& resource_candidates() const { return k_candidates_; }

  // L |-_B p via the search engine, at the universe's depth.
  bool derivable(std::uint32_t mask, const Multiset<AtomId>& l, const AtomId& p) {
    auto key = std::make_tuple(mask, l, p);
    if (auto it = derive_memo_.find(key); it != derive_memo_.end()) return it->second;
    bool r = derive(base_of(mask), l, p, u_.deriv_depth).has_value();
    derive_memo_.emplace(std::move(key), r);
    return r;
  }

  bool supports(std::uint32_t mask, const Multiset<AtomId>& l, const Formula& f) {
    return supports_guarded(mask, l, f, 0);
  }
  bool supports_multiset(std::uint32_t mask, const Multiset<AtomId>& l,
                         const Multiset<Formula>& gamma) {
    return multiset_guarded(mask, l, gamma, 0);
  }
  bool supports_sequent(std::uint32_t mask, const Multiset<AtomId>& l,
                        const Multiset<Formula>& gamma, const Formula& f, SequentMode mode) {
    return sequent_guarded(mask, l, gamma, f, mode, 0);
  }

  bool supports(const Base& b, const Multiset<AtomId>& l, const Formula& f) {
    return supports(mask_of(b), l, f);
  }
  bool supports_sequent(const Base& b, const Multiset<AtomId>& l, const Multiset<Formula>& gamma,
                        const Formula& f, SequentMode mode) {
    return supports_sequent(mask_of(b), l, gamma, f, mode);
  }

 private:
  void check_atoms_in_range(const Formula& f) {
    switch (f.kind()) {
      case FormulaKind::Atom:
        if (!atom_index_.count(f.atom_id()))
          throw IoError("atom " + f.atom_id().text() + " outside the universe alphabet");
        return;
      case FormulaKind::Top:
      case FormulaKind::Zero:
      case FormulaKind::One:
        return;
      case FormulaKind::Bang:
        check_atoms_in_range(f.child());
        return;
      default:
        check_atoms_in_range(f.left());
        check_atoms_in_range(f.right());
        return;
    }
  }

  // The support clauses recurse only on formulas of strictly smaller degree;
  // `guard` carries the degree of the enclosing clause's formula (0 at the
  // top level) and every nested evaluation asserts the descent.
  bool supports_guarded(std::uint32_t mask, const Multiset<AtomId>& l, const Formula& f,
                        std::size_t guard) {
    if (guard != 0 && f.degree() >= guard)
      throw CheckError("degree recursion violation: " + f.text() + " inside a degree-" +
                       std::to_string(guard) + " clause");
    auto key = std::make_tuple(mask, l, intern(f));
    if (auto it = formula_memo_.find(key); it != formula_memo_.end()) return it->second;
    // Degree well-foundedness: a key never depends on itself.
    bool r = eval_formula(mask, l, f);
    formula_memo_[key] = r;
    return r;
  }

  bool eval_formula(std::uint32_t mask, const Multiset<AtomId>& l, const Formula& f) {
    std::size_t g = f.degree();
    switch (f.kind()) {
      case FormulaKind::Atom:
        check_atoms_in_range(f);
        return derivable(mask, l, f.atom_id());
      case FormulaKind::Top:
        return true;
      case FormulaKind::Zero:
        // L |- 0 iff every atom follows from L + K, for all bounded K.
        for (const Multiset<AtomId>& k : k_candidates_)
          for (const AtomId& p : u_.atoms)
            if (!derivable(mask, mset_union(l, k), p)) return false;
        return true;
      case FormulaKind::One:
        for (std::uint32_t c : supersets_of(mask))
          for (const Multiset<AtomId>& k : k_candidates_)
            for (const AtomId& p : u_.atoms)
              if (derivable(c, k, p) && !derivable(c, mset_union(l, k), p)) return false;
        return true;
      case FormulaKind::Lolli:
        return sequent_guarded(mask, l, Multiset<Formula>::singleton(f.left()), f.right(),
                               SequentMode::Inf, g);
      case FormulaKind::Tensor: {
        Multiset<Formula> pair;
        pair.insert(f.left());
        pair.insert(f.right());
        for (std::uint32_t c : supersets_of(mask))
          for (const Multiset<AtomId>& k : k_candidates_)
            for (const AtomId& p : u_.atoms) {
              Formula pf = Formula::atom(p);
              if (sequent_guarded(c, k, pair, pf, SequentMode::Inf, g) &&
                  !derivable(c, mset_union(l, k), p))
                return false;
            }
        return true;
      }
      case FormulaKind::With:
        return supports_guarded(mask, l, f.left(), g) && supports_guarded(mask, l, f.right(), g);
      case FormulaKind::Plus: {
        for (std::uint32_t c : supersets_of(mask))
          for (const Multiset<AtomId>& k : k_candidates_)
            for (const AtomId& p : u_.atoms) {
              Formula pf = Formula::atom(p);
              if (sequent_guarded(c, k, Multiset<Formula>::singleton(f.left()), pf,
                                  SequentMode::Inf, g) &&
                  sequent_guarded(c, k, Multiset<Formula>::singleton(f.right()), pf,
                                  SequentMode::Inf, g) &&
                  !derivable(c, mset_union(l, k), p))
                return false;
            }
        return true;
      }
      case FormulaKind::Bang: {
        // Simplified clause: for all C >= B, K and atoms p, if !phi follows
        // from K in C then it may be cut against L.
        Multiset<Formula> self = Multiset<Formula>::singleton(f);
        for (std::uint32_t c : supersets_of(mask))
          for (const Multiset<AtomId>& k : k_candidates_)
            for (const AtomId& p : u_.atoms) {
              Formula pf = Formula::atom(p);
              if (sequent_guarded(c, k, self, pf, SequentMode::Inf, g) &&
                  !derivable(c, mset_union(l, k), p))
                return false;
            }
        return true;
      }
    }
    return false;
  }

  // Support for a multiset subject: the empty multiset is supported exactly
  // by the empty resource; otherwise the resource splits across the elements.
  bool multiset_guarded(std::uint32_t mask, const Multiset<AtomId>& l,
                        const Multiset<Formula>& gamma, std::size_t guard) {
    if (gamma.empty()) return l.empty();
    std::vector<Formula> elems = gamma.expand();
    if (elems.size() == 1) return supports_guarded(mask, l, elems[0], guard);
    auto key = std::make_tuple(mask, l, intern_all(elems));
    if (auto it = multiset_memo_.find(key); it != multiset_memo_.end()) return it->second;
    Multiset<Formula> rest = gamma;
    rest.erase_one(elems[0]);
    bool r = false;
    for_each_submultiset(l, [&](const Multiset<AtomId>& k, const Multiset<AtomId>& m) {
      if (supports_guarded(mask, k, elems[0], guard) && multiset_guarded(mask, m, rest, guard))
        r = true;
      return !r;
    });
    multiset_memo_[key] = r;
    return r;
  }

  bool sequent_guarded(std::uint32_t mask, const Multiset<AtomId>& l,
                       const Multiset<Formula>& gamma, const Formula& f, SequentMode mode,
                       std::size_t guard) {
    if (gamma.empty()) return supports_guarded(mask, l, f, guard);
    auto key =
        std::make_tuple(mask, l, intern_all(gamma.expand()), intern(f), mode == SequentMode::Inf);
    if (auto it = sequent_memo_.find(key); it != sequent_memo_.end()) return it->second;
    bool r = true;
    if (mode == SequentMode::GenInf) {
      for (std::uint32_t c : supersets_of(mask)) {
        for (const Multiset<AtomId>& k : k_candidates_) {
          if (multiset_guarded(c, k, gamma, guard) &&
              !supports_guarded(c, mset_union(l, k), f, guard)) {
            r = false;
            break;
          }
        }
        if (!r) break;
      }
    } else {
      auto [bangs, theta] = split_bang_context(gamma);
      Multiset<Formula> delta;
      for (const auto& [bf, cnt] : bangs.entries()) delta.insert(bf.child(), cnt);
      for (std::uint32_t c : supersets_of(mask)) {
        for (const Multiset<AtomId>& k : k_candidates_) {
          if (multiset_guarded(c, {}, delta, guard) && multiset_guarded(c, k, theta, guard) &&
              !supports_guarded(c, mset_union(l, k), f, guard)) {
            r = false;
            break;
          }
        }
        if (!r) break;
      }
    }
    sequent_memo_[key] = r;
    return r;
  }

  int intern(const Formula& f) {
    auto it = formula_ids_.find(f);
    if (it != formula_ids_.end()) return it->second;
    int id = static_cast<int>(formula_ids_.size());
    formula_ids_.emplace(f, id);
    return id;
  }
  std::vector<int> intern_all(const std::vector<Formula>& fs) {
    std::vector<int> ids;
    ids.reserve(fs.size());
    for (const Formula& f : fs) ids.push_back(intern(f));
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  const BoundedUniverse& u_;
  std::map<AtomId, std::size_t> atom_index_;
  std::vector<Multiset<AtomId>> k_candidates_;
  std::uint32_t full_mask_ = 0;
  std::map<Formula, int> formula_ids_;
  std::map<std::tuple<std::uint32_t, Multiset<AtomId>, AtomId>, bool> derive_memo_;
  std::map<std::tuple<std::uint32_t, Multiset<AtomId>, int>, bool> formula_memo_;
  std::map<std::tuple<std::uint32_t, Multiset<AtomId>, std::vector<int>>, bool> multiset_memo_;
  std::map<std::tuple<std::uint32_t, Multiset<AtomId>, std::vector<int>, int, bool>, bool>
      sequent_memo_;
};

// Convenience wrappers building a fresh evaluator per call. Prefer holding a
// SupportEvaluator when asking many queries against one universe.
inline bool supports(const BoundedUniverse& u, const Base& b, const Multiset<AtomId>& l,
                     const Formula& f) {
  SupportEvaluator ev(u);
  return ev.supports(b, l, f);
}
inline bool supports_sequent(const BoundedUniverse& u, const Base& b, const Multiset<AtomId>& l,
                             const Multiset<Formula>& gamma, const Formula& f, SequentMode mode) {
  SupportEvaluator ev(u);
  return ev.supports_sequent(b, l, gamma, f, mode);
}

// --- lemma harness --------------------------------------------------------

struct LemmaReport {
  std::string lemma;
  std::size_t instances = 0;
  std::vector<std::string> failures;
  bool passed() const { return failures.empty(); }
};

// All formulas over `atoms` of degree <= max_degree, canonically ordered.
inline std::vector<Formula> enumerate_formulas(const std::vector<AtomId>& atoms,
                                               std::size_t max_degree) {
  std::vector<std::vector<Formula>> by_degree(max_degree + 1);
  if (max_degree >= 1)
    for (const AtomId& a : atoms) by_degree[1].push_back(Formula::atom(a));
  if (max_degree >= 2) {
    by_degree[2].push_back(Formula::top());
    by_degree[2].push_back(Formula::zero());
    by_degree[2].push_back(Formula::one());
  }
  for (std::size_t d = 2; d <= max_degree; ++d) {
    for (const Formula& f : by_degree[d - 1]) by_degree[d].push_back(Formula::bang(f));
    for (std::size_t dl = 1; dl + 1 < d; ++dl) {
      std::size_t dr = d - 1 - dl;
      for (const Formula& l : by_degree[dl])
        for (const Formula& r : by_degree[dr]) {
          by_degree[d].push_back(Formula::lolli(l, r));
          by_degree[d].push_back(Formula::tensor(l, r));
          by_degree[d].push_back(Formula::with(l, r));
          by_degree[d].push_back(Formula::plus(l, r));
        }
    }
  }
  std::vector<Formula> out;
  for (auto& v : by_degree)
    for (Formula& f : v) out.push_back(std::move(f));
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {

struct LemmaContext {
  const BoundedUniverse& u;
  SupportEvaluator ev;
  std::vector<std::uint32_t> all_masks;
  std::vector<Multiset<AtomId>> msets;

  explicit LemmaContext(const BoundedUniverse& universe) : u(universe), ev(universe) {
    all_masks = ev.supersets_of(0);
    msets = ev.resource_candidates();
  }
};

inline std::string mset_text(const Multiset<AtomId>& m) {
  std::string s = "{";
  for (const AtomId& a : m.expand()) s += a.text() + ",";
  if (s.size() > 1) s.pop_back();
  return s + "}";
}

inline std::string gamma_text(const Multiset<Formula>& m) {
  std::string s = "{";
  for (const Formula& f : m.expand()) s += f.text() + ",";
  if (s.size() > 1) s.pop_back();
  return s + "}";
}

}  // namespace detail

// Runs one lemma check over the universe, enumerating instances up to
// `max_degree`. A pass is a bounded-universe confirmation, not a proof.
inline LemmaReport run_one_lemma(const BoundedUniverse& u, const std::string& name,
                                 std::size_t max_degree) {
  detail::LemmaContext cx(u);
  LemmaReport rep{name, 0, {}};
  auto fail = [&](const std::string& what) {
    if (rep.failures.size() < 20) rep.failures.push_back(what);
  };
  std::vector<Formula> formulas = enumerate_formulas(u.atoms, max_degree);
  auto upto = [&](std::size_t deg) {
    std::vector<Formula> out;
    for (const Formula& f : formulas)
      if (f.degree() <= deg) out.push_back(f);
    return out;
  };

  if (name == "monotone-support") {
    // Gamma |=_B^L phi implies Gamma |=_C^L phi for C >= B; Gamma of size <= 1.
    std::vector<Multiset<Formula>> gammas{{}};
    for (const Formula& g : upto(std::min<std::size_t>(max_degree, 2)))
      gammas.push_back(Multiset<Formula>::singleton(g));
    for (std::uint32_t b : cx.all_masks)
      for (const auto& l : cx.msets)
        for (const auto& gamma : gammas)
          for (const Formula& f : formulas) {
            ++rep.instances;
            if (!cx.ev.supports_sequent(b, l, gamma, f, SequentMode::Inf)) continue;
            for (std::uint32_t c : cx.ev.supersets_of(b))
              if (!cx.ev.supports_sequent(c, l, gamma, f, SequentMode::Inf)) {
                fail("lost support under extension: " + detail::gamma_text(gamma) + " |= " +
                     f.text() + " at L=" + detail::mset_text(l));
                break;
              }
          }
  } else if (name == "atomic-sound-and-complete") {
    // L |=_B^K p iff L + K |-_B p.
    for (std::uint32_t b : cx.all_masks)
      for (const auto& l : cx.msets)
        for (const auto& k : cx.msets)
          for (const AtomId& p : u.atoms) {
            ++rep.instances;
            Multiset<Formula> gamma;
            for (const AtomId& a : l.expand()) gamma.insert(Formula::atom(a));
            bool lhs = cx.ev.supports_sequent(b, k, gamma, Formula::atom(p), SequentMode::Inf);
            bool rhs = cx.ev.derivable(b, mset_union(l, k), p);
            if (lhs != rhs)
              fail("mismatch at " + detail::mset_text(l) + " |=^" + detail::mset_text(k) + " " +
                   p.text() + ": support=" + (lhs ? "yes" : "no") +
                   " derive=" + (rhs ? "yes" : "no"));
          }
  } else if (name == "mand-key") {
    for (std::uint32_t b : cx.all_masks)
      for (const auto& l : cx.msets)
        for (const auto& k : cx.msets)
          for (const Formula& lhs : formulas) {
            if (lhs.kind() != FormulaKind::Tensor) continue;
            Multiset<Formula> pair;
            pair.insert(lhs.left());
            pair.insert(lhs.right());
            for (const Formula& chi : formulas) {
              ++rep.instances;
              if (cx.ev.supports(b, l, lhs) &&
                  cx.ev.supports_sequent(b, k, pair, chi, SequentMode::Inf) &&
                  !cx.ev.supports(b, mset_union(l, k), chi))
                fail("tensor key failed for " + lhs.text() + " against " + chi.text());
            }
          }
  } else if (name == "mtop-key") {
    for (std::uint32_t b : cx.all_masks)
      for (const auto& l : cx.msets)
        for (const auto& k : cx.msets)
          for (const Formula& chi : formulas) {
            ++rep.instances;
            if (cx.ev.supports(b, l, Formula::one()) && cx.ev.supports(b, k, chi) &&
                !cx.ev.supports(b, mset_union(l, k), chi))
              fail("one key failed against " + chi.text());
          }
  } else if (name == "aor-key") {
    for (std::uint32_t b : cx.all_masks)
      for (const auto& l : cx.msets)
        for (const auto& k : cx.msets)
          for (const Formula& lhs : formulas) {
            if (lhs.kind() != FormulaKind::Plus) continue;
            for (const Formula& chi : formulas) {
              ++rep.instances;
              if (cx.ev.supports(b, l, lhs) &&
                  cx.ev.supports_sequent(b, k, Multiset<Formula>::singleton(lhs.left()), chi,
                                         SequentMode::Inf) &&
                  cx.ev.supports_sequent(b, k, Multiset<Formula>::singleton(lhs.right()), chi,
                                         SequentMode::Inf) &&
                  !cx.ev.supports(b, mset_union(l, k), chi))
                fail("plus key failed for " + lhs.text() + " against " + chi.text());
            }
          }
  } else if (name == "bang-dereliction") {
    std::vector<Formula> small = upto(max_degree >= 1 ? max_degree - 1 : 0);
    for (std::uint32_t b : cx.all_masks)
      for (const auto& l : cx.msets)
        for (const Formula& phi : small)
          for (const Formula& psi : small) {
            ++rep.instances;
            if (cx.ev.supports_sequent(b, l, Multiset<Formula>::singleton(phi), psi,
                                       SequentMode::Inf) &&
                !cx.ev.supports_sequent(b, l, Multiset<Formula>::singleton(Formula::bang(phi)),
                                        psi, SequentMode::Inf))
              fail("dereliction failed for " + phi.text() + " |= " + psi.text());
          }
  } else if (name == "bang-necessitation") {
    std::vector<Formula> small = upto(max_degree >= 1 ? max_degree - 1 : 0);
    for (std::uint32_t b : cx.all_masks)
      for (const Formula& phi : small) {
        if (!cx.ev.supports(b, {}, phi)) {
          rep.instances += 1;
          continue;
        }
        for (std::uint32_t c : cx.ev.supersets_of(b))
          for (const auto& l : cx.msets)
            for (const Formula& psi : small) {
              ++rep.instances;
              if (cx.ev.supports_sequent(c, l, Multiset<Formula>::singleton(Formula::bang(phi)),
                                         psi, SequentMode::Inf) &&
                  !cx.ev.supports(c, l, psi))
                fail("necessitation failed for " + phi.text() + " with " + psi.text());
            }
      }
  } else if (name == "bang-promotion") {
    // For valid !Gamma |= phi conclude !Gamma |= !phi (over the empty base).
    std::vector<Formula> small = upto(std::min<std::size_t>(max_degree, 2));
    std::vector<Multiset<Formula>> gammas{{}};
    for (const Formula& g : small) gammas.push_back(Multiset<Formula>::singleton(g));
    for (std::size_t i = 0; i < small.size(); ++i)
      for (std::size_t j = i; j < small.size(); ++j) {
        Multiset<Formula> two;
        two.insert(small[i]);
        two.insert(small[j]);
        gammas.push_back(std::move(two));
      }
    std::vector<Formula> phis = upto(max_degree >= 1 ? max_degree - 1 : 0);
    for (const auto& gamma : gammas) {
      Multiset<Formula> banged;
      for (const auto& [g, c] : gamma.entries()) banged.insert(Formula::bang(g), c);
      for (const Formula& phi : phis) {
        ++rep.instances;
        if (cx.ev.supports_sequent(0, {}, banged, phi, SequentMode::Inf) &&
            !cx.ev.supports_sequent(0, {}, banged, Formula::bang(phi), SequentMode::Inf))
          fail("promotion failed for !" + detail::gamma_text(gamma) + " |= " + phi.text());
      }
    }
  } else if (name == "bang-cut-support") {
    // size-1 Gamma is the primitive lemma; size-2 the corollary.
    std::vector<Formula> phis = upto(max_degree >= 1 ? max_degree - 1 : 0);
    std::vector<Formula> atoms_only = upto(1);
    for (std::uint32_t b : cx.all_masks)
      for (const auto& l : cx.msets)
        for (const auto& k : cx.msets) {
          for (const Formula& phi : phis)
            for (const Formula& psi : formulas) {
              ++rep.instances;
              Formula bp = Formula::bang(phi);
              if (cx.ev.supports(b, l, bp) &&
                  cx.ev.supports_sequent(b, k, Multiset<Formula>::singleton(bp), psi,
                                         SequentMode::Inf) &&
                  !cx.ev.supports(b, mset_union(l, k), psi))
                fail("bang cut failed for !" + phi.text() + " against " + psi.text());
            }
          for (const Formula& p1 : atoms_only)
            for (const Formula& p2 : atoms_only)
              for (const Formula& psi : upto(std::min<std::size_t>(max_degree, 3))) {
                ++rep.instances;
                Multiset<Formula> banged;
                banged.insert(Formula::bang(p1));
                banged.insert(Formula::bang(p2));
                if (cx.ev.supports_multiset(b, l, banged) &&
                    cx.ev.supports_sequent(b, k, banged, psi, SequentMode::Inf) &&
                    !cx.ev.supports(b, mset_union(l, k), psi))
                  fail("bang cut (pair) failed against " + psi.text());
              }
        }
  } else if (name == "bang-mtop-interplay") {
    std::vector<Formula> phis = upto(max_degree >= 1 ? max_degree - 1 : 0);
    for (std::uint32_t b : cx.all_masks)
      for (const auto& l : cx.msets)
        for (const Formula& phi : phis) {
          ++rep.instances;
          if (cx.ev.supports(b, l, Formula::bang(phi)) &&
              !cx.ev.supports(b, l, Formula::one()))
            fail("! to 1 failed for " + phi.text());
        }
  } else if (name == "inf-gen-inf") {
    std::vector<Formula> small = upto(std::min<std::size_t>(max_degree, 2));
    std::vector<Multiset<Formula>> gammas;
    for (const Formula& g : small) gammas.push_back(Multiset<Formula>::singleton(g));
    for (std::size_t i = 0; i < small.size(); ++i)
      for (std::size_t j = i; j < small.size(); ++j) {
        Multiset<Formula> two;
        two.insert(small[i]);
        two.insert(small[j]);
        gammas.push_back(std::move(two));
      }
    std::vector<Formula> phis = upto(std::min<std::size_t>(max_degree, 3));
    for (std::uint32_t b : cx.all_masks)
      for (const auto& l : cx.msets)
        for (const auto& gamma : gammas)
          for (const Formula& phi : phis) {
            ++rep.instances;
            bool inf = cx.ev.supports_sequent(b, l, gamma, phi, SequentMode::Inf);
            bool gen = cx.ev.supports_sequent(b, l, gamma, phi, SequentMode::GenInf);
            if (inf != gen)
              fail("Inf/Gen-Inf disagree on " + detail::gamma_text(gamma) + " |= " + phi.text() +
                   " at L=" + detail::mset_text(l) + ": inf=" + (inf ? "yes" : "no"));
          }
  } else if (name == "validity-simplification") {
    // Supported over the empty base iff supported over every base.
    std::vector<Formula> small = upto(std::min<std::size_t>(max_degree, 2));
    std::vector<Multiset<Formula>> gammas{{}};
    for (const Formula& g : small) gammas.push_back(Multiset<Formula>::singleton(g));
    for (const auto& gamma : gammas)
      for (const Formula& phi : formulas) {
        ++rep.instances;
        bool empty_base = cx.ev.supports_sequent(0, {}, gamma, phi, SequentMode::Inf);
        bool all_bases = true;
        for (std::uint32_t b : cx.all_masks)
          all_bases =
              all_bases && cx.ev.supports_sequent(b, {}, gamma, phi, SequentMode::Inf);
        if (empty_base != all_bases)
          fail("validity simplification failed for " + detail::gamma_text(gamma) + " |= " +
               phi.text());
      }
  } else {
    rep.failures.push_back("unknown lemma name");
  }
  return rep;
}

inline const std::vector<std::string>& all_lemma_names() {
  static const std::vector<std::string> names{
      "monotone-support", "atomic-sound-and-complete", "mand-key", "mtop-key", "aor-key",
      "bang-dereliction", "bang-necessitation", "bang-promotion", "bang-cut-support",
      "bang-mtop-interplay", "inf-gen-inf", "validity-simplification"};
  return names;
}

// Runs the named lemma checks (or all of them), one worker thread per lemma,
// at most `threads` at a time. Reports come back in request order.
inline std::vector<LemmaReport> run_lemma_checks(const BoundedUniverse& u,
                                                 std::vector<std::string> which,
                                                 std::size_t max_degree = 3,
                                                 std::size_t threads = 1) {
  if (which.size() == 1 && which[0] == "all") which = all_lemma_names();
  std::vector<LemmaReport> reports(which.size());
  if (threads < 1) threads = 1;
  std::size_t next = 0;
  while (next < which.size()) {
    std::size_t batch = std::min(threads, which.size() - next);
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < batch; ++i)
      pool.emplace_back([&, idx = next + i] { reports[idx] = run_one_lemma(u, which[idx], max_degree); });
    for (auto& t : pool) t.join();
    next += batch;
  }
  return reports;
}

}  // namespace illbes

#pragma once

#include <algorithm>
#include <compare>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "illbes/atoms.hpp"
#include "illbes/multiset.hpp"

namespace illbes {

// An atomic sequent P => p over atoms.
struct AtomicSequent {
  Multiset<AtomId> premises;
  AtomId conclusion;

  friend bool operator==(const AtomicSequent&, const AtomicSequent&) = default;
  friend auto operator<=>(const AtomicSequent&, const AtomicSequent&) = default;

  std::string text() const {
    std::string s;
    for (const AtomId& a : premises.expand()) s += a.text() + ",";
    if (!s.empty()) s.pop_back();
    return s + " => " + conclusion.text();
  }
};

// A multiset of atomic sequents whose derivations must share one context.
// Canonically sorted; duplicates are kept (it is a multiset).
struct AdditiveBox {
  std::vector<AtomicSequent> sequents;

  void canonicalize() { std::sort(sequents.begin(), sequents.end()); }
  bool empty() const { return sequents.empty(); }
  std::size_t length() const { return sequents.size(); }

  friend bool operator==(const AdditiveBox&, const AdditiveBox&) = default;
  friend auto operator<=>(const AdditiveBox&, const AdditiveBox&) = default;
};

// A non-schematic rule <A, S, p>: a multiset A of additive boxes, a modal box
// S, and a concluding atom p. Stored in canonical order so structurally equal
// rules compare equal.
struct AtomicRule {
  std::vector<AdditiveBox> boxes;
  AdditiveBox modal;
  AtomId conclusion;

  AtomicRule() = default;
  AtomicRule(std::vector<AdditiveBox> a, AdditiveBox s, AtomId p)
      : boxes(std::move(a)), modal(std::move(s)), conclusion(std::move(p)) {
    for (AdditiveBox& b : boxes) b.canonicalize();
    std::sort(boxes.begin(), boxes.end());
    modal.canonicalize();
  }

  friend bool operator==(const AtomicRule&, const AtomicRule&) = default;
  friend auto operator<=>(const AtomicRule&, const AtomicRule&) = default;
};

// A base: a set of atomic rules. The two family sets realize the rule
// families whose instances exist for every arity n >= 0 and every choice of
// atoms q_1..q_n and cannot be materialized:
//   top_families:  t in the set stands for all rules <[{=>q_1},..,{=>q_n}], 0, t>
//   zero_families: z in the set stands for all rules
//                  <[{=>q_1},..,{=>q_n},{=>z}], 0, p> for every atom p.
// Plain bases leave both empty.
struct Base {
  std::set<AtomicRule> rules;
  std::set<AtomId> top_families;
  std::set<AtomId> zero_families;

  bool subset_of(const Base& other) const {
    return std::includes(other.rules.begin(), other.rules.end(), rules.begin(), rules.end()) &&
           std::includes(other.top_families.begin(), other.top_families.end(),
                         top_families.begin(), top_families.end()) &&
           std::includes(other.zero_families.begin(), other.zero_families.end(),
                         zero_families.begin(), zero_families.end());
  }

  Base united(const Base& other) const {
    Base r = *this;
    r.rules.insert(other.rules.begin(), other.rules.end());
    r.top_families.insert(other.top_families.begin(), other.top_families.end());
    r.zero_families.insert(other.zero_families.begin(), other.zero_families.end());
    return r;
  }

  friend bool operator==(const Base&, const Base&) = default;
};

// The atoms p with a rule <0, S, p> in B where S is non-empty.
inline std::set<AtomId> persistent_atoms(const Base& b) {
  std::set<AtomId> out;
  for (const AtomicRule& r : b.rules)
    if (r.boxes.empty() && !r.modal.empty()) out.insert(r.conclusion);
  return out;
}

// Matches a concrete rule against the top family pattern: every box is a
// single premise-free sequent and there is no modal box.
inline bool matches_top_family(const Base& b, const AtomicRule& r) {
  if (!b.top_families.contains(r.conclusion)) return false;
  if (!r.modal.empty()) return false;
  for (const AdditiveBox& box : r.boxes)
    if (box.length() != 1 || !box.sequents[0].premises.empty()) return false;
  return true;
}

// Matches the zero family pattern: premise-free singleton boxes, one of which
// concludes a zero-family atom.
inline bool matches_zero_family(const Base& b, const AtomicRule& r) {
  if (b.zero_families.empty() || !r.modal.empty()) return false;
  bool has_zero_box = false;
  for (const AdditiveBox& box : r.boxes) {
    if (box.length() != 1 || !box.sequents[0].premises.empty()) return false;
    if (b.zero_families.contains(box.sequents[0].conclusion)) has_zero_box = true;
  }
  return has_zero_box;
}

// True when `r` may be applied in `b`: either listed or a family instance.
inline bool rule_in_base(const Base& b, const AtomicRule& r) {
  return b.rules.contains(r) || matches_top_family(b, r) || matches_zero_family(b, r);
}

inline AtomicRule make_top_family_instance(const AtomId& t, const std::vector<AtomId>& qs) {
  std::vector<AdditiveBox> boxes;
  for (const AtomId& q : qs) boxes.push_back(AdditiveBox{{AtomicSequent{{}, q}}});
  return AtomicRule(std::move(boxes), {}, t);
}

inline AtomicRule make_zero_family_instance(const AtomId& z, const std::vector<AtomId>& qs,
                                            const AtomId& p) {
  std::vector<AdditiveBox> boxes;
  for (const AtomId& q : qs) boxes.push_back(AdditiveBox{{AtomicSequent{{}, q}}});
  boxes.push_back(AdditiveBox{{AtomicSequent{{}, z}}});
  return AtomicRule(std::move(boxes), {}, p);
}

}  // namespace illbes

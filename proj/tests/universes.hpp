#pragma once

#include <vector>

#include "illbes/base.hpp"

namespace fixtures {

using namespace illbes;

inline AtomId ap() { return AtomId::user("p"); }
inline AtomId aq() { return AtomId::user("q"); }

// The fixed candidate set for the engine/oracle, monotonicity and cut
// checks: six rules over {p, q} with boxes of size <= 2, exercising axioms,
// chains, discharge, multiplicative pairing, a modal box, and context
// sharing.
inline const std::vector<AtomicRule>& candidate_rules() {
  static const std::vector<AtomicRule> rules = [] {
    auto axiom = [](AtomId a) { return AtomicRule({}, {}, std::move(a)); };
    std::vector<AtomicRule> out;
    out.push_back(axiom(aq()));
    out.push_back(AtomicRule({AdditiveBox{{AtomicSequent{{}, aq()}}}}, {}, ap()));
    out.push_back(
        AtomicRule({AdditiveBox{{AtomicSequent{Multiset<AtomId>{ap()}, aq()}}}}, {}, aq()));
    out.push_back(AtomicRule(
        {AdditiveBox{{AtomicSequent{{}, ap()}}}, AdditiveBox{{AtomicSequent{{}, aq()}}}}, {},
        aq()));
    out.push_back(AtomicRule({}, AdditiveBox{{AtomicSequent{{}, aq()}}}, ap()));
    out.push_back(AtomicRule({AdditiveBox{{AtomicSequent{{}, ap()},
                                           AtomicSequent{Multiset<AtomId>{aq()}, ap()}}}},
                             {}, ap()));
    return out;
  }();
  return rules;
}

inline std::vector<Base> all_candidate_bases() {
  const std::vector<AtomicRule>& rules = candidate_rules();
  std::vector<Base> out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << rules.size()); ++mask) {
    Base b;
    for (std::size_t i = 0; i < rules.size(); ++i)
      if (mask & (std::size_t{1} << i)) b.rules.insert(rules[i]);
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace fixtures

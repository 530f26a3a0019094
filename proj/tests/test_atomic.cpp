#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "illbes/atomic.hpp"
#include "illbes/json_io.hpp"
#include "illbes/parse.hpp"
#include "universes.hpp"

using namespace illbes;
using fixtures::all_candidate_bases;

namespace {

AtomId ap() { return AtomId::user("p"); }
AtomId aq() { return AtomId::user("q"); }
AtomId ar() { return AtomId::user("r"); }

AtomicRule axiom(AtomId a) { return AtomicRule({}, {}, std::move(a)); }
AtomicRule persist(AtomId a) { return AtomicRule({}, AdditiveBox{{AtomicSequent{{}, a}}}, a); }

}  // namespace

TEST_CASE("reflexivity needs exactly the concluded atom") {
  Base empty;
  auto d = derive(empty, Multiset<AtomId>{ap()}, ap(), 1);
  REQUIRE(d.has_value());
  CHECK(d->is_ref());
  CHECK(check_atomic(empty, *d) == AtomicJudgement{Multiset<AtomId>{ap()}, ap()});

  // {p, q} |- p never holds in the empty base: no rule consumes the q.
  for (std::size_t k = 1; k <= 6; ++k)
    CHECK_FALSE(derive(empty, Multiset<AtomId>{ap(), aq()}, ap(), k).has_value());
}

TEST_CASE("two multiplicative boxes split the context") {
  AtomicRule r1({AdditiveBox{{AtomicSequent{{}, ap()}}}, AdditiveBox{{AtomicSequent{{}, aq()}}}},
                {}, ar());
  Base b{{r1}, {}, {}};
  auto d = derive(b, Multiset<AtomId>{ap(), aq()}, ar(), 3);
  REQUIRE(d.has_value());
  CHECK_FALSE(d->is_ref());
  CHECK(d->rule() == r1);
  // One slot holds {p}, the other {q}, each closed by Ref.
  std::multiset<std::size_t> sizes;
  for (const auto& c : d->box_contexts()) sizes.insert(c.size());
  CHECK(sizes == std::multiset<std::size_t>{1, 1});
  CHECK(check_atomic(b, *d) == AtomicJudgement{Multiset<AtomId>{ap(), aq()}, ar()});
}

TEST_CASE("an additive box forces one shared context") {
  AtomicRule r2({AdditiveBox{{AtomicSequent{{}, ap()}, AtomicSequent{{}, aq()}}}}, {}, ar());
  Base b{{r2, axiom(ap()), axiom(aq())}, {}, {}};
  CHECK(derive(b, {}, ar(), 3).has_value());
  CHECK_FALSE(derive(b, Multiset<AtomId>{ap()}, ar(), 3).has_value());
}

TEST_CASE("checker rejects non-persistent D atoms and foreign rules") {
  Base b{{axiom(aq())}, {}, {}};
  // App of the axiom with D = {q}: q is not persistent in b.
  AtomicDerivation bad(axiom(aq()), {}, {}, {aq()}, {Multiset<AtomId>{aq()}},
                       {AtomicDerivation(aq())}, {});
  CHECK_THROWS_WITH(check_atomic(b, bad), Catch::Matchers::ContainsSubstring("not persistent"));

  AtomicDerivation foreign(axiom(ap()), {}, {}, {}, {}, {}, {});
  CHECK_THROWS_WITH(check_atomic(b, foreign), Catch::Matchers::ContainsSubstring("not in base"));

  // Context arithmetic: an empty box owning a non-empty context.
  AtomicRule empty_box({AdditiveBox{}}, {}, aq());
  Base b2{{empty_box}, {}, {}};
  AtomicDerivation skew(empty_box, {Multiset<AtomId>{ap()}}, {{}}, {}, {}, {}, {});
  CHECK_THROWS_AS(check_atomic(b2, skew), CheckError);
  auto ok = derive(b2, {}, aq(), 2);
  REQUIRE(ok.has_value());
  CHECK(check_atomic(b2, *ok).context.empty());
}

TEST_CASE("modal boxes draw on the persistent multiset") {
  // p is persistent via <0,{=>q},p>; q needs an axiom to get started.
  Base b{{persist(ap()), axiom(aq()),
          AtomicRule({}, AdditiveBox{{AtomicSequent{{}, aq()}}}, ap())},
         {},
         {}};
  // |- p by the modal rule with D = 0: the modal subgoal is |- q.
  auto d = derive(b, {}, ap(), 3);
  REQUIRE(d.has_value());
  CHECK(check_atomic(b, *d).conclusion == ap());

  // Dropping the q axiom starves the modal premise.
  Base b2{{persist(ap()), AtomicRule({}, AdditiveBox{{AtomicSequent{{}, aq()}}}, ap())}, {}, {}};
  CHECK_FALSE(derive(b2, {}, ap(), 4).has_value());
}

TEST_CASE("weakening keeps the tree and re-verifies persistence") {
  Base b{{persist(ap()), axiom(aq()),
          AtomicRule({}, AdditiveBox{{AtomicSequent{{}, aq()}}}, ap())},
         {},
         {}};
  auto d = derive(b, {}, ap(), 3);
  REQUIRE(d.has_value());

  Base c = b;
  c.rules.insert(axiom(ap()));
  AtomicDerivation w = weaken_base(*d, c);
  CHECK(check_atomic(c, w) == check_atomic(b, *d));

  // Ref weakens into any base.
  CHECK(weaken_base(AtomicDerivation(ap()), Base{}).is_ref());

  // A base missing the used rule is rejected.
  Base missing{{axiom(aq())}, {}, {}};
  CHECK_THROWS_AS(weaken_base(*d, missing), CheckError);
}

TEST_CASE("cut composition splices plugs per the equivalence") {
  Base b{{axiom(aq())}, {}, {}};
  Base c = b;
  c.rules.insert(AtomicRule({AdditiveBox{{AtomicSequent{{}, aq()}}}}, {}, ap()));

  // Host Ref(q) with P = {q}: the plug replaces the host.
  AtomicDerivation host(aq());
  auto plug = derive(c, {}, aq(), 2);
  REQUIRE(plug.has_value());
  AtomicDerivation spliced = cut_compose(b, host, {aq()}, {*plug}, c);
  CHECK(check_atomic(c, spliced) == AtomicJudgement{{}, aq()});

  // Host Ref(q) with P = 0, S = {q}: unchanged.
  AtomicDerivation same = cut_compose(b, host, {}, {}, c);
  CHECK(check_atomic(c, same) == AtomicJudgement{Multiset<AtomId>{aq()}, aq()});

  // Identity plugs leave the endsequent alone.
  AtomicRule two({AdditiveBox{{AtomicSequent{{}, ap()}}}, AdditiveBox{{AtomicSequent{{}, aq()}}}},
                 {}, ar());
  Base b2{{two}, {}, {}};
  auto host2 = derive(b2, Multiset<AtomId>{ap(), aq()}, ar(), 3);
  REQUIRE(host2.has_value());
  AtomicDerivation id_cut =
      cut_compose(b2, *host2, {ap(), aq()}, {AtomicDerivation(ap()), AtomicDerivation(aq())}, b2);
  CHECK(check_atomic(b2, id_cut) == AtomicJudgement{Multiset<AtomId>{ap(), aq()}, ar()});

  // Multiplicity mismatch is refused.
  CHECK_THROWS_AS(cut_compose(b2, *host2, {ap(), ap()},
                              {AtomicDerivation(ap()), AtomicDerivation(ap())}, b2),
                  CheckError);
}

TEST_CASE("oracle examples") {
  Base empty;
  auto pairs = enumerate_derivable(empty, {ap()}, 2, 3);
  CHECK(pairs == std::set<std::pair<Multiset<AtomId>, AtomId>>{{Multiset<AtomId>{ap()}, ap()}});

  Base one_axiom{{axiom(aq())}, {}, {}};
  auto pairs2 = enumerate_derivable(one_axiom, {ap(), aq()}, 2, 3);
  CHECK(pairs2.contains({Multiset<AtomId>{}, aq()}));
  CHECK(pairs2.contains({Multiset<AtomId>{ap()}, ap()}));
  CHECK_FALSE(pairs2.contains({Multiset<AtomId>{ap()}, aq()}));
}

TEST_CASE("oracle and engine agree on rule families") {
  AtomId top = AtomId::top_mirror();
  AtomId zero = AtomId::zero_mirror();
  Base fam;
  fam.top_families.insert(top);
  fam.zero_families.insert(zero);
  fam.rules.insert(axiom(zero));
  std::vector<AtomId> alpha{ap(), top, zero};
  auto pairs = enumerate_derivable(fam, alpha, 2, 4);
  for (const auto& l : multisets_up_to(alpha, 2))
    for (const AtomId& goal : alpha) {
      auto d = derive(fam, l, goal, 4);
      CAPTURE(l.size(), goal.text());
      CHECK(d.has_value() == pairs.contains({l, goal}));
      if (d) CHECK(check_atomic(fam, *d) == AtomicJudgement{l, goal});
    }
  // With an axiom for the zero atom, everything collapses.
  CHECK(pairs.contains({Multiset<AtomId>{ap()}, ap()}));
  CHECK(pairs.contains({Multiset<AtomId>{ap()}, top}));
  CHECK(pairs.contains({Multiset<AtomId>{ap(), ap()}, zero}));
}

TEST_CASE("engine and oracle agree on a sample of candidate bases") {
  std::vector<AtomId> alphabet{ap(), aq()};
  std::vector<Multiset<AtomId>> contexts = multisets_up_to(alphabet, 2);
  std::mt19937 rng(13);
  std::vector<Base> bases = all_candidate_bases();
  std::shuffle(bases.begin(), bases.end(), rng);
  bases.resize(12);
  for (const Base& b : bases) {
    auto oracle = enumerate_derivable(b, alphabet, 2, 4);
    for (const auto& l : contexts)
      for (const AtomId& goal : alphabet) {
        auto d = derive(b, l, goal, 4);
        CAPTURE(l.size(), goal.text(), b.rules.size());
        CHECK(d.has_value() == oracle.contains({l, goal}));
        if (d) {
          AtomicJudgement end = check_atomic(b, *d);
          CHECK(end == AtomicJudgement{l, goal});
        }
      }
  }
}

TEST_CASE("atomic derivations round-trip through JSON") {
  Base b{{persist(ap()), axiom(aq()),
          AtomicRule({}, AdditiveBox{{AtomicSequent{{}, aq()}}}, ap())},
         {},
         {}};
  auto d = derive(b, {}, ap(), 3);
  REQUIRE(d.has_value());
  Json j = to_json(*d, b);
  AtomicDerivation back = atomic_derivation_from_json(j, b);
  CHECK(to_json(back, b) == j);
  CHECK(check_atomic(b, back) == check_atomic(b, *d));
}

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "corpus.hpp"
#include "illbes/girard.hpp"
#include "illbes/json_io.hpp"
#include "illbes/parse.hpp"
#include "illbes/prove.hpp"
#include "illbes/simulation.hpp"

using namespace illbes;

namespace {
Formula fa() { return Formula::atom("a"); }
Formula fb() { return Formula::atom("b"); }
Formula fp() { return Formula::atom("p"); }
Formula fq() { return Formula::atom("q"); }
}  // namespace

TEST_CASE("subformula closure") {
  auto xi = subformula_closure(parse_sequent("|- p -o q"));
  CHECK(xi == std::set<Formula>{fp(), fq(), Formula::lolli(fp(), fq())});

  auto xi2 = subformula_closure(parse_sequent("!a |- a"));
  CHECK(xi2 == std::set<Formula>{fa(), Formula::bang(fa())});

  // Idempotent and containing the sequent's formulas.
  Sequent s = parse_sequent("!(a & b) |- !a * !b");
  auto once = subformula_closure(s);
  Sequent again{Multiset<Formula>(), s.conclusion};
  for (const Formula& f : once) again.context.insert(f);
  CHECK(subformula_closure(again) == once);
  CHECK(once.contains(s.conclusion));
  CHECK(once.contains(Formula::bang(Formula::with(fa(), fb()))));
}

TEST_CASE("flattening is injective with a left inverse, identity on atoms and units") {
  Sequent s = parse_sequent("p -o q, q -o p |- 1");
  auto xi = subformula_closure(s);
  FlatteningMap m = FlatteningMap::over(xi);

  CHECK(m.flatten(fp()) == AtomId::user("p"));
  CHECK(m.flatten(Formula::one()) == AtomId::one_mirror());
  CHECK(m.deflatten(m.flatten(Formula::lolli(fp(), fq()))) == Formula::lolli(fp(), fq()));
  CHECK(m.flatten(Formula::lolli(fp(), fq())) != m.flatten(Formula::lolli(fq(), fp())));
  CHECK(m.flatten(Formula::lolli(fp(), fq())).is_flattened());

  // Fresh atoms never collide with user atoms, and the inverse restores the
  // whole domain.
  for (const Formula& f : xi) {
    AtomId a = m.flatten(f);
    if (!f.is_atom()) CHECK(a.is_flattened());
    CHECK(m.deflatten(a) == f);
  }
  CHECK_THROWS_AS(m.flatten(Formula::tensor(fp(), fq())), CheckError);
  CHECK_THROWS_AS(m.deflatten(AtomId::fresh(99)), CheckError);
  // Atoms outside the image de-flatten to themselves.
  CHECK(m.deflatten(AtomId::user("zebra")) == Formula::atom("zebra"));
}

TEST_CASE("simulation base contains exactly the instances for the closure") {
  Sequent s = parse_sequent("|- p -o q");
  auto xi = subformula_closure(s);
  FlatteningMap m = FlatteningMap::over(xi);
  SimulationBase nb = build_simulation_base(xi, m);
  AtomId head = m.flatten(Formula::lolli(fp(), fq()));

  // -oI instance: one box discharging p.
  AtomicRule lolli_i({AdditiveBox{{AtomicSequent{Multiset<AtomId>{AtomId::user("p")},
                                                 AtomId::user("q")}}}},
                     {}, head);
  CHECK(nb.base.rules.contains(lolli_i));
  // -oE instance: two premise-free boxes.
  AtomicRule lolli_e({AdditiveBox{{AtomicSequent{{}, head}}},
                      AdditiveBox{{AtomicSequent{{}, AtomId::user("p")}}}},
                     {}, AtomId::user("q"));
  CHECK(nb.base.rules.contains(lolli_e));
  CHECK(nb.base.rules.size() == 2);
  CHECK(nb.base.top_families.empty());
  CHECK(persistent_atoms(nb.base).empty());

  // An atom-only closure yields no rules at all.
  SimulationBase tiny = simulation_base_for(parse_sequent("p |- p"));
  CHECK(tiny.base.rules.empty());
  CHECK(tiny.base.top_families.empty());
  CHECK(tiny.base.zero_families.empty());
}

TEST_CASE("the only persistent atoms simulate bang formulas") {
  SimulationBase nb = simulation_base_for(parse_sequent("!a |- a"));
  CHECK(persistent_atoms(nb.base) ==
        std::set<AtomId>{nb.map.flatten(Formula::bang(fa()))});

  SimulationBase nb2 = simulation_base_for(parse_sequent("!(a & b) |- !a * !b"));
  std::set<AtomId> expect;
  for (const Formula& f : nb2.map.domain())
    if (f.is_bang()) expect.insert(nb2.map.flatten(f));
  CHECK(persistent_atoms(nb2.base) == expect);
}

TEST_CASE("validity checking round-trips the corpus core") {
  struct Row {
    const char* sequent;
    bool valid;
  };
  const Row rows[] = {
      {"a |- a", true},       {"!a |- a * a", true},
      {"a |- a * a", false},
  };
  for (const Row& row : rows) {
    Sequent s = parse_sequent(row.sequent);
    auto d = check_validity(s, 8);
    CAPTURE(row.sequent);
    CHECK(d.has_value() == row.valid);
    if (d) CHECK(check_nill(*d) == s);
  }
}

TEST_CASE("de-flattening single rule applications") {
  // Ref maps to Ax.
  SimulationBase tiny = simulation_base_for(parse_sequent("p |- p"));
  NILLDerivation ax = deflat_derivation(tiny, AtomicDerivation(AtomId::user("p")));
  CHECK(ax.rule() == NILLRule::Ax);
  CHECK(check_nill(ax) == parse_sequent("p |- p"));

  // TensorI over two Refs maps to TensorI over two Axs.
  Sequent s = parse_sequent("p, q |- p * q");
  SimulationBase nb = simulation_base_for(s);
  auto d = derive(nb.base, nb.map.flatten(s.context), nb.map.flatten(s.conclusion), 4);
  REQUIRE(d.has_value());
  NILLDerivation nd = deflat_derivation(nb, *d);
  CHECK(nd.rule() == NILLRule::TensorI);
  CHECK(check_nill(nd) == s);

  // A promotion application maps to Prom(n) with n = |D|.
  Sequent sp = parse_sequent("!a |- !!a");
  SimulationBase nbp = simulation_base_for(sp);
  auto dp = derive(nbp.base, nbp.map.flatten(sp.context), nbp.map.flatten(sp.conclusion), 6);
  REQUIRE(dp.has_value());
  NILLDerivation ndp = deflat_derivation(nbp, *dp);
  CHECK(check_nill(ndp) == sp);
}

TEST_CASE("every derivation over the simulation base de-flattens") {
  // Exhaustively: for each corpus-style goal over its own simulation base,
  // whatever the engine returns must check against the base (family
  // instances included) and de-flatten into a kernel-checked proof.
  const char* sequents[] = {"a & b |- b & a", "a + b |- b + a", "0 |- c",
                            "|- top",         "a, 0 |- top",    "1, a |- a",
                            "!a |- a * a"};
  for (const char* txt : sequents) {
    Sequent s = parse_sequent(txt);
    SimulationBase nb = simulation_base_for(s);
    Multiset<AtomId> ctx = nb.map.flatten(s.context);
    AtomId goal = nb.map.flatten(s.conclusion);
    auto d = derive(nb.base, ctx, goal, 8);
    CAPTURE(txt);
    REQUIRE(d.has_value());
    CHECK(check_atomic(nb.base, *d) == AtomicJudgement{ctx, goal});
    NILLDerivation nd = deflat_derivation(nb, *d);
    CHECK(check_nill(nd) == s);
  }
}

TEST_CASE("family-instance derivations round-trip through JSON") {
  Sequent s = parse_sequent("a, 0 |- top");
  SimulationBase nb = simulation_base_for(s);
  Multiset<AtomId> ctx = nb.map.flatten(s.context);
  AtomId goal = nb.map.flatten(s.conclusion);
  auto d = derive(nb.base, ctx, goal, 6);
  REQUIRE(d.has_value());
  Json j = to_json(*d, nb.base);
  AtomicDerivation back = atomic_derivation_from_json(j, nb.base);
  CHECK(to_json(back, nb.base) == j);
  CHECK(check_atomic(nb.base, back) == AtomicJudgement{ctx, goal});
}

TEST_CASE("structural cut, forward direction") {
  // From m(!a) + K |- p and 0 |-_C m(a), conclude K |-_C p.
  Sequent s = parse_sequent("!a |- a");
  SimulationBase nb = simulation_base_for(s);
  AtomId bang_a = nb.map.flatten(Formula::bang(fa()));
  AtomId plain_a = nb.map.flatten(fa());

  auto with_bang = derive(nb.base, Multiset<AtomId>{bang_a}, plain_a, 5);
  REQUIRE(with_bang.has_value());

  Base c = nb.base;
  c.rules.insert(AtomicRule({}, {}, plain_a));
  auto closed_a = derive(c, {}, plain_a, 3);
  REQUIRE(closed_a.has_value());

  AtomicDerivation out =
      structural_cut_forward(nb, nb.base, Formula::bang(fa()), *with_bang, c, *closed_a);
  CHECK(check_atomic(c, out) == AtomicJudgement{{}, plain_a});
}

TEST_CASE("structural cut, forward direction with a reflexive host") {
  // K = 0 and p = m(!a): the host is Ref(m(!a)) and the output is the
  // promoted closed derivation itself.
  Sequent s = parse_sequent("!a |- a");
  SimulationBase nb = simulation_base_for(s);
  AtomId bang_a = nb.map.flatten(Formula::bang(fa()));
  AtomId plain_a = nb.map.flatten(fa());
  Base c = nb.base;
  c.rules.insert(AtomicRule({}, {}, plain_a));
  auto closed_a = derive(c, {}, plain_a, 3);
  REQUIRE(closed_a.has_value());
  AtomicDerivation out = structural_cut_forward(nb, nb.base, Formula::bang(fa()),
                                                AtomicDerivation(bang_a), c, *closed_a);
  AtomicJudgement end = check_atomic(c, out);
  CHECK(end == AtomicJudgement{{}, bang_a});
  CHECK_FALSE(out.is_ref());
  CHECK(out.rule().modal.length() == 1);
}

TEST_CASE("structural cut, backward direction: Ref becomes a weakening") {
  Sequent s = parse_sequent("!a |- a");
  SimulationBase nb = simulation_base_for(s);
  AtomId bang_a = nb.map.flatten(Formula::bang(fa()));
  AtomId plain_a = nb.map.flatten(fa());

  AtomicDerivation ref(plain_a);
  AtomicDerivation out = structural_cut_backward(nb, nb.base, Formula::bang(fa()), ref);
  AtomicJudgement end = check_atomic(nb.base, out);
  CHECK(end == AtomicJudgement{Multiset<AtomId>{bang_a, plain_a}, plain_a});
}

TEST_CASE("structural cut, backward direction over derived closures") {
  // Derivations of K |-_{B u {=> m(a)}} p transform into m(!a) + K |-_B p.
  Sequent s = parse_sequent("!a |- a * a");
  SimulationBase nb = simulation_base_for(s);
  AtomId bang_a = nb.map.flatten(Formula::bang(fa()));
  AtomId plain_a = nb.map.flatten(fa());

  Base hyp = nb.base;
  hyp.rules.insert(AtomicRule({}, {}, plain_a));

  std::mt19937 rng(23);
  std::vector<AtomId> alpha = nb.alphabet;
  int transformed = 0;
  for (const Multiset<AtomId>& k : multisets_up_to(alpha, 2))
    for (const AtomId& goal : alpha) {
      auto d = derive(hyp, k, goal, 5);
      if (!d) continue;
      AtomicDerivation out = structural_cut_backward(nb, nb.base, Formula::bang(fa()), *d);
      Multiset<AtomId> want = k;
      want.insert(bang_a);
      CHECK(check_atomic(nb.base, out) == AtomicJudgement{want, goal});
      ++transformed;
    }
  CHECK(transformed > 5);
}

TEST_CASE("structural cut, backward direction over the added axiom with persistent slots") {
  // An application of the added axiom <0,0,m(a)> that also absorbs a
  // persistent slot: dereliction replaces the axiom, the slot is weakened in,
  // and contraction collapses the copies.
  Sequent s = parse_sequent("!a |- a");
  SimulationBase nb = simulation_base_for(s);
  AtomId bang_a = nb.map.flatten(Formula::bang(fa()));
  AtomId plain_a = nb.map.flatten(fa());
  AtomicRule added({}, {}, plain_a);
  Base hyp = nb.base;
  hyp.rules.insert(added);

  AtomicDerivation node(added, {}, {}, {bang_a}, {Multiset<AtomId>{bang_a}},
                        {AtomicDerivation(bang_a)}, {});
  REQUIRE(check_atomic(hyp, node) == AtomicJudgement{Multiset<AtomId>{bang_a}, plain_a});

  AtomicDerivation out = structural_cut_backward(nb, nb.base, Formula::bang(fa()), node);
  Multiset<AtomId> want{bang_a, bang_a};
  CHECK(check_atomic(nb.base, out) == AtomicJudgement{want, plain_a});
}

TEST_CASE("structural cut directions compose") {
  // Backward then forward recovers the hypothesis judgement.
  Sequent s = parse_sequent("!a |- a");
  SimulationBase nb = simulation_base_for(s);
  AtomId bang_a = nb.map.flatten(Formula::bang(fa()));
  AtomId plain_a = nb.map.flatten(fa());

  Base hyp = nb.base;
  AtomicRule axiom_a({}, {}, plain_a);
  hyp.rules.insert(axiom_a);
  auto inner = derive(hyp, {}, plain_a, 3);
  REQUIRE(inner.has_value());
  AtomicDerivation backward =
      structural_cut_backward(nb, nb.base, Formula::bang(fa()), *inner);
  CHECK(check_atomic(nb.base, backward) == AtomicJudgement{Multiset<AtomId>{bang_a}, plain_a});

  AtomicDerivation forward = structural_cut_forward(nb, nb.base, Formula::bang(fa()), backward,
                                                    hyp, *inner);
  CHECK(check_atomic(hyp, forward) == AtomicJudgement{{}, plain_a});
}

TEST_CASE("definitional clauses of the simulated connectives") {
  for (const char* txt :
       {"p & q |- q", "|- p -o q", "p + q |- q", "|- 1", "|- !p", "top, 0 |- 1", "|- p * q"}) {
    Sequent s = parse_sequent(txt);
    SimulationBase nb = simulation_base_for(s);
    auto reports = sim_base_definition_checks(nb, 1, 6);
    for (const auto& rep : reports) {
      CAPTURE(txt, rep.clause, rep.failures);
      CHECK(rep.passed());
      CHECK(rep.instances > 0);
    }
  }
}

TEST_CASE("every corpus provable validates through the pipeline") {
  for (const auto& entry : corpus::golden()) {
    if (!entry.provable) continue;
    Sequent s = parse_sequent(entry.sequent);
    auto d = check_validity(s, 8);
    CAPTURE(entry.sequent);
    REQUIRE(d.has_value());
    CHECK(check_nill(*d) == s);
  }
}

TEST_CASE("one clause constructive witness") {
  // The right-to-left direction at K = 0, p = m(1): the 1I instance closes
  // |- m(1) directly.
  Sequent s = parse_sequent("|- 1");
  SimulationBase nb = simulation_base_for(s);
  AtomId one = nb.map.flatten(Formula::one());
  AtomicRule one_i({}, {}, one);
  CHECK(nb.base.rules.contains(one_i));
  AtomicDerivation d(one_i, {}, {}, {}, {}, {}, {});
  CHECK(check_atomic(nb.base, d) == AtomicJudgement{{}, one});
}

TEST_CASE("girard translation clauses") {
  CHECK(girard_translate(IPLFormula::atom("p")) == fp());
  CHECK(girard_translate(IPLFormula::conj(IPLFormula::atom("p"), IPLFormula::atom("q"))) ==
        Formula::with(fp(), fq()));
  CHECK(girard_translate(IPLFormula::disj(IPLFormula::atom("p"), IPLFormula::atom("q"))) ==
        Formula::plus(Formula::bang(fp()), Formula::bang(fq())));
  CHECK(girard_translate(IPLFormula::implies(IPLFormula::atom("p"), IPLFormula::atom("q"))) ==
        Formula::lolli(Formula::bang(fp()), fq()));
  CHECK(girard_translate(IPLFormula::bottom()) == Formula::zero());

  // Structural: translation is compositional on a parsed example.
  IPLFormula f = parse_ipl_formula("(p -> q) & (q | bot)");
  Formula t = girard_translate(f);
  CHECK(t == Formula::with(Formula::lolli(Formula::bang(fp()), fq()),
                           Formula::plus(Formula::bang(fq()), Formula::bang(Formula::zero()))));
  CHECK_THROWS_AS(parse_ipl_formula("p ->"), ParseError);
}

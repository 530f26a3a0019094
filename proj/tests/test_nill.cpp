#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "corpus.hpp"
#include "illbes/json_io.hpp"
#include "illbes/nill.hpp"
#include "illbes/parse.hpp"
#include "illbes/prove.hpp"
#include "illbes/star.hpp"

using namespace illbes;

namespace {
Formula fa() { return Formula::atom("a"); }
Formula fp() { return Formula::atom("p"); }
Formula fq() { return Formula::atom("q"); }
}  // namespace

TEST_CASE("kernel accepts rule instances and computes endsequents") {
  CHECK(check_nill(nill::ax(fp())) == parse_sequent("p |- p"));

  NILLDerivation ti = nill::tensor_i(nill::ax(fp()), nill::ax(fq()));
  CHECK(check_nill(ti) == parse_sequent("p, q |- p * q"));

  // &I premises must share one context.
  NILLDerivation bad = nill::with_i(nill::ax(fp()), nill::ax(fq()));
  CHECK_THROWS_WITH(check_nill(bad), Catch::Matchers::ContainsSubstring("share one context"));

  NILLDerivation curry = nill::lolli_i(fp(), nill::lolli_i(fq(), ti));
  CHECK(check_nill(curry) == parse_sequent("|- p -o q -o p * q"));

  // Promotion: the closed premise context must be exactly the promoted bangs.
  NILLDerivation prom1 =
      nill::prom({nill::ax(Formula::bang(fa())), nill::ax(Formula::bang(fa()))});
  CHECK(check_nill(prom1) == parse_sequent("!a |- !!a"));
  NILLDerivation prom_bad = nill::prom({nill::ax(Formula::bang(fa())), nill::ax(fa())});
  CHECK_THROWS_AS(check_nill(prom_bad), CheckError);

  // Promotion with n = 0 proves |- !1.
  NILLDerivation prom0 = nill::prom({nill::one_i()});
  CHECK(check_nill(prom0) == parse_sequent("|- !1"));

  NILLDerivation topi = nill::top_i({nill::ax(fp()), nill::ax(fq())});
  CHECK(check_nill(topi) == parse_sequent("p, q |- top"));

  NILLDerivation z = nill::zero_e(Formula::atom("c"), {nill::ax(Formula::zero())});
  CHECK(check_nill(z) == parse_sequent("0 |- c"));

  NILLDerivation ctr = nill::ctr(
      nill::ax(Formula::bang(fa())),
      nill::tensor_i(nill::der(nill::ax(Formula::bang(fa())), nill::ax(fa())),
                     nill::der(nill::ax(Formula::bang(fa())), nill::ax(fa()))));
  CHECK(check_nill(ctr) == parse_sequent("!a |- a * a"));
}

TEST_CASE("kernel rejects malformed instances") {
  CHECK_THROWS_AS(check_nill(nill::lolli_e(nill::ax(fp()), nill::ax(fq()))), CheckError);
  CHECK_THROWS_AS(check_nill(nill::lolli_i(fq(), nill::ax(fp()))), CheckError);
  CHECK_THROWS_AS(check_nill(nill::der(nill::ax(fp()), nill::ax(fq()))), CheckError);
  // PlusE minor premises must share the residual context and conclusion.
  NILLDerivation pe = nill::plus_e(
      nill::ax(Formula::plus(fp(), fq())),
      nill::lolli_e(nill::ax(Formula::lolli(fp(), fa())), nill::ax(fp())),
      nill::ax(fq()));
  CHECK_THROWS_AS(check_nill(pe), CheckError);
}

TEST_CASE("star checker handles Ref and App clauses") {
  StarDerivation ref(Formula::lolli(fp(), fq()));
  CHECK(check_star(ref) == parse_sequent("p -o q |- p -o q"));

  // Prom with no bangs over a closed OneI subderivation: |-* !1.
  StarDerivation one_i(SchemaInstance{SchemaKind::OneI, {}}, {}, {}, {}, {}, {});
  StarDerivation prom0(SchemaInstance{SchemaKind::Prom, {Formula::one()}}, {}, {}, {}, {},
                       {one_i});
  CHECK(check_star(prom0) == parse_sequent("|- !1"));

  // Bang multiset elements need a top-level bang.
  StarDerivation bad(SchemaInstance{SchemaKind::Prom, {Formula::one()}},
                     {Multiset<Formula>::singleton(fq())}, Multiset<Formula>::singleton(fq()),
                     {}, {StarDerivation(fq())}, {one_i});
  CHECK_THROWS_WITH(check_star(bad), Catch::Matchers::ContainsSubstring("top-level !"));

  // TensorI as the two-box schema instance.
  StarDerivation ti(SchemaInstance{SchemaKind::TensorI, {fp(), fq()}},
                    {Multiset<Formula>::singleton(fp()), Multiset<Formula>::singleton(fq())}, {},
                    {{StarDerivation(fp())}, {StarDerivation(fq())}}, {}, {});
  CHECK(check_star(ti) == parse_sequent("p, q |- p * q"));

  // A modal subderivation may use only the bang multiset as open assumptions.
  StarDerivation leaky(SchemaInstance{SchemaKind::Prom, {fp()}},
                       {Multiset<Formula>::singleton(fp())}, {}, {}, {},
                       {StarDerivation(fp())});
  CHECK_THROWS_AS(check_star(leaky), CheckError);
}

TEST_CASE("translations preserve endsequents both ways") {
  CHECK(check_star(star_of_nill(nill::ax(fp()))) == parse_sequent("p |- p"));
  CHECK(nill_of_star(StarDerivation(fp())).rule() == NILLRule::Ax);

  for (const auto& entry : corpus::golden()) {
    if (!entry.provable) continue;
    Sequent s = parse_sequent(entry.sequent);
    auto nd = prove_nill(s, 8);
    REQUIRE(nd.has_value());
    StarDerivation sd = star_of_nill(*nd);
    CHECK(check_star(sd) == s);
    NILLDerivation back = nill_of_star(sd);
    CHECK(check_nill(back) == s);
  }
}

TEST_CASE("translation handles bang multisets on modal-free schemas") {
  // Wk as an App with a bang multiset: tensor introduction carrying one
  // unused !a premise becomes TensorI under a Wk step.
  StarDerivation ti(SchemaInstance{SchemaKind::TensorI, {fp(), fq()}},
                    {Multiset<Formula>::singleton(fp()), Multiset<Formula>::singleton(fq()),
                     Multiset<Formula>::singleton(Formula::bang(fa()))},
                    Multiset<Formula>::singleton(Formula::bang(fa())),
                    {{StarDerivation(fp())}, {StarDerivation(fq())}},
                    {StarDerivation(Formula::bang(fa()))}, {});
  Sequent end = check_star(ti);
  CHECK(end == parse_sequent("p, q, !a |- p * q"));
  NILLDerivation back = nill_of_star(ti);
  CHECK(check_nill(back) == end);
  CHECK(back.rule() == NILLRule::Wk);
}

namespace {

Formula small_formula(std::mt19937& rng) {
  switch (std::uniform_int_distribution<int>(0, 6)(rng)) {
    case 0: return fa();
    case 1: return fp();
    case 2: return fq();
    case 3: return Formula::one();
    case 4: return Formula::bang(fa());
    case 5: return Formula::with(fp(), fq());
    default: return Formula::tensor(fa(), fq());
  }
}

// Grows a pool of valid derivations by forward rule application, so the
// translators can be property-tested on trees the corpus search never builds.
std::vector<NILLDerivation> random_derivation_pool(std::mt19937& rng, std::size_t steps) {
  std::vector<NILLDerivation> pool{nill::one_i(), nill::top_i({})};
  for (int i = 0; i < 4; ++i) pool.push_back(nill::ax(small_formula(rng)));
  auto any = [&]() -> const NILLDerivation& {
    return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
  };
  for (std::size_t i = 0; i < steps; ++i) {
    const NILLDerivation& d = any();
    Sequent end = check_nill(d);
    Formula phi = small_formula(rng);
    switch (std::uniform_int_distribution<int>(0, 12)(rng)) {
      case 0: {
        if (end.context.empty()) break;
        std::vector<Formula> occ = end.context.expand();
        pool.push_back(nill::lolli_i(
            occ[std::uniform_int_distribution<std::size_t>(0, occ.size() - 1)(rng)], d));
        break;
      }
      case 1:
        if (end.conclusion.kind() == FormulaKind::Lolli)
          pool.push_back(nill::lolli_e(d, nill::ax(end.conclusion.left())));
        break;
      case 2: pool.push_back(nill::tensor_i(d, any())); break;
      case 3:
        pool.push_back(nill::tensor_e(
            nill::ax(Formula::tensor(phi, phi)),
            nill::tensor_i(nill::ax(phi), nill::ax(phi))));
        break;
      case 4: pool.push_back(nill::one_e(nill::ax(Formula::one()), d)); break;
      case 5: pool.push_back(nill::with_i(d, d)); break;
      case 6:
        if (end.conclusion.kind() == FormulaKind::With) pool.push_back(nill::with_e1(d));
        break;
      case 7: pool.push_back(nill::plus_i1(phi, d)); break;
      case 8:
        pool.push_back(
            nill::plus_e(nill::ax(Formula::plus(phi, phi)), nill::ax(phi), nill::ax(phi)));
        break;
      case 9: {
        std::vector<NILLDerivation> prems;
        for (int k = std::uniform_int_distribution<int>(0, 2)(rng); k-- > 0;)
          prems.push_back(any());
        pool.push_back(nill::top_i(std::move(prems)));
        break;
      }
      case 10: {
        Formula bang = Formula::bang(phi);
        pool.push_back(nill::prom({nill::ax(bang), nill::der(nill::ax(bang), nill::ax(phi))}));
        break;
      }
      case 11: pool.push_back(nill::wk(nill::ax(Formula::bang(phi)), d)); break;
      default: {
        // Two weakened-in copies of !phi feed the contraction.
        Formula bang = Formula::bang(phi);
        pool.push_back(nill::ctr(
            nill::ax(bang), nill::wk(nill::ax(bang), nill::wk(nill::ax(bang), d))));
        break;
      }
    }
  }
  return pool;
}

}  // namespace

TEST_CASE("translations preserve endsequents on generated derivations") {
  std::mt19937 rng(771);
  for (const NILLDerivation& d : random_derivation_pool(rng, 250)) {
    Sequent end = check_nill(d);
    StarDerivation sd = star_of_nill(d);
    CHECK(check_star(sd) == end);
    NILLDerivation back = nill_of_star(sd);
    CHECK(check_nill(back) == end);
  }
}

TEST_CASE("bounded search agrees with the corpus") {
  for (const auto& entry : corpus::golden()) {
    Sequent s = parse_sequent(entry.sequent);
    auto nd = prove_nill(s, 8);
    CAPTURE(entry.sequent);
    CHECK(nd.has_value() == entry.provable);
    if (nd) CHECK(check_nill(*nd) == s);
  }
}

TEST_CASE("star search matches sequent search on the corpus") {
  for (const auto& entry : corpus::golden()) {
    Sequent s = parse_sequent(entry.sequent);
    auto sd = prove_star(s, 8);
    CAPTURE(entry.sequent);
    CHECK(sd.has_value() == entry.provable);
    if (sd) CHECK(check_star(*sd) == s);
  }
}

TEST_CASE("specific searches") {
  // (0 : 1) at depth 1 closes by OneI.
  auto d = prove_nill(parse_sequent("|- 1"), 1);
  REQUIRE(d.has_value());
  CHECK(d->rule() == NILLRule::OneI);

  // {!a} : a*a within depth 6 uses Ctr, Der and TensorI.
  auto dup = prove_nill(parse_sequent("!a |- a * a"), 6);
  REQUIRE(dup.has_value());
  CHECK(check_nill(*dup) == parse_sequent("!a |- a * a"));

  // {a} : a*a stays unprovable at depth 6: linearity forbids duplication.
  CHECK_FALSE(prove_nill(parse_sequent("a |- a * a"), 6).has_value());
}

TEST_CASE("derivation JSON round-trips") {
  auto d = prove_nill(parse_sequent("!(a & b) |- !a * !b"), 8);
  REQUIRE(d.has_value());
  Json j = to_json(*d);
  NILLDerivation back = nill_derivation_from_json(j);
  CHECK(to_json(back) == j);
  CHECK(check_nill(back) == parse_sequent("!(a & b) |- !a * !b"));
  CHECK_THROWS_AS(nill_derivation_from_json(Json{{"rule", "nope"}}), IoError);
}

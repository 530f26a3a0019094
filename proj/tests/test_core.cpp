#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "illbes/formula.hpp"
#include "illbes/json_io.hpp"
#include "illbes/multiset.hpp"
#include "illbes/parse.hpp"

using namespace illbes;

namespace {

Formula fa() { return Formula::atom("a"); }
Formula fb() { return Formula::atom("b"); }
Formula fp() { return Formula::atom("p"); }
Formula fq() { return Formula::atom("q"); }

// Random formula generator for the round-trip and degree properties.
Formula random_formula(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 4 : 8);
  switch (pick(rng)) {
    case 0: return fp();
    case 1: return fq();
    case 2: return Formula::top();
    case 3: return Formula::zero();
    case 4: return Formula::one();
    case 5: return Formula::bang(random_formula(rng, depth - 1));
    case 6: {
      Formula l = random_formula(rng, depth - 1), r = random_formula(rng, depth - 1);
      return Formula::lolli(l, r);
    }
    case 7: {
      Formula l = random_formula(rng, depth - 1), r = random_formula(rng, depth - 1);
      return Formula::tensor(l, r);
    }
    default: {
      Formula l = random_formula(rng, depth - 1), r = random_formula(rng, depth - 1);
      return std::uniform_int_distribution<int>(0, 1)(rng) ? Formula::with(l, r)
                                                           : Formula::plus(l, r);
    }
  }
}

std::size_t binom(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("parser handles the declared grammar") {
  CHECK(parse_formula("p -o q") == Formula::lolli(fp(), fq()));
  CHECK(parse_formula("!(p & q)") == Formula::bang(Formula::with(fp(), fq())));
  CHECK(parse_formula("p * q -o r") ==
        Formula::lolli(Formula::tensor(fp(), fq()), Formula::atom("r")));
  // Precedence: ! > * > & > + > -o; -o right-associative, the rest left.
  CHECK(parse_formula("!p * q") == Formula::tensor(Formula::bang(fp()), fq()));
  CHECK(parse_formula("p * q & r + s") ==
        Formula::plus(Formula::with(Formula::tensor(fp(), fq()), Formula::atom("r")),
                      Formula::atom("s")));
  CHECK(parse_formula("p -o q -o r") ==
        Formula::lolli(fp(), Formula::lolli(fq(), Formula::atom("r"))));
  CHECK(parse_formula("p + q + r") ==
        Formula::plus(Formula::plus(fp(), fq()), Formula::atom("r")));
  CHECK(parse_formula("top") == Formula::top());
  CHECK(parse_formula("1") == Formula::one());
  CHECK(parse_formula("0") == Formula::zero());
}

TEST_CASE("parser reports positions on bad input") {
  CHECK_THROWS_AS(parse_formula("p -o"), ParseError);
  CHECK_THROWS_AS(parse_formula("p q"), ParseError);
  CHECK_THROWS_AS(parse_formula("(p"), ParseError);
  CHECK_THROWS_AS(parse_formula("p ⊗ q"), ParseError);
  CHECK_THROWS_AS(parse_formula("Pascal"), ParseError);
  try {
    parse_formula("p * (q + )");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position == 9);
  }
}

TEST_CASE("sequent parsing") {
  Sequent s = parse_sequent("!a, b |- a * b");
  CHECK(s.context.size() == 2);
  CHECK(s.context.count(Formula::bang(fa())) == 1);
  CHECK(s.conclusion == Formula::tensor(fa(), fb()));
  CHECK(parse_sequent("|- 1").context.empty());
  CHECK_THROWS_AS(parse_sequent("a, b"), ParseError);

  auto [ctx, concl] = parse_atomic_sequent("p, p, q |- r");
  CHECK(ctx.count(AtomId::user("p")) == 2);
  CHECK(concl == AtomId::user("r"));
  CHECK_THROWS_AS(parse_atomic_sequent("p * q |- r"), ParseError);
}

TEST_CASE("printing round-trips through the parser") {
  std::mt19937 rng(20240901);
  for (int i = 0; i < 500; ++i) {
    Formula f = random_formula(rng, 4);
    CHECK(parse_formula(f.text()) == f);
  }
}

TEST_CASE("degree follows the recursion measure") {
  CHECK(fp().degree() == 1);
  CHECK(Formula::top().degree() == 2);
  CHECK(Formula::one().degree() == 2);
  CHECK(Formula::zero().degree() == 2);
  CHECK(Formula::bang(Formula::lolli(fp(), fq())).degree() == 4);

  // Strictly positive and strictly monotone in subterms.
  std::mt19937 rng(7);
  for (int i = 0; i < 200; ++i) {
    Formula f = random_formula(rng, 4);
    CHECK(f.degree() >= 1);
    if (f.is_bang()) CHECK(f.degree() > f.child().degree());
    if (f.is_binary()) {
      CHECK(f.degree() > f.left().degree());
      CHECK(f.degree() > f.right().degree());
    }
  }
}

TEST_CASE("multiset union adds counts") {
  Multiset<std::string> g{"a", "a", "b"};
  Multiset<std::string> d{"b", "c", "a"};
  Multiset<std::string> u = mset_union(g, d);
  CHECK(u.count("a") == 3);
  CHECK(u.count("b") == 2);
  CHECK(u.count("c") == 1);
  CHECK(u.size() == 6);

  CHECK(mset_union(Multiset<std::string>{}, d) == d);
  Multiset<std::string> p{"p"};
  CHECK(mset_union(p, p).count("p") == 2);
}

TEST_CASE("multiset union is associative and commutative with empty unit") {
  std::mt19937 rng(99);
  std::uniform_int_distribution<int> cnt(0, 3);
  auto rand_mset = [&] {
    Multiset<int> m;
    for (int v = 0; v < 4; ++v) m.insert(v, cnt(rng));
    return m;
  };
  for (int i = 0; i < 100; ++i) {
    Multiset<int> a = rand_mset(), b = rand_mset(), c = rand_mset();
    CHECK(mset_union(a, b) == mset_union(b, a));
    CHECK(mset_union(mset_union(a, b), c) == mset_union(a, mset_union(b, c)));
    CHECK(mset_union(a, Multiset<int>{}) == a);
  }
}

TEST_CASE("multiset difference requires containment") {
  Multiset<int> a{1, 1, 2};
  CHECK(a.difference(Multiset<int>{1, 2}) == Multiset<int>{1});
  CHECK_THROWS_AS(a.difference(Multiset<int>{3}), CheckError);
  CHECK(a.contains(Multiset<int>{1, 1}));
  CHECK_FALSE(a.contains(Multiset<int>{2, 2}));
}

TEST_CASE("partition enumeration is exhaustive and deterministic") {
  Multiset<std::string> one{"p"};
  auto parts = all_partitions(one, 2);
  REQUIRE(parts.size() == 2);
  CHECK(parts[0][0].empty());
  CHECK(parts[0][1] == one);
  CHECK(parts[1][0] == one);
  CHECK(parts[1][1].empty());

  Multiset<std::string> two{"p", "q"};
  auto single = all_partitions(two, 1);
  REQUIRE(single.size() == 1);
  CHECK(single[0][0] == two);

  // {p,p} into two ordered parts: three splits, multiplicity respected.
  Multiset<std::string> pp{"p", "p"};
  auto splits = all_partitions(pp, 2);
  REQUIRE(splits.size() == 3);
  CHECK(splits[1][0] == one);
  CHECK(splits[1][1] == one);
}

TEST_CASE("partition counts match the stars-and-bars product") {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> cnt(0, 3);
  std::uniform_int_distribution<std::size_t> kpick(1, 3);
  for (int i = 0; i < 50; ++i) {
    Multiset<int> m;
    for (int v = 0; v < 3; ++v) m.insert(v, cnt(rng));
    std::size_t k = kpick(rng);
    std::size_t expected = 1;
    for (const auto& [v, c] : m.entries()) expected *= binom(c + k - 1, k - 1);
    std::size_t seen = 0;
    for_each_partition(m, k, [&](const std::vector<Multiset<int>>& parts) {
      Multiset<int> u;
      for (const auto& p : parts) u = mset_union(u, p);
      CHECK(u == m);
      ++seen;
      return true;
    });
    CHECK(seen == expected);
  }
}

TEST_CASE("bang context splitting preserves multiplicity") {
  Multiset<Formula> ctx;
  ctx.insert(Formula::bang(fp()));
  ctx.insert(fq());
  ctx.insert(Formula::bang(Formula::lolli(fp(), fq())));
  auto [bangs, rest] = split_bang_context(ctx);
  CHECK(bangs.size() == 2);
  CHECK(rest == Multiset<Formula>::singleton(fq()));
  CHECK(mset_union(bangs, rest) == ctx);

  auto [none, all] = split_bang_context(Multiset<Formula>{fp(), fq()});
  CHECK(none.empty());
  CHECK(all.size() == 2);

  Multiset<Formula> twice;
  twice.insert(Formula::bang(fp()), 2);
  auto [b2, r2] = split_bang_context(twice);
  CHECK(b2.size() == 2);
  CHECK(r2.empty());
}

TEST_CASE("atom namespaces stay disjoint and totally ordered") {
  AtomId u = AtomId::user("a");
  AtomId f = AtomId::fresh(0);
  CHECK(u.text() == "a");
  CHECK(f.text() == "#0");
  CHECK(u < f);  // user namespace sorts first
  CHECK(atom_from_text("#0") == f);
  CHECK(atom_from_text("#top") == AtomId::top_mirror());
  CHECK_THROWS_AS(atom_from_text("#x1"), IoError);
  CHECK_THROWS_AS(atom_from_text("X"), IoError);
  CHECK_THROWS_AS(atom_from_text("top"), IoError);
}

TEST_CASE("formula and sequent JSON round-trips with canonical fields") {
  std::mt19937 rng(11);
  for (int i = 0; i < 100; ++i) {
    Formula f = random_formula(rng, 3);
    CHECK(formula_from_json(to_json(f)) == f);
  }
  Sequent s = parse_sequent("!a, b |- a * b");
  CHECK(sequent_from_json(to_json(s)) == s);
  CHECK(to_json(Formula::lolli(fp(), fq())).dump() ==
        R"({"k":"lolli","l":{"k":"atom","name":"p"},"r":{"k":"atom","name":"q"}})");
}

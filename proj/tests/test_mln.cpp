#include <gtest/gtest.h>

#include <random>

#include "cmln/mln.hpp"
#include "cmln/parse.hpp"

using namespace cmln;

namespace {

Rational q(long p, long d = 1) { return make_rational(p, d); }

// heads(x) with expweights (1, -1): Z = 16 on four coins
CMln<Cyclotomic> alternating_coins() {
  CMln<Cyclotomic> m(Signature{{"heads", 1}});
  m.add(parse_formula("heads(x)"), {Cyclotomic(1L), Cyclotomic::from_polar(1, q(1, 2))});
  return m;
}

CMln<Cyclotomic> uniform_coins() {
  CMln<Cyclotomic> m(Signature{{"heads", 1}});
  m.add(parse_formula("heads(x)"), {Cyclotomic(1L)});
  return m;
}

CMln<Cyclotomic> friends_smokers(Cyclotomic a = Cyclotomic(1L), Cyclotomic b = Cyclotomic(1L)) {
  CMln<Cyclotomic> m(Signature{{"sm", 1}, {"fr", 2}});
  m.add(parse_formula("sm(x)"), {a});
  m.add(parse_formula("sm(x) & fr(x,y) => sm(y)"), {b});
  return m;
}

GroundWorld world_with(const CMln<Cyclotomic>& m, const Domain& d, const std::vector<std::string>& atoms) {
  auto index = std::make_shared<const GroundAtomIndex>(m.signature(), d);
  std::vector<Atom> as;
  for (const auto& a : atoms) as.push_back(parse_formula(a).atom());
  return GroundWorld::from_atoms(index, as);
}

Cyclotomic brute_z(const CMln<Cyclotomic>& m, const Domain& d) {
  Cyclotomic z;
  for (const auto& w : enumerate_worlds(m.signature(), d)) z += unnormalized_weight(m, w);
  return z;
}

}  // namespace

TEST(Mln, UnnormalizedWeights) {
  auto m = alternating_coins();
  auto d = Domain::of_size(4);
  EXPECT_EQ(unnormalized_weight(m, world_with(m, d, {"heads(A1)", "heads(A3)"})), Cyclotomic(2L));
  EXPECT_EQ(unnormalized_weight(m, world_with(m, d, {"heads(A2)"})), Cyclotomic());
  auto u = uniform_coins();
  EXPECT_EQ(unnormalized_weight(u, world_with(u, d, {"heads(A2)"})), Cyclotomic(1L));
}

TEST(Mln, PartitionFunction) {
  auto d = Domain::of_size(4);
  Oracle<Cyclotomic> oracle;
  EXPECT_EQ(partition_function(uniform_coins(), d, oracle), Cyclotomic(16L));
  EXPECT_EQ(partition_function(alternating_coins(), d, oracle), Cyclotomic(16L));
  EXPECT_EQ(oracle.stats().calls(), 3u);
  Oracle<Cyclotomic> lifted(Engine::lifted);
  EXPECT_EQ(partition_function(friends_smokers(), Domain::of_size(10), lifted),
            Cyclotomic(Rational(pow(Integer(2), 110))));
}

TEST(Mln, PartitionCacheAvoidsCalls) {
  Oracle<Cyclotomic> oracle;
  PartitionCache<Cyclotomic> cache;
  auto m = alternating_coins();
  auto d = Domain::of_size(3);
  auto z1 = partition_function(m, d, oracle, &cache);
  auto z2 = partition_function(m, d, oracle, &cache);
  EXPECT_EQ(z1, z2);
  EXPECT_EQ(oracle.stats().calls(), 2u);
  EXPECT_EQ(cache.size(), 1u);
}

TEST(Mln, WorldProbabilities) {
  auto m = alternating_coins();
  auto d = Domain::of_size(4);
  Cyclotomic z(16L);
  EXPECT_EQ(world_probability(m, world_with(m, d, {"heads(A1)"}), z), q(0));
  EXPECT_EQ(world_probability(m, world_with(m, d, {"heads(A1)", "heads(A4)"}), z), q(1, 8));
  auto u = uniform_coins();
  auto d2 = Domain::of_size(2);
  for (const auto& w : enumerate_worlds(u.signature(), d2)) EXPECT_EQ(world_probability(u, w, Cyclotomic(4L)), q(1, 4));
}

TEST(Mln, ImproperWorldNamesWitness) {
  CMln<Cyclotomic> m(Signature{{"heads", 1}});
  m.add(parse_formula("heads(x)"), {Cyclotomic(-1L)});
  auto d = Domain::of_size(2);
  auto w = world_with(m, d, {"heads(A1)"});
  try {
    world_probability(m, w, Cyclotomic(1L));
    FAIL();
  } catch (const ImproperModelError& e) {
    EXPECT_NE(std::string(e.what()).find("heads(A1)"), std::string::npos);
  }
}

TEST(Mln, Marginals) {
  auto d = Domain::of_size(4);
  Oracle<Cyclotomic> oracle;
  auto heads_a = parse_formula("heads(A1)");
  EXPECT_EQ(marginal(uniform_coins(), d, heads_a, oracle), q(1, 2));
  EXPECT_EQ(marginal(uniform_coins(), d, parse_formula("heads(A1) | ~heads(A1)"), oracle), q(1));

  // brute: sum of world probabilities with heads(A1)
  auto m = alternating_coins();
  Rational expect = 0;
  for (const auto& w : enumerate_worlds(m.signature(), d))
    if (satisfies(w, heads_a)) expect += world_probability(m, w, Cyclotomic(16L));
  EXPECT_EQ(marginal(m, d, heads_a, oracle), expect);
  EXPECT_EQ(expect, q(1, 2));

  EXPECT_THROW(marginal(m, d, parse_formula("heads(x)"), oracle), LogicError);
  EXPECT_THROW(marginal(m, d, parse_formula("heads(B)"), oracle), LogicError);
}

TEST(Mln, MarginalComplementSumsToOne) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<long> num(1, 5);
  auto d = Domain::of_size(2);
  Oracle<Cyclotomic> oracle;
  PartitionCache<Cyclotomic> cache;
  for (int trial = 0; trial < 6; ++trial) {
    auto m = friends_smokers(Cyclotomic(q(num(rng), num(rng))), Cyclotomic(q(num(rng), num(rng))));
    for (const char* text : {"sm(A1)", "fr(A1,A2) & sm(A2)", "fr(A2,A2) => sm(A1)"}) {
      auto f = parse_formula(text);
      auto p = marginal(m, d, f, oracle, &cache), np = marginal(m, d, ~f, oracle, &cache);
      EXPECT_EQ(p + np, q(1)) << text;
    }
  }
}

TEST(Mln, CountDistributionBrute) {
  auto d = Domain::of_size(4);
  auto alt = count_distribution_bruteforce(alternating_coins(), d);
  std::vector<Rational> expect{q(1, 8), q(0), q(3, 4), q(0), q(1, 8)};
  EXPECT_EQ(alt.values, expect);

  auto bin = count_distribution_bruteforce(uniform_coins(), d);
  std::vector<Rational> b{q(1, 16), q(4, 16), q(6, 16), q(4, 16), q(1, 16)};
  EXPECT_EQ(bin.values, b);
}

TEST(Mln, CountDistributionSumsToOne) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<long> num(1, 6);
  for (std::size_t n = 1; n <= 3; ++n) {
    auto m = friends_smokers(Cyclotomic(q(num(rng), num(rng))), Cyclotomic(q(num(rng), num(rng))));
    auto dist = count_distribution_bruteforce(m, Domain::of_size(n));
    Rational s = 0;
    for (const auto& v : dist.values) {
      EXPECT_GE(v, 0);
      s += v;
    }
    EXPECT_EQ(s, q(1));
  }
}

TEST(Mln, PartitionViaWfomcMatchesWorldSum) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<long> num(1, 4);
  for (std::size_t n = 1; n <= 3; ++n) {
    for (int trial = 0; trial < 3; ++trial) {
      CMln<Cyclotomic> m(Signature{{"sm", 1}, {"fr", 2}});
      m.add(parse_formula("sm(x)"), {Cyclotomic(q(num(rng), num(rng))), Cyclotomic::root_of_unity(1, 3)});
      m.add(parse_formula("sm(x) & fr(x,y) => sm(y)"),
            {Cyclotomic(q(num(rng))), Cyclotomic::root_of_unity(1, 4).scaled(q(num(rng)))});
      m.add(parse_formula("fr(x,x)"), {Cyclotomic(q(1, 2)), Cyclotomic(q(num(rng)))});
      auto d = Domain::of_size(n);
      auto red = mln_to_wfomc(m);
      Oracle<Cyclotomic> oracle;
      EXPECT_EQ(summed_wfomc(red, red.theory, d, oracle), brute_z(m, d)) << "n=" << n;
    }
  }
}

TEST(Mln, EqualCountVectorsEqualProbability) {
  auto m = friends_smokers(Cyclotomic(q(3, 2)), Cyclotomic(q(1, 5)));
  auto d = Domain::of_size(3);
  auto index = std::make_shared<const GroundAtomIndex>(m.signature(), d);
  Cyclotomic z = brute_z(m, d);
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::uint64_t> code(0, (std::uint64_t{1} << index->size()) - 1);
  auto formulas = m.formulas();
  int compared = 0;
  for (int trial = 0; trial < 20000 && compared < 100; ++trial) {
    auto a = GroundWorld::from_code(index, code(rng)), b = GroundWorld::from_code(index, code(rng));
    if (a == b || count_vector(formulas, a) != count_vector(formulas, b)) continue;
    EXPECT_EQ(world_probability(m, a, z), world_probability(m, b, z));
    ++compared;
  }
  EXPECT_EQ(compared, 100);
}

TEST(Mln, Supports) {
  auto d4 = Domain::of_size(4);
  auto s = support_bruteforce({parse_formula("heads(x)")}, d4);
  ASSERT_EQ(s.size(), 5u);
  for (std::uint64_t i = 0; i < 5; ++i) EXPECT_EQ(s[i], CountVector{i});

  auto pair = support_bruteforce({parse_formula("heads(x)"), parse_formula("~heads(x)")}, Domain::of_size(2));
  EXPECT_EQ(pair, (std::vector<CountVector>{{0, 2}, {1, 1}, {2, 0}}));

  auto fs = support_bruteforce(friends_smokers().formulas(), Domain::of_size(2));
  EXPECT_TRUE(std::is_sorted(fs.begin(), fs.end()));
  EXPECT_NE(std::find(fs.begin(), fs.end(), CountVector{0, 4}), fs.end());
  EXPECT_NE(std::find(fs.begin(), fs.end(), CountVector{2, 4}), fs.end());
  // one smoker: the grounding from the smoker to the other is false iff they are friends
  EXPECT_EQ(std::find(fs.begin(), fs.end(), CountVector{1, 2}), fs.end());
  EXPECT_NE(std::find(fs.begin(), fs.end(), CountVector{1, 3}), fs.end());

  EXPECT_THROW(support_bruteforce({parse_formula("r(x,y)")}, Domain::of_size(6)), SizeLimitError);
}

TEST(Mln, DegenerateAndImproperModels) {
  auto d = Domain::of_size(1);
  Oracle<Cyclotomic> oracle;
  CMln<Cyclotomic> zero(Signature{{"heads", 1}});
  zero.add(parse_formula("heads(x)"), {Cyclotomic(-1L)});
  EXPECT_THROW(partition_function(zero, d, oracle), DegenerateModelError);

  CMln<Cyclotomic> imag(Signature{{"heads", 1}});
  imag.add(parse_formula("heads(x)"), {Cyclotomic::root_of_unity(1, 4)});
  EXPECT_THROW(partition_function(imag, d, oracle), ImproperModelError);

  CMln<Cyclotomic> neg(Signature{{"heads", 1}});
  neg.add(parse_formula("heads(x)"), {Cyclotomic(-3L)});
  EXPECT_THROW(partition_function(neg, d, oracle), ImproperModelError);

  // proper Z but negative mass at count 1
  auto dist = [&] { return count_distribution_bruteforce(neg, Domain::of_size(2)); };
  EXPECT_THROW(dist(), ImproperModelError);

  Oracle<FloatComplex> fo;
  CMln<FloatComplex> fimag(Signature{{"heads", 1}});
  fimag.add(parse_formula("heads(x)"), {FloatComplex(0, 1)});
  EXPECT_THROW(partition_function(fimag, d, fo), ImproperModelError);
}

TEST(Mln, XiNamingAvoidsCollisions) {
  CMln<Cyclotomic> m(Signature{{"__xi_1", 1}, {"p", 1}});
  m.add(parse_formula("__xi_1(x) & p(x)"), {Cyclotomic(2L)});
  m.add(parse_formula("p(x)"), {Cyclotomic(3L)});
  auto red = mln_to_wfomc(m);
  ASSERT_EQ(red.xi.size(), 2u);
  EXPECT_EQ(red.xi[0].name, "__xi_1_1");
  EXPECT_EQ(red.xi[1].name, "__xi_2");
  Oracle<Cyclotomic> oracle;
  auto d = Domain::of_size(2);
  EXPECT_EQ(summed_wfomc(red, red.theory, d, oracle), brute_z(m, d));
}

TEST(Mln, ComponentCountMustMatch) {
  CMln<Cyclotomic> m;
  m.add(parse_formula("p(x)"), {Cyclotomic(1L), Cyclotomic(2L)});
  EXPECT_THROW(m.add(parse_formula("q(x)"), {Cyclotomic(1L)}), PreconditionError);
  EXPECT_THROW(m.add(parse_formula("p(x,y)"), {Cyclotomic(1L), Cyclotomic(1L)}), LogicError);
  EXPECT_EQ(m.components(), 2u);
}

TEST(Mln, FloatBinomialAtSixty) {
  CMln<FloatComplex> m(Signature{{"heads", 1}});
  m.add(parse_formula("heads(x)"), {std::exp(1.0)});
  Oracle<FloatComplex> oracle(Engine::lifted);
  auto z = partition_function(m, Domain::of_size(60), oracle);
  EXPECT_NEAR(std::log(z.real()), 60 * std::log1p(std::exp(1.0)), 1e-9);
  // ground queries carry constants, which the lifted engine rejects
  EXPECT_THROW(marginal(m, Domain::of_size(60), parse_formula("heads(A7)"), oracle), NotLiftableError);
}

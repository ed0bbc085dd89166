#include <gtest/gtest.h>

#include <random>

#include "cmln/expressivity.hpp"
#include "cmln/fourier.hpp"
#include "cmln/parse.hpp"

using namespace cmln;

namespace {

Rational q(long p, long d = 1) { return make_rational(p, d); }

std::vector<Formula> heads() { return {parse_formula("heads(x)")}; }
std::vector<Formula> friends_smokers() {
  return {parse_formula("sm(x)"), parse_formula("sm(x) & fr(x,y) => sm(y)")};
}

CountVector with_top(CountVector n) {
  n.push_back(1);
  return n;
}

// distribution over the formulas (T coordinate dropped, asserting it is always 1)
std::map<CountVector, Rational> drop_top(const CountGrid<Rational>& g) {
  std::map<CountVector, Rational> out;
  for (std::uint64_t i = 0; i < g.size(); ++i) {
    auto n = g.shape.point(i);
    if (n.back() != 1) {
      EXPECT_EQ(g.values[i], 0);
      continue;
    }
    n.pop_back();
    if (g.values[i] != 0) out[n] = g.values[i];
  }
  return out;
}

TargetDistribution random_target(std::mt19937_64& rng, const std::vector<CountVector>& support) {
  std::uniform_int_distribution<long> num(0, 5);
  std::vector<long> raw;
  long total = 0;
  for (std::size_t i = 0; i < support.size(); ++i) raw.push_back(num(rng)), total += raw.back();
  if (total == 0) raw[0] = total = 1;
  TargetDistribution t;
  for (std::size_t i = 0; i < support.size(); ++i)
    if (raw[i]) t[support[i]] = q(raw[i], total);
  return t;
}

}  // namespace

TEST(CompileDelta, Shape) {
  auto m = compile_delta(heads(), Domain::of_size(4), {2, 1});
  EXPECT_EQ(m.size(), 2u);
  EXPECT_EQ(m.components(), 5u);
  EXPECT_EQ(m.entries().back().formula, Formula::top());
  EXPECT_THROW(compile_delta(heads(), Domain::of_size(4), {5}), PreconditionError);
  EXPECT_THROW(compile_delta(heads(), Domain::of_size(4), {2, 0}), PreconditionError);
  EXPECT_THROW(compile_delta(heads(), Domain::of_size(4), {1, 1, 1}), PreconditionError);
}

TEST(CompileDelta, Examples) {
  auto d4 = Domain::of_size(4);
  auto m = compile_delta(heads(), d4, {2, 1});
  auto dist = drop_top(count_distribution_bruteforce(m, d4));
  EXPECT_EQ(dist, (std::map<CountVector, Rational>{{{2}, q(1)}}));
  Cyclotomic z(0L);
  for (const auto& w : enumerate_worlds(m.signature(), d4)) z += unnormalized_weight(m, w);
  EXPECT_EQ(z, Cyclotomic(30L));  // |J| * 6 worlds
  for (const auto& w : enumerate_worlds(m.signature(), d4))
    EXPECT_EQ(world_probability(m, w, z), w.true_count() == 2 ? q(1, 6) : q(0)) << w.to_string();

  auto d2 = Domain::of_size(2);
  auto one = compile_delta(heads(), d2, {1});
  for (const auto& w : enumerate_worlds(one.signature(), d2))
    EXPECT_EQ(world_probability(one, w, Cyclotomic(6L)), w.true_count() == 1 ? q(1, 2) : q(0));
  auto none = compile_delta(heads(), d2, {0, 1});
  for (const auto& w : enumerate_worlds(none.signature(), d2))
    EXPECT_EQ(world_probability(none, w, Cyclotomic(3L)), w.true_count() == 0 ? q(1) : q(0));
}

TEST(CompileDelta, IndicatorAtEverySupportPoint) {
  struct Case {
    std::vector<Formula> formulas;
    std::size_t n;
  };
  for (const auto& c : {Case{heads(), 4}, Case{friends_smokers(), 2}}) {
    auto d = Domain::of_size(c.n);
    auto support = support_bruteforce(c.formulas, d);
    for (const auto& n0 : support) {
      auto m = compile_delta(c.formulas, d, n0);
      auto dist = count_distribution_bruteforce(m, d);
      for (std::uint64_t i = 0; i < dist.size(); ++i)
        EXPECT_EQ(dist.values[i], dist.shape.point(i) == with_top(n0) ? q(1) : q(0));

      // equiprobable fiber
      auto formulas = m.formulas();
      Oracle<Cyclotomic> oracle;
      Cyclotomic z = partition_function(m, d, oracle);
      std::optional<Rational> fiber;
      for (const auto& w : enumerate_worlds(m.signature(), d)) {
        auto p = world_probability(m, w, z);
        if (count_vector(formulas, w) == with_top(n0)) {
          if (!fiber) fiber = p;
          EXPECT_EQ(p, *fiber);
          EXPECT_GT(p, 0);
        } else {
          EXPECT_EQ(p, 0);
        }
      }
    }
  }
}

TEST(CompileDelta, OutsideSupportIsDegenerate) {
  auto d = Domain::of_size(2);
  // heads and ~heads always sum to 2
  std::vector<Formula> pair{parse_formula("heads(x)"), parse_formula("~heads(x)")};
  auto m = compile_delta(pair, d, {1, 0});
  Oracle<Cyclotomic> oracle;
  EXPECT_THROW(partition_function(m, d, oracle), DegenerateModelError);
}

TEST(CompileDistribution, Examples) {
  Oracle<Cyclotomic> oracle;
  auto d2 = Domain::of_size(2);
  auto parity = compile_distribution(heads(), d2, {{{0}, q(1, 2)}, {{1}, q(0)}, {{2}, q(1, 2)}}, oracle);
  EXPECT_EQ(parity.components(), 2u * 3u);
  auto cd = count_distribution_bruteforce(parity, d2);
  EXPECT_EQ(drop_top(cd), (std::map<CountVector, Rational>{{{0}, q(1, 2)}, {{2}, q(1, 2)}}));

  auto d4 = Domain::of_size(4);
  auto single = compile_distribution(heads(), d4, {{{2, 1}, q(1)}}, oracle);
  EXPECT_EQ(single.components(), 5u);
  EXPECT_EQ(drop_top(count_distribution_bruteforce(single, d4)), (std::map<CountVector, Rational>{{{2}, q(1)}}));

  TargetDistribution bin{{{0}, q(1, 16)}, {{1}, q(1, 4)}, {{2}, q(3, 8)}, {{3}, q(1, 4)}, {{4}, q(1, 16)}};
  auto b = compile_distribution(heads(), d4, bin, oracle);
  EXPECT_EQ(b.components(), 25u);
  EXPECT_EQ(drop_top(count_distribution_bruteforce(b, d4)), bin);
  // same world distribution as the uniform classical model
  Cyclotomic z = partition_function(b, d4, oracle);
  EXPECT_EQ(z, Cyclotomic(1L));
  for (const auto& w : enumerate_worlds(b.signature(), d4)) EXPECT_EQ(world_probability(b, w, z), q(1, 16));
}

TEST(CompileDistribution, Errors) {
  Oracle<Cyclotomic> oracle;
  auto d = Domain::of_size(2);
  std::vector<Formula> pair{parse_formula("heads(x)"), parse_formula("~heads(x)")};
  EXPECT_THROW(compile_distribution(pair, d, {{{1, 0}, q(1)}}, oracle), UnreachableCountVectorError);
  EXPECT_THROW(compile_distribution(heads(), d, {{{1}, q(1, 2)}}, oracle), PreconditionError);
  EXPECT_THROW(compile_distribution(heads(), d, {{{1}, q(3, 2)}, {{0}, q(-1, 2)}}, oracle), PreconditionError);
  EXPECT_THROW(compile_distribution(heads(), d, {{{3}, q(1)}}, oracle), PreconditionError);
}

TEST(CompileDistribution, RandomTargetsRoundTrip) {
  std::mt19937_64 rng(6);
  Oracle<Cyclotomic> oracle;
  std::vector<Formula> with_t{parse_formula("heads(x)"), Formula::top()};
  for (std::size_t n : {2, 3, 4}) {
    auto d = Domain::of_size(n);
    auto support = support_bruteforce(with_t, d);
    for (int trial = 0; trial < 2; ++trial) {
      auto target = random_target(rng, support);
      auto m = compile_distribution(with_t, d, target, oracle);
      auto cd = drop_top(count_distribution_bruteforce(m, d));
      EXPECT_EQ(cd, target) << "n=" << n;
    }
  }
}

TEST(CompileDistribution, FriendsSmokersRoundTripViaWfomc) {
  std::mt19937_64 rng(13);
  Oracle<Cyclotomic> oracle;
  auto d = Domain::of_size(2);
  auto support = support_bruteforce(friends_smokers(), d);
  auto target = random_target(rng, support);
  auto m = compile_distribution(friends_smokers(), d, target, oracle);
  EXPECT_EQ(m.components(), target.size() * 15);
  auto via = count_distribution_via_wfomc(m, d, oracle);
  EXPECT_EQ(drop_top(via.distribution), target);
}

TEST(CompileDistribution, MixtureLinearity) {
  Oracle<Cyclotomic> oracle;
  auto d = Domain::of_size(3);
  TargetDistribution q1{{{0}, q(1, 2)}, {{3}, q(1, 2)}}, q2{{{1}, q(1, 3)}, {{2}, q(1, 3)}, {{3}, q(1, 3)}};
  Rational lambda = q(1, 3);
  TargetDistribution mix;
  for (const auto& [n, a] : q1) mix[n] += lambda * a;
  for (const auto& [n, a] : q2) mix[n] += (1 - lambda) * a;
  auto c1 = drop_top(count_distribution_bruteforce(compile_distribution(heads(), d, q1, oracle), d));
  auto c2 = drop_top(count_distribution_bruteforce(compile_distribution(heads(), d, q2, oracle), d));
  auto cm = drop_top(count_distribution_bruteforce(compile_distribution(heads(), d, mix, oracle), d));
  for (std::uint64_t n = 0; n <= 3; ++n) {
    CountVector k{n};
    Rational expect = lambda * (c1.count(k) ? c1[k] : Rational(0)) + (1 - lambda) * (c2.count(k) ? c2[k] : Rational(0));
    EXPECT_EQ(cm.count(k) ? cm[k] : Rational(0), expect);
  }
}

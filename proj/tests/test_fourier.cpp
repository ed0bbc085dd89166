#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "cmln/fourier.hpp"
#include "cmln/parse.hpp"

using namespace cmln;

namespace {

Rational q(long p, long d = 1) { return make_rational(p, d); }

CountGrid<Cyclotomic> random_rational_grid(std::mt19937_64& rng, std::vector<std::uint64_t> dims) {
  std::uniform_int_distribution<long> num(-9, 9), den(1, 7);
  CountGrid<Cyclotomic> g(GridShape(std::move(dims)), Cyclotomic());
  for (auto& v : g.values) v = Cyclotomic(q(num(rng), den(rng)));
  return g;
}

CountGrid<Cyclotomic> random_cyclotomic_grid(std::mt19937_64& rng, std::vector<std::uint64_t> dims) {
  std::uniform_int_distribution<long> num(-5, 5), den(1, 4);
  std::uniform_int_distribution<int> ord(0, 3);
  static const std::uint64_t orders[] = {1, 3, 4, 5};
  CountGrid<Cyclotomic> g(GridShape(std::move(dims)), Cyclotomic());
  for (auto& v : g.values) {
    std::uint64_t d = orders[ord(rng)];
    v = Cyclotomic::root_of_unity(static_cast<std::int64_t>(rng() % d), d).scaled(q(num(rng), den(rng))) +
        Cyclotomic(q(num(rng)));
  }
  return g;
}

Cyclotomic zeta(std::int64_t c, std::uint64_t d) { return Cyclotomic::root_of_unity(c, d); }

CMln<Cyclotomic> single(const std::string& f, std::vector<Cyclotomic> w) {
  CMln<Cyclotomic> m;
  m.add(parse_formula(f), std::move(w));
  return m;
}

}  // namespace

TEST(Dft, DeltaExamples) {
  CountGrid<Cyclotomic> d0(GridShape({4}), Cyclotomic());
  d0.at({0}) = Cyclotomic(1L);
  for (const auto& v : dft(d0).values) EXPECT_EQ(v, Cyclotomic(1L));

  CountGrid<Cyclotomic> d1(GridShape({2}), Cyclotomic());
  d1.at({1}) = Cyclotomic(1L);
  auto g = dft(d1);
  EXPECT_EQ(g.values, (std::vector<Cyclotomic>{Cyclotomic(1L), Cyclotomic(-1L)}));
  EXPECT_EQ(idft(g).values, d1.values);

  CountGrid<Cyclotomic> ones(GridShape({2, 2}), Cyclotomic(1L));
  auto go = dft(ones);
  EXPECT_EQ(go.at({0, 0}), Cyclotomic(4L));
  EXPECT_EQ(go.at({0, 1}), Cyclotomic());
  EXPECT_EQ(go.at({1, 1}), Cyclotomic());

  CountGrid<Cyclotomic> five(GridShape({5}), Cyclotomic(1L));
  auto f = idft(five);
  EXPECT_EQ(f.values[0], Cyclotomic(1L));
  for (int i = 1; i < 5; ++i) EXPECT_EQ(f.values[i], Cyclotomic());
}

TEST(Dft, ShiftedDeltaIsPhase) {
  CountGrid<Cyclotomic> d(GridShape({3, 4}), Cyclotomic());
  d.at({2, 1}) = Cyclotomic(1L);
  auto g = dft(d);
  for (std::uint64_t i = 0; i < g.size(); ++i) {
    auto k = g.shape.point(i);
    Cyclotomic expect = zeta(-2 * static_cast<std::int64_t>(k[0]), 3) * zeta(-static_cast<std::int64_t>(k[1]), 4);
    EXPECT_EQ(g.values[i], expect);
  }
}

TEST(Dft, ExactRoundTrip) {
  std::mt19937_64 rng(12);
  for (auto dims : std::vector<std::vector<std::uint64_t>>{{3, 4}, {7}, {2, 3, 5}, {1, 6}}) {
    auto f = random_rational_grid(rng, dims);
    EXPECT_EQ(idft(dft(f)).values, f.values);
    auto c = random_cyclotomic_grid(rng, dims);
    EXPECT_EQ(dft(idft(c)).values, c.values);
  }
}

TEST(Dft, ModularMatchesDirect) {
  std::mt19937_64 rng(31);
  for (auto dims : std::vector<std::vector<std::uint64_t>>{{3, 4}, {5, 6}, {2, 9}, {11}}) {
    auto c = random_cyclotomic_grid(rng, dims);
    auto direct = dft(c, TransformMethod::direct);
    EXPECT_EQ(dft(c, TransformMethod::modular).values, direct.values);
    EXPECT_EQ(idft(direct, TransformMethod::modular).values, c.values);
    EXPECT_EQ(idft(direct, TransformMethod::direct).values, c.values);
  }
  CountGrid<Cyclotomic> zero(GridShape({4, 3}), Cyclotomic());
  EXPECT_EQ(dft(zero, TransformMethod::modular).values, zero.values);
}

TEST(Dft, ParsevalExactAndFloat) {
  std::mt19937_64 rng(77);
  auto f = random_cyclotomic_grid(rng, {4, 5});
  auto g = dft(f);
  Cyclotomic lhs, rhs;
  for (const auto& v : f.values) lhs += v * v.conj();
  for (const auto& v : g.values) rhs += v * v.conj();
  EXPECT_EQ(lhs * Cyclotomic(20L), rhs);

  CountGrid<FloatComplex> h(GridShape({6, 7}), FloatComplex());
  std::normal_distribution<double> nd;
  for (auto& v : h.values) v = {nd(rng), nd(rng)};
  auto hg = dft(h);
  double a = 0, b = 0;
  for (const auto& v : h.values) a += std::norm(v);
  for (const auto& v : hg.values) b += std::norm(v);
  EXPECT_NEAR(a, b / 42.0, 1e-9 * std::max(1.0, a));
  auto back = idft(hg);
  for (std::uint64_t i = 0; i < h.size(); ++i) EXPECT_LT(std::abs(back.values[i] - h.values[i]), 1e-9);
}

TEST(Dft, FloatMatchesExact) {
  std::mt19937_64 rng(5);
  auto c = random_cyclotomic_grid(rng, {3, 5});
  CountGrid<FloatComplex> fc(c.shape, FloatComplex());
  for (std::uint64_t i = 0; i < c.size(); ++i) fc.values[i] = c.values[i].to_complex();
  auto ge = dft(c);
  auto gf = dft(fc);
  for (std::uint64_t i = 0; i < c.size(); ++i) EXPECT_LT(std::abs(ge.values[i].to_complex() - gf.values[i]), 1e-9);
}

TEST(DftViaWfomc, Points) {
  auto m = single("heads(x)", {Cyclotomic(1L)});
  Oracle<Cyclotomic> oracle;
  auto d = Domain::of_size(2);
  EXPECT_EQ(dft_point_via_wfomc(m, d, {0}, oracle), Cyclotomic(4L));
  EXPECT_EQ(dft_point_via_wfomc(m, d, {1}, oracle),
            Cyclotomic(1L) + zeta(-1, 3).scaled(2) + zeta(-2, 3));
  EXPECT_EQ(oracle.stats().calls(), 2u);
  EXPECT_THROW(dft_point_via_wfomc(m, d, {3}, oracle), PreconditionError);
}

TEST(DftViaWfomc, MatchesDftOfBruteForce) {
  CMln<Cyclotomic> fs;
  fs.add(parse_formula("sm(x)"), {Cyclotomic(1L)});
  fs.add(parse_formula("sm(x) & fr(x,y) => sm(y)"), {Cyclotomic(1L)});
  auto d = Domain::of_size(2);
  auto unnorm = unnormalized_count_distribution_bruteforce(fs, d);
  auto expect = dft(unnorm);
  Oracle<Cyclotomic> oracle;
  DftEvaluator<Cyclotomic> eval(fs, d);
  ASSERT_EQ(eval.shape(), expect.shape);
  for (std::uint64_t i = 0; i < expect.size(); ++i)
    EXPECT_EQ(eval(expect.shape.point(i), oracle), expect.values[i]) << i;
  EXPECT_EQ(oracle.stats().calls(), 15u);
}

TEST(CountDistributionViaWfomc, Examples) {
  auto d4 = Domain::of_size(4);
  Oracle<Cyclotomic> oracle;
  auto bin = count_distribution_via_wfomc(single("heads(x)", {Cyclotomic(1L)}), d4, oracle);
  EXPECT_EQ(bin.distribution.values, (std::vector<Rational>{q(1, 16), q(1, 4), q(3, 8), q(1, 4), q(1, 16)}));
  EXPECT_EQ(bin.oracle_calls, 5u);
  EXPECT_EQ(bin.partition, Cyclotomic(16L));

  auto alt = count_distribution_via_wfomc(single("heads(x)", {Cyclotomic(1L), zeta(1, 2)}), d4, oracle);
  EXPECT_EQ(alt.distribution.values, (std::vector<Rational>{q(1, 8), q(0), q(3, 4), q(0), q(1, 8)}));
  EXPECT_EQ(alt.oracle_calls, 10u);
  EXPECT_EQ(oracle.stats().calls(), 15u);
}

TEST(CountDistributionViaWfomc, RandomModelsEqualBruteForce) {
  std::mt19937_64 rng(2024);
  const std::vector<std::string> pool = {"p(x)", "p(x) & q(x)", "r(x,y) => p(x)", "~r(x,x)", "p(x) | r(y,x)",
                                         "q(y) <=> r(x,y)"};
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::uniform_int_distribution<int> nf(1, 2), comps(1, 3);
  std::uniform_int_distribution<long> num(1, 3);
  for (int trial = 0; trial < 12; ++trial) {
    CMln<Cyclotomic> m;
    int d = comps(rng);
    bool family = trial % 3 == 0;
    for (int f = nf(rng); f > 0; --f) {
      // component 0 is a rational r >= 1; components 1, 2 are conjugate phases of modulus r/2,
      // so every world weight is real and non-negative
      Rational r = 1 + q(num(rng) - 1, num(rng));
      // orders dividing 4 (or 6) keep products inside a field with rational cosines
      auto o = family ? std::uint64_t{4} : std::uint64_t{6};
      Cyclotomic phase = zeta(static_cast<std::int64_t>(rng() % o), o).scaled(r / 2);
      std::vector<Cyclotomic> w{Cyclotomic(r), phase, phase.conj()};
      w.resize(static_cast<std::size_t>(d == 2 ? 3 : d));
      m.add(parse_formula(pool[pick(rng)]), w);
    }
    auto dom = Domain::of_size(2 + trial % 2);
    Oracle<Cyclotomic> oracle;
    auto brute = count_distribution_bruteforce(m, dom);
    auto via = count_distribution_via_wfomc(m, dom, oracle);
    EXPECT_EQ(via.distribution.values, brute.values) << m.to_string();
    EXPECT_EQ(via.oracle_calls, via.distribution.shape.size() * m.components());
  }
}

TEST(CountDistributionViaWfomc, BudgetNamesRequiredCalls) {
  CMln<Cyclotomic> fs;
  fs.add(parse_formula("sm(x)"), {Cyclotomic(1L)});
  fs.add(parse_formula("sm(x) & fr(x,y) => sm(y)"), {Cyclotomic(1L)});
  Oracle<Cyclotomic> oracle;
  try {
    count_distribution_via_wfomc(fs, Domain::of_size(10), oracle, 1000);
    FAIL();
  } catch (const SizeLimitError& e) {
    EXPECT_NE(std::string(e.what()).find("1111"), std::string::npos);
  }
  EXPECT_EQ(oracle.stats().calls(), 0u);
}

TEST(CountDistributionViaWfomc, FriendsSmokersSmallMatchesBrute) {
  CMln<Cyclotomic> fs;
  fs.add(parse_formula("sm(x)"), {Cyclotomic(1L)});
  fs.add(parse_formula("sm(x) & fr(x,y) => sm(y)"), {Cyclotomic(1L)});
  for (std::size_t n : {2, 3}) {
    Oracle<Cyclotomic> oracle(Engine::lifted);
    auto via = count_distribution_via_wfomc(fs, Domain::of_size(n), oracle);
    EXPECT_EQ(via.distribution.values, count_distribution_bruteforce(fs, Domain::of_size(n)).values);
    EXPECT_EQ(via.oracle_calls, (n + 1) * (n * n + 1));
  }
}

TEST(CountDistributionViaWfomc, FloatBinomial) {
  for (double w : {-1.0, 0.0, 1.0}) {
    CMln<FloatComplex> m;
    m.add(parse_formula("heads(x)"), {std::exp(w)});
    Oracle<FloatComplex> oracle(Engine::lifted);
    auto r = count_distribution_via_wfomc(m, Domain::of_size(60), oracle);
    double p = std::exp(w) / (std::exp(w) + 1);
    for (std::uint64_t k = 0; k <= 60; ++k) {
      double expect = std::exp(std::lgamma(61.0) - std::lgamma(k + 1.0) - std::lgamma(61.0 - k) + k * std::log(p) +
                               (60 - k) * std::log1p(-p));
      EXPECT_NEAR(r.distribution.values[k], expect, 1e-9) << "w=" << w << " k=" << k;
    }
  }
}

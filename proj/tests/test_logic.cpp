#include <gtest/gtest.h>

#include <random>

#include "cmln/logic.hpp"
#include "cmln/parse.hpp"

using namespace cmln;

namespace {

std::shared_ptr<const GroundAtomIndex> make_index(Signature sig, Domain d) {
  return std::make_shared<const GroundAtomIndex>(std::move(sig), std::move(d));
}

Atom ground(const std::string& pred, std::vector<std::string> args) {
  std::vector<Term> t;
  for (auto& a : args) t.push_back(Term::constant(a));
  return Atom(pred, t);
}

// Reference evaluator working directly on the tree and a set of true atom strings.
bool eval_tree(const Formula& f, const std::set<std::string>& truth) {
  using K = Formula::Kind;
  switch (f.kind()) {
    case K::atom: return truth.count(f.atom().to_string()) > 0;
    case K::top: return true;
    case K::bottom: return false;
    case K::negation: return !eval_tree(f.lhs(), truth);
    case K::conjunction: return eval_tree(f.lhs(), truth) && eval_tree(f.rhs(), truth);
    case K::disjunction: return eval_tree(f.lhs(), truth) || eval_tree(f.rhs(), truth);
    case K::implication: return !eval_tree(f.lhs(), truth) || eval_tree(f.rhs(), truth);
    case K::equivalence: return eval_tree(f.lhs(), truth) == eval_tree(f.rhs(), truth);
  }
  return false;
}

Formula random_formula(std::mt19937_64& rng, const std::vector<Atom>& atoms, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 7);
  int k = pick(rng);
  if (k <= 1) {
    std::uniform_int_distribution<std::size_t> a(0, atoms.size());
    std::size_t i = a(rng);
    if (i == atoms.size()) return k == 0 ? Formula::top() : Formula::bottom();
    return Formula::make_atom(atoms[i]);
  }
  Formula l = random_formula(rng, atoms, depth - 1);
  if (k == 2) return ~l;
  Formula r = random_formula(rng, atoms, depth - 1);
  switch (k) {
    case 3: return l & r;
    case 4: return l | r;
    case 5: return Formula::implication(l, r);
    default: return Formula::equivalence(l, r);
  }
}

}  // namespace

TEST(GroundAtomIndex, OrderAndSize) {
  auto idx = make_index({{"heads", 1}}, Domain({"A", "B"}));
  ASSERT_EQ(idx->size(), 2u);
  EXPECT_EQ(idx->atom(0).to_string(), "heads(A)");
  EXPECT_EQ(idx->atom(1).to_string(), "heads(B)");

  EXPECT_EQ(make_index({{"sm", 1}, {"fr", 2}}, Domain({"A", "B"}))->size(), 6u);

  auto fr = make_index({{"fr", 2}}, Domain({"A", "B", "C"}));
  ASSERT_EQ(fr->size(), 9u);
  EXPECT_EQ(fr->atom(0).to_string(), "fr(A,A)");
  EXPECT_EQ(fr->atom(1).to_string(), "fr(A,B)");
  EXPECT_EQ(fr->atom(3).to_string(), "fr(B,A)");
  EXPECT_EQ(fr->atom(8).to_string(), "fr(C,C)");
}

TEST(GroundAtomIndex, RoundTrip) {
  auto idx = make_index({{"p", 0}, {"sm", 1}, {"fr", 2}, {"t", 3}}, Domain::of_size(3));
  EXPECT_EQ(idx->size(), 1u + 3 + 9 + 27);
  for (std::uint64_t i = 0; i < idx->size(); ++i) EXPECT_EQ(idx->find(idx->atom(i)), i);
}

TEST(Logic, Satisfies) {
  auto idx = make_index({{"heads", 1}}, Domain({"A", "B"}));
  auto w = GroundWorld::from_atoms(idx, {ground("heads", {"A"})});
  EXPECT_TRUE(satisfies(w, parse_formula("heads(A)")));
  EXPECT_TRUE(satisfies(GroundWorld(idx), parse_formula("~heads(A)")));
  EXPECT_FALSE(satisfies(w, parse_formula("heads(A) & heads(B)")));
  EXPECT_TRUE(satisfies(w, Formula::top()));
  EXPECT_FALSE(satisfies(w, Formula::bottom()));
  EXPECT_THROW(satisfies(w, parse_formula("heads(x)")), LogicError);
  EXPECT_THROW(satisfies(w, parse_formula("heads(C)")), LogicError);
  EXPECT_THROW(satisfies(w, parse_formula("tails(A)")), LogicError);
}

TEST(Logic, CountSatisfied) {
  auto idx = make_index({{"heads", 1}}, Domain({"A", "B", "C", "D"}));
  auto w = GroundWorld::from_atoms(idx, {ground("heads", {"A"})});
  EXPECT_EQ(count_satisfied(parse_formula("heads(x)"), w), 1u);
  EXPECT_EQ(count_satisfied(Formula::top(), w), 1u);
  EXPECT_EQ(count_satisfied(parse_formula("heads(A)"), w), 1u);
  EXPECT_EQ(count_satisfied(parse_formula("heads(B)"), w), 0u);

  auto fs = make_index({{"sm", 1}, {"fr", 2}}, Domain({"A", "B"}));
  EXPECT_EQ(count_satisfied(parse_formula("sm(x) & fr(x,y) => sm(y)"), GroundWorld(fs)), 4u);
  // non-injective substitutions count: fr(x,y) with all fr true has 4 groundings
  GroundWorld all(fs);
  for (std::uint64_t i = 0; i < fs->size(); ++i) all.set(i, true);
  EXPECT_EQ(count_satisfied(parse_formula("fr(x,y)"), all), 4u);
  EXPECT_EQ(count_satisfied(parse_formula("fr(x,x)"), all), 2u);
}

TEST(Logic, CountBoundsAndTautologies) {
  Signature sig{{"sm", 1}, {"fr", 2}};
  Formula alpha = parse_formula("sm(x) & fr(x,y) => sm(y)");
  for (const auto& w : enumerate_worlds(sig, Domain::of_size(2))) {
    auto n = count_satisfied(alpha, w);
    EXPECT_LE(n, 4u);
    EXPECT_EQ(count_satisfied(alpha & ~alpha, w), 0u);
    EXPECT_EQ(count_satisfied(alpha | ~alpha, w), 4u);
  }
}

TEST(Logic, EnumerateWorlds) {
  std::size_t n = 0;
  for (const auto& w : enumerate_worlds({{"heads", 1}}, Domain({"A", "B"}))) {
    (void)w;
    ++n;
  }
  EXPECT_EQ(n, 4u);
  EXPECT_EQ(enumerate_worlds({{"sm", 1}, {"fr", 2}}, Domain({"A", "B"})).size(), 64u);
  EXPECT_THROW(enumerate_worlds({{"heads", 1}}, Domain::of_size(30)), SizeLimitError);
  EXPECT_NO_THROW(enumerate_worlds({{"heads", 1}}, Domain::of_size(30), 30));

  // increasing bitset order, each world once
  auto range = enumerate_worlds({{"p", 1}}, Domain::of_size(3));
  std::set<std::string> seen;
  std::uint64_t code = 0;
  for (const auto& w : range) {
    EXPECT_EQ(w, GroundWorld::from_code(w.index_ptr(), code++));
    seen.insert(w.to_string());
  }
  EXPECT_EQ(seen.size(), 8u);
}

TEST(Logic, SatisfiesMatchesTreeEvaluator) {
  auto idx = make_index({{"p", 1}, {"r", 2}}, Domain({"A", "B"}));
  std::vector<Atom> atoms;
  for (std::uint64_t i = 0; i < idx->size(); ++i) atoms.push_back(idx->atom(i));
  std::mt19937_64 rng(11);
  for (int t = 0; t < 400; ++t) {
    Formula f = random_formula(rng, atoms, 4);
    GroundWorld w = GroundWorld::from_code(idx, std::uniform_int_distribution<std::uint64_t>(0, 63)(rng));
    std::set<std::string> truth;
    for (std::uint64_t i = 0; i < idx->size(); ++i)
      if (w.test(i)) truth.insert(idx->atom(i).to_string());
    ASSERT_EQ(satisfies(w, f), eval_tree(f, truth)) << to_string(f);
    // printing and re-parsing yields the same tree
    ASSERT_EQ(parse_formula(to_string(f)), f) << to_string(f);
  }
}

TEST(Formula, VarsAndSubstitution) {
  Formula f = parse_formula("sm(x) & fr(x,y) => sm(y)");
  EXPECT_EQ(vars(f), (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(vars(parse_formula("fr(y,x) | sm(x)")), (std::vector<std::string>{"y", "x"}));
  EXPECT_TRUE(vars(Formula::top()).empty());
  Formula g = substitute(f, {{"x", Term::constant("A")}, {"y", Term::constant("B")}});
  EXPECT_EQ(to_string(g), "sm(A) & fr(A,B) => sm(B)");
  EXPECT_TRUE(is_ground(g));
  EXPECT_EQ(constants(parse_formula("fr(A,x) & sm(B)")), (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(grounding_count(f, Domain::of_size(10)), 100u);
}

TEST(Parse, PrecedenceAndAssociativity) {
  EXPECT_EQ(parse_formula("a & b | c"), parse_formula("(a & b) | c"));
  EXPECT_EQ(parse_formula("~a & b"), parse_formula("(~a) & b"));
  EXPECT_EQ(parse_formula("a => b => c"), parse_formula("a => (b => c)"));
  EXPECT_EQ(parse_formula("a | b => c <=> d"), parse_formula("((a | b) => c) <=> d"));
  EXPECT_EQ(parse_formula("true & false").kind(), Formula::Kind::conjunction);
  EXPECT_EQ(parse_formula("__xi_1(x,y)").atom().predicate, (Predicate{"__xi_1", 2}));
}

TEST(Parse, Errors) {
  try {
    parse_formula("heads(x) &");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_EQ(e.column(), 11u);
  }
  EXPECT_THROW(parse_formula("heads(x"), ParseError);
  EXPECT_THROW(parse_formula("heads(1)"), ParseError);
  EXPECT_THROW(parse_formula("heads(x) heads(y)"), ParseError);
  EXPECT_THROW(parse_formula("(a"), ParseError);
  try {
    parse_formula("a & ~", 7, 20);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 7u);
    EXPECT_EQ(e.column(), 25u);
  }
}

TEST(Parse, SignatureCheck) {
  Signature sig{{"sm", 1}, {"fr", 2}};
  EXPECT_NO_THROW(check_signature(parse_formula("sm(x) & fr(x,y)"), sig));
  EXPECT_THROW(check_signature(parse_formula("sm(x,y)"), sig), LogicError);
  EXPECT_THROW(check_signature(parse_formula("heads(x)"), sig), LogicError);
}

TEST(Domain, Validation) {
  EXPECT_THROW(Domain(std::vector<std::string>{}), LogicError);
  EXPECT_THROW(Domain({"A", "A"}), LogicError);
  EXPECT_THROW(Domain({"a"}), LogicError);
  EXPECT_EQ(Domain::of_size(3).constants(), (std::vector<std::string>{"A1", "A2", "A3"}));
}

TEST(Term, CasingRule) {
  EXPECT_THROW(Term::variable("X"), LogicError);
  EXPECT_THROW(Term::constant("x"), LogicError);
  EXPECT_TRUE(Term::parse("x").is_variable());
  EXPECT_FALSE(Term::parse("Bob").is_variable());
}

#pragma once

// Markov logic networks with complex weight vectors.
//
// Each entry (alpha_j, [e_{j,1}..e_{j,d}]) stores exponentiated weights; the
// unnormalized weight of a world is sum_i prod_j e_{j,i}^{N(alpha_j, world)}.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cmln/error.hpp"
#include "cmln/grid.hpp"
#include "cmln/logic.hpp"
#include "cmln/numeric.hpp"
#include "cmln/wfomc.hpp"

namespace cmln {

template <class T>
struct MlnEntry {
  Formula formula;
  std::vector<T> expweights;
};

template <class T>
class CMln {
 public:
  CMln() = default;
  explicit CMln(Signature signature) : sig_(std::move(signature)) {}

  // Predicates missing from the signature are added.
  void add(const Formula& formula, std::vector<T> expweights) {
    if (expweights.empty()) throw PreconditionError("weight vector must have at least one component");
    if (!entries_.empty() && expweights.size() != components())
      throw PreconditionError("weight vector has " + std::to_string(expweights.size()) + " components, model has " +
                              std::to_string(components()));
    for (const auto& p : predicates(formula)) {
      if (!sig_.contains(p) && sig_.contains_name(p.name))
        throw LogicError("arity mismatch for predicate " + p.name);
      sig_.ensure(p);
    }
    entries_.push_back({formula, std::move(expweights)});
  }

  const Signature& signature() const noexcept { return sig_; }
  const std::vector<MlnEntry<T>>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t components() const noexcept { return entries_.empty() ? 1 : entries_.front().expweights.size(); }

  std::vector<Formula> formulas() const {
    std::vector<Formula> out;
    for (const auto& e : entries_) out.push_back(e.formula);
    return out;
  }

  std::string to_string() const {
    std::string s;
    for (const auto& e : entries_) {
      s += "[";
      for (std::size_t i = 0; i < e.expweights.size(); ++i) s += (i ? ", " : "") + Backend<T>::format(e.expweights[i]);
      s += "] :: " + cmln::to_string(e.formula) + "\n";
    }
    return s;
  }

 private:
  Signature sig_;
  std::vector<MlnEntry<T>> entries_;
};

inline CountVector count_vector(const std::vector<Formula>& formulas, const GroundWorld& world) {
  CountVector n;
  for (const auto& f : formulas) n.push_back(count_satisfied(f, world));
  return n;
}

namespace detail {

// x^0..x^max
template <class T>
std::vector<T> power_table(const T& x, std::uint64_t max) {
  std::vector<T> t{Backend<T>::one()};
  for (std::uint64_t e = 1; e <= max; ++e) t.push_back(t.back() * x);
  return t;
}

// U(n) = sum_i prod_j e_{j,i}^{n_j}, from per-(entry, component) power tables.
template <class T>
class CountWeight {
 public:
  CountWeight(const CMln<T>& mln, const Domain& domain) {
    for (const auto& e : mln.entries()) {
      std::uint64_t max = grounding_count(e.formula, domain);
      std::vector<std::vector<T>> per;
      for (const auto& w : e.expweights) per.push_back(power_table(w, max));
      tables_.push_back(std::move(per));
    }
    d_ = mln.components();
  }

  T operator()(const CountVector& n) const {
    T sum = Backend<T>::zero();
    for (std::size_t i = 0; i < d_; ++i) {
      T prod = Backend<T>::one();
      for (std::size_t j = 0; j < tables_.size(); ++j) prod = prod * tables_[j][i][n[j]];
      sum = sum + prod;
    }
    return sum;
  }

 private:
  std::size_t d_ = 1;
  std::vector<std::vector<std::vector<T>>> tables_;  // [entry][component][power]
};

}  // namespace detail

template <class T>
T unnormalized_weight(const CMln<T>& mln, const GroundWorld& world) {
  return detail::CountWeight<T>(mln, world.index().domain())(count_vector(mln.formulas(), world));
}

// Theory with one fresh predicate xi_i per formula (xi_i(vars) <=> alpha_i),
// and d weight maps: w_j(xi_i) = e_{i,j}, wbar_j(xi_i) = 1.
template <class T>
struct XiReduction {
  Theory theory;
  std::vector<WeightMap<T>> weights;
  std::vector<Predicate> xi;
};

template <class T>
XiReduction<T> mln_to_wfomc(const CMln<T>& mln) {
  XiReduction<T> out;
  Signature sig = mln.signature();
  std::vector<Formula> sentences;
  for (std::size_t i = 0; i < mln.size(); ++i) {
    const auto& f = mln.entries()[i].formula;
    auto vs = vars(f);
    std::string base = "__xi_" + std::to_string(i + 1);
    std::string name = base;
    for (int k = 1; sig.contains_name(name); ++k) name = base + "_" + std::to_string(k);
    Predicate xi{name, vs.size()};
    sig.add(xi);
    out.xi.push_back(xi);
    std::vector<Term> args;
    for (const auto& v : vs) args.push_back(Term::variable(v));
    sentences.push_back(Formula::equivalence(Formula::make_atom(Atom(name, args)), f));
  }
  out.theory = Theory(sig);
  for (const auto& s : sentences) out.theory.add(s);
  for (std::size_t j = 0; j < mln.components(); ++j) {
    WeightMap<T> w;
    for (std::size_t i = 0; i < mln.size(); ++i) w.set(out.xi[i], mln.entries()[i].expweights[j], Backend<T>::one());
    out.weights.push_back(std::move(w));
  }
  return out;
}

// sum_j WFOMC(theory, w_j, wbar_j): d oracle calls.
template <class T>
T summed_wfomc(const XiReduction<T>& red, const Theory& theory, const Domain& domain, Oracle<T>& oracle) {
  T sum = Backend<T>::zero();
  for (const auto& w : red.weights) sum = sum + oracle(WfomcTask<T>{theory, w, domain});
  return sum;
}

// Z as a real number; throws DegenerateModelError for Z = 0 and
// ImproperModelError for non-real or negative Z.
template <class T>
RealOf<T> checked_partition_value(const T& z) {
  using B = Backend<T>;
  if (B::is_zero(z)) throw DegenerateModelError("partition function is zero");
  auto real = B::as_real(z);
  if (!real) {
    if constexpr (B::exact)
      if (z.is_real()) throw ImproperModelError("partition function is not rational: " + B::format(z));
    throw ImproperModelError("partition function is not real: " + B::format(z));
  }
  if (B::is_negative(*real)) throw ImproperModelError("partition function is negative: " + B::format(z));
  return *real;
}

template <class T>
class PartitionCache {
 public:
  std::optional<T> find(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }
  void store(const std::string& key, const T& z) { values_.insert_or_assign(key, z); }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  std::map<std::string, T> values_;
};

template <class T>
std::string partition_cache_key(const CMln<T>& mln, const Domain& domain, const Oracle<T>& oracle) {
  std::string key = std::string(engine_name(oracle.mode())) + "|";
  for (const auto& c : domain.constants()) key += c + ",";
  for (const auto& p : mln.signature().predicates()) key += p.to_string() + ",";
  return key + "|" + mln.to_string();
}

// Z = sum_j WFOMC(Gamma, w_j, wbar_j), checked for properness.
template <class T>
T partition_function(const CMln<T>& mln, const Domain& domain, Oracle<T>& oracle, PartitionCache<T>* cache = nullptr) {
  std::string key;
  if (cache) {
    key = partition_cache_key(mln, domain, oracle);
    if (auto z = cache->find(key)) return *z;
  }
  auto red = mln_to_wfomc(mln);
  T z = summed_wfomc(red, red.theory, domain, oracle);
  checked_partition_value(z);
  if (cache) cache->store(key, z);
  return z;
}

template <class T>
RealOf<T> world_probability(const CMln<T>& mln, const GroundWorld& world, const T& z) {
  using B = Backend<T>;
  T p = B::div_real(unnormalized_weight(mln, world), checked_partition_value(z));
  auto real = B::as_real(p);
  if (!real || B::is_negative(*real))
    throw ImproperModelError("world " + world.to_string() + " has probability " + B::format(p));
  return *real;
}

// sum_j WFOMC(Gamma + {q}) / sum_j WFOMC(Gamma).
template <class T>
RealOf<T> marginal(const CMln<T>& mln, const Domain& domain, const Formula& query, Oracle<T>& oracle,
                   PartitionCache<T>* cache = nullptr) {
  using B = Backend<T>;
  if (!is_ground(query)) throw LogicError("query must be ground: " + to_string(query));
  for (const auto& c : constants(query))
    if (!domain.index_of(c)) throw LogicError("query constant " + c + " is not in the domain");
  auto red = mln_to_wfomc(mln);
  check_signature(query, mln.signature());
  T z = partition_function(mln, domain, oracle, cache);
  T num = summed_wfomc(red, red.theory.with(query), domain, oracle);
  T p = B::div_real(num, checked_partition_value(z));
  auto real = B::as_real(p);
  if (!real || B::is_negative(*real))
    throw ImproperModelError("marginal of " + to_string(query) + " is " + B::format(p));
  return *real;
}

// Number of worlds per count vector (exhaustive).
inline CountGrid<std::uint64_t> count_histogram(const std::vector<Formula>& formulas, const Signature& signature,
                                                const Domain& domain, std::uint64_t cap = default_world_cap()) {
  auto index = std::make_shared<const GroundAtomIndex>(signature, domain);
  check_enumerable(index->size(), cap);
  CountGrid<std::uint64_t> hist(count_grid_shape(formulas, domain), 0);
  std::vector<GroundedFormula> grounded;
  for (const auto& f : formulas) grounded.emplace_back(f, *index);
  std::uint64_t worlds = std::uint64_t{1} << index->size();
  std::vector<std::uint64_t> strides(formulas.size());
  std::uint64_t s = 1;
  for (std::size_t i = formulas.size(); i-- > 0;) {
    strides[i] = s;
    s *= hist.shape.moduli()[i];
  }
  for (std::uint64_t code = 0; code < worlds; ++code) {
    auto test = [code](std::uint32_t i) { return (code >> i) & 1; };
    std::uint64_t idx = 0;
    for (std::size_t i = 0; i < grounded.size(); ++i) idx += grounded[i].count(test) * strides[i];
    ++hist.values[idx];
  }
  return hist;
}

// sum of unnormalized world weights per count vector.
template <class T>
CountGrid<T> unnormalized_count_distribution_bruteforce(const CMln<T>& mln, const Domain& domain,
                                                        std::uint64_t cap = default_world_cap()) {
  auto hist = count_histogram(mln.formulas(), mln.signature(), domain, cap);
  detail::CountWeight<T> weight(mln, domain);
  CountGrid<T> out(hist.shape, Backend<T>::zero());
  for (std::uint64_t i = 0; i < hist.size(); ++i) {
    if (hist.values[i] == 0) continue;
    out.values[i] = Backend<T>::from_integer(Integer(static_cast<unsigned long>(hist.values[i]))) *
                    weight(hist.shape.point(i));
  }
  return out;
}

// Divides by the total and checks that every cell is a genuine probability
// (exact: non-negative rational; float: real within tolerance, >= -1e-9, clamped).
template <class T>
CountGrid<RealOf<T>> normalize_count_grid(const CountGrid<T>& unnormalized, const T& z) {
  using B = Backend<T>;
  auto zr = checked_partition_value(z);
  CountGrid<RealOf<T>> out(unnormalized.shape, RealOf<T>(0));
  for (std::uint64_t i = 0; i < unnormalized.size(); ++i) {
    T q = B::div_real(unnormalized.values[i], zr);
    auto real = B::as_real(q);
    if (!real || B::is_negative(*real)) {
      std::string at;
      for (auto c : unnormalized.shape.point(i)) at += (at.empty() ? "" : ",") + std::to_string(c);
      throw ImproperModelError("count vector (" + at + ") has mass " + B::format(q));
    }
    if constexpr (!B::exact) {
      if (*real < 0) *real = 0;
    }
    out.values[i] = *real;
  }
  return out;
}

template <class T>
T grid_total(const CountGrid<T>& g) {
  T s = Backend<T>::zero();
  for (const auto& v : g.values) s = s + v;
  return s;
}

template <class T>
CountGrid<RealOf<T>> count_distribution_bruteforce(const CMln<T>& mln, const Domain& domain,
                                                   std::uint64_t cap = default_world_cap()) {
  auto u = unnormalized_count_distribution_bruteforce(mln, domain, cap);
  return normalize_count_grid(u, grid_total(u));
}

// Count vectors attained by at least one world, lexicographically sorted.
inline std::vector<CountVector> support_bruteforce(const std::vector<Formula>& formulas, const Domain& domain,
                                                   std::uint64_t cap = default_world_cap()) {
  Signature sig;
  for (const auto& f : formulas)
    for (const auto& p : predicates(f)) sig.ensure(p);
  if (sig.empty()) sig.add({"__unused", 0});
  auto hist = count_histogram(formulas, sig, domain, cap);
  std::vector<CountVector> out;
  for (std::uint64_t i = 0; i < hist.size(); ++i)
    if (hist.values[i]) out.push_back(hist.shape.point(i));
  return out;
}

}  // namespace cmln

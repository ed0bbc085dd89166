#pragma once

// Weighted first-order model counting over complex weights.
//
//   WFOMC(theory, w, wbar) = sum over models of prod_{true atoms} w(pred) * prod_{false atoms} wbar(pred)
//
// Two engines: exhaustive enumeration of ground worlds, and the cell
// (1-type) decomposition for universally quantified two-variable theories.

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cmln/error.hpp"
#include "cmln/logic.hpp"
#include "cmln/modular.hpp"
#include "cmln/numeric.hpp"

namespace cmln {

template <class T>
struct WeightPair {
  T w;
  T wbar;
};

template <class T>
class WeightMap {
 public:
  void set(const Predicate& p, T w, T wbar) { entries_.insert_or_assign(p, WeightPair<T>{std::move(w), std::move(wbar)}); }

  // (1, 1) for predicates without an entry.
  WeightPair<T> get(const Predicate& p) const {
    auto it = entries_.find(p);
    if (it == entries_.end()) return {Backend<T>::one(), Backend<T>::one()};
    return it->second;
  }
  bool contains(const Predicate& p) const { return entries_.count(p) > 0; }
  const std::map<Predicate, WeightPair<T>>& entries() const noexcept { return entries_; }

 private:
  std::map<Predicate, WeightPair<T>> entries_;
};

// Universally quantified sentences; the free variables of each body are
// read as universally quantified.
class Theory {
 public:
  Theory() = default;
  explicit Theory(Signature signature) : sig_(std::move(signature)) {}

  void add(const Formula& sentence) {
    check_signature(sentence, sig_);
    sentences_.push_back(sentence);
  }

  Theory with(const Formula& sentence) const {
    Theory t = *this;
    t.add(sentence);
    return t;
  }

  const Signature& signature() const noexcept { return sig_; }
  Signature& signature() noexcept { return sig_; }
  const std::vector<Formula>& sentences() const noexcept { return sentences_; }

  std::string to_string() const {
    std::string s;
    for (const auto& f : sentences_) {
      auto vs = vars(f);
      if (!vs.empty()) {
        s += "forall ";
        for (std::size_t i = 0; i < vs.size(); ++i) s += (i ? ", " : "") + vs[i];
        s += ": ";
      }
      s += cmln::to_string(f) + "\n";
    }
    return s;
  }

 private:
  Signature sig_;
  std::vector<Formula> sentences_;
};

template <class T>
struct WfomcTask {
  Theory theory;
  WeightMap<T> weights;
  Domain domain;
};

namespace detail {

template <class T>
std::vector<WeightPair<T>> weights_by_index(const Signature& sig, const WeightMap<T>& weights) {
  std::vector<WeightPair<T>> out;
  for (const auto& p : sig.predicates()) out.push_back(weights.get(p));
  return out;
}

}  // namespace detail

// Exhaustive sum over all 2^T worlds.
template <class T>
T wfomc_bruteforce(const WfomcTask<T>& task, std::uint64_t cap = default_world_cap()) {
  using B = Backend<T>;
  const auto& sig = task.theory.signature();
  GroundAtomIndex index(sig, task.domain);
  check_enumerable(index.size(), cap);

  std::vector<Program> programs;
  for (const auto& f : task.theory.sentences()) {
    GroundedFormula g(f, index);
    programs.insert(programs.end(), g.programs().begin(), g.programs().end());
  }
  // shorter groundings first: cheap early rejection
  std::stable_sort(programs.begin(), programs.end(), [](const Program& a, const Program& b) { return a.size() < b.size(); });

  // models are tallied by their vector of per-predicate true-atom counts
  std::size_t np = sig.size();
  std::vector<std::uint64_t> mask(np), atoms(np), stride(np);
  std::uint64_t keys = 1;
  bool dense = true;
  for (std::size_t p = 0; p < np; ++p) {
    auto [b, e] = index.range(p);
    atoms[p] = e - b;
    mask[p] = (e - b == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << (e - b)) - 1)) << b;
    stride[p] = keys;
    if (keys > (std::uint64_t{1} << 22) / (atoms[p] + 1)) dense = false;
    if (dense) keys *= atoms[p] + 1;
  }
  std::vector<std::uint64_t> table(dense ? keys : 0);
  std::unordered_map<std::uint64_t, std::uint64_t> sparse;
  std::vector<std::uint64_t> sparse_radix(np);
  if (!dense) {
    std::uint64_t r = 1;
    for (std::size_t p = 0; p < np; ++p) {
      sparse_radix[p] = r;
      r *= 65;
    }
  }

  std::uint64_t worlds = std::uint64_t{1} << index.size();
  for (std::uint64_t code = 0; code < worlds; ++code) {
    auto test = [code](std::uint32_t i) { return (code >> i) & 1; };
    bool model = true;
    for (const auto& prog : programs) {
      if (!evaluate(prog, test)) {
        model = false;
        break;
      }
    }
    if (!model) continue;
    std::uint64_t key = 0;
    for (std::size_t p = 0; p < np; ++p) {
      std::uint64_t t = static_cast<std::uint64_t>(std::popcount(code & mask[p]));
      key += t * (dense ? stride[p] : sparse_radix[p]);
    }
    if (dense)
      ++table[key];
    else
      ++sparse[key];
  }

  std::vector<std::vector<T>> wpow(np), wbarpow(np);
  for (std::size_t p = 0; p < np; ++p) {
    auto [w, wbar] = task.weights.get(sig[p]);
    wpow[p].push_back(B::one());
    wbarpow[p].push_back(B::one());
    for (std::uint64_t t = 1; t <= atoms[p]; ++t) {
      wpow[p].push_back(wpow[p].back() * w);
      wbarpow[p].push_back(wbarpow[p].back() * wbar);
    }
  }
  auto term = [&](std::uint64_t key, std::uint64_t count, bool dense_key) {
    T prod = B::from_integer(Integer(static_cast<unsigned long>(count)));
    for (std::size_t p = 0; p < np; ++p) {
      std::uint64_t t = dense_key ? (key / stride[p]) % (atoms[p] + 1) : (key / sparse_radix[p]) % 65;
      prod = prod * wpow[p][t] * wbarpow[p][atoms[p] - t];
    }
    return prod;
  };
  T total = B::zero();
  if (dense) {
    for (std::uint64_t k = 0; k < keys; ++k)
      if (table[k]) total = total + term(k, table[k], true);
  } else {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> items(sparse.begin(), sparse.end());
    std::sort(items.begin(), items.end());
    for (auto [k, c] : items) total = total + term(k, c, false);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Lifted counting for the two-variable fragment.

// Product of weights: prod_k w_k^{trues[k]} * wbar_k^{falses[k]} over the
// predicates used by the theory.
struct Monomial {
  std::vector<std::uint8_t> trues, falses;
  auto operator<=>(const Monomial&) const = default;
};

struct WeightedMonomial {
  Monomial monomial;
  std::uint64_t multiplicity;
};

// Theory-dependent, weight-independent part of the cell algorithm.
class LiftedPlan {
 public:
  struct Branch {
    Monomial nullary;
    std::vector<Monomial> cells;
    // pairs[i * cells + j], i <= j: assignments to the mixed atoms R(x,y), R(y,x)
    std::vector<std::vector<WeightedMonomial>> pairs;
  };

  static constexpr std::size_t kMaxCellSlots = 20;

  LiftedPlan(const Theory& theory, std::size_t domain_size) : n_(domain_size) {
    if (n_ == 0) throw PreconditionError("domain must be nonempty");
    const auto& sig = theory.signature();
    arity_.resize(sig.size());
    for (std::size_t p = 0; p < sig.size(); ++p) arity_[p] = sig[p].arity;

    Formula psi = Formula::top();
    bool first = true;
    std::vector<bool> is_used(sig.size(), false);
    for (const auto& s : theory.sentences()) {
      if (!constants(s).empty()) throw NotLiftableError("sentence mentions constants: " + to_string(s));
      auto vs = vars(s);
      if (vs.size() > 2) throw NotLiftableError("sentence has more than two variables: " + to_string(s));
      std::map<std::string, Term> ren;
      if (vs.size() >= 1) ren[vs[0]] = Term::variable("x");
      if (vs.size() == 2) ren[vs[1]] = Term::variable("y");
      Formula body = substitute(s, ren);
      if (vs.size() == 1) body = body & substitute(body, {{"x", Term::variable("y")}});
      psi = first ? body : psi & body;
      first = false;
      for (const auto& p : predicates(s)) {
        if (p.arity > 2) throw NotLiftableError("predicate of arity > 2 in sentence: " + p.to_string());
        is_used[*sig.index_of(p)] = true;
      }
    }

    // local atom slots
    std::map<std::pair<std::size_t, std::string>, std::size_t> slot;  // (pred, arg pattern) -> bit
    std::vector<std::size_t> nullary_slots, cell_slots, mixed_slots;
    std::size_t bits = 0;
    for (std::size_t p = 0; p < sig.size(); ++p) {
      if (!is_used[p]) {
        free_.push_back(p);
        continue;
      }
      used_pos_[p] = used_.size();
      used_.push_back(p);
      switch (arity_[p]) {
        case 0:
          slot[{p, ""}] = bits;
          nullary_slots.push_back(bits++);
          break;
        case 1:
          slot[{p, "x"}] = bits;
          cell_slots.push_back(bits++);
          slot[{p, "y"}] = bits++;
          break;
        default:
          slot[{p, "xx"}] = bits;
          cell_slots.push_back(bits++);
          slot[{p, "xy"}] = bits;
          mixed_slots.push_back(bits++);
          slot[{p, "yx"}] = bits;
          mixed_slots.push_back(bits++);
          slot[{p, "yy"}] = bits++;
      }
    }
    if (bits > 64 || cell_slots.size() > kMaxCellSlots || mixed_slots.size() > kMaxCellSlots ||
        nullary_slots.size() > 16)
      throw NotLiftableError("too many predicates for the cell decomposition");

    auto slot_of = [&](const Atom& a) {
      std::string pattern;
      for (const auto& t : a.args) pattern += t.name;
      return slot.at({*sig.index_of(a.predicate), pattern});
    };
    Program prog = compile(psi, slot_of);
    Program swapped = compile(substitute(psi, {{"x", Term::variable("y")}, {"y", Term::variable("x")}}), slot_of);
    Program diagonal = compile(substitute(psi, {{"y", Term::variable("x")}}), slot_of);
    auto run = [](const Program& pr, std::uint64_t m) {
      return evaluate(pr, [m](std::uint32_t i) { return (m >> i) & 1; });
    };

    std::size_t u = used_.size();
    auto empty = [u] { return Monomial{std::vector<std::uint8_t>(u, 0), std::vector<std::uint8_t>(u, 0)}; };
    // position of a slot's predicate in used_
    std::vector<std::size_t> slot_pred(bits);
    for (const auto& [key, bit] : slot) slot_pred[bit] = used_pos_.at(key.first);

    for (std::uint64_t a = 0; a < (std::uint64_t{1} << nullary_slots.size()); ++a) {
      Branch br;
      br.nullary = empty();
      std::uint64_t base = 0;
      for (std::size_t k = 0; k < nullary_slots.size(); ++k) {
        bool v = (a >> k) & 1;
        if (v) base |= std::uint64_t{1} << nullary_slots[k];
        (v ? br.nullary.trues : br.nullary.falses)[slot_pred[nullary_slots[k]]]++;
      }
      // 1-types: assignments to P(x), R(x,x) consistent with psi(x,x)
      std::vector<std::uint64_t> cell_masks;  // x-slot bits of each cell
      for (std::uint64_t t = 0; t < (std::uint64_t{1} << cell_slots.size()); ++t) {
        std::uint64_t m = base;
        Monomial mono = empty();
        for (std::size_t k = 0; k < cell_slots.size(); ++k) {
          bool v = (t >> k) & 1;
          if (v) m |= std::uint64_t{1} << cell_slots[k];
          (v ? mono.trues : mono.falses)[slot_pred[cell_slots[k]]]++;
        }
        if (!run(diagonal, m)) continue;
        br.cells.push_back(std::move(mono));
        cell_masks.push_back(m & ~base);
      }
      if (br.cells.empty()) continue;
      // x-slot -> y-slot (P(x) -> P(y), R(x,x) -> R(y,y))
      auto to_y = [&](std::uint64_t xm) {
        std::uint64_t ym = 0;
        for (std::size_t cs : cell_slots) {
          if (!((xm >> cs) & 1)) continue;
          ym |= std::uint64_t{1} << (arity_[used_[slot_pred[cs]]] == 1 ? cs + 1 : cs + 3);
        }
        return ym;
      };
      std::size_t c = br.cells.size();
      br.pairs.resize(c * c);
      for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = i; j < c; ++j) {
          std::map<Monomial, std::uint64_t> tally;
          std::uint64_t fixed = base | cell_masks[i] | to_y(cell_masks[j]);
          for (std::uint64_t t = 0; t < (std::uint64_t{1} << mixed_slots.size()); ++t) {
            std::uint64_t m = fixed;
            Monomial mono = empty();
            for (std::size_t k = 0; k < mixed_slots.size(); ++k) {
              bool v = (t >> k) & 1;
              if (v) m |= std::uint64_t{1} << mixed_slots[k];
              (v ? mono.trues : mono.falses)[slot_pred[mixed_slots[k]]]++;
            }
            if (run(prog, m) && run(swapped, m)) ++tally[mono];
          }
          for (auto& [mono, count] : tally) br.pairs[i * c + j].push_back({mono, count});
        }
      }
      branches_.push_back(std::move(br));
    }
  }

  std::size_t domain_size() const noexcept { return n_; }
  const std::vector<std::size_t>& used() const noexcept { return used_; }
  const std::vector<std::size_t>& free_predicates() const noexcept { return free_; }
  const std::vector<Branch>& branches() const noexcept { return branches_; }
  std::size_t arity(std::size_t pred) const { return arity_[pred]; }
  std::size_t max_cells() const {
    std::size_t c = 0;
    for (const auto& b : branches_) c = std::max(c, b.cells.size());
    return c;
  }

 private:
  std::size_t n_;
  std::vector<std::size_t> arity_;
  std::vector<std::size_t> used_, free_;
  std::map<std::size_t, std::size_t> used_pos_;
  std::vector<Branch> branches_;
};

// Rings for the lifted evaluator: value, zero, one, add, mul, from_uint.
template <class T>
struct BackendRing {
  using value = T;
  value zero() const { return Backend<T>::zero(); }
  value one() const { return Backend<T>::one(); }
  value add(const value& a, const value& b) const { return a + b; }
  value mul(const value& a, const value& b) const { return a * b; }
  value from_uint(std::uint64_t v) const { return Backend<T>::from_integer(Integer(static_cast<unsigned long>(v))); }
};

struct IntegerRing {
  using value = Integer;
  value zero() const { return 0; }
  value one() const { return 1; }
  value add(const value& a, const value& b) const { return a + b; }
  value mul(const value& a, const value& b) const { return a * b; }
  value from_uint(std::uint64_t v) const { return Integer(static_cast<unsigned long>(v)); }
};

struct ModularRing {
  const modular::Field* field;
  using value = std::uint64_t;
  value zero() const { return 0; }
  value one() const { return field->one(); }
  value add(value a, value b) const { return field->add(a, b); }
  value mul(value a, value b) const { return field->mul(a, b); }
  value from_uint(std::uint64_t v) const { return field->to_mont(v); }
};

namespace detail {

template <class Ring>
typename Ring::value ring_pow(const Ring& r, typename Ring::value x, std::uint64_t k) {
  auto out = r.one();
  while (k) {
    if (k & 1) out = r.mul(out, x);
    k >>= 1;
    if (k) x = r.mul(x, x);
  }
  return out;
}

}  // namespace detail

// Evaluates a plan for concrete weights (indexed like the theory signature).
template <class Ring>
class LiftedEvaluator {
 public:
  using V = typename Ring::value;

  LiftedEvaluator(const LiftedPlan& plan, Ring ring) : plan_(plan), ring_(std::move(ring)) {
    std::size_t n = plan.domain_size();
    binom_.assign(n + 1, {});
    for (std::size_t a = 0; a <= n; ++a) {
      binom_[a].resize(a + 1);
      binom_[a][0] = binom_[a][a] = ring_.one();
      for (std::size_t b = 1; b < a; ++b) binom_[a][b] = ring_.add(binom_[a - 1][b - 1], binom_[a - 1][b]);
    }
  }

  V operator()(const std::vector<WeightPair<V>>& weights) const {
    const Ring& r = ring_;
    std::size_t n = plan_.domain_size();
    V result = r.one();
    for (std::size_t p : plan_.free_predicates()) {
      std::uint64_t atoms = ipow(n, plan_.arity(p));
      result = r.mul(result, detail::ring_pow(r, r.add(weights[p].w, weights[p].wbar), atoms));
    }
    const auto& used = plan_.used();
    // w^0..w^2, wbar^0..wbar^2 per used predicate
    std::vector<std::array<V, 3>> wp(used.size()), wbp(used.size());
    for (std::size_t k = 0; k < used.size(); ++k) {
      const auto& wt = weights[used[k]];
      wp[k] = {r.one(), wt.w, r.mul(wt.w, wt.w)};
      wbp[k] = {r.one(), wt.wbar, r.mul(wt.wbar, wt.wbar)};
    }
    auto mono = [&](const Monomial& m) {
      V v = r.one();
      for (std::size_t k = 0; k < used.size(); ++k) {
        if (m.trues[k]) v = r.mul(v, wp[k][m.trues[k]]);
        if (m.falses[k]) v = r.mul(v, wbp[k][m.falses[k]]);
      }
      return v;
    };
    V sum = r.zero();
    for (const auto& br : plan_.branches()) {
      std::size_t c = br.cells.size();
      std::vector<V> w(c), rr(c * c, r.zero());
      for (std::size_t i = 0; i < c; ++i) w[i] = mono(br.cells[i]);
      for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = i; j < c; ++j)
          for (const auto& term : br.pairs[i * c + j])
            rr[i * c + j] = r.add(rr[i * c + j], r.mul(r.from_uint(term.multiplicity), mono(term.monomial)));
      sum = r.add(sum, r.mul(mono(br.nullary), compositions(w, rr)));
    }
    return r.mul(result, sum);
  }

 private:
  // sum over n_1 + ... + n_c = N of N!/prod n_i! prod w_i^{n_i} r_ii^{C(n_i,2)} prod_{i<j} r_ij^{n_i n_j}
  V compositions(const std::vector<V>& w, const std::vector<V>& rr) const {
    const Ring& r = ring_;
    std::size_t c = w.size();
    std::size_t n = plan_.domain_size();
    std::uint64_t max_cross = (n / 2) * (n - n / 2);
    auto powers = [&](const V& x, std::uint64_t upto) {
      std::vector<V> t(upto + 1);
      t[0] = r.one();
      for (std::uint64_t e = 1; e <= upto; ++e) t[e] = r.mul(t[e - 1], x);
      return t;
    };
    std::vector<std::vector<V>> wpow(c), self(c), cross(c * c);
    for (std::size_t i = 0; i < c; ++i) {
      wpow[i] = powers(w[i], n);
      auto rpow = powers(rr[i * c + i], n);
      self[i].resize(n + 1);
      self[i][0] = r.one();
      for (std::size_t m = 0; m < n; ++m) self[i][m + 1] = r.mul(self[i][m], rpow[m]);
      for (std::size_t j = i + 1; j < c; ++j) cross[i * c + j] = powers(rr[i * c + j], max_cross);
    }
    std::vector<std::size_t> counts(c, 0);
    V total = r.zero();
    auto rec = [&](auto&& self_rec, std::size_t i, std::size_t remaining, const V& partial) -> void {
      std::size_t lo = (i + 1 == c) ? remaining : 0;
      for (std::size_t k = lo; k <= remaining; ++k) {
        counts[i] = k;
        V factor = partial;
        if (k > 0) {
          factor = r.mul(factor, r.mul(binom_[remaining][k], r.mul(wpow[i][k], self[i][k])));
          for (std::size_t j = 0; j < i; ++j)
            if (counts[j]) factor = r.mul(factor, cross[j * c + i][counts[j] * k]);
        }
        if (i + 1 == c)
          total = r.add(total, factor);
        else
          self_rec(self_rec, i + 1, remaining - k, factor);
      }
      counts[i] = 0;
    };
    rec(rec, 0, n, r.one());
    return total;
  }

  const LiftedPlan& plan_;
  Ring ring_;
  std::vector<std::vector<V>> binom_;
};

namespace detail {

// Scales both weights of a predicate to integral coefficients; returns the
// common denominator.
inline Integer integral_scale(WeightPair<Cyclotomic>& wp) {
  Integer d = 1;
  for (const auto* x : {&wp.w, &wp.wbar})
    for (const auto& t : x->terms()) d = lcm(d, t.second.get_den());
  if (d != 1) {
    wp.w = wp.w.scaled(Rational(d));
    wp.wbar = wp.wbar.scaled(Rational(d));
  }
  return d;
}

inline Integer l1_norm(const Cyclotomic& x) {
  Integer s = 0;
  for (const auto& t : x.terms()) s += abs(t.second.get_num());
  return s;
}

}  // namespace detail

// Exact evaluation through multi-modular reconstruction in Z[Z_L].
inline Cyclotomic lifted_exact_modular(const LiftedPlan& plan, std::vector<WeightPair<Cyclotomic>> weights) {
  std::size_t n = plan.domain_size();
  Integer scale = 1;
  std::uint64_t order = 1;
  for (std::size_t p = 0; p < weights.size(); ++p) {
    Integer d = detail::integral_scale(weights[p]);
    if (d != 1) scale *= pow(d, ipow(n, plan.arity(p)));
    order = std::lcm(order, std::lcm(weights[p].w.order(), weights[p].wbar.order()));
  }

  std::vector<WeightPair<Integer>> norms;
  for (const auto& wp : weights) norms.push_back({detail::l1_norm(wp.w), detail::l1_norm(wp.wbar)});
  Integer bound = LiftedEvaluator<IntegerRing>(plan, IntegerRing{})(norms);
  if (bound == 0) return {};

  auto primes = modular::primes_covering(order, bound);
  std::vector<std::vector<std::uint64_t>> residues(primes.size());
  for (std::size_t pi = 0; pi < primes.size(); ++pi) {
    modular::Field f(primes[pi]);
    modular::CharacterTransform chars(f, order);
    std::vector<std::uint64_t> hpow(order);
    hpow[0] = f.one();
    for (std::uint64_t e = 1; e < order; ++e) hpow[e] = f.mul(hpow[e - 1], chars.root());
    // weights as (exponent in Z_L, coefficient mod p)
    using Sparse = std::vector<std::pair<std::uint64_t, std::uint64_t>>;
    auto sparse = [&](const Cyclotomic& x) {
      Sparse s;
      std::uint64_t step = order / x.order();
      for (const auto& [e, c] : x.terms()) s.emplace_back(e * step, f.from_integer(c.get_num()));
      return s;
    };
    std::vector<std::pair<Sparse, Sparse>> ws;
    for (const auto& wp : weights) ws.emplace_back(sparse(wp.w), sparse(wp.wbar));

    ModularRing ring{&f};
    LiftedEvaluator<ModularRing> eval(plan, ring);
    std::vector<WeightPair<std::uint64_t>> at(weights.size());
    std::vector<std::uint64_t> values(order);
    for (std::uint64_t u = 0; u < order; ++u) {
      auto chi = [&](const Sparse& s) {
        std::uint64_t v = 0;
        for (const auto& [e, c] : s) v = f.add(v, f.mul(c, hpow[(u * e) % order]));
        return v;
      };
      for (std::size_t p = 0; p < ws.size(); ++p) at[p] = {chi(ws[p].first), chi(ws[p].second)};
      values[u] = eval(at);
    }
    auto coeffs = chars.inverse(values);
    for (auto& c : coeffs) c = f.from_mont(c);
    residues[pi] = std::move(coeffs);
  }

  modular::Crt crt(primes);
  std::vector<Rational> group(order);
  std::vector<std::uint64_t> r(primes.size());
  for (std::uint64_t e = 0; e < order; ++e) {
    for (std::size_t pi = 0; pi < primes.size(); ++pi) r[pi] = residues[pi][e];
    group[e] = Rational(crt.combine(r), scale);
    group[e].canonicalize();
  }
  return Cyclotomic::from_group_ring(order, group);
}

template <class T>
T wfomc_lifted_fo2(const LiftedPlan& plan, const WfomcTask<T>& task) {
  auto weights = detail::weights_by_index(task.theory.signature(), task.weights);
  if constexpr (Backend<T>::exact) {
    return lifted_exact_modular(plan, std::move(weights));
  } else {
    return LiftedEvaluator<BackendRing<T>>(plan, BackendRing<T>{})(weights);
  }
}

template <class T>
T wfomc_lifted_fo2(const WfomcTask<T>& task) {
  LiftedPlan plan(task.theory, task.domain.size());
  return wfomc_lifted_fo2(plan, task);
}

// Lifted evaluation directly in the value type (no modular reconstruction).
template <class T>
T wfomc_lifted_direct(const WfomcTask<T>& task) {
  LiftedPlan plan(task.theory, task.domain.size());
  auto weights = detail::weights_by_index(task.theory.signature(), task.weights);
  return LiftedEvaluator<BackendRing<T>>(plan, BackendRing<T>{})(weights);
}

// ---------------------------------------------------------------------------
// Instrumented oracle.

enum class Engine { brute, lifted, automatic };

inline const char* engine_name(Engine e) {
  switch (e) {
    case Engine::brute: return "brute";
    case Engine::lifted: return "lifted";
    default: return "auto";
  }
}

inline Engine parse_engine(const std::string& s) {
  if (s == "brute") return Engine::brute;
  if (s == "lifted") return Engine::lifted;
  if (s == "auto") return Engine::automatic;
  throw PreconditionError("unknown engine '" + s + "' (brute|lifted|auto)");
}

class OracleStats {
 public:
  struct Call {
    Engine engine;
    double seconds;
  };

  void record(Engine engine, double seconds) {
    calls_.fetch_add(1, std::memory_order_relaxed);
    std::lock_guard lock(mu_);
    log_.push_back({engine, seconds});
  }

  std::uint64_t calls() const noexcept { return calls_.load(std::memory_order_relaxed); }
  std::uint64_t calls_with(Engine e) const {
    std::lock_guard lock(mu_);
    return static_cast<std::uint64_t>(std::count_if(log_.begin(), log_.end(), [e](const Call& c) { return c.engine == e; }));
  }
  double total_seconds() const {
    std::lock_guard lock(mu_);
    double s = 0;
    for (const auto& c : log_) s += c.seconds;
    return s;
  }
  std::vector<Call> log() const {
    std::lock_guard lock(mu_);
    return log_;
  }
  std::optional<Engine> last_engine() const {
    std::lock_guard lock(mu_);
    if (log_.empty()) return std::nullopt;
    return log_.back().engine;
  }

 private:
  std::atomic<std::uint64_t> calls_{0};
  mutable std::mutex mu_;
  std::vector<Call> log_;
};

template <class T>
class Oracle {
 public:
  explicit Oracle(Engine mode = Engine::automatic, std::uint64_t world_cap = default_world_cap())
      : mode_(mode), cap_(world_cap) {}

  T operator()(const WfomcTask<T>& task) {
    auto start = std::chrono::steady_clock::now();
    Engine used = Engine::brute;
    T value;
    if (mode_ == Engine::brute) {
      value = wfomc_bruteforce(task, cap_);
    } else {
      std::shared_ptr<const LiftedPlan> plan;
      try {
        plan = plan_for(task);
      } catch (const NotLiftableError&) {
        if (mode_ == Engine::lifted) throw;
      }
      if (plan) {
        value = wfomc_lifted_fo2(*plan, task);
        used = Engine::lifted;
      } else {
        value = wfomc_bruteforce(task, cap_);
      }
    }
    stats_.record(used, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    return value;
  }

  const OracleStats& stats() const noexcept { return stats_; }
  Engine mode() const noexcept { return mode_; }
  std::uint64_t world_cap() const noexcept { return cap_; }

 private:
  std::shared_ptr<const LiftedPlan> plan_for(const WfomcTask<T>& task) {
    std::string key = std::to_string(task.domain.size()) + "|";
    for (const auto& p : task.theory.signature().predicates()) key += p.to_string() + ",";
    key += "|" + task.theory.to_string();
    std::lock_guard lock(mu_);
    auto it = plans_.find(key);
    if (it != plans_.end()) {
      if (!it->second.first) throw NotLiftableError(it->second.second);
      return it->second.first;
    }
    try {
      auto plan = std::make_shared<const LiftedPlan>(task.theory, task.domain.size());
      plans_.emplace(key, std::make_pair(plan, std::string()));
      return plan;
    } catch (const NotLiftableError& e) {
      plans_.emplace(key, std::make_pair(nullptr, std::string(e.what())));
      throw;
    }
  }

  Engine mode_;
  std::uint64_t cap_;
  OracleStats stats_;
  std::mutex mu_;
  std::map<std::string, std::pair<std::shared_ptr<const LiftedPlan>, std::string>> plans_;
};

}  // namespace cmln

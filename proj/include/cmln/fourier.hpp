#pragma once

// Multidimensional DFT over count grids and the count distribution through
// WFOMC evaluations of phase-shifted models.
//
//   dft:  g(k) = sum_n f(n) exp(-i 2 pi <k, n/N>)
//   idft: f(n) = (1/|J|) sum_k g(k) exp(+i 2 pi <n, k/N>)

#include <numbers>
#include <string>
#include <vector>

#include "cmln/cyclotomic.hpp"
#include "cmln/error.hpp"
#include "cmln/grid.hpp"
#include "cmln/mln.hpp"
#include "cmln/modular.hpp"
#include "cmln/numeric.hpp"
#include "cmln/wfomc.hpp"

namespace cmln {

namespace detail {

// Applies out[k] = sum_j in[j] * root(axis, j*k mod m) along every axis.
template <class V, class Line>
void transform_lines(std::vector<V>& data, const GridShape& shape, Line&& line_transform) {
  const auto& dims = shape.moduli();
  std::uint64_t total = data.size();
  std::uint64_t inner = total;
  std::vector<V> line;
  for (std::size_t axis = 0; axis < dims.size(); ++axis) {
    std::uint64_t m = dims[axis];
    inner /= m;
    if (m == 1) continue;
    std::uint64_t outer = total / (m * inner);
    line.resize(m);
    for (std::uint64_t o = 0; o < outer; ++o) {
      for (std::uint64_t i = 0; i < inner; ++i) {
        std::uint64_t base = o * m * inner + i;
        for (std::uint64_t j = 0; j < m; ++j) line[j] = data[base + j * inner];
        auto out = line_transform(line, m);
        for (std::uint64_t k = 0; k < m; ++k) data[base + k * inner] = std::move(out[k]);
      }
    }
  }
}

inline CountGrid<FloatComplex> transform_float(CountGrid<FloatComplex> g, bool inverse) {
  transform_lines(g.values, g.shape, [inverse](const std::vector<FloatComplex>& in, std::uint64_t m) {
    std::vector<FloatComplex> out(m);
    double sign = inverse ? 1.0 : -1.0;
    for (std::uint64_t k = 0; k < m; ++k) {
      FloatComplex acc = 0;
      for (std::uint64_t j = 0; j < m; ++j) {
        double angle = sign * 2.0 * std::numbers::pi * static_cast<double>((j * k) % m) / static_cast<double>(m);
        acc += in[j] * FloatComplex(std::cos(angle), std::sin(angle));
      }
      out[k] = acc;
    }
    return out;
  });
  if (inverse) {
    double s = static_cast<double>(g.shape.size());
    for (auto& v : g.values) v /= s;
  }
  return g;
}

inline CountGrid<Cyclotomic> transform_exact_direct(CountGrid<Cyclotomic> g, bool inverse) {
  transform_lines(g.values, g.shape, [inverse](const std::vector<Cyclotomic>& in, std::uint64_t m) {
    std::uint64_t order = m;
    for (const auto& v : in) order = std::lcm(order, v.order());
    GroupRingAccumulator acc(order);
    std::uint64_t step = order / m;
    std::vector<Cyclotomic> out(m);
    for (std::uint64_t k = 0; k < m; ++k) {
      acc.clear();
      for (std::uint64_t j = 0; j < m; ++j) {
        std::uint64_t e = (j * k) % m;
        if (!inverse) e = (m - e) % m;
        acc.add(in[j], e * step);
      }
      out[k] = acc.value();
    }
    return out;
  });
  if (inverse) {
    Rational s(Integer(static_cast<unsigned long>(g.shape.size())));
    for (auto& v : g.values) v = v.scaled(1 / s);
  }
  return g;
}

inline constexpr std::uint64_t kModularTransformMemory = std::uint64_t{1} << 26;

// Same transform by multi-modular reconstruction in Z[Z_L], L = lcm of all
// value orders and grid moduli.
inline CountGrid<Cyclotomic> transform_exact_modular(const CountGrid<Cyclotomic>& g, bool inverse) {
  const auto& dims = g.shape.moduli();
  std::uint64_t order = 1, cells = g.size();
  for (auto m : dims) order = std::lcm(order, m);
  Integer den = 1;
  for (const auto& v : g.values) {
    order = std::lcm(order, v.order());
    for (const auto& t : v.terms()) den = lcm(den, t.second.get_den());
  }
  if (cells * order > kModularTransformMemory)
    throw SizeLimitError("exact transform needs " + std::to_string(cells) + " x " + std::to_string(order) +
                         " residues");
  Integer bound = 0;
  for (const auto& v : g.values)
    for (const auto& t : v.terms()) bound += abs(t.second.get_num()) * (den / t.second.get_den());
  CountGrid<Cyclotomic> out(g.shape, Cyclotomic());
  if (bound == 0) return out;

  auto primes = modular::primes_covering(order, bound);
  std::vector<std::vector<std::uint64_t>> residues(primes.size());
  for (std::size_t pi = 0; pi < primes.size(); ++pi) {
    modular::Field f(primes[pi]);
    modular::CharacterTransform chars(f, order);
    std::vector<std::uint64_t> hpow(order);
    hpow[0] = f.one();
    for (std::uint64_t e = 1; e < order; ++e) hpow[e] = f.mul(hpow[e - 1], chars.root());

    // table[n * order + u] = chi_u(value at n)
    std::vector<std::uint64_t> table(cells * order);
    std::vector<std::uint64_t> dense(order);
    for (std::uint64_t n = 0; n < cells; ++n) {
      std::fill(dense.begin(), dense.end(), 0);
      const auto& v = g.values[n];
      std::uint64_t step = order / v.order();
      for (const auto& [e, c] : v.terms()) dense[e * step] = f.from_integer(c.get_num() * (den / c.get_den()));
      auto ch = chars.forward(dense);
      std::copy(ch.begin(), ch.end(), table.begin() + static_cast<std::ptrdiff_t>(n * order));
    }
    std::vector<std::uint64_t> column(cells);
    std::vector<std::vector<std::uint64_t>> roots(dims.size());
    for (std::uint64_t u = 0; u < order; ++u) {
      for (std::size_t a = 0; a < dims.size(); ++a) {
        std::uint64_t m = dims[a], step = order / m;
        roots[a].resize(m);
        for (std::uint64_t t = 0; t < m; ++t) {
          std::uint64_t e = (u * ((step * t) % order)) % order;
          roots[a][t] = hpow[inverse ? e : (order - e) % order];
        }
      }
      for (std::uint64_t n = 0; n < cells; ++n) column[n] = table[n * order + u];
      modular::separable_transform(f, column, dims, roots);
      for (std::uint64_t n = 0; n < cells; ++n) table[n * order + u] = column[n];
    }
    residues[pi].resize(cells * order);
    std::vector<std::uint64_t> row(order);
    for (std::uint64_t n = 0; n < cells; ++n) {
      std::copy(table.begin() + static_cast<std::ptrdiff_t>(n * order),
                table.begin() + static_cast<std::ptrdiff_t>((n + 1) * order), row.begin());
      auto coeffs = chars.inverse(row);
      for (std::uint64_t e = 0; e < order; ++e) residues[pi][n * order + e] = f.from_mont(coeffs[e]);
    }
  }

  modular::Crt crt(primes);
  Integer scale = den;
  if (inverse) scale *= Integer(static_cast<unsigned long>(cells));
  std::vector<Rational> group(order);
  std::vector<std::uint64_t> r(primes.size());
  for (std::uint64_t n = 0; n < cells; ++n) {
    for (std::uint64_t e = 0; e < order; ++e) {
      for (std::size_t pi = 0; pi < primes.size(); ++pi) r[pi] = residues[pi][n * order + e];
      group[e] = Rational(crt.combine(r), scale);
      group[e].canonicalize();
    }
    out.values[n] = Cyclotomic::from_group_ring(order, group);
  }
  return out;
}

inline bool prefer_modular(const CountGrid<Cyclotomic>& g) {
  std::uint64_t order = 1;
  for (auto m : g.shape.moduli()) order = std::lcm(order, m);
  for (const auto& v : g.values) order = std::lcm(order, v.order());
  return g.size() * order > 20000 && g.size() * order <= kModularTransformMemory;
}

}  // namespace detail

enum class TransformMethod { automatic, direct, modular };

inline CountGrid<Cyclotomic> dft(const CountGrid<Cyclotomic>& f, TransformMethod m = TransformMethod::automatic) {
  if (m == TransformMethod::modular || (m == TransformMethod::automatic && detail::prefer_modular(f)))
    return detail::transform_exact_modular(f, false);
  return detail::transform_exact_direct(f, false);
}

inline CountGrid<Cyclotomic> idft(const CountGrid<Cyclotomic>& g, TransformMethod m = TransformMethod::automatic) {
  if (m == TransformMethod::modular || (m == TransformMethod::automatic && detail::prefer_modular(g)))
    return detail::transform_exact_modular(g, true);
  return detail::transform_exact_direct(g, true);
}

inline CountGrid<FloatComplex> dft(const CountGrid<FloatComplex>& f, TransformMethod = TransformMethod::automatic) {
  return detail::transform_float(f, false);
}
inline CountGrid<FloatComplex> idft(const CountGrid<FloatComplex>& g, TransformMethod = TransformMethod::automatic) {
  return detail::transform_float(g, true);
}

inline CountGrid<Cyclotomic> to_cyclotomic(const CountGrid<Rational>& g) {
  CountGrid<Cyclotomic> out(g.shape, Cyclotomic());
  for (std::uint64_t i = 0; i < g.size(); ++i) out.values[i] = Cyclotomic(g.values[i]);
  return out;
}
inline CountGrid<FloatComplex> to_complex(const CountGrid<double>& g) {
  CountGrid<FloatComplex> out(g.shape, FloatComplex());
  for (std::uint64_t i = 0; i < g.size(); ++i) out.values[i] = g.values[i];
  return out;
}
template <class T>
CountGrid<T> lift_real(const CountGrid<RealOf<T>>& g) {
  if constexpr (Backend<T>::exact)
    return to_cyclotomic(g);
  else
    return to_complex(g);
}

// exp(-i 2 pi k / m) in the backend.
template <class T>
T dft_phase(std::uint64_t k, std::uint64_t m) {
  return Backend<T>::root_of_unity(-static_cast<std::int64_t>(k % m), m);
}

inline std::uint64_t kDefaultCallBudget = 1'000'000;

// Phase-shifted models Phi_k over a fixed xi-reduction.
template <class T>
class DftEvaluator {
 public:
  DftEvaluator(const CMln<T>& mln, const Domain& domain)
      : mln_(mln), domain_(domain), red_(mln_to_wfomc(mln)), shape_(count_grid_shape(mln.formulas(), domain)) {}

  const GridShape& shape() const noexcept { return shape_; }
  std::uint64_t calls_per_point() const noexcept { return mln_.components(); }

  // Unnormalized value sum_w U_w(world) * exp(-i 2 pi <k, N/M>); d oracle calls.
  T operator()(const CountVector& k, Oracle<T>& oracle) const {
    shape_.index(k);
    const auto& mods = shape_.moduli();
    T sum = Backend<T>::zero();
    for (std::size_t j = 0; j < mln_.components(); ++j) {
      WeightMap<T> w = red_.weights[j];
      for (std::size_t i = 0; i < mln_.size(); ++i)
        w.set(red_.xi[i], mln_.entries()[i].expweights[j] * dft_phase<T>(k[i], mods[i]), Backend<T>::one());
      sum = sum + oracle(WfomcTask<T>{red_.theory, std::move(w), domain_});
    }
    return sum;
  }

 private:
  const CMln<T>& mln_;
  Domain domain_;
  XiReduction<T> red_;
  GridShape shape_;
};

template <class T>
T dft_point_via_wfomc(const CMln<T>& mln, const Domain& domain, const CountVector& k, Oracle<T>& oracle) {
  return DftEvaluator<T>(mln, domain)(k, oracle);
}

template <class T>
struct CountDistributionResult {
  CountGrid<RealOf<T>> distribution;
  CountGrid<T> transform;  // unnormalized DFT values, transform[0] = Z
  T partition;
  std::uint64_t oracle_calls = 0;
};

inline std::uint64_t required_calls(const GridShape& shape, std::size_t components) {
  if (shape.size() > UINT64_MAX / components) throw SizeLimitError("oracle call count overflows");
  return shape.size() * components;
}

template <class T>
CountDistributionResult<T> count_distribution_via_wfomc(const CMln<T>& mln, const Domain& domain, Oracle<T>& oracle,
                                                        std::uint64_t budget = kDefaultCallBudget) {
  DftEvaluator<T> eval(mln, domain);
  std::uint64_t needed = required_calls(eval.shape(), mln.components());
  if (needed > budget)
    throw SizeLimitError("count distribution needs " + std::to_string(needed) + " oracle calls; budget is " +
                         std::to_string(budget));
  std::uint64_t before = oracle.stats().calls();
  CountGrid<T> g(eval.shape(), Backend<T>::zero());
  for (std::uint64_t i = 0; i < g.size(); ++i) g.values[i] = eval(eval.shape().point(i), oracle);
  T z = g.values[0];
  auto dist = normalize_count_grid(idft(g), z);
  return {std::move(dist), std::move(g), z, oracle.stats().calls() - before};
}

}  // namespace cmln

#pragma once

// Constructive compilation of count distributions into C-MLNs.
//
// compile_delta: formulas (alpha_1..alpha_m, T) with one component per
// k in J = prod {0..M_i-1}; component k carries exp(i 2 pi k_i / M_i) on alpha_i
// and exp(-i 2 pi <k/M, n0>) on T, so a world weighs |J| * [N(world) = n0].

#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cmln/cyclotomic.hpp"
#include "cmln/error.hpp"
#include "cmln/grid.hpp"
#include "cmln/mln.hpp"
#include "cmln/wfomc.hpp"

namespace cmln {

inline std::string format_count_vector(const CountVector& n) {
  std::string s = "(";
  for (std::size_t i = 0; i < n.size(); ++i) s += (i ? "," : "") + std::to_string(n[i]);
  return s + ")";
}

namespace detail {

// Accepts n0 over the formulas, or over formulas + T with last coordinate 1.
inline CountVector strip_top_coordinate(const CountVector& n0, std::size_t m) {
  if (n0.size() == m) return n0;
  if (n0.size() == m + 1) {
    if (n0.back() != 1) throw PreconditionError("count of T must be 1 in " + format_count_vector(n0));
    return CountVector(n0.begin(), n0.end() - 1);
  }
  throw PreconditionError("count vector " + format_count_vector(n0) + " has wrong dimension");
}

}  // namespace detail

inline CMln<Cyclotomic> compile_delta(const std::vector<Formula>& formulas, const Domain& domain, const CountVector& n0,
                                      const Signature& signature = {}) {
  CountVector target = detail::strip_top_coordinate(n0, formulas.size());
  GridShape shape = count_grid_shape(formulas, domain);
  shape.index(target);
  const auto& mods = shape.moduli();
  std::vector<std::vector<Cyclotomic>> weights(formulas.size() + 1);
  for (std::uint64_t idx = 0; idx < shape.size(); ++idx) {
    auto k = shape.point(idx);
    Cyclotomic top(1L);
    for (std::size_t i = 0; i < formulas.size(); ++i) {
      auto ki = static_cast<std::int64_t>(k[i]);
      weights[i].push_back(Cyclotomic::root_of_unity(ki, mods[i]));
      top *= Cyclotomic::root_of_unity(-static_cast<std::int64_t>((k[i] * target[i]) % mods[i]), mods[i]);
    }
    weights.back().push_back(std::move(top));
  }
  CMln<Cyclotomic> out(signature);
  for (std::size_t i = 0; i < formulas.size(); ++i) out.add(formulas[i], std::move(weights[i]));
  out.add(Formula::top(), std::move(weights.back()));
  return out;
}

// Count vectors (over the formulas, without T) mapped to probabilities.
using TargetDistribution = std::map<CountVector, Rational>;

inline void check_target(const TargetDistribution& target, const GridShape& shape) {
  Rational total = 0;
  for (const auto& [n, a] : target) {
    if (a < 0) throw PreconditionError("negative target mass at " + format_count_vector(n));
    shape.index(n);
    total += a;
  }
  if (total != 1) throw PreconditionError("target masses sum to " + to_string(total) + ", not 1");
}

// Mixture of compile_delta models; the T weights of term j are scaled by A_j / Z_j.
inline CMln<Cyclotomic> compile_distribution(const std::vector<Formula>& formulas, const Domain& domain,
                                             const TargetDistribution& raw_target, Oracle<Cyclotomic>& oracle,
                                             const Signature& signature = {}) {
  TargetDistribution target;
  for (const auto& [n, a] : raw_target) target[detail::strip_top_coordinate(n, formulas.size())] += a;
  GridShape shape = count_grid_shape(formulas, domain);
  check_target(target, shape);

  std::vector<std::vector<Cyclotomic>> weights(formulas.size() + 1);
  Signature sig = signature;
  for (const auto& [n, a] : target) {
    if (a == 0) continue;
    auto delta = compile_delta(formulas, domain, n, signature);
    sig = delta.signature();
    auto red = mln_to_wfomc(delta);
    Cyclotomic z = summed_wfomc(red, red.theory, domain, oracle);
    if (z.is_zero()) throw UnreachableCountVectorError("count vector " + format_count_vector(n) + " is not in the support");
    auto zr = z.try_to_rational();
    if (!std::holds_alternative<Rational>(zr) || std::get<Rational>(zr) <= 0)
      throw std::logic_error("invariant violated: delta partition function " + z.to_string() + " is not a positive rational");
    Rational scale = a / std::get<Rational>(zr);
    for (std::size_t i = 0; i <= formulas.size(); ++i) {
      const auto& e = delta.entries()[i].expweights;
      for (const auto& w : e) weights[i].push_back(i == formulas.size() ? w.scaled(scale) : w);
    }
  }
  CMln<Cyclotomic> out(sig);
  for (std::size_t i = 0; i < formulas.size(); ++i) out.add(formulas[i], std::move(weights[i]));
  out.add(Formula::top(), std::move(weights.back()));
  return out;
}

}  // namespace cmln

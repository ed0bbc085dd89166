#pragma once

// Support extraction through the uniform model, scaling to relational
// marginal statistics and exact hulls.

#include <algorithm>
#include <string>
#include <vector>

#include "cmln/error.hpp"
#include "cmln/fourier.hpp"
#include "cmln/mln.hpp"
#include "cmln/rational.hpp"
#include "cmln/wfomc.hpp"

namespace cmln {

using RationalPoint = std::vector<Rational>;

struct Polytope {
  std::size_t dimension = 0;
  std::vector<RationalPoint> vertices;    // counter-clockwise for dimension 2
  std::vector<RationalPoint> all_points;  // input order, deduplicated
};

inline std::string to_string(const RationalPoint& p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? ", " : "") + to_string(p[i]);
  return s + ")";
}

struct SupportResult {
  std::vector<CountVector> points;
  std::uint64_t oracle_calls = 0;
};

// Grid points with positive mass under the all-weights-one model.
inline SupportResult support_via_wfomc(const std::vector<Formula>& formulas, const Domain& domain,
                                       Oracle<Cyclotomic>& oracle, std::uint64_t budget = kDefaultCallBudget,
                                       const Signature& signature = {}) {
  CMln<Cyclotomic> uniform(signature);
  for (const auto& f : formulas) uniform.add(f, {Cyclotomic(1L)});
  auto r = count_distribution_via_wfomc(uniform, domain, oracle, budget);
  SupportResult out;
  for (std::uint64_t i = 0; i < r.distribution.size(); ++i)
    if (r.distribution.values[i] > 0) out.points.push_back(r.distribution.shape.point(i));
  out.oracle_calls = r.oracle_calls;
  return out;
}

inline std::vector<RationalPoint> scale_to_Q(const std::vector<CountVector>& support, const std::vector<Formula>& formulas,
                                             const Domain& domain) {
  std::vector<Integer> den;
  for (const auto& f : formulas) den.push_back(Integer(static_cast<unsigned long>(grounding_count(f, domain))));
  std::vector<RationalPoint> out;
  for (const auto& n : support) {
    if (n.size() != formulas.size()) throw PreconditionError("count vector has wrong dimension");
    RationalPoint p;
    for (std::size_t i = 0; i < n.size(); ++i) {
      Rational v(Integer(static_cast<unsigned long>(n[i])), den[i]);
      v.canonicalize();
      p.push_back(v);
    }
    out.push_back(std::move(p));
  }
  return out;
}

namespace detail {

inline std::vector<RationalPoint> dedupe(const std::vector<RationalPoint>& points) {
  std::vector<RationalPoint> out;
  for (const auto& p : points)
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  return out;
}

inline std::size_t common_dimension(const std::vector<RationalPoint>& points) {
  if (points.empty()) return 0;
  for (const auto& p : points)
    if (p.size() != points.front().size()) throw PreconditionError("points have different dimensions");
  return points.front().size();
}

inline Rational cross(const RationalPoint& o, const RationalPoint& a, const RationalPoint& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

}  // namespace detail

// Andrew's monotone chain; collinear boundary points are dropped.
inline Polytope convex_hull_2d(const std::vector<RationalPoint>& points) {
  Polytope out;
  out.all_points = detail::dedupe(points);
  out.dimension = detail::common_dimension(out.all_points);
  if (!out.all_points.empty() && out.dimension != 2) throw PreconditionError("convex_hull_2d needs 2-D points");
  out.dimension = 2;
  auto pts = out.all_points;
  std::sort(pts.begin(), pts.end());
  if (pts.size() <= 2) {
    out.vertices = pts;
    return out;
  }
  std::vector<RationalPoint> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && detail::cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && detail::cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  out.vertices = std::move(hull);
  return out;
}

// Is p a convex combination of qs?  Phase-one simplex with Bland's rule.
inline bool in_convex_hull(const RationalPoint& p, const std::vector<RationalPoint>& qs) {
  if (qs.empty()) return false;
  std::size_t m = p.size() + 1, n = qs.size();
  // columns: n lambdas, m artificials, rhs
  std::size_t cols = n + m + 1;
  std::vector<std::vector<Rational>> t(m, std::vector<Rational>(cols, Rational(0)));
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t j = 0; j < n; ++j) t[r][j] = r + 1 < m ? qs[j][r] : Rational(1);
    t[r].back() = r + 1 < m ? p[r] : Rational(1);
    if (t[r].back() < 0)
      for (std::size_t j = 0; j < n; ++j) t[r][j] = -t[r][j];
    if (t[r].back() < 0) t[r].back() = -t[r].back();
    t[r][n + r] = 1;
  }
  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) basis[r] = n + r;
  // objective: minimize sum of artificials; reduced costs c_j = -sum_r t[r][j] for non-artificials
  std::vector<Rational> cost(cols, Rational(0));
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t j = 0; j < cols; ++j)
      if (j < n || j == cols - 1) cost[j] -= t[r][j];
  for (;;) {
    std::size_t enter = cols;
    for (std::size_t j = 0; j + 1 < cols; ++j)
      if (cost[j] < 0) {
        enter = j;
        break;
      }
    if (enter == cols) break;
    std::size_t leave = m;
    Rational best;
    for (std::size_t r = 0; r < m; ++r) {
      if (t[r][enter] <= 0) continue;
      Rational ratio = t[r].back() / t[r][enter];
      if (leave == m || ratio < best || (ratio == best && basis[r] < basis[leave])) {
        leave = r;
        best = ratio;
      }
    }
    if (leave == m) break;  // unbounded cannot happen for a phase-one problem
    Rational piv = t[leave][enter];
    for (auto& v : t[leave]) v /= piv;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == leave || t[r][enter] == 0) continue;
      Rational f = t[r][enter];
      for (std::size_t j = 0; j < cols; ++j) t[r][j] -= f * t[leave][j];
    }
    if (cost[enter] != 0) {
      Rational f = cost[enter];
      for (std::size_t j = 0; j < cols; ++j) cost[j] -= f * t[leave][j];
    }
    basis[leave] = enter;
  }
  // cost.back() holds minus the objective value
  return cost.back() == 0;
}

// Points not expressible as convex combinations of the others, in input order.
inline std::vector<RationalPoint> extreme_points(const std::vector<RationalPoint>& points) {
  auto pts = detail::dedupe(points);
  detail::common_dimension(pts);
  std::vector<RationalPoint> out;
  std::vector<RationalPoint> others;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    others.clear();
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (j != i) others.push_back(pts[j]);
    if (!in_convex_hull(pts[i], others)) out.push_back(pts[i]);
  }
  return out;
}

inline Polytope make_polytope(const std::vector<RationalPoint>& points) {
  auto pts = detail::dedupe(points);
  std::size_t dim = detail::common_dimension(pts);
  if (dim == 2) return convex_hull_2d(pts);
  Polytope out;
  out.dimension = dim;
  out.all_points = pts;
  if (dim == 1) {
    if (!pts.empty()) {
      auto [lo, hi] = std::minmax_element(pts.begin(), pts.end());
      out.vertices.push_back(*lo);
      if (*hi != *lo) out.vertices.push_back(*hi);
    }
    return out;
  }
  out.vertices = extreme_points(pts);
  return out;
}

struct RmpResult {
  Polytope polytope;
  std::vector<CountVector> support;
  std::uint64_t oracle_calls = 0;
  std::uint64_t grid_size = 0;
  // |Delta|^{sum_i v_i} + 1, the closed-form call count to compare with grid_size
  Integer formula_calls;
};

inline Integer closed_form_call_count(const std::vector<Formula>& formulas, const Domain& domain) {
  std::size_t v = 0;
  for (const auto& f : formulas) v += vars(f).size();
  return pow(Integer(static_cast<unsigned long>(domain.size())), v) + 1;
}

inline RmpResult relational_marginal_polytope(const std::vector<Formula>& formulas, const Domain& domain,
                                              Oracle<Cyclotomic>& oracle, std::uint64_t budget = kDefaultCallBudget,
                                              const Signature& signature = {}) {
  RmpResult out;
  auto s = support_via_wfomc(formulas, domain, oracle, budget, signature);
  out.support = std::move(s.points);
  out.oracle_calls = s.oracle_calls;
  out.grid_size = count_grid_shape(formulas, domain).size();
  out.formula_calls = closed_form_call_count(formulas, domain);
  out.polytope = make_polytope(scale_to_Q(out.support, formulas, domain));
  return out;
}

}  // namespace cmln

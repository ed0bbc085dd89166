#pragma once

// Exact complex numbers: finite sums of rational multiples of roots of unity.
//
// A value of conductor n is stored as a sparse list (e, c_e) meaning
// sum_e c_e * zeta_n^e with zeta_n = exp(i*2*pi/n). The list is canonical:
//
//  * n is the smallest conductor of a cyclotomic field containing the value
//    (n is never 2 mod 4; zero and the rationals have n = 1),
//  * exponents avoid a fixed "forbidden" set, so the remaining monomials form
//    a Q-basis of Q(zeta_n) (every value has exactly one representation),
//  * no zero coefficients are stored, so zero is the empty list.
//
// The basis is described through CRT coordinates. For each prime power
// p^a || n let c_p(e) = e * (n/p^a)^{-1} mod p^a; the relation
// sum_{k<p} zeta_n^{e + k n/p} = 0 cycles the top base-p digit of c_p(e) and
// leaves every other coordinate alone. Exponents whose top digit is p-1
// (p odd) or 1 (p = 2) are eliminated. Embeddings Q(zeta_m) -> Q(zeta_n)
// map basis monomials onto basis monomials, so subfield membership is read
// off the exponents directly (all divisible by p, or by 4 when 4 || n).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "cmln/rational.hpp"

namespace cmln {

enum class NotRationalReason { not_real, real_irrational };

namespace detail {

struct PrimePart {
  std::uint64_t prime;
  unsigned exponent;
  std::uint64_t power;      // p^a
  std::uint64_t top_place;  // p^(a-1)
  std::uint64_t step;       // n / p
  std::uint64_t crt_unit;   // (n / p^a)^{-1} mod p^a

  bool forbidden(std::uint64_t e) const {
    std::uint64_t coord = (e % power) * crt_unit % power;
    std::uint64_t digit = coord / top_place;
    return prime == 2 ? digit == 1 : digit == prime - 1;
  }
};

inline const std::vector<PrimePart>& prime_parts(std::uint64_t n) {
  thread_local std::unordered_map<std::uint64_t, std::vector<PrimePart>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<PrimePart> parts;
  for (auto [p, a] : factorize(n)) {
    PrimePart part{p, a, ipow(p, a), ipow(p, a - 1), n / p, 0};
    part.crt_unit = inverse_mod((n / part.power) % part.power, part.power);
    parts.push_back(part);
  }
  return cache.emplace(n, std::move(parts)).first->second;
}

// Scratch space reused across operations of one thread. Entries are zero on
// entry and are restored to zero before returning.
inline std::vector<Rational>& scratch(std::size_t slot, std::size_t size) {
  thread_local std::vector<Rational> buffers[2];
  auto& b = buffers[slot];
  if (b.size() < size) b.resize(size);
  return b;
}

}  // namespace detail

class Cyclotomic {
 public:
  using Term = std::pair<std::uint64_t, Rational>;

  Cyclotomic() = default;
  Cyclotomic(long value) : Cyclotomic(Rational(value)) {}  // NOLINT(implicit)
  Cyclotomic(const Rational& value) {                       // NOLINT(implicit)
    if (value != 0) terms_.emplace_back(0, value);
  }

  // zeta_d^c for any integer c.
  static Cyclotomic root_of_unity(std::int64_t c, std::uint64_t d) {
    if (d == 0) throw PreconditionError("root of unity of order 0");
    std::int64_t sd = static_cast<std::int64_t>(d);
    std::uint64_t e = static_cast<std::uint64_t>(((c % sd) + sd) % sd);
    return from_terms(d, {{e, Rational(1)}});
  }

  // modulus * exp(i*2*pi*phase).
  static Cyclotomic from_polar(const Rational& modulus, const Rational& phase) {
    const Integer& num = phase.get_num();
    const Integer& den = phase.get_den();
    if (!den.fits_ulong_p()) throw PreconditionError("phase denominator too large");
    std::uint64_t d = den.get_ui();
    Integer r = num % den;
    if (r < 0) r += den;
    return from_terms(d, {{r.get_ui(), modulus}});
  }

  // sum_e coeffs[e] * zeta_n^e with coeffs.size() == n; any exponents allowed.
  static Cyclotomic from_group_ring(std::uint64_t n, const std::vector<Rational>& coeffs) {
    if (coeffs.size() != n) throw PreconditionError("group ring vector length differs from order");
    auto& buf = detail::scratch(0, n);
    for (std::uint64_t e = 0; e < n; ++e) buf[e] = coeffs[e];
    return canonicalize(n, buf);
  }

  // Same as from_group_ring, sparse input; exponents taken modulo n.
  static Cyclotomic from_terms(std::uint64_t n, const std::vector<Term>& terms) {
    if (n == 0) throw PreconditionError("cyclotomic order 0");
    auto& buf = detail::scratch(0, n);
    for (const auto& [e, c] : terms) buf[e % n] += c;
    return canonicalize(n, buf);
  }

  std::uint64_t order() const noexcept { return order_; }
  const std::vector<Term>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }
  bool is_rational() const noexcept { return order_ == 1; }
  bool is_monomial() const noexcept { return terms_.size() == 1; }

  std::variant<Rational, NotRationalReason> try_to_rational() const {
    if (is_zero()) return Rational(0);
    if (order_ == 1) return terms_.front().second;
    return *this == conj() ? NotRationalReason::real_irrational : NotRationalReason::not_real;
  }

  bool is_real() const { return order_ == 1 || *this == conj(); }

  std::complex<double> to_complex() const {
    double re = 0, im = 0;
    for (const auto& [e, c] : terms_) {
      double angle = 2.0 * std::numbers::pi * static_cast<double>(e) / static_cast<double>(order_);
      double v = c.get_d();
      re += v * std::cos(angle);
      im += v * std::sin(angle);
    }
    return {re, im};
  }

  // Automorphism zeta -> zeta^u, gcd(u, order) = 1.
  Cyclotomic galois(std::int64_t u) const {
    if (order_ == 1) return *this;
    std::int64_t n = static_cast<std::int64_t>(order_);
    std::uint64_t uu = static_cast<std::uint64_t>(((u % n) + n) % n);
    if (std::gcd(uu, order_) != 1) throw PreconditionError("galois exponent not a unit");
    auto& buf = detail::scratch(0, order_);
    for (const auto& [e, c] : terms_) buf[(e * uu) % order_] += c;
    return canonicalize(order_, buf);
  }

  Cyclotomic conj() const { return galois(-1); }

  Cyclotomic pow(std::uint64_t k) const {
    Cyclotomic result(1L), base = *this;
    while (k) {
      if (k & 1) result *= base;
      k >>= 1;
      if (k) base *= base;
    }
    return result;
  }

  // 1/x as the product of the other conjugates over the (rational) norm.
  Cyclotomic inverse() const {
    if (is_zero()) throw PreconditionError("inverse of zero");
    if (order_ == 1) return Cyclotomic(1 / terms_.front().second);
    Cyclotomic rest(1L);
    for (std::uint64_t u = 2; u < order_; ++u)
      if (std::gcd(u, order_) == 1) rest *= galois(static_cast<std::int64_t>(u));
    Cyclotomic norm = *this * rest;
    return rest.scaled(1 / norm.terms_.front().second);
  }

  Cyclotomic scaled(const Rational& factor) const {
    if (factor == 0) return {};
    Cyclotomic r = *this;
    for (auto& t : r.terms_) t.second *= factor;
    return r;
  }

  Cyclotomic operator-() const {
    Cyclotomic r = *this;
    for (auto& t : r.terms_) t.second = -t.second;
    return r;
  }

  Cyclotomic& operator+=(const Cyclotomic& other) { return *this = *this + other; }
  Cyclotomic& operator-=(const Cyclotomic& other) { return *this = *this + (-other); }
  Cyclotomic& operator*=(const Cyclotomic& other) { return *this = *this * other; }
  Cyclotomic& operator/=(const Cyclotomic& other) { return *this = *this * other.inverse(); }
  friend Cyclotomic operator/(const Cyclotomic& a, const Cyclotomic& b) { return a * b.inverse(); }

  friend Cyclotomic operator+(const Cyclotomic& a, const Cyclotomic& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    std::uint64_t n = std::lcm(a.order_, b.order_);
    std::uint64_t sa = n / a.order_, sb = n / b.order_;
    Cyclotomic r;
    r.order_ = n;
    r.terms_.reserve(a.terms_.size() + b.terms_.size());
    auto i = a.terms_.begin(), j = b.terms_.begin();
    while (i != a.terms_.end() || j != b.terms_.end()) {
      std::uint64_t ei = i != a.terms_.end() ? i->first * sa : UINT64_MAX;
      std::uint64_t ej = j != b.terms_.end() ? j->first * sb : UINT64_MAX;
      if (ei < ej) {
        r.terms_.emplace_back(ei, i->second);
        ++i;
      } else if (ej < ei) {
        r.terms_.emplace_back(ej, j->second);
        ++j;
      } else {
        Rational s = i->second + j->second;
        if (s != 0) r.terms_.emplace_back(ei, std::move(s));
        ++i;
        ++j;
      }
    }
    r.lower_order();
    return r;
  }

  friend Cyclotomic operator-(const Cyclotomic& a, const Cyclotomic& b) { return a + (-b); }

  friend Cyclotomic operator*(const Cyclotomic& a, const Cyclotomic& b) {
    if (a.is_zero() || b.is_zero()) return {};
    if (a.order_ == 1) return b.scaled(a.terms_.front().second);
    if (b.order_ == 1) return a.scaled(b.terms_.front().second);
    std::uint64_t n = std::lcm(a.order_, b.order_);
    std::uint64_t sa = n / a.order_, sb = n / b.order_;
    auto& buf = detail::scratch(0, n);
    Rational prod;
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        mpq_mul(prod.get_mpq_t(), ca.get_mpq_t(), cb.get_mpq_t());
        buf[(ea * sa + eb * sb) % n] += prod;
      }
    }
    return canonicalize(n, buf);
  }

  friend bool operator==(const Cyclotomic& a, const Cyclotomic& b) {
    return a.order_ == b.order_ && a.terms_ == b.terms_;
  }

  // Terms as "c@e/n" joined by " + "; a rational prints as "p/q".
  std::string to_string() const {
    if (is_zero()) return "0";
    if (order_ == 1) return terms_.front().second.get_str();
    std::string s;
    for (const auto& [e, c] : terms_) {
      if (!s.empty()) s += " + ";
      Rational phase(Integer(static_cast<unsigned long>(e)), Integer(static_cast<unsigned long>(order_)));
      phase.canonicalize();
      s += c.get_str() + "@" + phase.get_str();
    }
    return s;
  }

  // Reduces buf[0..n) into canonical form; leaves the buffer zeroed.
  static Cyclotomic canonicalize(std::uint64_t n, std::vector<Rational>& buf) {
    if (n % 4 == 2) {
      // Q(zeta_2m) = Q(zeta_m) for odd m; zeta_2m^e = -zeta_m^((e+m)/2) for odd e.
      std::uint64_t m = n / 2;
      auto& alt = detail::scratch(1, m);
      for (std::uint64_t e = 0; e < n; ++e) {
        if (sgn(buf[e]) == 0) continue;
        if (e % 2 == 0)
          alt[e / 2] += buf[e];
        else
          alt[((e + m) / 2) % m] -= buf[e];
        buf[e] = 0;
      }
      for (std::uint64_t e = 0; e < m; ++e) std::swap(buf[e], alt[e]);
      n = m;
    }
    for (const auto& part : detail::prime_parts(n)) {
      for (std::uint64_t e = 0; e < n; ++e) {
        if (sgn(buf[e]) == 0 || !part.forbidden(e)) continue;
        for (std::uint64_t k = 1; k < part.prime; ++k) buf[(e + k * part.step) % n] -= buf[e];
        buf[e] = 0;
      }
    }
    Cyclotomic r;
    r.order_ = n;
    for (std::uint64_t e = 0; e < n; ++e) {
      if (sgn(buf[e]) == 0) continue;
      r.terms_.emplace_back(e, buf[e]);
      buf[e] = 0;
    }
    r.lower_order();
    return r;
  }

 private:
  void lower_order() {
    if (terms_.empty()) {
      order_ = 1;
      return;
    }
    bool changed = true;
    while (changed && order_ > 1) {
      changed = false;
      for (const auto& part : detail::prime_parts(order_)) {
        std::uint64_t f = (part.prime == 2 && part.exponent == 2) ? 4 : part.prime;
        bool divisible = std::all_of(terms_.begin(), terms_.end(),
                                     [f](const Term& t) { return t.first % f == 0; });
        if (!divisible) continue;
        for (auto& t : terms_) t.first /= f;
        order_ /= f;
        changed = true;
        break;
      }
    }
  }

  std::uint64_t order_ = 1;
  std::vector<Term> terms_;
};

// Dense accumulator in the group ring Q[Z_n]: sums of shifted cyclotomics
// without intermediate canonicalization. Every added value's order must
// divide n.
class GroupRingAccumulator {
 public:
  explicit GroupRingAccumulator(std::uint64_t n) : n_(n), coeffs_(n) {}

  std::uint64_t order() const noexcept { return n_; }

  // += x * zeta_n^shift
  void add(const Cyclotomic& x, std::uint64_t shift = 0) {
    if (n_ % x.order() != 0) throw PreconditionError("accumulator order not a multiple of value order");
    std::uint64_t s = n_ / x.order();
    for (const auto& [e, c] : x.terms()) coeffs_[(e * s + shift) % n_] += c;
  }

  Cyclotomic value() const { return Cyclotomic::from_group_ring(n_, coeffs_); }

  void clear() {
    for (auto& c : coeffs_) c = 0;
  }

 private:
  std::uint64_t n_;
  std::vector<Rational> coeffs_;
};

}  // namespace cmln

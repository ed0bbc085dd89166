#pragma once

// Numeric backends. Every computation runs in exactly one backend, chosen by
// the template argument: Cyclotomic (exact) or FloatComplex (double).

#include <cmath>
#include <complex>
#include <concepts>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <string>

#include "cmln/cyclotomic.hpp"
#include "cmln/rational.hpp"

namespace cmln {

using FloatComplex = std::complex<double>;

inline constexpr double kFloatTolerance = 1e-9;

template <class T>
struct Backend;

template <>
struct Backend<Cyclotomic> {
  using value_type = Cyclotomic;
  using real_type = Rational;
  static constexpr bool exact = true;
  static constexpr const char* name = "exact";

  static Cyclotomic zero() { return {}; }
  static Cyclotomic one() { return Cyclotomic(1L); }
  static Cyclotomic from_integer(const Integer& z) { return Cyclotomic(Rational(z)); }
  static Cyclotomic from_real(const Rational& q) { return Cyclotomic(q); }
  static Cyclotomic root_of_unity(std::int64_t c, std::uint64_t d) { return Cyclotomic::root_of_unity(c, d); }
  static Cyclotomic pow(const Cyclotomic& x, std::uint64_t k) { return x.pow(k); }
  static Cyclotomic div_real(const Cyclotomic& x, const Rational& q) { return x.scaled(1 / q); }
  static bool is_zero(const Cyclotomic& x) { return x.is_zero(); }
  static bool equal(const Cyclotomic& a, const Cyclotomic& b) { return a == b; }
  static std::complex<double> to_complex(const Cyclotomic& x) { return x.to_complex(); }

  // The value as a real number, or nullopt when it is not rational.
  static std::optional<Rational> as_real(const Cyclotomic& x) {
    auto r = x.try_to_rational();
    if (auto* q = std::get_if<Rational>(&r)) return *q;
    return std::nullopt;
  }
  static bool is_negative(const Rational& q) { return q < 0; }
  static bool is_zero_real(const Rational& q) { return q == 0; }
  static double to_double(const Rational& q) { return q.get_d(); }
  static std::string format(const Cyclotomic& x) { return x.to_string(); }
  static std::string format_real(const Rational& q) { return q.get_str(); }
};

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <>
struct Backend<FloatComplex> {
  using value_type = FloatComplex;
  using real_type = double;
  static constexpr bool exact = false;
  static constexpr const char* name = "float";

  static FloatComplex zero() { return {0.0, 0.0}; }
  static FloatComplex one() { return {1.0, 0.0}; }
  static FloatComplex from_integer(const Integer& z) { return {z.get_d(), 0.0}; }
  static FloatComplex from_real(double q) { return {q, 0.0}; }
  static FloatComplex root_of_unity(std::int64_t c, std::uint64_t d) {
    std::int64_t sd = static_cast<std::int64_t>(d);
    double e = static_cast<double>(((c % sd) + sd) % sd);
    double angle = 2.0 * std::numbers::pi * e / static_cast<double>(d);
    return {std::cos(angle), std::sin(angle)};
  }
  static FloatComplex pow(FloatComplex x, std::uint64_t k) {
    FloatComplex r = one();
    while (k) {
      if (k & 1) r *= x;
      k >>= 1;
      if (k) x *= x;
    }
    return r;
  }
  static FloatComplex div_real(const FloatComplex& x, double q) { return x / q; }
  static bool is_zero(const FloatComplex& x) { return std::abs(x) <= kFloatTolerance; }
  static bool equal(const FloatComplex& a, const FloatComplex& b) { return std::abs(a - b) <= kFloatTolerance; }
  static std::complex<double> to_complex(const FloatComplex& x) { return x; }

  // Treated as real when |Im| <= 1e-9 * max(1, |Re|).
  static std::optional<double> as_real(const FloatComplex& x) {
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return std::nullopt;
    if (std::abs(x.imag()) > kFloatTolerance * std::max(1.0, std::abs(x.real()))) return std::nullopt;
    return x.real();
  }
  static bool is_negative(double q) { return q < -kFloatTolerance; }
  static bool is_zero_real(double q) { return std::abs(q) <= kFloatTolerance; }
  static double to_double(double q) { return q; }
  static std::string format(const FloatComplex& x) {
    if (x.imag() == 0.0) return format_double(x.real());
    return format_double(x.real()) + (x.imag() < 0 ? "-" : "+") + format_double(std::abs(x.imag())) + "i";
  }
  static std::string format_real(double q) { return format_double(q); }
};

template <class T>
concept NumericBackend = requires { typename Backend<T>::real_type; };

template <class T>
using RealOf = typename Backend<T>::real_type;

inline FloatComplex to_float(const Cyclotomic& x) { return x.to_complex(); }

}  // namespace cmln

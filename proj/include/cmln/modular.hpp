#pragma once

// Multi-modular machinery for exact group-ring computations.
//
// An element of Z[Z_L] (integer polynomials modulo x^L - 1) is determined by
// its values under the L characters x -> h^u, u = 0..L-1, where h is a
// primitive L-th root of unity in F_p for a prime p = 1 (mod L). Working one
// prime at a time and recombining with the CRT recovers an integer
// coefficient vector once the product of the primes exceeds twice a bound on
// the coefficients.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "cmln/error.hpp"
#include "cmln/rational.hpp"

namespace cmln::modular {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

inline u64 mulmod_slow(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

inline u64 powmod_slow(u64 a, u64 e, u64 m) {
  u64 r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod_slow(r, a, m);
    a = mulmod_slow(a, a, m);
    e >>= 1;
  }
  return r;
}

// Deterministic for 64-bit inputs.
inline bool is_prime(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    u64 x = powmod_slow(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod_slow(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

// Arithmetic modulo an odd prime p < 2^62 in Montgomery form.
class Field {
 public:
  explicit Field(u64 p) : p_(p) {
    u64 inv = p;  // Newton iteration for p^{-1} mod 2^64
    for (int i = 0; i < 6; ++i) inv *= 2 - p * inv;
    neg_inv_ = ~inv + 1;
    r2_ = static_cast<u64>((static_cast<u128>(1) << 64) % p);
    r2_ = mulmod_slow(r2_, r2_, p);
  }

  u64 prime() const noexcept { return p_; }

  u64 reduce(u128 t) const noexcept {
    u64 m = static_cast<u64>(t) * neg_inv_;
    u64 r = static_cast<u64>((t + static_cast<u128>(m) * p_) >> 64);
    return r >= p_ ? r - p_ : r;
  }
  u64 mul(u64 a, u64 b) const noexcept { return reduce(static_cast<u128>(a) * b); }
  u64 add(u64 a, u64 b) const noexcept {
    u64 s = a + b;
    return s >= p_ ? s - p_ : s;
  }
  u64 sub(u64 a, u64 b) const noexcept { return a >= b ? a - b : a + p_ - b; }
  u64 neg(u64 a) const noexcept { return a ? p_ - a : 0; }

  u64 to_mont(u64 a) const noexcept { return mul(a % p_, r2_); }
  u64 from_mont(u64 a) const noexcept { return reduce(a); }
  u64 one() const noexcept { return to_mont(1); }

  u64 from_integer(const Integer& z) const {
    Integer r;
    mpz_fdiv_r_ui(r.get_mpz_t(), z.get_mpz_t(), p_);
    return to_mont(r.get_ui());
  }
  u64 from_signed(std::int64_t v) const {
    return v >= 0 ? to_mont(static_cast<u64>(v)) : neg(to_mont(static_cast<u64>(-(v + 1)) + 1));
  }

  u64 pow(u64 a, u64 e) const noexcept {
    u64 r = one();
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }
  u64 inv(u64 a) const { return pow(a, p_ - 2); }

 private:
  u64 p_, neg_inv_, r2_;
};

// Primes p = 1 (mod L) below 2^62, descending; the list is shared and grows on demand.
inline std::vector<u64> primes_for_order(u64 order, std::size_t count) {
  static std::mutex mu;
  static std::unordered_map<u64, std::vector<u64>> cache;
  std::lock_guard lock(mu);
  auto& list = cache[order];
  const u64 top = (u64{1} << 62) - 1;
  u64 k = list.empty() ? top / order : (list.back() - 1) / order - 1;
  while (list.size() < count) {
    if (k == 0) throw SizeLimitError("no suitable primes for root-of-unity order " + std::to_string(order));
    u64 p = k * order + 1;
    --k;
    if (p > 2 && is_prime(p)) list.push_back(p);
  }
  return {list.begin(), list.begin() + static_cast<std::ptrdiff_t>(count)};
}

// Primitive order-th root of unity in F_p (Montgomery form).
inline u64 primitive_root_of_unity(const Field& f, u64 order) {
  u64 p = f.prime();
  if ((p - 1) % order != 0) throw PreconditionError("prime is not 1 modulo the order");
  auto factors = factorize(order);
  for (u64 a = 2;; ++a) {
    u64 h = f.pow(f.to_mont(a), (p - 1) / order);
    bool primitive = std::all_of(factors.begin(), factors.end(),
                                 [&](auto pf) { return f.pow(h, order / pf.first) != f.one(); });
    if (primitive) return h;
  }
}

// Number of primes, taken from primes_for_order(order, .), whose product exceeds 2*bound.
inline std::vector<u64> primes_covering(u64 order, const Integer& bound) {
  Integer target = 2 * bound + 1;
  std::size_t count = 1;
  for (;;) {
    auto ps = primes_for_order(order, count);
    Integer prod = 1;
    for (u64 p : ps) prod *= Integer(static_cast<unsigned long>(p));
    if (prod > target) return ps;
    ++count;
  }
}

// In-place separable multidimensional transform:
//   data[k] <- sum_j data[j] * prod_i root_powers[i][(j_i * k_i) mod dims[i]]
// with row-major indexing over dims. root_powers[i] has dims[i] entries.
inline void separable_transform(const Field& f, std::vector<u64>& data, const std::vector<u64>& dims,
                                const std::vector<std::vector<u64>>& root_powers) {
  u64 total = data.size();
  std::vector<u64> line, out;
  u64 inner = total;
  for (std::size_t axis = 0; axis < dims.size(); ++axis) {
    u64 m = dims[axis];
    inner /= m;
    if (m == 1) continue;
    const auto& rp = root_powers[axis];
    line.resize(m);
    out.resize(m);
    u64 outer = total / (m * inner);
    for (u64 o = 0; o < outer; ++o) {
      for (u64 i = 0; i < inner; ++i) {
        u64 base = o * m * inner + i;
        for (u64 j = 0; j < m; ++j) line[j] = data[base + j * inner];
        for (u64 k = 0; k < m; ++k) {
          u64 acc = 0;
          u64 idx = 0;
          for (u64 j = 0; j < m; ++j) {
            acc = f.add(acc, f.mul(line[j], rp[idx]));
            idx += k;
            if (idx >= m) idx -= m;
          }
          out[k] = acc;
        }
        for (u64 k = 0; k < m; ++k) data[base + k * inner] = out[k];
      }
    }
  }
}

// Evaluation at all characters of Z_L (and its inverse) via the prime-factor
// decomposition Z_L = prod Z_{q^a}.
class CharacterTransform {
 public:
  CharacterTransform(const Field& f, u64 order) : field_(f), order_(order), perm_(order) {
    h_ = primitive_root_of_unity(f, order);
    for (auto [q, a] : factorize(order)) dims_.push_back(ipow(q, a));
    if (dims_.empty()) dims_.push_back(1);
    // e -> mixed-radix index of (e mod d_0, e mod d_1, ...)
    for (u64 e = 0; e < order; ++e) {
      u64 idx = 0;
      for (u64 d : dims_) idx = idx * d + e % d;
      perm_[e] = idx;
    }
    for (bool inverse : {false, true}) {
      auto& tables = inverse ? inverse_roots_ : forward_roots_;
      for (u64 d : dims_) {
        // CRT idempotent of this axis: c = 1 (mod d), c = 0 (mod order/d)
        u64 rest = order / d;
        u64 c = rest * (d == 1 ? 0 : inverse_mod(rest % d, d)) % order;
        u64 rho = f.pow(h_, inverse ? (order - c) % order : c);
        std::vector<u64> pw(d);
        u64 cur = f.one();
        for (u64 t = 0; t < d; ++t) {
          pw[t] = cur;
          cur = f.mul(cur, rho);
        }
        tables.push_back(std::move(pw));
      }
    }
    inv_order_ = f.inv(f.to_mont(order));
  }

  u64 order() const noexcept { return order_; }
  u64 root() const noexcept { return h_; }
  const Field& field() const noexcept { return field_; }

  // coeffs[e] (e < L)  ->  values[u] = sum_e coeffs[e] h^{u e}
  std::vector<u64> forward(const std::vector<u64>& coeffs) const {
    std::vector<u64> buf(order_);
    for (u64 e = 0; e < order_; ++e) buf[perm_[e]] = coeffs[e];
    separable_transform(field_, buf, dims_, forward_roots_);
    std::vector<u64> out(order_);
    for (u64 u = 0; u < order_; ++u) out[u] = buf[perm_[u]];
    return out;
  }

  // values[u]  ->  coeffs[e] = L^{-1} sum_u values[u] h^{-u e}
  std::vector<u64> inverse(const std::vector<u64>& values) const {
    std::vector<u64> buf(order_);
    for (u64 u = 0; u < order_; ++u) buf[perm_[u]] = values[u];
    separable_transform(field_, buf, dims_, inverse_roots_);
    std::vector<u64> out(order_);
    for (u64 e = 0; e < order_; ++e) out[e] = field_.mul(buf[perm_[e]], inv_order_);
    return out;
  }

 private:
  Field field_;
  u64 order_;
  u64 h_ = 0;
  u64 inv_order_ = 0;
  std::vector<u64> dims_;
  std::vector<u64> perm_;
  std::vector<std::vector<u64>> forward_roots_, inverse_roots_;
};

// Chinese remaindering of residues (plain, not Montgomery) into the
// symmetric range (-P/2, P/2].
class Crt {
 public:
  explicit Crt(std::vector<u64> primes) : primes_(std::move(primes)) {
    Integer m = 1;
    for (u64 p : primes_) {
      inverses_.push_back(m == 1 ? 0 : inverse_mod(mpz_fdiv_ui(m.get_mpz_t(), p), p));
      partial_.push_back(m);
      m *= Integer(static_cast<unsigned long>(p));
    }
    product_ = m;
    half_ = m / 2;
  }

  const std::vector<u64>& primes() const noexcept { return primes_; }

  Integer combine(const std::vector<u64>& residues) const {
    Integer x = Integer(static_cast<unsigned long>(residues[0]));
    for (std::size_t i = 1; i < primes_.size(); ++i) {
      u64 p = primes_[i];
      u64 xm = mpz_fdiv_ui(x.get_mpz_t(), p);
      u64 t = mulmod_slow((residues[i] + p - xm) % p, inverses_[i], p);
      x += partial_[i] * Integer(static_cast<unsigned long>(t));
    }
    if (x > half_) x -= product_;
    return x;
  }

 private:
  std::vector<u64> primes_;
  std::vector<u64> inverses_;
  std::vector<Integer> partial_;
  Integer product_, half_;
};

}  // namespace cmln::modular

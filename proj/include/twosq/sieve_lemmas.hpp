#pragma once
// Quadratic-form data attached to a quadruple (g, h, r, s), the residue
// ell mod Delta that makes a, b integral, the local root counts nu(d), and
// exhaustive verifiers for both.

#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "twosq/errors.hpp"
#include "twosq/primes.hpp"

namespace twosq {

namespace detail {

inline i64 mod(i128 a, i64 m) {
  i128 r = a % m;
  if (r < 0) r += m;
  return static_cast<i64>(r);
}

/// Inverse of a modulo m, or 0 when gcd(a, m) != 1 (m > 1).
inline i64 inverse_mod(i64 a, i64 m) {
  if (m == 1) return 0;
  i64 old_r = mod(a, m), r = m;
  i64 old_s = 1, s = 0;
  while (r != 0) {
    const i64 q = old_r / r;
    i64 tmp = old_r - q * r;
    old_r = r;
    r = tmp;
    tmp = old_s - q * s;
    old_s = s;
    s = tmp;
  }
  if (old_r != 1) return 0;
  return mod(old_s, m);
}

inline int kronecker_minus4(u64 p) {
  if (p % 2 == 0) return 0;
  return p % 4 == 1 ? 1 : -1;
}

}  // namespace detail

/// u_1 + i v_1 = (r + is)(g - ih) and u_2 + i v_2 = (r + is)(g + ih) up to
/// conjugation, with the derived m, Delta and xi. No admissibility checks.
struct FormData {
  i64 g = 0, h = 0, r = 0, s = 0;
  i64 u1 = 0, v1 = 0, u2 = 0, v2 = 0;
  i64 H = 0;      // r^2 + s^2
  i64 G = 0;      // g^2 + h^2
  i64 m = 0;      // H * G
  i64 Delta = 0;  // u1 v2 - u2 v1
  i64 xi = 0;     // u1 u2 + v1 v2
};

inline FormData compute_form(i64 g, i64 h, i64 r, i64 s) {
  detail::require(g > 0 && h > 0 && r > 0 && s > 0, "compute_form: g, h, r, s must be positive");
  detail::require(g < (1 << 20) && h < (1 << 20) && r < (1 << 20) && s < (1 << 20),
                  "compute_form: inputs too large");
  FormData f;
  f.g = g;
  f.h = h;
  f.r = r;
  f.s = s;
  f.u1 = r * g + s * h;
  f.v1 = s * g - r * h;
  f.u2 = r * g - s * h;
  f.v2 = s * g + r * h;
  f.H = r * r + s * s;
  f.G = g * g + h * h;
  f.m = f.H * f.G;
  f.Delta = f.u1 * f.v2 - f.u2 * f.v1;
  f.xi = f.u1 * f.u2 + f.v1 * f.v2;
  return f;
}

struct SieveContext : FormData {
  i64 i_root = 0;  // s = i r (mod H^2)
  i64 ell = 0;     // residue mod Delta
};

/// F(x, y) = m x^2 - 2 xi x y + m y^2
inline i128 quadratic_form(const FormData& f, i128 x, i128 y) {
  return static_cast<i128>(f.m) * x * x - 2 * static_cast<i128>(f.xi) * x * y +
         static_cast<i128>(f.m) * y * y;
}

/// Builds the context and solves for ell by CRT from
///   (g i - h) ell = h + i g   (mod r^2 + s^2)
///   ell = 1                   (mod h (2, h))
///   ell = -1                  (mod g (2, g))
/// Rejects quadruples whose three moduli are not pairwise coprime with
/// product Delta, or with gcd(g^2 + h^2, r^2 + s^2) > 1.
inline SieveContext build_context(i64 g, i64 h, i64 r, i64 s) {
  SieveContext c;
  static_cast<FormData&>(c) = compute_form(g, h, r, s);
  const i64 H = c.H;
  const i64 mod_h = h * std::gcd<i64>(2, h);
  const i64 mod_g = g * std::gcd<i64>(2, g);
  auto reject = [&](const std::string& why) {
    throw InputError("build_context(" + std::to_string(g) + "," + std::to_string(h) + "," +
                     std::to_string(r) + "," + std::to_string(s) + "): " + why);
  };
  if (std::gcd(r, s) != 1) reject("gcd(r, s) != 1");
  if (std::gcd(c.G, H) != 1) reject("gcd(g^2+h^2, r^2+s^2) != 1");
  if (std::gcd(H, mod_h) != 1) reject("moduli r^2+s^2 and h(2,h) not coprime");
  if (std::gcd(H, mod_g) != 1) reject("moduli r^2+s^2 and g(2,g) not coprime");
  if (std::gcd(mod_h, mod_g) != 1) reject("moduli h(2,h) and g(2,g) not coprime");
  if (static_cast<i128>(H) * mod_h * mod_g != c.Delta)
    reject("moduli product " + std::to_string(H * mod_h * mod_g) + " != Delta " +
           std::to_string(c.Delta) + " (g and h must have opposite parity)");

  const i64 H2 = H * H;
  const i64 r_inv = detail::inverse_mod(r, H2);
  if (r_inv == 0) reject("r not invertible modulo (r^2+s^2)^2");
  c.i_root = detail::mod(static_cast<i128>(s) * r_inv, H2);
  const i64 i_mod = c.i_root % H;

  const i64 lhs = detail::mod(static_cast<i128>(g) * i_mod - h, H);
  const i64 lhs_inv = detail::inverse_mod(lhs, H);
  if (H > 1 && lhs_inv == 0) reject("g i - h not invertible modulo r^2+s^2");
  const i64 ell_H = detail::mod(static_cast<i128>(h + static_cast<i128>(i_mod) * g) * lhs_inv, H);

  // CRT over (H, mod_h, mod_g)
  struct Cong {
    i64 a, m;
  };
  const Cong parts[] = {{ell_H, H}, {detail::mod(1, mod_h), mod_h}, {detail::mod(-1, mod_g), mod_g}};
  i128 x = 0;
  i64 M = 1;
  for (const auto& [a, m] : parts) {
    if (m == 1) continue;
    const i64 inv = detail::inverse_mod(detail::mod(M, m), m);
    if (inv == 0) reject("CRT: modulus " + std::to_string(m) + " not coprime to the others");
    const i64 t = detail::mod(static_cast<i128>(detail::mod(a - x, m)) * inv, m);
    x += static_cast<i128>(M) * t;
    M *= m;
  }
  detail::ensure(M == c.Delta, "build_context: CRT modulus differs from Delta");
  c.ell = detail::mod(x, c.Delta);
  detail::ensure(quadratic_form(c, 1, c.ell) % (static_cast<i128>(c.Delta) * c.Delta) == 0,
                 "build_context: F(1, ell) not divisible by Delta^2");
  return c;
}

/// Every pair (p, q) mod Delta with gcd(p, Delta) = 1: a and b are both
/// integral iff q = ell p (mod Delta). Residues are stepped incrementally
/// in q, so the inner loop has no divisions.
inline bool verify_ell_bruteforce(const SieveContext& c, i64 ell) {
  const i64 D = c.Delta;
  detail::require(D >= 1 && D <= 100000, "verify_ell_bruteforce: Delta must be <= 1e5");
  const i64 v1 = detail::mod(c.v1, D), u1 = detail::mod(c.u1, D);
  const i64 v2 = detail::mod(c.v2, D), u2 = detail::mod(c.u2, D);
  const i64 l = detail::mod(ell, D);
  for (i64 p = 0; p < D; ++p) {
    if (std::gcd(p, D) != 1) continue;
    // q = 0: A = p v2, B = -p u2, C = -l p
    i64 A = detail::mod(static_cast<i128>(p) * v2, D);
    i64 B = detail::mod(-static_cast<i128>(p) * u2, D);
    i64 C = detail::mod(-static_cast<i128>(l) * p, D);
    for (i64 q = 0; q < D; ++q) {
      const bool integral = A == 0 && B == 0;
      if (integral != (C == 0)) return false;
      A -= v1;
      if (A < 0) A += D;
      B += u1;
      if (B >= D) B -= D;
      if (++C == D) C = 0;
    }
  }
  return true;
}

inline bool verify_ell_bruteforce(const SieveContext& c) { return verify_ell_bruteforce(c, c.ell); }

/// nu(d) = prod over p | d of: 0 if p | g^2+h^2, 1 if p | r^2+s^2,
/// 1 + (-4|p) otherwise.
inline u64 nu(u64 d, const SieveContext& c) {
  detail::require(d >= 1 && d <= 10000, "nu: d must lie in [1, 1e4]");
  u64 value = 1;
  for (const auto& [p, e] : factorize(d)) {
    detail::require(e == 1, "nu: d = " + std::to_string(d) + " is not squarefree");
    const auto pi = static_cast<i64>(p);
    if (c.G % pi == 0)
      value *= 0;
    else if (c.H % pi == 0)
      value *= 1;
    else
      value *= static_cast<u64>(1 + detail::kronecker_minus4(p));
  }
  return value;
}

/// #{lambda mod d Delta : lambda = ell (mod Delta), gcd(lambda, d) = 1,
///   d Delta^2 | F(1, lambda)} by direct enumeration.
inline u64 count_nu_bruteforce(u64 d, const SieveContext& c) {
  detail::require(d >= 1, "count_nu_bruteforce: d must be >= 1");
  const i128 D = c.Delta;
  const i128 modulus = static_cast<i128>(d) * D * D;
  u64 count = 0;
  for (u64 j = 0; j < d; ++j) {
    const i128 lambda = c.ell + static_cast<i128>(j) * D;
    if (d > 1 && std::gcd(static_cast<u64>(lambda % static_cast<i128>(d)), d) != 1) continue;
    if (quadratic_form(c, 1, lambda) % modulus == 0) ++count;
  }
  return count;
}

inline bool verify_nu_bruteforce(u64 p, const SieveContext& c) {
  detail::require(is_prime(p), "verify_nu_bruteforce: p must be prime");
  detail::require(static_cast<i128>(p) * c.Delta <= 1000000,
                  "verify_nu_bruteforce: p * Delta must be <= 1e6");
  return count_nu_bruteforce(p, c) == nu(p, c);
}

/// Random admissible contexts with components in [1, max_component] and
/// Delta <= max_delta.
template <class Rng>
std::vector<SieveContext> random_contexts(Rng& rng, std::size_t count, i64 max_component,
                                          i64 max_delta) {
  std::vector<SieveContext> out;
  std::uniform_int_distribution<i64> dist(1, max_component);
  std::size_t attempts = 0;
  while (out.size() < count) {
    detail::ensure(++attempts < 10'000'000, "random_contexts: too few admissible quadruples");
    const i64 g = dist(rng), h = dist(rng), r = dist(rng), s = dist(rng);
    if (2 * g * h * (r * r + s * s) > max_delta) continue;
    try {
      out.push_back(build_context(g, h, r, s));
    } catch (const InputError&) {
    }
  }
  return out;
}

}  // namespace twosq

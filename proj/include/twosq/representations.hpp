#pragma once
// Primitive representations n = a^2 + b^2 and the prime-restricted counts r1, r1*.

#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "twosq/errors.hpp"
#include "twosq/primes.hpp"

namespace twosq {

struct Representation {
  u64 a = 0;
  u64 b = 0;
  u64 n = 0;

  bool primitive() const { return std::gcd(a, b) == 1; }
  bool valid() const {
    return b > 0 && static_cast<u128>(a) * a + static_cast<u128>(b) * b == n;
  }
  friend bool operator==(const Representation&, const Representation&) = default;
  friend auto operator<=>(const Representation&, const Representation&) = default;
};

/// All (a >= 0, b > 0) with a^2 + b^2 = n and gcd(a, b) = 1, by a ascending.
inline std::vector<Representation> enumerate_primitive_reps(u64 n) {
  detail::require(n >= 1, "enumerate_primitive_reps: n must be >= 1");
  std::vector<Representation> reps;
  const u64 top = isqrt(n);
  for (u64 a = 0; a <= top; ++a) {
    const u64 rest = n - a * a;
    if (rest == 0) break;
    const u64 b = isqrt(rest);
    if (b * b == rest && std::gcd(a, b) == 1) reps.push_back({a, b, n});
  }
  return reps;
}

/// Multiplicative: 1 at 2, 0 at 2^k (k >= 2), 1 + (-1|p) at odd p^k.
inline u64 r0_star(u64 n) {
  detail::require(n >= 1, "r0_star: n must be >= 1");
  u64 value = 1;
  for (const auto& [p, e] : factorize(n)) {
    if (p == 2) {
      if (e >= 2) return 0;
    } else if (p % 4 == 3) {
      return 0;
    } else {
      value *= 2;
    }
  }
  return value;
}

namespace detail {

/// #{x >= 0, y > 0 : x^2 + y^2 = n} = sum over d | n of chi_{-4}(d).
inline u64 r0(u64 n) {
  u64 value = 1;
  for (const auto& [p, e] : factorize(n)) {
    if (p % 4 == 1)
      value *= e + 1;
    else if (p % 4 == 3 && e % 2 == 1)
      return 0;
  }
  return value;
}

inline u64 divisor_count(u64 n) {
  u64 value = 1;
  for (const auto& pp : factorize(n)) value *= pp.e + 1;
  return value;
}

}  // namespace detail

/// Gaussian-integer product of two primitive representations of coprime
/// m and n: (ac+bd, |ad-bc|) and (|ac-bd|, ad+bc), in that order.
inline std::pair<Representation, Representation> compose(const Representation& rm,
                                                          const Representation& rn) {
  detail::require(rm.valid() && rn.valid(), "compose: invalid representation");
  detail::require(rm.a > 0 && rm.b > 0 && rn.a > 0 && rn.b > 0,
                  "compose: both representations need a, b > 0");
  detail::require(rm.primitive() && rn.primitive(), "compose: representations must be primitive");
  detail::require(std::gcd(rm.n, rn.n) == 1,
                  "compose: " + std::to_string(rm.n) + " and " + std::to_string(rn.n) +
                      " are not coprime");
  detail::require(static_cast<u128>(rm.n) * rn.n <= UINT64_MAX, "compose: m*n overflows");

  const u64 a = rm.a, b = rm.b, c = rn.a, d = rn.b;
  const u64 mn = rm.n * rn.n;
  const u64 ad = a * d, bc = b * c, ac = a * c, bd = b * d;
  const u64 diff1 = ad > bc ? ad - bc : bc - ad;
  const u64 diff2 = ac > bd ? ac - bd : bd - ac;
  detail::ensure(diff1 != 0 && diff2 != 0, "compose: degenerate product for coprime inputs");
  return {Representation{ac + bd, diff1, mn}, Representation{diff2, ad + bc, mn}};
}

struct R1Counts {
  u64 r1 = 0;
  u64 r1_star = 0;
  friend bool operator==(const R1Counts&, const R1Counts&) = default;
};

/// Brute force over a: counts a > 0 with n - a^2 the square of a prime p,
/// and separately those with gcd(a, p) = 1.
inline R1Counts r1_of(u64 n) {
  detail::require(n >= 2, "r1_of: n must be >= 2");
  R1Counts out;
  for (u64 a = 1; a * a < n; ++a) {
    const u64 rest = n - a * a;
    const u64 p = isqrt(rest);
    if (p * p != rest || !is_prime(p)) continue;
    ++out.r1;
    if (a % p != 0) ++out.r1_star;
  }
  return out;
}

}  // namespace twosq

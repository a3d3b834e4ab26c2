#pragma once
// Prime tables, 64-bit primality, and segment-level factorization data.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "twosq/errors.hpp"

namespace twosq {

using u64 = std::uint64_t;
using u128 = unsigned __int128;
using i64 = std::int64_t;
using i128 = __int128;

inline constexpr u64 kPrimeLimitGuard = u64{1} << 40;
inline constexpr u64 kDefaultSegmentSize = u64{1} << 22;

/// Exact floor(sqrt(n)) for any 64-bit n.
inline u64 isqrt(u64 n) {
  if (n == 0) return 0;
  auto r = static_cast<u64>(std::sqrt(static_cast<long double>(n)));
  while (r > 0 && static_cast<u128>(r) * r > n) --r;
  while (static_cast<u128>(r + 1) * (r + 1) <= n) ++r;
  return r;
}

/// Smallest r with r*r >= n.
inline u64 ceil_sqrt(u64 n) {
  const u64 r = isqrt(n);
  return static_cast<u128>(r) * r == n ? r : r + 1;
}

inline bool is_square(u64 n) {
  const u64 r = isqrt(n);
  return r * r == n;
}

/// Immutable ascending table of all primes <= limit.
class PrimeTable {
 public:
  PrimeTable() = default;
  PrimeTable(u64 limit, std::vector<u64> primes)
      : limit_(limit), primes_(std::move(primes)) {}

  u64 limit() const noexcept { return limit_; }
  std::span<const u64> primes() const noexcept { return primes_; }
  std::size_t size() const noexcept { return primes_.size(); }
  u64 operator[](std::size_t i) const { return primes_[i]; }
  auto begin() const noexcept { return primes_.begin(); }
  auto end() const noexcept { return primes_.end(); }

  bool contains(u64 n) const {
    return std::binary_search(primes_.begin(), primes_.end(), n);
  }

 private:
  u64 limit_ = 0;
  std::vector<u64> primes_;
};

/// Odd-only sieve of Eratosthenes.
inline PrimeTable primes_up_to(u64 limit, u64 guard = kPrimeLimitGuard) {
  detail::require(limit >= 2, "primes_up_to: limit must be >= 2");
  detail::require(limit <= guard,
                  "primes_up_to: limit " + std::to_string(limit) +
                      " exceeds guard " + std::to_string(guard));
  // index i stands for 2i+1
  const u64 half = (limit - 1) / 2 + 1;
  std::vector<std::uint8_t> composite(half, 0);
  composite[0] = 1;
  for (u64 i = 1;; ++i) {
    const u64 p = 2 * i + 1;
    if (p * p > limit) break;
    if (composite[i]) continue;
    for (u64 j = (p * p) / 2; j < half; j += p) composite[j] = 1;
  }
  std::vector<u64> primes;
  primes.reserve(static_cast<std::size_t>(
      1.2 * static_cast<double>(limit) / std::max(1.0, std::log(double(limit)))) + 8);
  primes.push_back(2);
  for (u64 i = 1; i < half; ++i)
    if (!composite[i]) primes.push_back(2 * i + 1);
  return PrimeTable(limit, std::move(primes));
}

namespace detail {

inline u64 mulmod(u64 a, u64 b, u64 m) {
  return static_cast<u64>(static_cast<u128>(a) * b % m);
}

inline u64 powmod(u64 base, u64 exp, u64 m) {
  u64 result = 1 % m;
  base %= m;
  while (exp) {
    if (exp & 1) result = mulmod(result, base, m);
    base = mulmod(base, base, m);
    exp >>= 1;
  }
  return result;
}

inline bool strong_probable_prime(u64 n, u64 a, u64 d, unsigned s) {
  u64 x = powmod(a, d, n);
  if (x == 1 || x == n - 1) return true;
  for (unsigned i = 1; i < s; ++i) {
    x = mulmod(x, x, n);
    if (x == n - 1) return true;
  }
  return false;
}

}  // namespace detail

/// Deterministic for all 64-bit n: the first twelve prime bases suffice
/// below 3.3e24.
inline bool is_prime(u64 n) {
  if (n < 2) return false;
  static constexpr u64 kSmall[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  for (u64 p : kSmall) {
    if (n == p) return true;
    if (n % p == 0) return false;
  }
  u64 d = n - 1;
  unsigned s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : kSmall)
    if (!detail::strong_probable_prime(n, a, d, s)) return false;
  return true;
}

struct PrimePower {
  u64 p;
  unsigned e;
};

/// Trial-division factorization, ascending primes.
inline std::vector<PrimePower> factorize(u64 n) {
  std::vector<PrimePower> out;
  if (n < 2) return out;
  auto take = [&](u64 p) {
    unsigned e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e) out.push_back({p, e});
  };
  take(2);
  take(3);
  for (u64 p = 5; p * p <= n; p += 6) {
    take(p);
    take(p + 2);
  }
  if (n > 1) out.push_back({n, 1});
  return out;
}

/// Number of distinct odd primes dividing n.
inline unsigned omega_star(u64 n) {
  detail::require(n >= 1, "omega_star: n must be >= 1");
  unsigned k = 0;
  for (const auto& pp : factorize(n))
    if (pp.p != 2) ++k;
  return k;
}

/// Membership in the support of r0*: 4 does not divide n and no prime
/// p = 3 (mod 4) divides n.
inline bool in_N(u64 n) {
  if (n == 0 || n % 4 == 0) return false;
  for (const auto& pp : factorize(n))
    if (pp.p % 4 == 3) return false;
  return true;
}

/// omega* and N-membership for every n in [lo, hi).
class FactorizationSegment {
 public:
  FactorizationSegment(u64 lo, u64 hi)
      : lo_(lo), hi_(hi), omega_(hi - lo, 0), in_N_(hi - lo, 1) {}

  u64 lo() const noexcept { return lo_; }
  u64 hi() const noexcept { return hi_; }
  std::size_t size() const noexcept { return omega_.size(); }

  unsigned omega_star(u64 n) const { return omega_[index(n)]; }
  bool in_N(u64 n) const { return in_N_[index(n)] != 0; }

  std::span<const std::uint8_t> omega_data() const noexcept { return omega_; }
  std::span<const std::uint8_t> in_N_data() const noexcept { return in_N_; }

 private:
  friend FactorizationSegment factorize_segment(u64, u64, const PrimeTable&, u64);

  std::size_t index(u64 n) const {
    detail::require(n >= lo_ && n < hi_, "FactorizationSegment: n out of range");
    return static_cast<std::size_t>(n - lo_);
  }

  u64 lo_, hi_;
  std::vector<std::uint8_t> omega_;  // saturating
  std::vector<std::uint8_t> in_N_;
};

/// Sieves [lo, hi) with the primes of `base`. Every n gets the product of
/// its prime powers below sqrt(hi); whatever is left over is one large prime.
inline FactorizationSegment factorize_segment(u64 lo, u64 hi, const PrimeTable& base,
                                              u64 max_segment = kDefaultSegmentSize) {
  detail::require(lo >= 1 && lo < hi, "factorize_segment: need 1 <= lo < hi");
  detail::require(hi - lo <= max_segment,
                  "factorize_segment: segment longer than configured size");
  detail::require(base.limit() >= isqrt(hi - 1),
                  "factorize_segment: base table limit " + std::to_string(base.limit()) +
                      " too small for hi = " + std::to_string(hi));

  FactorizationSegment seg(lo, hi);
  const std::size_t len = static_cast<std::size_t>(hi - lo);
  const u64 top = hi - 1;
  std::vector<u64> smooth(len, 1);
  auto& omega = seg.omega_;
  auto& inN = seg.in_N_;

  for (u64 p : base) {
    if (p * p > top) break;
    const u64 first = (lo + p - 1) / p * p;
    const bool odd = p != 2;
    const bool bad = p % 4 == 3;
    for (u64 n = first; n <= top; n += p) {
      const auto i = static_cast<std::size_t>(n - lo);
      smooth[i] *= p;
      if (odd && omega[i] != 0xFF) ++omega[i];
      if (bad) inN[i] = 0;
    }
    // higher powers only grow the smooth part
    for (u64 pk = p * p; pk <= top; pk *= p) {
      const u64 start = (lo + pk - 1) / pk * pk;
      for (u64 n = start; n <= top; n += pk) smooth[static_cast<std::size_t>(n - lo)] *= p;
      if (p == 2 && pk == 4)
        for (u64 n = start; n <= top; n += pk) inN[static_cast<std::size_t>(n - lo)] = 0;
      if (pk > top / p) break;
    }
  }
  for (std::size_t i = 0; i < len; ++i) {
    const u64 n = lo + i;
    const u64 rest = n / smooth[i];
    if (rest > 1) {
      if (rest & 1) {
        if (omega[i] != 0xFF) ++omega[i];
        if (rest % 4 == 3) inN[i] = 0;
      }
    }
  }
  return seg;
}

}  // namespace twosq

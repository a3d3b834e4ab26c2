#pragma once
// Slow, obviously-correct reference implementations used by the tests.

#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

namespace oracle {

using u64 = std::uint64_t;

inline std::vector<bool> naive_sieve(u64 limit) {
  std::vector<bool> is(limit + 1, true);
  is[0] = false;
  if (limit >= 1) is[1] = false;
  for (u64 p = 2; p * p <= limit; ++p)
    if (is[p])
      for (u64 q = p * p; q <= limit; q += p) is[q] = false;
  return is;
}

inline bool trial_prime(u64 n) {
  if (n < 2) return false;
  for (u64 d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

inline unsigned omega_star(u64 n) {
  unsigned k = 0;
  while (n % 2 == 0) n /= 2;
  for (u64 d = 3; d * d <= n; d += 2) {
    if (n % d) continue;
    ++k;
    while (n % d == 0) n /= d;
  }
  return k + (n > 1 ? 1 : 0);
}

inline bool in_N(u64 n) {
  if (n % 4 == 0) return false;
  for (u64 d = 3; d * d <= n; d += 2) {
    if (n % d) continue;
    if (d % 4 == 3) return false;
    while (n % d == 0) n /= d;
  }
  while (n % 2 == 0) n /= 2;
  return n % 4 != 3;
}

struct PerN {
  std::vector<unsigned> r1, r1_star;
};

/// Double loop over (a, p) with a^2 + p^2 <= x.
inline PerN pair_counts(u64 x) {
  PerN out{std::vector<unsigned>(x + 1, 0), std::vector<unsigned>(x + 1, 0)};
  const auto prime = naive_sieve(x);
  for (u64 p = 2; p * p < x; ++p) {
    if (!prime[p]) continue;
    for (u64 a = 1; a * a + p * p <= x; ++a) {
      ++out.r1[a * a + p * p];
      if (std::gcd(a, p) == 1) ++out.r1_star[a * a + p * p];
    }
  }
  return out;
}

/// Number of (a >= 0, b > 0) with a^2 + b^2 = n and gcd(a, b) = 1.
inline u64 primitive_rep_count(u64 n) {
  u64 c = 0;
  for (u64 a = 0; a * a < n; ++a)
    for (u64 b = 1; a * a + b * b <= n; ++b)
      if (a * a + b * b == n && std::gcd(a, b) == 1) ++c;
  return c;
}

inline u64 divisor_count(u64 n) {
  u64 c = 0;
  for (u64 d = 1; d <= n; ++d) c += n % d == 0;
  return c;
}

}  // namespace oracle

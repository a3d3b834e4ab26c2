#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "twosq/primes.hpp"

using namespace twosq;

TEST(PrimesUpTo, SmallTables) {
  const auto t10 = primes_up_to(10);
  EXPECT_EQ(std::vector<u64>(t10.begin(), t10.end()), (std::vector<u64>{2, 3, 5, 7}));
  const auto t2 = primes_up_to(2);
  EXPECT_EQ(std::vector<u64>(t2.begin(), t2.end()), (std::vector<u64>{2}));
  EXPECT_EQ(primes_up_to(3).size(), 2u);
}

TEST(PrimesUpTo, MatchesNaiveSieveToOneMillion) {
  const auto table = primes_up_to(1'000'000);
  EXPECT_EQ(table.size(), 78498u);
  EXPECT_EQ(table.limit(), 1'000'000u);
  const auto naive = oracle::naive_sieve(1'000'000);
  std::size_t j = 0;
  for (u64 n = 0; n <= 1'000'000; ++n) {
    if (!naive[n]) continue;
    ASSERT_LT(j, table.size());
    ASSERT_EQ(table[j++], n);
  }
  EXPECT_EQ(j, table.size());
  EXPECT_TRUE(std::is_sorted(table.begin(), table.end()));
}

TEST(PrimesUpTo, RejectsBadLimits) {
  EXPECT_THROW(primes_up_to(1), InputError);
  EXPECT_THROW(primes_up_to(0), InputError);
  EXPECT_THROW(primes_up_to(1000, 999), InputError);
}

TEST(IsPrime, Basics) {
  EXPECT_TRUE(is_prime(2));
  EXPECT_FALSE(is_prime(1));
  EXPECT_FALSE(is_prime(0));
  EXPECT_TRUE(is_prime(1'000'000'007));
  EXPECT_TRUE(oracle::trial_prime(1'000'000'007));
  EXPECT_FALSE(is_prime(1'000'000'007ull * 1'000'000'009ull));
  EXPECT_TRUE(is_prime(18446744073709551557ull));  // largest 64-bit prime
  EXPECT_FALSE(is_prime(3215031751ull));           // strong pseudoprime to bases 2, 3, 5, 7
  EXPECT_FALSE(is_prime(3825123056546413051ull));  // strong pseudoprime to bases 2..23
}

TEST(IsPrime, AgreesWithSieveAndTrialDivision) {
  const auto naive = oracle::naive_sieve(200'000);
  for (u64 n = 0; n <= 200'000; ++n) ASSERT_EQ(is_prime(n), naive[n]) << n;
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<u64> dist(1ull << 40, 1ull << 44);
  for (int i = 0; i < 300; ++i) {
    const u64 n = dist(rng) | 1;
    ASSERT_EQ(is_prime(n), oracle::trial_prime(n)) << n;
  }
}

TEST(Factorize, ReconstructsN) {
  for (u64 n = 1; n < 20'000; ++n) {
    u64 prod = 1;
    for (const auto& [p, e] : factorize(n)) {
      ASSERT_TRUE(is_prime(p));
      for (unsigned k = 0; k < e; ++k) prod *= p;
    }
    ASSERT_EQ(prod, n);
  }
}

TEST(IntegerRoots, Boundaries) {
  for (u64 r : {0ull, 1ull, 2ull, 1000ull, 4294967295ull}) {
    EXPECT_EQ(isqrt(r * r), r);
    if (r) {
      EXPECT_EQ(isqrt(r * r - 1), r - 1);
    }
    EXPECT_EQ(ceil_sqrt(r * r), r);
    EXPECT_EQ(ceil_sqrt(r * r + 1), r + 1);
  }
  EXPECT_EQ(isqrt(~0ull), 4294967295ull);
  EXPECT_TRUE(is_square(49));
  EXPECT_FALSE(is_square(50));
}

TEST(FactorizeSegment, MatchesTrialDivisionToOneMillion) {
  const auto base = primes_up_to(1000);
  for (u64 lo = 1; lo < 1'000'000; lo += 65536) {
    const u64 hi = std::min<u64>(lo + 65536, 1'000'001);
    const auto seg = factorize_segment(lo, hi, base, 65536);
    for (u64 n = lo; n < hi; ++n) {
      ASSERT_EQ(seg.omega_star(n), oracle::omega_star(n)) << n;
      ASSERT_EQ(seg.in_N(n), oracle::in_N(n)) << n;
    }
  }
}

TEST(FactorizeSegment, HighSegmentAgreesWithScalarFunctions) {
  const u64 lo = 1'000'000'000'000ull;
  const u64 hi = lo + 2000;
  const auto seg = factorize_segment(lo, hi, primes_up_to(isqrt(hi)), 65536);
  for (u64 n = lo; n < hi; ++n) {
    ASSERT_EQ(seg.omega_star(n), omega_star(n)) << n;
    ASSERT_EQ(seg.in_N(n), in_N(n)) << n;
  }
}

TEST(FactorizeSegment, SmallInputsAndMembership) {
  const auto seg = factorize_segment(1, 31, primes_up_to(10));
  EXPECT_TRUE(seg.in_N(1));
  EXPECT_TRUE(seg.in_N(2));
  EXPECT_FALSE(seg.in_N(3));
  EXPECT_FALSE(seg.in_N(4));
  EXPECT_TRUE(seg.in_N(10));
  EXPECT_FALSE(seg.in_N(21));
  EXPECT_EQ(seg.omega_star(1), 0u);
  EXPECT_EQ(seg.omega_star(2), 0u);
  EXPECT_EQ(seg.omega_star(30), 2u);
}

TEST(FactorizeSegment, RejectsBadArguments) {
  const auto base = primes_up_to(100);
  EXPECT_THROW(factorize_segment(0, 10, base), InputError);
  EXPECT_THROW(factorize_segment(10, 10, base), InputError);
  EXPECT_THROW(factorize_segment(1, 20'000, base), InputError);  // base too small
  EXPECT_THROW(factorize_segment(1, 5000, base, 1000), InputError);
}

TEST(ScalarHelpers, OmegaStarAndMembership) {
  EXPECT_THROW(omega_star(0), InputError);
  EXPECT_EQ(omega_star(1), 0u);
  EXPECT_EQ(omega_star(2 * 3 * 5 * 7 * 11), 4u);
  EXPECT_TRUE(in_N(65));
  EXPECT_FALSE(in_N(8));
  EXPECT_FALSE(in_N(9));
}

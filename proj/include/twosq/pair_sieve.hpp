#pragma once
// Segmented pair sieve: credits every (a, p) with a >= 1, p prime,
// a^2 + p^2 <= x to n = a^2 + p^2 and folds the per-n counts into a
// TallyReport stratified by omega*(n).

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "twosq/errors.hpp"
#include "twosq/primes.hpp"

namespace twosq {

inline constexpr u64 kMinPairSieveX = 100;
inline constexpr u64 kMinSegmentSize = u64{1} << 16;

namespace detail {

inline void add_checked(u64& acc, u64 v, const char* what) {
  if (__builtin_add_overflow(acc, v, &acc))
    throw InvariantError(std::string("counter overflow in ") + what);
}

}  // namespace detail

/// Joint (omega*, r1) histogram plus moment and defect accumulators for the
/// integers n in [lo, hi). Merging is plain addition, so it is associative
/// and commutative.
struct TallyReport {
  using Cell = std::pair<unsigned, unsigned>;  // (k, r)

  u64 x = 0;
  u64 lo = 0;
  u64 hi = 0;
  std::map<Cell, u64> joint;      // n in N, including r = 0
  std::map<unsigned, u64> off_N;  // n not in N with r1(n) >= 1
  u64 r1_total = 0;
  u64 r1_star_total = 0;
  u64 moment2 = 0;
  u64 moment3 = 0;
  u64 gcd_defect = 0;
  bool has_joint = true;

  friend bool operator==(const TallyReport&, const TallyReport&) = default;

  void merge(const TallyReport& other) {
    for (const auto& [cell, c] : other.joint) detail::add_checked(joint[cell], c, "joint");
    for (const auto& [r, c] : other.off_N) detail::add_checked(off_N[r], c, "off_N");
    detail::add_checked(r1_total, other.r1_total, "r1_total");
    detail::add_checked(r1_star_total, other.r1_star_total, "r1_star_total");
    detail::add_checked(moment2, other.moment2, "moment2");
    detail::add_checked(moment3, other.moment3, "moment3");
    detail::add_checked(gcd_defect, other.gcd_defect, "gcd_defect");
    has_joint = has_joint && other.has_joint;
  }
};

/// Per-n pair counts for one segment.
struct SegmentCounts {
  u64 lo = 0;
  u64 hi = 0;
  std::vector<std::uint16_t> r1;
  std::vector<std::uint16_t> r1_star;

  std::uint16_t r1_at(u64 n) const { return r1[static_cast<std::size_t>(n - lo)]; }
  std::uint16_t r1_star_at(u64 n) const { return r1_star[static_cast<std::size_t>(n - lo)]; }
};

/// For each prime p with p^2 + 1 < hi, the a-range is
/// [ceil sqrt(max(lo - p^2, 1)), floor sqrt(hi - 1 - p^2)], integer square
/// roots only.
inline SegmentCounts count_pairs(u64 lo, u64 hi, const PrimeTable& primes) {
  detail::require(lo >= 1 && lo < hi, "count_pairs: need 1 <= lo < hi");
  const u64 top = hi - 1;
  detail::require(primes.limit() >= isqrt(top), "count_pairs: prime table too small");
  SegmentCounts out{lo, hi, std::vector<std::uint16_t>(hi - lo, 0),
                    std::vector<std::uint16_t>(hi - lo, 0)};
  for (u64 p : primes) {
    const u64 p2 = p * p;
    if (p2 + 1 > top) break;
    const u64 amin = std::max<u64>(1, lo > p2 ? ceil_sqrt(lo - p2) : 1);
    const u64 amax = isqrt(top - p2);
    for (u64 a = amin; a <= amax; ++a) {
      const auto i = static_cast<std::size_t>(a * a + p2 - lo);
      if (out.r1[i] == UINT16_MAX)
        throw InvariantError("count_pairs: 16-bit r1 counter overflow at n = " +
                             std::to_string(lo + i));
      ++out.r1[i];
      if (a % p != 0) ++out.r1_star[i];
    }
  }
  return out;
}

/// Counts plus factorization, folded into a TallyReport for [lo, hi).
inline TallyReport tally_segment(u64 x, u64 lo, u64 hi, const PrimeTable& primes,
                                 u64 max_segment = kDefaultSegmentSize) {
  const SegmentCounts counts = count_pairs(lo, hi, primes);
  const FactorizationSegment fac = factorize_segment(lo, hi, primes, max_segment);
  const auto omega = fac.omega_data();
  const auto inN = fac.in_N_data();

  TallyReport t;
  t.x = x;
  t.lo = lo;
  t.hi = hi;
  // dense accumulation, converted to the sparse map at the end
  std::vector<std::vector<u64>> dense;
  std::vector<u64> off;
  const std::size_t len = static_cast<std::size_t>(hi - lo);
  for (std::size_t i = 0; i < len; ++i) {
    const u64 r = counts.r1[i];
    const u64 rs = counts.r1_star[i];
    if (r) {
      t.r1_total += r;
      t.r1_star_total += rs;
      t.moment2 += r * (r - 1) / 2;
      t.moment3 += r * (r - 1) * (r - 2) / 6;
    }
    if (inN[i]) {
      const unsigned k = omega[i];
      if (dense.size() <= k) dense.resize(k + 1);
      if (dense[k].size() <= r) dense[k].resize(r + 1, 0);
      ++dense[k][r];
    } else if (r) {
      if (off.size() <= r) off.resize(r + 1, 0);
      ++off[r];
    }
  }
  t.gcd_defect = t.r1_total - t.r1_star_total;
  for (unsigned k = 0; k < dense.size(); ++k)
    for (unsigned r = 0; r < dense[k].size(); ++r)
      if (dense[k][r]) t.joint[{k, r}] = dense[k][r];
  for (unsigned r = 1; r < off.size(); ++r)
    if (off[r]) t.off_N[r] = off[r];
  return t;
}

struct SegmentRange {
  u64 lo = 0;
  u64 hi = 0;
  friend bool operator==(const SegmentRange&, const SegmentRange&) = default;
  friend auto operator<=>(const SegmentRange&, const SegmentRange&) = default;
};

/// Consecutive ranges of length segment_size covering [2, x].
inline std::vector<SegmentRange> plan_segments(u64 x, u64 segment_size) {
  detail::require(segment_size >= 1, "plan_segments: empty segments");
  std::vector<SegmentRange> plan;
  for (u64 lo = 2; lo <= x;) {
    const u64 hi = x + 1 - lo > segment_size ? lo + segment_size : x + 1;
    plan.push_back({lo, hi});
    lo = hi;
  }
  return plan;
}

struct PairSieveOptions {
  u64 segment_size = kDefaultSegmentSize;
  unsigned thread_budget = 1;
  /// Tallies already computed (e.g. loaded from checkpoints), keyed by range.
  std::map<SegmentRange, TallyReport> completed;
  /// Called once per newly computed segment, serialized under a mutex.
  std::function<void(const TallyReport&)> on_segment;
  /// Stop after this many newly computed segments; result is then partial.
  std::optional<std::size_t> stop_after;
};

struct PairSieveResult {
  TallyReport report;
  bool complete = true;
  std::size_t computed_segments = 0;
  std::size_t reused_segments = 0;
};

inline void validate_pair_sieve_args(u64 x, u64 segment_size, unsigned thread_budget) {
  detail::require(x >= kMinPairSieveX, "pair_sieve: x must be >= 100");
  detail::require(x < (u64{1} << 62), "pair_sieve: x too large");
  detail::require(segment_size >= kMinSegmentSize, "pair_sieve: segment_size must be >= 2^16");
  detail::require(thread_budget >= 1, "pair_sieve: thread_budget must be >= 1");
}

inline PairSieveResult run_pair_sieve(u64 x, PairSieveOptions opts) {
  validate_pair_sieve_args(x, opts.segment_size, opts.thread_budget);
  const PrimeTable primes = primes_up_to(std::max<u64>(2, isqrt(x)));
  const auto plan = plan_segments(x, opts.segment_size);

  std::vector<std::optional<TallyReport>> slots(plan.size());
  std::vector<std::size_t> todo;
  PairSieveResult result;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (auto it = opts.completed.find(plan[i]); it != opts.completed.end()) {
      detail::require(it->second.x == x, "pair_sieve: checkpoint for a different x");
      slots[i] = it->second;
      ++result.reused_segments;
    } else {
      todo.push_back(i);
    }
  }
  if (opts.stop_after && *opts.stop_after < todo.size()) todo.resize(*opts.stop_after);

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= todo.size()) return;
      const auto& range = plan[todo[j]];
      try {
        TallyReport t = tally_segment(x, range.lo, range.hi, primes, opts.segment_size);
        std::lock_guard lock(mu);
        if (failure) return;
        if (opts.on_segment) opts.on_segment(t);
        slots[todo[j]] = std::move(t);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next.store(todo.size());
        return;
      }
    }
  };
  const unsigned n_threads =
      std::max(1u, std::min<unsigned>(opts.thread_budget, static_cast<unsigned>(todo.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  result.computed_segments = todo.size();

  TallyReport total;
  total.x = x;
  total.lo = 2;
  total.hi = x + 1;
  for (const auto& slot : slots) {
    if (slot)
      total.merge(*slot);
    else
      result.complete = false;
  }
  result.report = std::move(total);
  return result;
}

/// Full count over [2, x]; bit-identical for every segment_size and
/// thread_budget.
inline TallyReport pair_sieve(u64 x, u64 segment_size = kDefaultSegmentSize,
                              unsigned thread_budget = 1) {
  PairSieveOptions opts;
  opts.segment_size = segment_size;
  opts.thread_budget = thread_budget;
  return run_pair_sieve(x, std::move(opts)).report;
}

}  // namespace twosq

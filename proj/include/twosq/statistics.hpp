#pragma once
// Headline quantities from a TallyReport and their comparison with the
// asymptotic main terms.

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "twosq/errors.hpp"
#include "twosq/heuristics.hpp"
#include "twosq/pair_sieve.hpp"
#include "twosq/primes.hpp"

namespace twosq {

struct AsymptoticComparison {
  double x = 0;
  double empirical = 0;
  double predicted = 0;
  double ratio = 0;
  std::string note;
};

inline AsymptoticComparison make_comparison(double x, double empirical, double predicted,
                                            std::string note) {
  AsymptoticComparison c{x, empirical, predicted, 0.0, std::move(note)};
  c.ratio = predicted != 0.0 ? empirical / predicted : 0.0;
  return c;
}

/// N_r(x) = #{n <= x : r1(n) = r} for every r >= 1 with a nonzero count.
inline std::map<unsigned, u64> n_r_table(const TallyReport& report) {
  std::map<unsigned, u64> out;
  if (report.x < 2) return out;
  if (!report.has_joint) throw CapabilityError("n_r_table: report has no joint histogram");
  for (const auto& [cell, count] : report.joint)
    if (cell.second >= 1) out[cell.second] += count;
  for (const auto& [r, count] : report.off_N) out[r] += count;
  return out;
}

/// N_0(x): integers n <= x with at least one representation a^2 + p^2.
inline u64 count_representable(const TallyReport& report) {
  u64 total = 0;
  for (const auto& [r, count] : n_r_table(report)) total += count;
  return total;
}

/// pi_N(x; k) = #{n <= x : n in N, omega*(n) = k}, n = 1 included.
inline std::map<unsigned, u64> pi_N_histogram(u64 x, u64 segment_size = kDefaultSegmentSize) {
  detail::require(x >= 2, "pi_N_histogram: x must be >= 2");
  const PrimeTable base = primes_up_to(std::max<u64>(2, isqrt(x)));
  std::vector<u64> counts;
  for (u64 lo = 1; lo <= x;) {
    const u64 hi = x + 1 - lo > segment_size ? lo + segment_size : x + 1;
    const auto seg = factorize_segment(lo, hi, base, segment_size);
    const auto omega = seg.omega_data();
    const auto inN = seg.in_N_data();
    for (std::size_t i = 0; i < seg.size(); ++i) {
      if (!inN[i]) continue;
      if (counts.size() <= omega[i]) counts.resize(omega[i] + 1, 0);
      ++counts[omega[i]];
    }
    lo = hi;
  }
  std::map<unsigned, u64> out;
  for (unsigned k = 0; k < counts.size(); ++k)
    if (counts[k]) out[k] = counts[k];
  return out;
}

/// c_kappa (x / log x) (L/2)^{k-1} / (k-1)! with kappa = (k-1) / L.
inline double predict_pi_N(double x, unsigned k, const PrimeTable& euler_primes) {
  detail::require(k >= 1, "predict_pi_N: k must be >= 1");
  const LogScales s = log_scales(x);
  const double kappa = (k - 1.0) / s.L;
  const double c = euler_product_c_kappa(kappa, euler_primes);
  return c * std::exp(std::log(x) - std::log(s.log_x) + (k - 1.0) * std::log(0.5 * s.L) -
                      std::lgamma(static_cast<double>(k)));
}

inline AsymptoticComparison compare_pi_N(u64 x, unsigned k, const std::map<unsigned, u64>& hist,
                                         const PrimeTable& euler_primes) {
  detail::require(k >= 2, "compare_pi_N: k must be >= 2");
  const auto it = hist.find(k);
  const double empirical = it == hist.end() ? 0.0 : static_cast<double>(it->second);
  return make_comparison(static_cast<double>(x), empirical,
                         predict_pi_N(static_cast<double>(x), k, euler_primes),
                         "pi_N(x;" + std::to_string(k) + ")");
}

inline AsymptoticComparison compare_pi_N(u64 x, unsigned k, u64 prime_limit = 1'000'000) {
  return compare_pi_N(x, k, pi_N_histogram(x), primes_up_to(prime_limit));
}

/// sum C(r1(n), 2) against (9/8) x / log x.
inline AsymptoticComparison daniel_ratio(const TallyReport& report) {
  detail::require(report.x >= 1000, "daniel_ratio: x must be >= 1000");
  const double x = static_cast<double>(report.x);
  return make_comparison(x, static_cast<double>(report.moment2), 9.0 / 8.0 * x / std::log(x),
                         "sum C(r1,2) vs 9/8 x/log x");
}

/// sum (r1 - r1*) against sqrt(x) log log x.
inline AsymptoticComparison gcd_defect_check(const TallyReport& report) {
  detail::require(report.x >= 100, "gcd_defect_check: x must be >= 100");
  const double x = static_cast<double>(report.x);
  return make_comparison(x, static_cast<double>(report.gcd_defect),
                         std::sqrt(x) * std::log(std::log(x)), "gcd defect vs sqrt(x) loglog x");
}

/// N_0(x) against (pi/2) x / log x. The note carries the normalized deficit
/// ((pi/2) x/log x - N_0) (log x)^{1+delta} / x.
inline AsymptoticComparison theorem1_check(const TallyReport& report) {
  const double x = static_cast<double>(report.x);
  const double main = std::numbers::pi / 2.0 * x / std::log(x);
  const double n0 = static_cast<double>(count_representable(report));
  return make_comparison(x, n0, main, "N_0 vs (pi/2) x/log x");
}

inline double normalized_deficit(const TallyReport& report) {
  const double x = static_cast<double>(report.x);
  const double lx = std::log(x);
  const double main = std::numbers::pi / 2.0 * x / lx;
  const double n0 = static_cast<double>(count_representable(report));
  return (main - n0) * std::pow(lx, 1.0 + kDelta) / x;
}

/// ((pi/2) x/log x - N_1 - sum_{r>=2} r N_r) / (x L / (log x)^2).
inline double sumidff_residual(const TallyReport& report) {
  const double x = static_cast<double>(report.x);
  const double lx = std::log(x);
  const auto table = n_r_table(report);
  double rest = 0.0;
  for (const auto& [r, count] : table) rest += static_cast<double>(r) * count;
  const double residual = std::numbers::pi / 2.0 * x / lx - rest;
  return residual / (x * std::log(lx) / (lx * lx));
}

/// Stratified sum over n in N of C(r1(n), 2) by k = omega*(n).
inline std::map<unsigned, u64> stratified_moment2(const TallyReport& report) {
  if (!report.has_joint) throw CapabilityError("report has no joint (k, r) histogram");
  std::map<unsigned, u64> out;
  for (const auto& [cell, count] : report.joint) {
    const u64 r = cell.second;
    if (r >= 2) out[cell.first] += count * (r * (r - 1) / 2);
  }
  return out;
}

struct MomentShape {
  std::map<unsigned, u64> moment2_by_k;
  unsigned peak_k = 0;
  bool unimodal = false;
  double center = 0;     // 2L
  double halfwidth = 0;  // 3 (L log L)^{1/2}
  bool peak_in_window() const {
    return std::abs(static_cast<double>(peak_k) - center) <= halfwidth;
  }
};

/// Unimodality of k -> moment2(k) over its support, and the location of the
/// peak against 2L +- 3 (L log L)^{1/2}.
inline MomentShape moment_shape(const TallyReport& report) {
  MomentShape shape;
  shape.moment2_by_k = stratified_moment2(report);
  const LogScales s = log_scales(static_cast<double>(report.x));
  shape.center = 2.0 * s.L;
  shape.halfwidth = 3.0 * std::sqrt(s.L * std::log(s.L));
  if (shape.moment2_by_k.empty()) return shape;
  const unsigned k_lo = shape.moment2_by_k.begin()->first;
  const unsigned k_hi = shape.moment2_by_k.rbegin()->first;
  std::vector<u64> seq;
  for (unsigned k = k_lo; k <= k_hi; ++k) {
    const auto it = shape.moment2_by_k.find(k);
    seq.push_back(it == shape.moment2_by_k.end() ? 0 : it->second);
  }
  std::size_t peak = 0;
  for (std::size_t i = 1; i < seq.size(); ++i)
    if (seq[i] > seq[peak]) peak = i;
  shape.peak_k = k_lo + static_cast<unsigned>(peak);
  bool ok = true;
  for (std::size_t i = 0; i < peak; ++i) ok = ok && seq[i] <= seq[i + 1];
  for (std::size_t i = peak; i + 1 < seq.size(); ++i) ok = ok && seq[i] >= seq[i + 1];
  shape.unimodal = ok;
  return shape;
}

/// Fraction of sum C(r1,2) over n in N coming from cells with
/// |k - 2L| <= C (L log L)^{1/2} and (log x)^{log 4 - 1 - eps} < r <
/// (log x)^{log 4 - 1 + eps}.
inline double main_contrib_fraction(const TallyReport& report, double C, double epsilon) {
  if (!report.has_joint) throw CapabilityError("main_contrib_fraction: report has no joint histogram");
  detail::require(C >= 0 && epsilon >= 0, "main_contrib_fraction: C, epsilon must be >= 0");
  const LogScales s = log_scales(static_cast<double>(report.x));
  const double width = C * std::sqrt(s.L * std::log(s.L));
  const double expo = std::log(4.0) - 1.0;
  const double r_lo = std::pow(s.log_x, expo - epsilon);
  const double r_hi = std::pow(s.log_x, expo + epsilon);
  double total = 0.0, inside = 0.0;
  for (const auto& [cell, count] : report.joint) {
    const double r = cell.second;
    if (cell.second < 2) continue;
    const double m2 = static_cast<double>(count) * r * (r - 1.0) / 2.0;
    total += m2;
    if (std::abs(cell.first - 2.0 * s.L) <= width && r > r_lo && r < r_hi) inside += m2;
  }
  return total > 0.0 ? inside / total : 0.0;
}

// ---------------------------------------------------------------------------
// Lattice points with a prescribed argument window

/// Half-open angle window [lo, hi) inside [0, pi/2]. Endpoints that are
/// multiples of pi/4 are compared exactly through cross products; any
/// other endpoint uses atan2 with a 1e-12 slack.
class AngleInterval {
 public:
  AngleInterval(double lo, double hi) : lo_(lo), hi_(hi) {
    detail::require(lo >= -1e-15 && hi <= std::numbers::pi / 2 + 1e-12,
                    "AngleInterval: must lie in [0, pi/2]");
    detail::require(hi > lo, "AngleInterval: empty interval");
    lo_quarter_ = exact_quarter(lo);
    hi_quarter_ = exact_quarter(hi);
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }

  /// arg(r + is) in [lo, hi) for (r, s) != (0, 0).
  bool contains(i64 r, i64 s) const {
    return at_or_after(r, s, lo_, lo_quarter_) && !at_or_after(r, s, hi_, hi_quarter_);
  }

 private:
  static std::optional<int> exact_quarter(double angle) {
    const double q = angle / (std::numbers::pi / 4);
    const double rq = std::round(q);
    if (std::abs(q - rq) < 1e-12 && rq >= 0 && rq <= 2) return static_cast<int>(rq);
    return std::nullopt;
  }

  /// arg(r + is) >= angle
  static bool at_or_after(i64 r, i64 s, double angle, std::optional<int> quarter) {
    if (quarter) {
      static constexpr i64 dir[3][2] = {{1, 0}, {1, 1}, {0, 1}};
      const i64 dx = dir[*quarter][0], dy = dir[*quarter][1];
      const i64 cross = dx * s - dy * r;  // > 0 when (r, s) is counterclockwise of dir
      if (cross != 0) return cross > 0;
      return dx * r + dy * s > 0;  // on the ray itself
    }
    return std::atan2(static_cast<double>(s), static_cast<double>(r)) >= angle - 1e-12;
  }

  double lo_, hi_;
  std::optional<int> lo_quarter_, hi_quarter_;
};

/// #{r + is : arg in I, n = r^2 + s^2 in [2R^2, 4R^2], omega*(n) = k,
///   gcd(n, 2m) = 1}, scanning |r|, |s| <= 2R.
inline u64 keysums_count(u64 m, unsigned k, const AngleInterval& interval, double R) {
  detail::require(m >= 1, "keysums_count: m must be >= 1");
  detail::require(R > 0 && R <= 1e4, "keysums_count: R must lie in (0, 1e4]");
  const double n_lo = 2.0 * R * R, n_hi = 4.0 * R * R;
  const auto bound = static_cast<i64>(std::floor(2.0 * R));
  const u64 two_m = 2 * m;
  u64 count = 0;
  for (i64 r = -bound; r <= bound; ++r) {
    for (i64 s = -bound; s <= bound; ++s) {
      if (r == 0 && s == 0) continue;
      const auto n = static_cast<u64>(r * r + s * s);
      const double nd = static_cast<double>(n);
      if (nd < n_lo || nd > n_hi) continue;
      if (!interval.contains(r, s)) continue;
      if (std::gcd(n, two_m) != 1) continue;
      if (omega_star(n) != k) continue;
      ++count;
    }
  }
  return count;
}

}  // namespace twosq

#pragma once
// Constants and functions of the probabilistic model for r1(n): the
// multiplication table constant delta, tau, the Euler product c_kappa and
// kappa, the self-similar sums f_R, the periodic amplitudes psi_r and
// psi_0*, psi_1*, psi_2*, and the N_r vs N_{r+1} crossover scan.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "twosq/errors.hpp"
#include "twosq/primes.hpp"

namespace twosq {

inline const double kLog2 = std::numbers::ln2;
/// 1 - (1 + log log 2) / log 2
inline const double kDelta = 1.0 - (1.0 + std::log(std::numbers::ln2)) / std::numbers::ln2;
/// log(1 / log 2) / log 2
inline const double kTau = std::log(1.0 / std::numbers::ln2) / std::numbers::ln2;
/// 1 / log 2
inline const double kLambda = 1.0 / std::numbers::ln2;
inline constexpr double kPaperKappa = 0.29356;
inline constexpr double kPaperDelta = 0.0860713320;
inline constexpr double kPaperTau = 0.52876;

/// Gamma(s) for s in (0, 171.6]; larger s overflows binary64.
inline double gamma_fn(double s) {
  if (!(s > 0.0)) throw NumericalError("gamma_fn: s must be positive");
  if (s > 171.6) throw NumericalError("gamma_fn: Gamma(s) overflows for s > 171.6");
  return std::tgamma(s);
}

namespace detail {

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace detail

/// c_kappa = 3 / (2^{kappa+2} Gamma(kappa+1))
///         * prod_{p=1(4)} (1 + 2 kappa/(p-1)) (1 - 1/p)^kappa
///         * prod_{p=3(4)} (1 - 1/p)^kappa,
/// over the odd primes of `primes`, accumulated in log space.
inline double euler_product_c_kappa(double kappa, const PrimeTable& primes) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa))
    throw InputError("euler_product_c_kappa: kappa must be finite and >= 0");
  detail::require(primes.limit() >= 1000, "euler_product_c_kappa: prime_limit must be >= 1000");
  detail::KahanSum log_prod;
  for (u64 p : primes) {
    if (p == 2) continue;
    const double pd = static_cast<double>(p);
    double term = kappa * std::log1p(-1.0 / pd);
    if (p % 4 == 1) {
      const double factor = 1.0 + 2.0 * kappa / (pd - 1.0);
      if (!(factor > 0.0)) throw NumericalError("euler_product_c_kappa: non-positive factor");
      term += std::log1p(2.0 * kappa / (pd - 1.0));
    }
    log_prod.add(term);
  }
  const double log_front =
      std::log(3.0) - (kappa + 2.0) * kLog2 - std::lgamma(kappa + 1.0);
  return std::exp(log_front + log_prod.sum);
}

inline double euler_product_c_kappa(double kappa, u64 prime_limit) {
  detail::require(prime_limit >= 1000, "euler_product_c_kappa: prime_limit must be >= 1000");
  return euler_product_c_kappa(kappa, primes_up_to(prime_limit));
}

struct Constants {
  double delta = 0;
  double tau = 0;
  double lambda = 0;
  double c_lambda = 0;  // c_kappa at kappa = lambda
  double kappa = 0;     // c_lambda * sqrt((2 lambda)^3 / pi)
  u64 prime_limit_used = 0;
};

inline Constants compute_constants(u64 prime_limit) {
  detail::require(prime_limit >= 1000, "compute_constants: prime_limit must be >= 1000");
  Constants c;
  c.delta = kDelta;
  c.tau = kTau;
  c.lambda = kLambda;
  c.c_lambda = euler_product_c_kappa(kLambda, prime_limit);
  c.kappa = c.c_lambda * std::sqrt(std::pow(2.0 * kLambda, 3) / std::numbers::pi);
  c.prime_limit_used = prime_limit;
  return c;
}

// ---------------------------------------------------------------------------
// f_R(beta) = sum over m in Z of (2^m beta)^R exp(-2^m beta)

struct BilateralSum {
  double log_value = 0;   // log of the truncated sum
  int m_min = 0;          // smallest m included
  int m_max = 0;          // largest m included
  double lower_tail = 0;  // bound on omitted terms m < m_min, relative to the sum
  double upper_tail = 0;  // bound on omitted terms m > m_max, relative to the sum
  double value() const { return std::exp(log_value); }
};

/// Terms are summed in log space around the peak 2^m beta ~ R. Going up,
/// the ratio of consecutive terms once z > R is 2^R e^{-z}; going down it
/// is at most 2^{-R} e^{z/2}. Both tails are geometric beyond the cut and
/// the cut is placed where the tail bound drops below tol.
inline BilateralSum f_R_detailed(double R, double beta, double tol = 1e-16) {
  if (!(R > 0.0) || !std::isfinite(R)) throw InputError("f_R: R must be > 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InputError("f_R: beta must be > 0");
  if (!(tol > 0.0) || tol > 1e-6) throw InputError("f_R: tol must lie in (0, 1e-6]");

  auto log_term = [&](int m) {
    const double z = std::ldexp(beta, m);
    return R * std::log(z) - z;
  };
  const int peak = static_cast<int>(std::lround(std::log2(R / beta)));
  const double shift = log_term(peak);
  double acc = 0.0;  // sum of exp(log_term - shift)
  BilateralSum out;

  int m = peak;
  for (;; ++m) {
    acc += std::exp(log_term(m) - shift);
    const double z = std::ldexp(beta, m);
    if (z > R) {
      const double q = std::exp(R * kLog2 - 2.0 * z);  // bounds later ratios
      const double next = std::exp(log_term(m + 1) - shift);
      if (q < 1.0) {
        const double bound = next / (1.0 - q) / acc;
        if (bound < tol) {
          out.m_max = m;
          out.upper_tail = bound;
          break;
        }
      }
    }
    if (m > peak + 2000) throw NumericalError("f_R: upper tail did not converge");
  }
  for (m = peak - 1;; --m) {
    acc += std::exp(log_term(m) - shift);
    const double z = std::ldexp(beta, m);
    if (z < R) {
      const double q = std::exp(-R * kLog2 + z / 4.0);
      const double next = std::exp(log_term(m - 1) - shift);
      if (q < 1.0) {
        const double bound = next / (1.0 - q) / acc;
        if (bound < tol) {
          out.m_min = m;
          out.lower_tail = bound;
          break;
        }
      }
    }
    if (m < peak - 100000) throw NumericalError("f_R: lower tail did not converge");
  }
  out.log_value = shift + std::log(acc);
  return out;
}

inline double f_R(double R, double beta, double tol = 1e-16) {
  return f_R_detailed(R, beta, tol).value();
}

inline double log_f_R(double R, double beta, double tol = 1e-16) {
  return f_R_detailed(R, beta, tol).log_value;
}

/// Integral of f_R(beta) d beta / beta over [1, 2] by adaptive
/// Gauss-Kronrod quadrature; equals Gamma(R).
inline double f_R_log_average(double R, double target = 1e-12) {
  auto integrand = [R](double b) { return f_R(R, b) / b; };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 1.0, 2.0, 20,
                                                                       target);
}

// ---------------------------------------------------------------------------
// Periodic amplitudes

namespace detail {

/// beta = 2^{1-t}, with t moved by a multiple of 64 into [-32, 32) so that
/// beta stays representable. Shifts by other integers are left to the
/// bilateral sums.
inline double beta_of(double t) {
  if (!std::isfinite(t)) throw InputError("psi: t must be finite");
  const double shifted = t - 64.0 * std::floor((t + 32.0) / 64.0);
  return std::exp2(1.0 - shifted);
}

/// c * z^a with a < 0 (upper) or a > 0 (lower): asymptotic form of a term.
struct PowerTerm {
  double coef;
  double exponent;
};

/// Sum over m of term(2^m beta), exact up to the power-law regimes: for
/// z < z_low the terms follow `low` and for z > z_high they follow `high`,
/// and those geometric tails are added in closed form.
template <class Term>
double bilateral_with_power_tails(double beta, Term term, double z_low,
                                  std::span<const PowerTerm> low, double z_high,
                                  std::span<const PowerTerm> high) {
  const int m0 = -static_cast<int>(std::floor(std::log2(beta)));
  KahanSum acc;
  int m = m0;
  for (;; ++m) {
    const double z = std::ldexp(beta, m);
    if (z > z_high) {
      for (const auto& pt : high)
        acc.add(pt.coef * std::pow(z, pt.exponent) / (1.0 - std::exp2(pt.exponent)));
      break;
    }
    acc.add(term(z));
  }
  for (m = m0 - 1;; --m) {
    const double z = std::ldexp(beta, m);
    if (z < z_low) {
      for (const auto& pt : low)
        acc.add(pt.coef * std::pow(z, pt.exponent) / (1.0 - std::exp2(-pt.exponent)));
      break;
    }
    acc.add(term(z));
  }
  return acc.sum;
}

}  // namespace detail

/// psi_r(t) = (kappa / r!) f_{r-1-tau}(2^{1-t}); 1-periodic in t.
/// Requires r >= 2: for r = 1 the exponent is negative and the sum diverges.
inline double psi_r(int r, double t, double kappa) {
  detail::require(r >= 2, "psi_r: r must be >= 2 (the sum diverges for r = 1)");
  const double beta = detail::beta_of(t);
  return kappa * std::exp(log_f_R(r - 1.0 - kTau, beta) - std::lgamma(r + 1.0));
}

enum class PsiStar { Zero = 0, One = 1, Two = 2 };

/// psi_0*: kappa sum z^{-1-tau} (e^{-z} - 1 + z)
/// psi_1*: kappa sum z^{-tau} (1 - e^{-z})
/// psi_2*: kappa sum z^{-1-tau} (1 - (1 + z) e^{-z})
/// with z = 2^m beta, beta = 2^{1-t}.
inline double psi_star(PsiStar variant, double t, double kappa) {
  const double beta = detail::beta_of(t);
  const double tau = kTau;
  constexpr double kLow = 1e-13;
  constexpr double kHigh = 80.0;  // e^{-z} below 2e-35

  // 1 - (1+z) e^{-z} and e^{-z} - 1 + z without cancellation near 0
  auto one_minus_1pz_emz = [](double z) {
    if (z < 0.05) {
      double s = 0.0, zk = z;
      double fact = 1.0;
      for (int k = 2; k < 14; ++k) {
        zk *= z;
        fact *= k;
        s += ((k % 2 == 0) ? 1.0 : -1.0) * (k - 1) * zk / fact;
      }
      return s;  // sum_{k>=2} (-1)^k (k-1) z^k / k!
    }
    return -std::expm1(-z) - z * std::exp(-z);
  };
  auto emz_minus_1_plus_z = [](double z) {
    if (z < 0.05) {
      double s = 0.0, zk = z, fact = 1.0;
      for (int k = 2; k < 14; ++k) {
        zk *= z;
        fact *= k;
        s += ((k % 2 == 0) ? 1.0 : -1.0) * zk / fact;
      }
      return s;  // sum_{k>=2} (-1)^k z^k / k!
    }
    return std::expm1(-z) + z;
  };

  double sum = 0.0;
  switch (variant) {
    case PsiStar::Zero: {
      const detail::PowerTerm low[] = {{0.5, 1.0 - tau}};
      const detail::PowerTerm high[] = {{1.0, -tau}, {-1.0, -1.0 - tau}};
      sum = detail::bilateral_with_power_tails(
          beta, [&](double z) { return std::pow(z, -1.0 - tau) * emz_minus_1_plus_z(z); }, kLow,
          low, kHigh, high);
      break;
    }
    case PsiStar::One: {
      const detail::PowerTerm low[] = {{1.0, 1.0 - tau}};
      const detail::PowerTerm high[] = {{1.0, -tau}};
      sum = detail::bilateral_with_power_tails(
          beta, [&](double z) { return std::pow(z, -tau) * -std::expm1(-z); }, kLow, low, kHigh,
          high);
      break;
    }
    case PsiStar::Two: {
      const detail::PowerTerm low[] = {{0.5, 1.0 - tau}};
      const detail::PowerTerm high[] = {{1.0, -1.0 - tau}};
      sum = detail::bilateral_with_power_tails(
          beta, [&](double z) { return std::pow(z, -1.0 - tau) * one_minus_1pz_emz(z); }, kLow,
          low, kHigh, high);
      break;
    }
  }
  return kappa * sum;
}

inline double psi_star(int variant, double t, double kappa) {
  detail::require(variant >= 0 && variant <= 2, "psi_star: variant must be 0, 1 or 2");
  return psi_star(static_cast<PsiStar>(variant), t, kappa);
}

namespace detail {

/// kappa * sum_m z^{-shift-tau} P(a, z), P the regularized lower incomplete
/// gamma function (the probability that a Poisson(z) variable is >= a).
inline double poisson_tail_sum(int a, double shift, double t, double kappa) {
  const double beta = beta_of(t);
  const double expo = -shift - kTau;
  auto term = [&](double z) { return std::pow(z, expo) * boost::math::gamma_p(a, z); };
  const int m0 = static_cast<int>(std::floor(std::log2(a / beta)));
  KahanSum acc;
  int m = m0;
  for (;; ++m) {
    const double z = std::ldexp(beta, m);
    if (boost::math::gamma_q(a, z) < 1e-20) {
      acc.add(std::pow(z, expo) / (1.0 - std::exp2(expo)));
      break;
    }
    acc.add(term(z));
  }
  for (m = m0 - 1;; --m) {
    const double z = std::ldexp(beta, m);
    const double v = term(z);
    acc.add(v);
    // below the mode consecutive terms shrink by at least 2^{-(a + expo)} e^{z}
    if (v <= 1e-20 * std::abs(acc.sum) && z < 0.25 * a) break;
    if (m < m0 - 4000) throw NumericalError("poisson_tail_sum: no convergence");
  }
  return kappa * acc.sum;
}

}  // namespace detail

/// sum_{r >= r0} psi_r(t) in closed form:
/// kappa sum_m z^{-1-tau} P(r0, z).
inline double psi_r_tail(int r0, double t, double kappa) {
  detail::require(r0 >= 2, "psi_r_tail: r0 must be >= 2");
  return detail::poisson_tail_sum(r0, 1.0, t, kappa);
}

/// sum_{r >= r0} r psi_r(t) in closed form:
/// kappa sum_m z^{-tau} P(r0 - 1, z).
inline double psi_r_weighted_tail(int r0, double t, double kappa) {
  detail::require(r0 >= 2, "psi_r_weighted_tail: r0 must be >= 2");
  return detail::poisson_tail_sum(r0 - 1, 0.0, t, kappa);
}

/// Integral of psi_r over one period; equals kappa Gamma(r-1-tau) / (r! log 2).
inline double psi_r_average(int r, double kappa, double target = 1e-12) {
  auto integrand = [r, kappa](double t) { return psi_r(r, t, kappa); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 20,
                                                                       target);
}

// ---------------------------------------------------------------------------
// Binomial model for r1*(n) given r0*(n) = R

/// C(R, r) q^r (1-q)^{R-r} with q = 1 / log sqrt(x) = 2 / log x.
inline double heuristic_pmf_logx(unsigned R, double log_x, unsigned r) {
  if (r > R) throw NumericalError("heuristic_pmf: r > R");
  detail::require(log_x >= std::log(100.0) - 1e-12, "heuristic_pmf: x must be >= 100");
  const double q = 2.0 / log_x;
  if (R == 0) return 1.0;
  const double log_choose =
      std::lgamma(R + 1.0) - std::lgamma(r + 1.0) - std::lgamma(R - r + 1.0);
  return std::exp(log_choose + r * std::log(q) + (R - r) * std::log1p(-q));
}

inline double heuristic_pmf(unsigned R, double x, unsigned r) {
  detail::require(x >= 100.0, "heuristic_pmf: x must be >= 100");
  return heuristic_pmf_logx(R, std::log(x), r);
}

// ---------------------------------------------------------------------------
// Predictions

/// log x, L = log log x and K = floor(L / log 2), with the runtime check
/// 2^K in (log x / 2, log x].
struct LogScales {
  double log_x = 0;
  double L = 0;
  int K = 0;
};

inline LogScales log_scales_from_log(double log_x) {
  detail::require(log_x > 1.0, "log_scales: need log x > 1");
  LogScales s;
  s.log_x = log_x;
  s.L = std::log(log_x);
  s.K = static_cast<int>(std::floor(s.L / kLog2));
  const double pk = std::exp2(s.K);
  detail::ensure(pk > 0.5 * log_x && pk <= log_x * (1.0 + 1e-15),
                 "log_scales: 2^K not in (log x / 2, log x] for log x = " +
                     std::to_string(log_x));
  return s;
}

inline LogScales log_scales(double x) {
  detail::require(x > std::exp(1.0), "log_scales: need x > e");
  return log_scales_from_log(std::log(x));
}

enum class PredictKind { N_r, pi_N_kr };

struct PredictParams {
  int r = 2;
  int k = 1;  // only for pi_N_kr
};

/// x / ((log x)^{1+delta} sqrt(log log x)), computed from log x.
inline double secondary_scale_logx(double log_x) {
  const LogScales s = log_scales_from_log(log_x);
  return std::exp(log_x - (1.0 + kDelta) * std::log(log_x)) / std::sqrt(s.L);
}

/// N_r(x) ~ psi_r(L / log 2) / sqrt(L) * x / (log x)^{1+delta};
/// pi_N(x; k, r) ~ kappa x / ((log x)^{1+delta} sqrt L) e^{-a} a^{r-1-tau} / r!
/// with a = 2^{k+1} / log x.
inline double predict_logx(PredictKind kind, double log_x, const PredictParams& p, double kappa) {
  detail::require(log_x >= std::exp(1.0), "predict: need x >= e^e");
  const LogScales s = log_scales_from_log(log_x);
  const double scale = secondary_scale_logx(log_x);
  switch (kind) {
    case PredictKind::N_r:
      detail::require(p.r >= 2, "predict(N_r): r must be >= 2");
      return psi_r(p.r, s.L / kLog2, kappa) * scale;
    case PredictKind::pi_N_kr: {
      detail::require(p.r >= 0 && p.k >= 0, "predict(pi_N_kr): r, k must be >= 0");
      const double a = std::exp2(p.k + 1.0) / log_x;
      return kappa * scale *
             std::exp(-a + (p.r - 1.0 - kTau) * std::log(a) - std::lgamma(p.r + 1.0));
    }
  }
  return 0.0;
}

inline double predict(PredictKind kind, double x, const PredictParams& p, double kappa) {
  detail::require(x >= std::exp(std::exp(1.0)), "predict: need x >= e^e");
  return predict_logx(kind, std::log(x), p, kappa);
}

// ---------------------------------------------------------------------------
// Crossover scan: psi_r > psi_{r+1} everywhere iff
// f_{r-1-tau}(beta) >= f_{r-tau}(beta) / (r+1) for all beta in (1, 2].

enum class Verdict { HoldsEverywhere, FailsSomewhere };

inline const char* to_string(Verdict v) {
  return v == Verdict::HoldsEverywhere ? "holds-everywhere" : "fails-somewhere";
}

/// A distinguished beta = c (r - tau), reduced into (1, 2].
struct SpecialPoint {
  std::string family;  // "7/6", "5/6", "6/5"
  double beta_raw = 0;
  double beta = 0;
  double lhs = 0;
  double rhs = 0;
  bool holds() const { return lhs >= rhs; }
};

struct CrossoverReport {
  int r = 0;
  std::vector<double> beta_grid;
  std::vector<double> lhs;
  std::vector<double> rhs;
  Verdict verdict = Verdict::HoldsEverywhere;
  std::optional<double> witness_beta;  // grid point with the smallest lhs / rhs when failing
  std::vector<SpecialPoint> special;

  const SpecialPoint& point(const std::string& family) const {
    for (const auto& sp : special)
      if (sp.family == family) return sp;
    throw InputError("CrossoverReport: no special point family " + family);
  }
};

inline double reduce_beta(double beta) {
  detail::require(beta > 0.0 && std::isfinite(beta), "reduce_beta: beta must be > 0");
  int e = 0;
  const double mant = std::frexp(beta, &e);  // beta = mant * 2^e, mant in [0.5, 1)
  double b = std::ldexp(mant, 1);            // in [1, 2)
  if (b == 1.0) b = 2.0;
  return b;
}

/// Families of special points: 7/6 and 5/6 come from the two x-sequences
/// exp(6 * 2^m / (7 (r - tau))) and exp(6 * 2^m / (5 (r - tau))) through
/// beta = 2 / log x; 6/5 is kept for comparison.
inline const std::vector<std::pair<std::string, double>>& crossover_families() {
  static const std::vector<std::pair<std::string, double>> fams = {
      {"7/6", 7.0 / 6.0}, {"5/6", 5.0 / 6.0}, {"6/5", 6.0 / 5.0}};
  return fams;
}

inline CrossoverReport crossover_at(int r, int grid_points) {
  CrossoverReport rep;
  rep.r = r;
  const double R_lo = r - 1.0 - kTau;
  const double R_hi = r - kTau;
  double worst = std::numeric_limits<double>::infinity();
  double worst_beta = 0.0;
  for (int j = 1; j <= grid_points; ++j) {
    const double beta = std::exp2(static_cast<double>(j) / grid_points);
    const double ll = log_f_R(R_lo, beta);
    const double lr = log_f_R(R_hi, beta) - std::log(r + 1.0);
    rep.beta_grid.push_back(beta);
    rep.lhs.push_back(std::exp(ll));
    rep.rhs.push_back(std::exp(lr));
    if (ll < lr) rep.verdict = Verdict::FailsSomewhere;
    if (ll - lr < worst) {
      worst = ll - lr;
      worst_beta = beta;
    }
  }
  if (rep.verdict == Verdict::FailsSomewhere) rep.witness_beta = worst_beta;
  for (const auto& [name, c] : crossover_families()) {
    SpecialPoint sp;
    sp.family = name;
    sp.beta_raw = c * (r - kTau);
    sp.beta = reduce_beta(sp.beta_raw);
    sp.lhs = f_R(R_lo, sp.beta);
    sp.rhs = f_R(R_hi, sp.beta) / (r + 1.0);
    rep.special.push_back(sp);
  }
  return rep;
}

inline std::vector<CrossoverReport> crossover_scan(int r_min, int r_max, int grid_points,
                                                   unsigned threads = 1) {
  detail::require(2 <= r_min && r_min <= r_max && r_max <= 100,
                  "crossover_scan: need 2 <= r_min <= r_max <= 100");
  detail::require(grid_points >= 64, "crossover_scan: grid_points must be >= 64");
  const int count = r_max - r_min + 1;
  std::vector<CrossoverReport> out(count);
  const unsigned n = std::max(1u, std::min<unsigned>(threads, count));
  auto work = [&](unsigned w) {
    for (int i = static_cast<int>(w); i < count; i += static_cast<int>(n))
      out[i] = crossover_at(r_min + i, grid_points);
  };
  if (n == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n; ++w) pool.emplace_back(work, w);
  }
  return out;
}

}  // namespace twosq

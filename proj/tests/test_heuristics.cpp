#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "twosq/heuristics.hpp"

using namespace twosq;

namespace {

double kappa_1e7() {
  static const double k = compute_constants(10'000'000).kappa;
  return k;
}

/// Plain bilateral sum over a fixed wide window, no adaptive truncation.
double f_R_window(double R, double beta) {
  long double s = 0;
  for (int m = -400; m <= 12; ++m) {
    const long double z = std::ldexp(static_cast<long double>(beta), m);
    s += std::exp(R * std::log(z) - z);
  }
  return static_cast<double>(s);
}

}  // namespace

TEST(Constants, DeltaTauLambda) {
  EXPECT_NEAR(kDelta, 0.0860713320, 1e-9);
  EXPECT_NEAR(kTau, 0.52876, 1e-5);
  EXPECT_NEAR(kDelta, 1.0 - (1.0 + std::log(std::log(2.0))) / std::log(2.0), 1e-12);
  EXPECT_NEAR(kTau, std::log(1.0 / std::log(2.0)) / std::log(2.0), 1e-12);
  EXPECT_DOUBLE_EQ(kLambda * std::log(2.0), 1.0);
}

TEST(Constants, KappaMatchesPublishedValue) {
  const auto c = compute_constants(10'000'000);
  EXPECT_NEAR(c.kappa, 0.29356, 5e-4);
  EXPECT_EQ(c.prime_limit_used, 10'000'000u);
  EXPECT_NEAR(c.kappa, c.c_lambda * std::sqrt(std::pow(2 * kLambda, 3) / std::numbers::pi), 1e-15);
  EXPECT_THROW(compute_constants(999), InputError);
}

TEST(EulerProduct, KappaZeroIsThreeQuarters) {
  EXPECT_NEAR(euler_product_c_kappa(0.0, 1000), 0.75, 1e-15);
}

TEST(EulerProduct, Converges) {
  const double c5 = euler_product_c_kappa(kLambda, 100'000);
  const double c6 = euler_product_c_kappa(kLambda, 1'000'000);
  const double c7 = euler_product_c_kappa(kLambda, 10'000'000);
  EXPECT_LT(std::abs(c7 - c6), std::abs(c6 - c5));
  EXPECT_NEAR(c6 / c7, 1.0, 5e-3);  // three significant digits
  EXPECT_THROW(euler_product_c_kappa(-0.1, 1000), InputError);
  EXPECT_THROW(euler_product_c_kappa(1.0, 999), InputError);
}

TEST(GammaFn, Values) {
  EXPECT_NEAR(gamma_fn(1.0), 1.0, 1e-15);
  EXPECT_NEAR(gamma_fn(0.5), std::sqrt(std::numbers::pi), 1e-15);
  EXPECT_NEAR(gamma_fn(5.0), 24.0, 24e-15);
  EXPECT_THROW(gamma_fn(0.0), NumericalError);
  EXPECT_THROW(gamma_fn(-1.0), NumericalError);
}

TEST(FR, DoublingInvariance) {
  for (auto [R, b] : {std::pair{1.0, 1.3}, {5.0, 1.7}, {20.47, 1.1}})
    EXPECT_NEAR(f_R(R, 2 * b) / f_R(R, b), 1.0, 1e-12) << R;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> Rd(0.05, 60.0), bd(1e-3, 1e3);
  for (int i = 0; i < 200; ++i) {
    const double R = Rd(rng), b = bd(rng);
    ASSERT_NEAR(f_R(R, 2 * b) / f_R(R, b), 1.0, 1e-12) << R << " " << b;
  }
}

TEST(FR, MatchesFixedWindowSum) {
  for (double R : {0.3, 1.0, 2.5, 10.0, 40.0})
    for (double b : {1.0, 1.25, 1.5, 1.99})
      EXPECT_NEAR(f_R(R, b) / f_R_window(R, b), 1.0, 1e-13) << R << " " << b;
}

TEST(FR, TruncationTailsAreSmall) {
  const auto d = f_R_detailed(10.0, 1.4, 1e-16);
  EXPECT_LE(d.lower_tail, 1e-16);
  EXPECT_LE(d.upper_tail, 1e-16);
  EXPECT_LT(d.m_min, d.m_max);
  EXPECT_THROW(f_R(1.0, 1.0, 1e-5), InputError);
}

TEST(FR, GammaIntegralIdentity) {
  for (double R : {1.0, 2.5, 10.0}) {
    const double g = gamma_fn(R);
    EXPECT_NEAR(f_R_log_average(R), g, 1e-8 * g) << R;
  }
}

TEST(FR, BracketAtRLog2) {
  const double R = 10;
  const double f = f_R(R, R * std::log(2.0));
  const double base = std::exp(R * std::log(R) - R);
  const double pred = std::exp2(1 - kDelta * R) * base;
  EXPECT_GT(f / pred, 0.9);
  EXPECT_LT(f / pred, 1.1);
  EXPECT_LE(f, f_R(R, R));
}

TEST(PsiR, Periodic) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> rd(2, 30);
  std::uniform_real_distribution<double> td(0.0, 1.0);
  const double kappa = kappa_1e7();
  for (int i = 0; i < 100; ++i) {
    const int r = rd(rng);
    const double t = td(rng);
    const double a = psi_r(r, t, kappa), b = psi_r(r, t + 1, kappa);
    ASSERT_NEAR(a, b, 1e-12 * a) << r << " " << t;
    ASSERT_NEAR(psi_r(r, t - 7, kappa), a, 1e-12 * a);
  }
  EXPECT_GT(psi_r(2, 0.5, kappa), 0.0);
  EXPECT_THROW(psi_r(1, 0.5, kappa), InputError);
}

TEST(PsiR, AverageOverPeriod) {
  const double kappa = kappa_1e7();
  for (int r : {2, 5, 10}) {
    const double expect = kappa * gamma_fn(r - 1 - kTau) / (std::tgamma(r + 1.0) * std::log(2.0));
    EXPECT_NEAR(psi_r_average(r, kappa), expect, 1e-8 * expect) << r;
  }
}

TEST(PsiStar, LinearIdentity) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> td(-3.0, 3.0);
  const double kappa = kappa_1e7();
  for (int i = 0; i < 50; ++i) {
    const double t = td(rng);
    const double p0 = psi_star(0, t, kappa), p1 = psi_star(1, t, kappa), p2 = psi_star(2, t, kappa);
    ASSERT_NEAR(p0, p1 - p2, 1e-10) << t;
    ASSERT_NEAR(psi_star(1, t + 1, kappa), p1, 1e-12);
  }
  EXPECT_THROW(psi_star(3, 0.0, kappa), InputError);
}

TEST(PsiStar, SeriesIdentities) {
  // psi_2* = sum_{r>=2} psi_r, psi_1* = sum_{r>=2} r psi_r. The terms up
  // to r = 60 plus the closed-form remainder from r = 61 on.
  const double kappa = kappa_1e7();
  for (double t : {0.0, 0.125, 0.5, 0.9}) {
    double s2 = 0, s1 = 0;
    for (int r = 2; r <= 60; ++r) {
      const double p = psi_r(r, t, kappa);
      s2 += p;
      s1 += r * p;
    }
    EXPECT_NEAR(s2 + psi_r_tail(61, t, kappa), psi_star(2, t, kappa), 1e-9) << t;
    EXPECT_NEAR(s1 + psi_r_weighted_tail(61, t, kappa), psi_star(1, t, kappa), 1e-9) << t;
  }
}

TEST(PsiStar, TailsAreClosedFormsOfTheSeries) {
  const double kappa = kappa_1e7();
  const double t = 0.3;
  double s = 0, sw = 0;
  for (int r = 5; r <= 400; ++r) {
    const double p = psi_r(r, t, kappa);
    s += p;
    sw += r * p;
  }
  EXPECT_NEAR(psi_r_tail(5, t, kappa) / (s + psi_r_tail(401, t, kappa)), 1.0, 1e-12);
  EXPECT_NEAR(psi_r_weighted_tail(5, t, kappa) / (sw + psi_r_weighted_tail(401, t, kappa)), 1.0,
              1e-12);
  EXPECT_NEAR(psi_r_tail(2, t, kappa), psi_star(2, t, kappa), 1e-12);
  EXPECT_NEAR(psi_r_weighted_tail(2, t, kappa), psi_star(1, t, kappa), 1e-12);
}

TEST(HeuristicPmf, Normalization) {
  for (unsigned R : {1u, 4u, 16u, 64u, 300u})
    for (double x : {100.0, 1e9, 1e30}) {
      double s = 0;
      for (unsigned r = 0; r <= R; ++r) s += heuristic_pmf(R, x, r);
      ASSERT_NEAR(s, 1.0, 1e-12) << R << " " << x;
    }
  EXPECT_EQ(heuristic_pmf(0, 1e6, 0), 1.0);
  EXPECT_THROW(heuristic_pmf(3, 1e6, 4), NumericalError);
  EXPECT_THROW(heuristic_pmf(3, 99, 1), InputError);
}

TEST(HeuristicPmf, PoissonLimit) {
  // R = alpha * (1/2) log x with alpha = 1 at log x = 1000
  const double p = heuristic_pmf_logx(500, 1000.0, 2);
  const double expect = std::exp(-1.0) / 2.0;
  EXPECT_NEAR(p / expect, 1.0, 0.01);
}

TEST(LogScales, PowerOfTwoBracket) {
  for (double lx = 1.5; lx < 1e6; lx *= 1.37) {
    const auto s = log_scales_from_log(lx);
    ASSERT_GT(std::exp2(s.K), lx / 2);
    ASSERT_LE(std::exp2(s.K), lx * (1 + 1e-15));
  }
  for (int k = 1; k < 40; ++k) EXPECT_NO_THROW(log_scales_from_log(std::exp2(k)));
}

TEST(Predict, NrUnwindsToPsi) {
  const double kappa = kappa_1e7();
  for (double x : {1e9, 1e20, 1e100}) {
    const double lx = std::log(x), L = std::log(lx);
    const double p = predict(PredictKind::N_r, x, {2, 1}, kappa);
    EXPECT_GT(p, 0.0);
    EXPECT_NEAR(p * std::sqrt(L) * std::pow(lx, 1 + kDelta) / x, psi_r(2, L / std::log(2.0), kappa),
                1e-12);
  }
  EXPECT_THROW(predict(PredictKind::N_r, 1e9, {1, 1}, kappa), InputError);
}

TEST(Predict, SumOverRMatchesPsiTwoStar) {
  const double kappa = kappa_1e7();
  const double x = 1e12;
  const double lx = std::log(x), L = std::log(lx);
  double s = 0;
  for (int r = 2; r <= 60; ++r) s += predict(PredictKind::N_r, x, {r, 1}, kappa);
  const double scale = std::exp(lx - (1 + kDelta) * std::log(lx)) / std::sqrt(L);
  s += psi_r_tail(61, L / std::log(2.0), kappa) * scale;
  const double target = psi_star(2, L / std::log(2.0), kappa) * scale;
  EXPECT_NEAR(s / target, 1.0, 1e-6);
}

TEST(Predict, PiNkrPositive) {
  EXPECT_GT(predict(PredictKind::pi_N_kr, 1e9, {3, 4}, kappa_1e7()), 0.0);
}

TEST(Crossover, TransitionAtTwentyTwo) {
  const auto scan = crossover_scan(2, 30, 256, 2);
  ASSERT_EQ(scan.size(), 29u);
  for (const auto& rep : scan) {
    for (std::size_t j = 0; j < rep.beta_grid.size(); ++j) {
      ASSERT_GT(rep.lhs[j], 0.0);
      ASSERT_GT(rep.rhs[j], 0.0);
      ASSERT_GT(rep.beta_grid[j], 1.0);
      ASSERT_LE(rep.beta_grid[j], 2.0);
    }
    const bool holds = rep.point("7/6").holds();
    EXPECT_EQ(holds, rep.r <= 21) << rep.r;
    EXPECT_TRUE(rep.point("5/6").holds()) << rep.r;
    EXPECT_EQ(rep.verdict == Verdict::FailsSomewhere, rep.witness_beta.has_value());
  }
  EXPECT_THROW(crossover_scan(1, 30, 256), InputError);
  EXPECT_THROW(crossover_scan(2, 101, 256), InputError);
  EXPECT_THROW(crossover_scan(2, 30, 63), InputError);
}

TEST(Crossover, ThreadCountDoesNotChangeResults) {
  const auto a = crossover_scan(2, 12, 128, 1);
  const auto b = crossover_scan(2, 12, 128, 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].lhs, b[i].lhs);
    EXPECT_EQ(a[i].rhs, b[i].rhs);
  }
}

TEST(ReduceBeta, IntoHalfOpenOctave) {
  EXPECT_DOUBLE_EQ(reduce_beta(1.0), 2.0);
  EXPECT_DOUBLE_EQ(reduce_beta(3.0), 1.5);
  EXPECT_DOUBLE_EQ(reduce_beta(0.75), 1.5);
  EXPECT_DOUBLE_EQ(reduce_beta(8.0), 2.0);
}

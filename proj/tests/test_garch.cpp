#include <cmath>
#include <numbers>

#include "test_util.hpp"

using namespace volkit;
using namespace volkit::testing;

namespace {
GarchParams garch_truth() {
  GarchParams p;
  p.alpha0 = 1e-6;
  p.alpha1 = 0.1;
  p.beta1 = 0.85;
  p.sigma0 = std::sqrt(2e-5);
  return p;
}
}  // namespace

TEST(FilterVol, EwmaLambdaOneKeepsSigma0) {
  GarchParams p;
  p.lambda = 1.0;
  p.sigma0 = 0.01;
  const auto v = filter_vol(GarchModelKind::Ewma, p, returns_from(gaussian(50, 1, 0.02)));
  for (double x : v.values()) EXPECT_DOUBLE_EQ(x, 0.01);
}

TEST(FilterVol, EwmaLambdaZeroIsAbsolutePreviousReturn) {
  GarchParams p;
  p.lambda = 0.0;
  const auto r = gaussian(50, 2, 0.02);
  const auto v = filter_vol(GarchModelKind::Ewma, p, returns_from(r));
  for (std::size_t t = 1; t < r.size(); ++t) EXPECT_DOUBLE_EQ(v[t], std::abs(r[t - 1]));
}

TEST(FilterVol, GarchDecaysTowardAlpha0OverOneMinusBeta) {
  const auto p = garch_truth();
  const auto v = filter_vol(GarchModelKind::Garch11, p, returns_from(std::vector<double>(400, 0.0)));
  // Three hand iterations of s2 <- 1e-6 + 0.85 s2 from 2e-5.
  double s2 = 2e-5;
  for (int i = 0; i < 3; ++i) s2 = 1e-6 + 0.85 * s2;
  EXPECT_NEAR(v[3] * v[3], s2, 1e-18);
  EXPECT_NEAR(v[399] * v[399], 1e-6 / 0.15, 1e-15);
}

TEST(FilterVol, EgarchFormsMatchHandEvaluation) {
  GarchParams p;
  p.alpha0 = -0.4;
  p.alpha1 = 0.05;
  p.beta1 = 0.95;
  p.gamma1 = -0.04;
  p.sigma0 = 0.01;
  const double a = -0.015, s2 = 1e-4, s = 0.01;
  const auto r = returns_from({a, 0.0});
  const auto printed = filter_vol(GarchModelKind::EGarch, p, r);
  EXPECT_NEAR(std::log(printed[1] * printed[1]),
              -0.4 + (0.05 * a * a + -0.04 * std::abs(a)) / s + 0.95 * std::log(s2), 1e-12);
  p.egarch_form = EgarchForm::nelson;
  const auto nelson = filter_vol(GarchModelKind::EGarch, p, r);
  const double z = a / s;
  EXPECT_NEAR(std::log(nelson[1] * nelson[1]),
              -0.4 + 0.05 * (std::abs(z) - std::sqrt(2.0 / std::numbers::pi)) + -0.04 * z + 0.95 * std::log(s2),
              1e-12);
}

TEST(FilterVol, GjrRespondsOnlyToNegativeShocks) {
  GarchParams p = garch_truth();
  p.gamma1 = 0.1;
  const auto up = filter_vol(GarchModelKind::GjrGarch, p, returns_from({0.02, 0.0}));
  const auto down = filter_vol(GarchModelKind::GjrGarch, p, returns_from({-0.02, 0.0}));
  EXPECT_NEAR(down[1] * down[1] - up[1] * up[1], 0.1 * 0.0004, 1e-15);
}

TEST(UnconditionalVariance, Examples) {
  EXPECT_NEAR(unconditional_variance(GarchModelKind::Garch11, garch_truth()), 2e-5, 1e-18);
  GarchParams arch;
  arch.alpha0 = 0.5;
  arch.alpha1 = 0.5;
  EXPECT_DOUBLE_EQ(unconditional_variance(GarchModelKind::Arch, arch), 1.0);
  GarchParams unit = garch_truth();
  unit.beta1 = 0.9;
  EXPECT_VOLKIT_ERROR(unconditional_variance(GarchModelKind::Garch11, unit), "garch.NonStationary");
  EXPECT_VOLKIT_ERROR(unconditional_variance(GarchModelKind::Ewma, GarchParams{}), "garch.Unsupported");
}

TEST(Simulate, CollapsedRecursionIsIid) {
  GarchParams p;
  p.alpha0 = 4e-4;
  p.sigma0 = 0.02;
  const auto sim = simulate(GarchModelKind::Garch11, p, 20000, 4);
  double ss = 0.0;
  for (double r : sim.returns.values()) ss += r * r;
  EXPECT_NEAR(ss / 20000.0, 4e-4, 2e-5);
  for (double v : sim.vol.values()) EXPECT_DOUBLE_EQ(v, 0.02);
}

TEST(Simulate, SampleVarianceMatchesUnconditional) {
  const auto sim = simulate(GarchModelKind::Garch11, garch_truth(), 100000, 5);
  double ss = 0.0;
  for (double r : sim.returns.values()) ss += r * r;
  EXPECT_NEAR(ss / 1e5, 2e-5, 0.05 * 2e-5);
}

TEST(Simulate, SameSeedSamePath) {
  const auto a = simulate(GarchModelKind::GjrGarch, garch_truth(), 500, 6);
  const auto b = simulate(GarchModelKind::GjrGarch, garch_truth(), 500, 6);
  EXPECT_TRUE(std::equal(a.returns.values().begin(), a.returns.values().end(), b.returns.values().begin()));
}

TEST(Fit, RecoversGarchParameters) {
  const auto p = garch_truth();
  const auto sim = simulate(GarchModelKind::Garch11, p, 5000, 7);
  const auto f = fit(GarchModelKind::Garch11, sim.returns);
  EXPECT_TRUE(f.converged);
  EXPECT_NEAR(f.params.alpha1, 0.1, 0.05);
  EXPECT_NEAR(f.params.beta1, 0.85, 0.05);
  GarchParams truth = p;
  truth.mu = f.params.mu;
  truth.sigma0 = f.params.sigma0;
  EXPECT_GE(f.log_likelihood, log_likelihood(GarchModelKind::Garch11, truth, sim.returns));
  EXPECT_DOUBLE_EQ(f.log_likelihood, log_likelihood(GarchModelKind::Garch11, f.params, sim.returns));
}

TEST(Fit, IidInputGivesSmallAlpha1) {
  const auto f = fit(GarchModelKind::Garch11, returns_from(gaussian(3000, 8, 0.01)));
  EXPECT_LE(f.params.alpha1, 0.03);
}

TEST(Fit, ConstantReturnsDoNotConverge) {
  EXPECT_VOLKIT_ERROR(fit(GarchModelKind::Garch11, returns_from(std::vector<double>(100, 0.001))),
                      "garch.DidNotConverge");
}

TEST(Fit, TooShort) {
  EXPECT_VOLKIT_ERROR(fit(GarchModelKind::Arch, returns_from(gaussian(49, 9))), "garch.TooShort");
}

TEST(Fit, EveryKindRunsAndResidualsAreStandardized) {
  const auto sim = simulate(GarchModelKind::GjrGarch, [] {
    auto p = garch_truth();
    p.alpha1 = 0.05;
    p.gamma1 = 0.08;
    return p;
  }(), 3000, 10);
  for (auto kind : {GarchModelKind::Arch, GarchModelKind::Garch11, GarchModelKind::GjrGarch, GarchModelKind::EGarch,
                    GarchModelKind::Ewma}) {
    const auto f = fit(kind, sim.returns);
    EXPECT_TRUE(std::isfinite(f.log_likelihood)) << to_string(kind);
    EXPECT_EQ(f.vol.size(), sim.returns.size());
    double ss = 0.0;
    for (double z : f.residuals) ss += z * z;
    EXPECT_NEAR(ss / static_cast<double>(f.residuals.size()), 1.0, 0.15) << to_string(kind);
  }
}

TEST(Fit, GjrFindsAsymmetry) {
  auto p = garch_truth();
  p.alpha1 = 0.03;
  p.gamma1 = 0.12;
  const auto sim = simulate(GarchModelKind::GjrGarch, p, 6000, 11);
  const auto f = fit(GarchModelKind::GjrGarch, sim.returns);
  EXPECT_NEAR(f.params.gamma1, 0.12, 0.06);
}

TEST(Refit, SingleWindowEqualsPlainFit) {
  const auto sim = simulate(GarchModelKind::Garch11, garch_truth(), 400, 12);
  const auto rr = refit_increasing_window(GarchModelKind::Garch11, sim.returns, 400, 400);
  ASSERT_EQ(rr.entries.size(), 1u);
  ASSERT_TRUE(rr.entries[0].params.has_value());
  const auto f = fit(GarchModelKind::Garch11, sim.returns);
  EXPECT_NEAR(log_likelihood(GarchModelKind::Garch11, *rr.entries[0].params, sim.returns), f.log_likelihood, 1e-6);
}

TEST(Refit, StartBeyondLengthGivesEmptyOutputAndError) {
  const auto r = returns_from(gaussian(100, 13, 0.01));
  const auto rr = refit_increasing_window(GarchModelKind::Garch11, r, 200, 10);
  EXPECT_TRUE(rr.entries.empty());
  ASSERT_EQ(rr.errors.size(), 1u);
  EXPECT_EQ(rr.errors[0].rfind("garch.TooShort", 0), 0u);
}

TEST(Refit, StableParametersOnStationaryInput) {
  const auto sim = simulate(GarchModelKind::Garch11, garch_truth(), 4000, 14);
  const auto rr = refit_increasing_window(GarchModelKind::Garch11, sim.returns, 2000, 250);
  std::vector<double> b;
  for (const auto& e : rr.entries) {
    ASSERT_TRUE(e.params.has_value()) << e.error;
    b.push_back(e.params->beta1);
  }
  double mean = 0.0, ss = 0.0;
  for (double x : b) mean += x;
  mean /= static_cast<double>(b.size());
  for (double x : b) ss += (x - mean) * (x - mean);
  EXPECT_LE(std::sqrt(ss / static_cast<double>(b.size() - 1)), 0.1);
  EXPECT_EQ(rr.vol.size(), rr.entries.size());
}

TEST(Validate, RejectsBadParameters) {
  GarchParams p = garch_truth();
  p.alpha1 = -0.1;
  EXPECT_VOLKIT_ERROR(filter_vol(GarchModelKind::Garch11, p, returns_from({0.0})), "garch.InvalidParams");
  GarchParams e;
  e.lambda = 1.5;
  EXPECT_VOLKIT_ERROR(validate(GarchModelKind::Ewma, e), "garch.InvalidParams");
}

TEST(NelderMead, MinimizesRosenbrock) {
  const auto r = nelder_mead(
      [](const std::vector<double>& x) {
        return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
      },
      {-1.2, 1.0}, {0.5, 1e-14, 5000});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1.0, 1e-4);
  EXPECT_NEAR(r.x[1], 1.0, 1e-4);
}

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "volkit/error.hpp"
#include "volkit/marketdata.hpp"
#include "volkit/optimize.hpp"
#include "volkit/random.hpp"

namespace volkit {

enum class GarchModelKind { Arch, Garch11, GjrGarch, EGarch, Ewma };

/// Variance recursion used for EGarch.
enum class EgarchForm {
  /// ln s2_t = a0 + (a1 a_{t-1}^2 + g1 |a_{t-1}|) / s_{t-1} + b1 ln s2_{t-1}
  printed,
  /// Nelson: ln s2_t = a0 + a1 (|z| - sqrt(2/pi)) + g1 z + b1 ln s2_{t-1}, z = a_{t-1} / s_{t-1}
  nelson,
};

constexpr std::string_view to_string(GarchModelKind k) noexcept {
  switch (k) {
    case GarchModelKind::Arch: return "arch";
    case GarchModelKind::Garch11: return "garch";
    case GarchModelKind::GjrGarch: return "gjr";
    case GarchModelKind::EGarch: return "egarch";
    case GarchModelKind::Ewma: return "ewma";
  }
  return "unknown";
}

inline std::optional<GarchModelKind> parse_garch_kind(std::string_view s) {
  for (auto k : {GarchModelKind::Arch, GarchModelKind::Garch11, GarchModelKind::GjrGarch, GarchModelKind::EGarch,
                 GarchModelKind::Ewma}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

struct GarchParams {
  double mu = 0.0;
  double alpha0 = 0.0;  ///< omega
  double alpha1 = 0.0;
  double beta1 = 0.0;
  double gamma1 = 0.0;  ///< GJR and EGarch
  double lambda = 0.94; ///< Ewma
  double sigma0 = 0.01; ///< daily volatility seeding the recursion
  EgarchForm egarch_form = EgarchForm::printed;
};

inline void validate(GarchModelKind kind, const GarchParams& p) {
  auto fail = [](const std::string& msg) { throw Error(Module::garch, Errc::InvalidParams, msg); };
  if (!(p.sigma0 > 0.0) || !std::isfinite(p.sigma0)) fail("sigma0 must be > 0");
  if (!std::isfinite(p.mu)) fail("mu must be finite");
  switch (kind) {
    case GarchModelKind::Arch:
      if (!(p.alpha0 >= 0.0) || !(p.alpha1 >= 0.0) || !(p.alpha1 < 1.0)) fail("arch needs alpha0 >= 0, 0 <= alpha1 < 1");
      break;
    case GarchModelKind::Garch11:
      if (!(p.alpha0 >= 0.0) || !(p.alpha1 >= 0.0) || !(p.beta1 >= 0.0)) fail("garch parameters must be >= 0");
      if (!(p.alpha1 + p.beta1 < 1.0)) fail("garch needs alpha1 + beta1 < 1");
      break;
    case GarchModelKind::GjrGarch:
      if (!(p.alpha0 >= 0.0) || !(p.alpha1 >= 0.0) || !(p.beta1 >= 0.0) || !(p.alpha1 + p.gamma1 >= 0.0)) {
        fail("gjr needs alpha0, alpha1, beta1, alpha1 + gamma1 >= 0");
      }
      break;
    case GarchModelKind::EGarch:
      if (!std::isfinite(p.alpha0) || !std::isfinite(p.alpha1) || !std::isfinite(p.beta1) || !std::isfinite(p.gamma1)) {
        fail("egarch parameters must be finite");
      }
      break;
    case GarchModelKind::Ewma:
      if (!(p.lambda >= 0.0 && p.lambda <= 1.0)) fail("ewma needs lambda in [0, 1]");
      break;
  }
}

namespace detail {

/// One step of the conditional-variance recursion from (a_{t-1}, s2_{t-1}).
inline double next_variance(GarchModelKind kind, const GarchParams& p, double a, double s2) {
  switch (kind) {
    case GarchModelKind::Arch: return p.alpha0 + p.alpha1 * a * a;
    case GarchModelKind::Garch11: return p.alpha0 + p.alpha1 * a * a + p.beta1 * s2;
    case GarchModelKind::GjrGarch:
      return p.alpha0 + (p.alpha1 + (a < 0.0 ? p.gamma1 : 0.0)) * a * a + p.beta1 * s2;
    case GarchModelKind::EGarch: {
      const double s = std::sqrt(s2);
      double log_s2 = 0.0;
      if (p.egarch_form == EgarchForm::printed) {
        log_s2 = p.alpha0 + (p.alpha1 * a * a + p.gamma1 * std::abs(a)) / s + p.beta1 * std::log(s2);
      } else {
        const double z = a / s;
        log_s2 = p.alpha0 + p.alpha1 * (std::abs(z) - std::sqrt(2.0 / std::numbers::pi)) + p.gamma1 * z +
                 p.beta1 * std::log(s2);
      }
      return std::exp(log_s2);
    }
    case GarchModelKind::Ewma: return p.lambda * s2 + (1.0 - p.lambda) * a * a;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

/// Conditional variances for each return; empty when the recursion leaves (0, inf).
inline std::vector<double> variance_path(GarchModelKind kind, const GarchParams& p, std::span<const double> r) {
  std::vector<double> s2(r.size());
  if (r.empty()) return s2;
  s2[0] = p.sigma0 * p.sigma0;
  for (std::size_t t = 1; t < r.size(); ++t) {
    s2[t] = next_variance(kind, p, r[t - 1] - p.mu, s2[t - 1]);
    if (!(s2[t] > 0.0) || !std::isfinite(s2[t])) return {};
  }
  return s2;
}

inline double log_likelihood(std::span<const double> r, double mu, const std::vector<double>& s2) {
  constexpr double log_2pi = 1.8378770664093454836;
  double ll = 0.0;
  for (std::size_t t = 0; t < r.size(); ++t) {
    const double a = r[t] - mu;
    ll += -0.5 * (log_2pi + std::log(s2[t])) - a * a / (2.0 * s2[t]);
  }
  return ll;
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Maps an unconstrained vector onto valid parameters of `kind`; mu, sigma0 and the EGarch form
/// come from `base`.
inline GarchParams from_free(GarchModelKind kind, const std::vector<double>& x, const GarchParams& base) {
  GarchParams p = base;
  switch (kind) {
    case GarchModelKind::Arch:
      p.alpha0 = std::exp(x[0]);
      p.alpha1 = logistic(x[1]);
      break;
    case GarchModelKind::Garch11: {
      const double persistence = logistic(x[1]), share = logistic(x[2]);
      p.alpha0 = std::exp(x[0]);
      p.alpha1 = persistence * share;
      p.beta1 = persistence * (1.0 - share);
      break;
    }
    case GarchModelKind::GjrGarch: {
      const double persistence = logistic(x[1]);
      const double m = std::max({0.0, x[2], x[3]});
      const double e0 = std::exp(-m), e1 = std::exp(x[2] - m), e2 = std::exp(x[3] - m);
      const double z = e0 + e1 + e2;
      p.alpha0 = std::exp(x[0]);
      p.alpha1 = persistence * e0 / z;
      p.gamma1 = 2.0 * persistence * e1 / z;
      p.beta1 = persistence * e2 / z;
      break;
    }
    case GarchModelKind::EGarch:
      p.alpha0 = x[0];
      p.alpha1 = x[1];
      p.gamma1 = x[2];
      p.beta1 = std::tanh(x[3]);
      break;
    case GarchModelKind::Ewma:
      p.lambda = logistic(x[0]);
      break;
  }
  return p;
}

inline std::vector<double> to_free(GarchModelKind kind, const GarchParams& p) {
  static constexpr double eps = 1e-9;
  auto clamp01 = [](double v) { return std::clamp(v, eps, 1.0 - eps); };
  switch (kind) {
    case GarchModelKind::Arch: return {std::log(std::max(p.alpha0, 1e-300)), logit(clamp01(p.alpha1))};
    case GarchModelKind::Garch11: {
      const double persistence = clamp01(p.alpha1 + p.beta1);
      return {std::log(std::max(p.alpha0, 1e-300)), logit(persistence),
              logit(clamp01(p.alpha1 / std::max(p.alpha1 + p.beta1, eps)))};
    }
    case GarchModelKind::GjrGarch: {
      const double a = std::max(p.alpha1, eps), g = std::max(p.gamma1 / 2.0, eps), b = std::max(p.beta1, eps);
      return {std::log(std::max(p.alpha0, 1e-300)), logit(clamp01(a + g + b)), std::log(g / a), std::log(b / a)};
    }
    case GarchModelKind::EGarch: return {p.alpha0, p.alpha1, p.gamma1, std::atanh(std::clamp(p.beta1, -0.999999, 0.999999))};
    case GarchModelKind::Ewma: return {logit(clamp01(p.lambda))};
  }
  return {};
}

/// Multi-start points spread over persistence and reaction, anchored on the sample variance.
inline std::vector<GarchParams> default_starts(GarchModelKind kind, const GarchParams& base, double var) {
  std::vector<GarchParams> out;
  const double log_var = std::log(var);
  switch (kind) {
    case GarchModelKind::Arch:
      for (double a1 : {0.05, 0.2, 0.4, 0.6, 0.8}) {
        GarchParams p = base;
        p.alpha1 = a1;
        p.alpha0 = var * (1.0 - a1);
        out.push_back(p);
      }
      break;
    case GarchModelKind::Garch11:
    case GarchModelKind::GjrGarch: {
      const double pairs[][2] = {{0.05, 0.9}, {0.1, 0.8}, {0.15, 0.7}, {0.02, 0.95}, {0.3, 0.5}};
      for (const auto& ab : pairs) {
        GarchParams p = base;
        p.alpha1 = ab[0];
        p.beta1 = ab[1];
        p.gamma1 = kind == GarchModelKind::GjrGarch ? ab[0] : 0.0;
        const double persistence = p.alpha1 + p.gamma1 / 2.0 + p.beta1;
        p.alpha0 = var * std::max(1.0 - persistence, 0.01);
        out.push_back(p);
      }
      break;
    }
    case GarchModelKind::EGarch:
      for (double b1 : {0.9, 0.8, 0.95, 0.7, 0.5}) {
        GarchParams p = base;
        p.beta1 = b1;
        p.alpha1 = 0.0;
        p.gamma1 = 0.0;
        p.alpha0 = (1.0 - b1) * log_var;
        out.push_back(p);
      }
      break;
    case GarchModelKind::Ewma:
      for (double l : {0.94, 0.97, 0.8, 0.5, 0.99}) {
        GarchParams p = base;
        p.lambda = l;
        out.push_back(p);
      }
      break;
  }
  return out;
}

}  // namespace detail

/// Filtered daily volatility: entry 0 is sigma0, entry t uses a_{t-1} = r_{t-1} - mu.
inline VolSeries filter_vol(GarchModelKind kind, const GarchParams& params, const ReturnSeries& returns) {
  validate(kind, params);
  if (returns.size() == 0) throw Error(Module::garch, Errc::TooShort, "need at least one return");
  const auto r = returns.values();
  std::vector<double> vol(r.size());
  double s2 = params.sigma0 * params.sigma0;
  vol[0] = params.sigma0;
  for (std::size_t t = 1; t < r.size(); ++t) {
    s2 = detail::next_variance(kind, params, r[t - 1] - params.mu, s2);
    if (!(s2 > 0.0) || !std::isfinite(s2)) {
      throw Error(Module::garch, Errc::NonPositiveVariance,
                  "variance left (0, inf) at index " + std::to_string(t));
    }
    vol[t] = std::sqrt(s2);
  }
  return VolSeries({returns.dates().begin(), returns.dates().end()}, std::move(vol), VolScale::daily);
}

inline double unconditional_variance(GarchModelKind kind, const GarchParams& p) {
  if (kind == GarchModelKind::Arch) {
    if (!(p.alpha1 < 1.0)) throw Error(Module::garch, Errc::NonStationary, "alpha1 >= 1");
    return p.alpha0 / (1.0 - p.alpha1);
  }
  if (kind == GarchModelKind::Garch11) {
    if (!(p.alpha1 + p.beta1 < 1.0)) throw Error(Module::garch, Errc::NonStationary, "alpha1 + beta1 >= 1");
    return p.alpha0 / (1.0 - p.alpha1 - p.beta1);
  }
  throw Error(Module::garch, Errc::Unsupported,
              std::string("no closed-form unconditional variance for ") + std::string(to_string(kind)));
}

/// Gaussian log-likelihood of the returns under the filtered variances.
inline double log_likelihood(GarchModelKind kind, const GarchParams& params, const ReturnSeries& returns) {
  validate(kind, params);
  const auto s2 = detail::variance_path(kind, params, returns.values());
  if (s2.size() != returns.size()) return -std::numeric_limits<double>::infinity();
  return detail::log_likelihood(returns.values(), params.mu, s2);
}

struct GarchSimulation {
  ReturnSeries returns;
  VolSeries vol;  ///< true conditional volatility of each return
};

inline GarchSimulation simulate(GarchModelKind kind, const GarchParams& params, std::size_t n, std::uint64_t seed) {
  validate(kind, params);
  if (n < 1) throw Error(Module::garch, Errc::InvalidParams, "n must be >= 1");
  NormalStream z(seed);
  std::vector<double> r(n), vol(n);
  double s2 = params.sigma0 * params.sigma0;
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) s2 = detail::next_variance(kind, params, r[t - 1] - params.mu, s2);
    if (!(s2 > 0.0) || !std::isfinite(s2)) {
      throw Error(Module::garch, Errc::NonPositiveVariance, "simulated variance left (0, inf)");
    }
    vol[t] = std::sqrt(s2);
    r[t] = params.mu + vol[t] * z();
  }
  auto dates = weekday_calendar(n);
  return {ReturnSeries(dates, std::move(r)), VolSeries(std::move(dates), std::move(vol), VolScale::daily)};
}

struct GarchFit {
  GarchModelKind kind = GarchModelKind::Garch11;
  GarchParams params;
  double log_likelihood = 0.0;
  VolSeries vol;
  std::vector<double> residuals;  ///< (r_t - mu) / sigma_t
  bool converged = false;
  bool degenerate = false;        ///< alpha0 collapsed toward zero
  std::size_t iterations = 0;
};

struct GarchFitOptions {
  std::vector<GarchParams> extra_starts;
  EgarchForm egarch_form = EgarchForm::printed;
  NelderMeadOptions simplex;
};

/// Gaussian maximum likelihood with mu fixed at the sample mean and sigma0^2 at the sample
/// variance. Returns the best of several simplex runs, each polished by one restart.
inline GarchFit fit(GarchModelKind kind, const ReturnSeries& returns, const GarchFitOptions& opt = {}) {
  constexpr std::size_t kMinLength = 50;
  if (returns.size() < kMinLength) {
    throw Error(Module::garch, Errc::TooShort, "need at least 50 returns, got " + std::to_string(returns.size()));
  }
  const auto r = returns.values();
  const double n = static_cast<double>(r.size());
  double mean = 0.0;
  for (double x : r) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : r) var += (x - mean) * (x - mean);
  var /= n;
  if (!(var > 1e-12 * mean * mean) || !(var > 0.0)) {
    throw Error(Module::garch, Errc::DidNotConverge, "returns have zero variance");
  }

  GarchParams base;
  base.mu = mean;
  base.sigma0 = std::sqrt(var);
  base.egarch_form = opt.egarch_form;

  auto objective = [&](const std::vector<double>& x) {
    const auto p = detail::from_free(kind, x, base);
    const auto s2 = detail::variance_path(kind, p, r);
    if (s2.size() != r.size()) return std::numeric_limits<double>::infinity();
    return -detail::log_likelihood(r, mean, s2);
  };

  auto starts = detail::default_starts(kind, base, var);
  for (auto s : opt.extra_starts) {
    s.mu = base.mu;
    s.sigma0 = base.sigma0;
    s.egarch_form = base.egarch_form;
    starts.push_back(s);
  }

  NelderMeadResult best;
  for (const auto& s : starts) {
    auto res = nelder_mead(objective, detail::to_free(kind, s), opt.simplex);
    auto polish = nelder_mead(objective, res.x, opt.simplex);
    polish.iterations += res.iterations;
    if (polish.f < best.f) best = std::move(polish);
  }
  if (!std::isfinite(best.f)) throw Error(Module::garch, Errc::DidNotConverge, "no start produced a finite likelihood");

  GarchFit out;
  out.kind = kind;
  out.params = detail::from_free(kind, best.x, base);
  out.log_likelihood = -best.f;
  out.converged = best.converged;
  out.iterations = best.iterations;
  out.degenerate = kind != GarchModelKind::Ewma && kind != GarchModelKind::EGarch && out.params.alpha0 < 1e-10 * var;
  out.vol = filter_vol(kind, out.params, returns);
  out.residuals.resize(r.size());
  for (std::size_t t = 0; t < r.size(); ++t) out.residuals[t] = (r[t] - mean) / out.vol[t];
  return out;
}

struct RefitEntry {
  TradingDate date;        ///< date of the last return in the window
  std::size_t window = 0;  ///< number of returns fitted
  std::optional<GarchParams> params;
  double last_vol = 0.0;
  std::string error;       ///< module-qualified error when the fit failed
};

struct RefitResult {
  std::vector<RefitEntry> entries;
  std::vector<std::string> errors;
  VolSeries vol;  ///< last filtered vol of every successful window
};

/// Fits returns[0, t) for t = start, start + step, ... <= n. Each window reuses the previous
/// window's parameters as an extra start. Failures are recorded per window.
inline RefitResult refit_increasing_window(GarchModelKind kind, const ReturnSeries& returns, std::size_t start,
                                           std::size_t step, const GarchFitOptions& opt = {}) {
  if (start < 50) throw Error(Module::garch, Errc::InvalidArgument, "start must be >= 50");
  if (step < 1) throw Error(Module::garch, Errc::InvalidArgument, "step must be >= 1");
  RefitResult out;
  if (start > returns.size()) {
    out.errors.push_back("garch.TooShort: start " + std::to_string(start) + " beyond series length " +
                         std::to_string(returns.size()));
    return out;
  }
  std::vector<TradingDate> dates;
  std::vector<double> vols;
  std::optional<GarchParams> previous;
  const auto all_dates = returns.dates();
  const auto all_values = returns.values();
  for (std::size_t t = start; t <= returns.size(); t += step) {
    RefitEntry e;
    e.date = all_dates[t - 1];
    e.window = t;
    try {
      ReturnSeries window({all_dates.begin(), all_dates.begin() + static_cast<std::ptrdiff_t>(t)},
                          {all_values.begin(), all_values.begin() + static_cast<std::ptrdiff_t>(t)});
      GarchFitOptions o = opt;
      if (previous) o.extra_starts.push_back(*previous);
      const auto f = fit(kind, window, o);
      e.params = f.params;
      e.last_vol = f.vol[f.vol.size() - 1];
      previous = f.params;
      dates.push_back(e.date);
      vols.push_back(e.last_vol);
    } catch (const Error& err) {
      e.error = err.what();
      out.errors.push_back(e.date.label + ": " + e.error);
    }
    out.entries.push_back(std::move(e));
  }
  out.vol = VolSeries(std::move(dates), std::move(vols), VolScale::daily);
  return out;
}

}  // namespace volkit

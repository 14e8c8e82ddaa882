#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "volkit/error.hpp"
#include "volkit/estimators.hpp"
#include "volkit/marketdata.hpp"

namespace volkit {

inline constexpr double kSignificance = 0.05;

struct ResidualSeries {
  std::string label;
  std::vector<TradingDate> dates;
  std::vector<double> values;
};

/// res_t = r_t / sigma, where sigma is the vol dated `lag` returns before r_t. lag = 0 pairs
/// same-date values (GARCH-style filters are already predictive); lag = 1 uses the estimate
/// available at the previous close. Returns without a matching vol date are skipped.
inline ResidualSeries residuals(const ReturnSeries& returns, const VolSeries& vol, std::string label = {},
                                std::size_t lag = 0) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < vol.size(); ++j) index.emplace(vol.dates()[j].label, j);
  ResidualSeries out{std::move(label), {}, {}};
  for (std::size_t i = lag; i < returns.size(); ++i) {
    const auto it = index.find(returns.dates()[i - lag].label);
    if (it == index.end()) continue;
    const double sigma = vol[it->second];
    if (!(sigma > 0.0)) {
      throw Error(Module::diagnostics, Errc::ZeroVol, "zero volatility on " + vol.dates()[it->second].label);
    }
    out.dates.push_back(returns.dates()[i]);
    out.values.push_back(returns[i] / sigma);
  }
  if (out.values.empty()) {
    throw Error(Module::diagnostics, Errc::Misaligned, "returns and volatility share no dates");
  }
  return out;
}

struct MomentsReport {
  double mean = 0.0;
  double variance = 0.0;  ///< population
  double skewness = 0.0;
  double kurtosis = 0.0;  ///< non-excess
};

inline MomentsReport moments(std::span<const double> x) {
  if (x.size() < 4) throw Error(Module::diagnostics, Errc::DegenerateSample, "need at least 4 observations");
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - mean, d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (!(m2 > 0.0)) throw Error(Module::diagnostics, Errc::DegenerateSample, "sample has zero variance");
  return {mean, m2, m3 / std::pow(m2, 1.5), m4 / (m2 * m2)};
}

/// (theoretical standard-normal quantile, empirical order statistic) at plotting positions (k - 0.5)/n.
inline std::vector<std::pair<double, double>> qq_data(std::span<const double> x) {
  moments(x);  // same preconditions
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const boost::math::normal_distribution<double> normal;
  const double n = static_cast<double>(sorted.size());
  std::vector<std::pair<double, double>> out(sorted.size());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    out[k] = {boost::math::quantile(normal, (static_cast<double>(k) + 0.5) / n), sorted[k]};
  }
  return out;
}

struct AcfResult {
  std::vector<double> rho;  ///< rho[i - 1] is the lag-i autocorrelation, i = 1..L
  double band = 0.0;        ///< 1.96 / sqrt(N)
  std::size_t n = 0;

  [[nodiscard]] std::size_t max_lag() const noexcept { return rho.size(); }
  [[nodiscard]] double at(std::size_t lag) const { return lag == 0 ? 1.0 : rho.at(lag - 1); }
};

inline std::size_t default_acf_lag(std::size_t n) {
  return static_cast<std::size_t>(std::floor(10.0 * std::log10(static_cast<double>(n))));
}

/// Sample autocorrelations with the lag-0 sum as denominator. Default L = floor(10 log10 N),
/// capped at N - 1.
inline AcfResult acf(std::span<const double> x, std::optional<std::size_t> max_lag = std::nullopt) {
  const std::size_t n = x.size();
  if (n < 2) throw Error(Module::diagnostics, Errc::DegenerateSample, "need at least 2 observations");
  const std::size_t L = max_lag.value_or(std::min(default_acf_lag(n), n - 1));
  if (L >= n) {
    throw Error(Module::diagnostics, Errc::LagTooLarge,
                "lag " + std::to_string(L) + " must be below sample size " + std::to_string(n));
  }
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> d(n);
  double c0 = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    d[t] = x[t] - mean;
    c0 += d[t] * d[t];
  }
  if (!(c0 > 0.0)) throw Error(Module::diagnostics, Errc::DegenerateSample, "sample has zero variance");
  AcfResult out;
  out.n = n;
  out.band = 1.96 / std::sqrt(static_cast<double>(n));
  out.rho.resize(L);
  for (std::size_t lag = 1; lag <= L; ++lag) {
    double c = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) c += d[t] * d[t + lag];
    out.rho[lag - 1] = c / c0;
  }
  return out;
}

struct LjungBoxResult {
  double q = 0.0;
  std::size_t h = 0;
  double p_value = 1.0;
  std::size_t n = 0;
  bool reject = false;  ///< p < 0.05
};

/// Survival function of the chi-square distribution with `dof` degrees of freedom.
inline double chi_square_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

/// Q = N (N + 2) sum_{i<=h} rho_i^2 / (N - i) from precomputed autocorrelations.
inline LjungBoxResult ljung_box_statistic(std::size_t n, std::span<const double> rho) {
  const double N = static_cast<double>(n);
  double q = 0.0;
  for (std::size_t i = 1; i <= rho.size(); ++i) q += rho[i - 1] * rho[i - 1] / (N - static_cast<double>(i));
  q *= N * (N + 2.0);
  const double p = chi_square_sf(q, static_cast<double>(rho.size()));
  return {q, rho.size(), p, n, p < kSignificance};
}

inline LjungBoxResult ljung_box(std::span<const double> x, std::size_t h) {
  if (h < 1) throw Error(Module::diagnostics, Errc::InvalidArgument, "h must be >= 1");
  const auto a = acf(x, h);
  return ljung_box_statistic(x.size(), a.rho);
}

/// Zero-mean root mean square of ln(sigma_t / sigma_{t-1}).
inline double vol_of_vol(std::span<const double> vol) {
  if (vol.size() < 3) throw Error(Module::diagnostics, Errc::TooShort, "need at least 3 volatilities");
  for (double v : vol) {
    if (!(v > 0.0)) throw Error(Module::diagnostics, Errc::NonPositiveVol, "volatility must be > 0");
  }
  double ss = 0.0;
  for (std::size_t t = 1; t < vol.size(); ++t) {
    const double d = std::log(vol[t] / vol[t - 1]);
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(vol.size() - 1));
}

inline double vol_of_vol(const VolSeries& vol) { return vol_of_vol(vol.values()); }

struct MaLagScan {
  std::size_t window = 0;
  AcfResult acf;           ///< of squared residuals, lags 1..2w
  double rho_at_window = 0.0;
};

/// For each window w: residuals against the one-step-ahead w-day moving-average vol, then the
/// ACF of their squares up to lag 2w.
inline std::vector<MaLagScan> ma_window_lag_scan(std::span<const double> returns, std::span<const std::size_t> windows) {
  const std::size_t n = returns.size();
  std::vector<MaLagScan> out;
  for (std::size_t w : windows) {
    if (w < 2 || 2 * w >= n) {
      throw Error(Module::diagnostics, Errc::InvalidArgument,
                  "window " + std::to_string(w) + " must be >= 2 and below N/2 = " + std::to_string(n / 2));
    }
    const auto sigma = moving_average_forecast(returns, w);
    std::vector<double> sq(sigma.size());
    for (std::size_t j = 0; j < sigma.size(); ++j) {
      if (!(sigma[j] > 0.0)) throw Error(Module::diagnostics, Errc::ZeroVol, "moving-average vol is zero");
      const double res = returns[j + w] / sigma[j];
      sq[j] = res * res;
    }
    MaLagScan scan;
    scan.window = w;
    scan.acf = acf(sq, std::min(2 * w, sq.size() - 1));
    scan.rho_at_window = scan.acf.at(w);
    out.push_back(std::move(scan));
  }
  return out;
}

}  // namespace volkit

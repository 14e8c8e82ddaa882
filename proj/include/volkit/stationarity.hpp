#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "volkit/error.hpp"
#include "volkit/marketdata.hpp"
#include "volkit/parallel.hpp"

namespace volkit {

/// A named, dated real series (volatility levels, strikes, spreads).
struct LabeledSeries {
  std::string label;
  std::vector<TradingDate> dates;
  std::vector<double> values;
};

struct Ar1Fit {
  double a = 0.0;      ///< autoregressive coefficient
  double mean = 0.0;   ///< m
  double residual_variance = 0.0;
  bool stationary = false;  ///< |a| < 1
};

/// Least squares of (y_t - m) on (y_{t-1} - m) with m the sample mean.
inline Ar1Fit fit_ar1(std::span<const double> y) {
  if (y.size() < 10) throw Error(Module::stationarity, Errc::TooShort, "need at least 10 observations");
  const double n = static_cast<double>(y.size());
  double m = 0.0;
  for (double v : y) m += v;
  m /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t t = 1; t < y.size(); ++t) {
    sxy += (y[t] - m) * (y[t - 1] - m);
    sxx += (y[t - 1] - m) * (y[t - 1] - m);
  }
  if (!(sxx > 0.0)) throw Error(Module::stationarity, Errc::DegenerateSample, "series is constant");
  Ar1Fit out;
  out.a = sxy / sxx;
  out.mean = m;
  double ss = 0.0;
  for (std::size_t t = 1; t < y.size(); ++t) {
    const double e = (y[t] - m) - out.a * (y[t - 1] - m);
    ss += e * e;
  }
  out.residual_variance = ss / (n - 1.0);
  out.stationary = std::abs(out.a) < 1.0;
  return out;
}

struct HalfLife {
  double days = 0.0;
  bool zero_coefficient = false;  ///< A = 0: deviations vanish immediately
};

/// ln(1/2) / ln|A|.
inline HalfLife half_life(double a) {
  if (!std::isfinite(a) || std::abs(a) >= 1.0) {
    throw Error(Module::stationarity, Errc::NonStationaryCoefficient, "|A| = " + std::to_string(std::abs(a)) + " >= 1");
  }
  if (a == 0.0) return {0.0, true};
  return {std::log(0.5) / std::log(std::abs(a)), false};
}

struct AdfResult {
  double statistic = 0.0;
  std::size_t lag_order = 0;
  double p_value = 0.0;  ///< interpolated, clamped to [0.01, 0.99]
  bool reject = false;   ///< p < 0.05
  std::size_t n = 0;     ///< observations in the regression
};

namespace detail {

inline double interpolate_clamped(std::span<const double> xs, std::span<const double> ys, double x) {
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
  const std::size_t lo = hi - 1;
  const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
  return ys[lo] + w * (ys[hi] - ys[lo]);
}

/// Dickey-Fuller critical values for the constant + trend regression (Banerjee et al. 1993),
/// rows by sample size, columns by lower-tail probability. Same table as R's tseries::adf.test.
inline double adf_p_value(double statistic, std::size_t n) {
  static constexpr std::array<double, 6> sizes{25, 50, 100, 250, 500, 100000};
  static constexpr std::array<double, 8> probs{0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99};
  static constexpr double table[6][8] = {
      {-4.38, -3.95, -3.60, -3.24, -1.14, -0.80, -0.50, -0.15},
      {-4.15, -3.80, -3.50, -3.18, -1.19, -0.87, -0.58, -0.24},
      {-4.04, -3.73, -3.45, -3.15, -1.22, -0.90, -0.62, -0.28},
      {-3.99, -3.69, -3.43, -3.13, -1.23, -0.92, -0.64, -0.31},
      {-3.98, -3.68, -3.42, -3.13, -1.24, -0.93, -0.65, -0.32},
      {-3.96, -3.66, -3.41, -3.12, -1.25, -0.94, -0.66, -0.33},
  };
  std::array<double, 8> at_n{};
  for (std::size_t c = 0; c < 8; ++c) {
    std::array<double, 6> column{};
    for (std::size_t r = 0; r < 6; ++r) column[r] = table[r][c];
    at_n[c] = interpolate_clamped(sizes, column, static_cast<double>(n));
  }
  return interpolate_clamped(at_n, probs, statistic);
}

}  // namespace detail

/// Augmented Dickey-Fuller test with constant and linear trend:
/// dy_t on (1, t, y_{t-1}, dy_{t-1}, ..., dy_{t-p}), p = trunc((N - 1)^(1/3)).
/// The statistic is the t-ratio on y_{t-1}.
inline AdfResult adf_test(std::span<const double> series) {
  if (series.size() < 30) throw Error(Module::stationarity, Errc::TooShort, "need at least 30 observations");
  // The statistic is invariant under x -> -x; fixing the orientation makes it bit-identical too.
  std::vector<double> x(series.begin(), series.end());
  double orientation = x.back() - x.front();
  for (std::size_t i = 1; orientation == 0.0 && i < x.size(); ++i) orientation = x[i] - x[i - 1];
  if (orientation < 0.0) {
    for (double& v : x) v = -v;
  }

  const std::size_t p = static_cast<std::size_t>(std::trunc(std::cbrt(static_cast<double>(x.size() - 1))));
  const std::size_t k = p + 1;
  const std::size_t n = x.size() - 1;
  std::vector<double> dy(n);
  for (std::size_t i = 0; i < n; ++i) dy[i] = x[i + 1] - x[i];

  const std::size_t rows = n - k + 1;
  const std::size_t cols = 3 + p;
  if (rows <= cols) throw Error(Module::stationarity, Errc::TooShort, "too few observations for the lag order");
  Eigen::MatrixXd X(rows, cols);
  Eigen::VectorXd Y(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t i = r + k - 1;
    Y(r) = dy[i];
    X(r, 0) = x[i];
    X(r, 1) = 1.0;
    X(r, 2) = static_cast<double>(i + 1);
    for (std::size_t j = 1; j <= p; ++j) X(r, 2 + j) = dy[i - j];
  }

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> rank_check(X);
  if (rank_check.rank() < static_cast<Eigen::Index>(cols)) {
    throw Error(Module::stationarity, Errc::SingularRegression, "design matrix is rank deficient");
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  const Eigen::VectorXd beta = qr.solve(Y);
  const Eigen::VectorXd resid = Y - X * beta;
  const double sigma2 = resid.squaredNorm() / static_cast<double>(rows - cols);
  const Eigen::MatrixXd R = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd R_inv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(cols, cols));
  const double se = std::sqrt(sigma2 * R_inv.row(0).squaredNorm());
  if (!(se > 0.0) || !std::isfinite(se)) {
    throw Error(Module::stationarity, Errc::SingularRegression, "zero residual variance in the regression");
  }

  AdfResult out;
  out.statistic = beta(0) / se;
  out.lag_order = p;
  out.n = n;
  out.p_value = detail::adf_p_value(out.statistic, n);
  out.reject = out.p_value < 0.05;
  return out;
}

inline void require_aligned(const LabeledSeries& a, const LabeledSeries& b) {
  bool same = a.values.size() == b.values.size() && a.dates.size() == b.dates.size();
  for (std::size_t i = 0; same && i < a.dates.size(); ++i) same = a.dates[i].label == b.dates[i].label;
  if (!same) throw Error(Module::stationarity, Errc::Misaligned, a.label + " and " + b.label + " are not aligned");
}

/// Restricts every series to the dates present in all of them, keeping the first series' order.
inline std::vector<LabeledSeries> intersect_dates(const std::vector<LabeledSeries>& series) {
  if (series.empty()) return {};
  std::unordered_map<std::string, std::size_t> seen;
  for (const auto& s : series) {
    for (const auto& d : s.dates) ++seen[d.label];
  }
  std::vector<LabeledSeries> out;
  for (const auto& s : series) {
    LabeledSeries kept{s.label, {}, {}};
    for (std::size_t i = 0; i < s.dates.size(); ++i) {
      if (seen[s.dates[i].label] == series.size()) {
        kept.dates.push_back({static_cast<std::int64_t>(kept.dates.size()), s.dates[i].label});
        kept.values.push_back(s.values[i]);
      }
    }
    out.push_back(std::move(kept));
  }
  for (const auto& s : out) require_aligned(out.front(), s);
  return out;
}

/// y1 - y2 with unit hedge ratio.
inline LabeledSeries spread(const LabeledSeries& y1, const LabeledSeries& y2) {
  require_aligned(y1, y2);
  LabeledSeries out{y1.label + "-" + y2.label, y1.dates, std::vector<double>(y1.values.size())};
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = y1.values[i] - y2.values[i];
  return out;
}

inline double correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(Module::stationarity, Errc::Misaligned, "series differ in length");
  if (a.size() < 3) throw Error(Module::stationarity, Errc::TooShort, "need at least 3 observations");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) throw Error(Module::stationarity, Errc::DegenerateSample, "zero variance");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

inline double correlation(const LabeledSeries& a, const LabeledSeries& b) {
  require_aligned(a, b);
  return correlation(a.values, b.values);
}

/// ADF result and AR(1) half-life of one series, or the error that prevented them.
struct StationarityCell {
  std::optional<AdfResult> adf;
  std::optional<HalfLife> half_life;
  std::string error;
};

struct StationarityScan {
  std::vector<std::string> labels;
  std::vector<StationarityCell> singles;
  /// pairwise[i][j] for the spread labels[i] - labels[j]; empty cell (no adf, no error) on the diagonal.
  std::vector<std::vector<StationarityCell>> pairwise;
};

inline StationarityCell analyze(std::span<const double> y) {
  StationarityCell cell;
  try {
    cell.adf = adf_test(y);
  } catch (const Error& e) {
    cell.error = e.what();
  }
  try {
    cell.half_life = half_life(fit_ar1(y).a);
  } catch (const Error& e) {
    if (cell.error.empty()) cell.error = e.what();
  }
  return cell;
}

/// Singles table and, optionally, the symmetric pairwise table on unit-beta spreads.
inline StationarityScan stationarity_scan(const std::vector<LabeledSeries>& series, bool pairwise) {
  if (series.empty()) throw Error(Module::stationarity, Errc::InvalidArgument, "no series");
  if (pairwise && series.size() < 2) {
    throw Error(Module::stationarity, Errc::InvalidArgument, "pairwise scan needs at least 2 series");
  }
  StationarityScan out;
  const std::size_t m = series.size();
  for (const auto& s : series) out.labels.push_back(s.label);
  out.singles.resize(m);
  parallel_for(m, [&](std::size_t i) { out.singles[i] = analyze(series[i].values); });
  if (!pairwise) return out;

  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) require_aligned(series[i], series[j]);
  }
  out.pairwise.assign(m, std::vector<StationarityCell>(m));
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
  }
  parallel_for(pairs.size(), [&](std::size_t q) {
    const auto [i, j] = pairs[q];
    out.pairwise[i][j] = analyze(spread(series[i], series[j]).values);
  });
  for (const auto& [i, j] : pairs) out.pairwise[j][i] = out.pairwise[i][j];
  return out;
}

}  // namespace volkit

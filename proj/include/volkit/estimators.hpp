#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "volkit/error.hpp"
#include "volkit/marketdata.hpp"
#include "volkit/parallel.hpp"
#include "volkit/random.hpp"
#include "volkit/simulate.hpp"

namespace volkit {

enum class VolMethod {
  close_to_close,
  parkinson,
  garman_klass,
  rogers_satchell,
  gkyz,  ///< Garman-Klass with the Yang-Zhang overnight term
  yang_zhang,
  moving_average,
  constant_vol,
};

/// Estimator selector. `window` is only meaningful for moving_average.
struct EstimatorKind {
  VolMethod method = VolMethod::close_to_close;
  std::size_t window = 0;

  static constexpr EstimatorKind moving_average(std::size_t w) { return {VolMethod::moving_average, w}; }
  friend bool operator==(const EstimatorKind&, const EstimatorKind&) = default;
};

inline std::string to_string(const EstimatorKind& k) {
  switch (k.method) {
    case VolMethod::close_to_close: return "close-to-close";
    case VolMethod::parkinson: return "parkinson";
    case VolMethod::garman_klass: return "garman-klass";
    case VolMethod::rogers_satchell: return "rogers-satchell";
    case VolMethod::gkyz: return "gkyz";
    case VolMethod::yang_zhang: return "yang-zhang";
    case VolMethod::moving_average: return "ma" + std::to_string(k.window);
    case VolMethod::constant_vol: return "constant";
  }
  return "unknown";
}

/// Accepts the names printed by to_string, plus "ma<N>".
inline std::optional<EstimatorKind> parse_estimator(std::string_view name) {
  if (name == "close-to-close" || name == "cc") return EstimatorKind{VolMethod::close_to_close};
  if (name == "parkinson") return EstimatorKind{VolMethod::parkinson};
  if (name == "garman-klass" || name == "gk") return EstimatorKind{VolMethod::garman_klass};
  if (name == "rogers-satchell" || name == "rs") return EstimatorKind{VolMethod::rogers_satchell};
  if (name == "gkyz") return EstimatorKind{VolMethod::gkyz};
  if (name == "yang-zhang" || name == "yz") return EstimatorKind{VolMethod::yang_zhang};
  if (name == "constant") return EstimatorKind{VolMethod::constant_vol};
  if (name.starts_with("ma") && name.size() > 2) {
    std::size_t w = 0;
    auto [p, ec] = std::from_chars(name.data() + 2, name.data() + name.size(), w);
    if (ec == std::errc{} && p == name.data() + name.size()) return EstimatorKind::moving_average(w);
  }
  return std::nullopt;
}

inline constexpr std::string_view kEstimatorNames =
    "close-to-close, parkinson, garman-klass, rogers-satchell, gkyz, yang-zhang, constant, ma<N>";

struct EstimatorOptions {
  /// Numerator of the Yang-Zhang weight k = a / (1.34 + (N+1)/(N-1)). The published value is
  /// 10.34; Yang and Zhang's original derivation uses 0.34.
  double yang_zhang_numerator = 10.34;
  /// Weight on ln(c/o)^2 in Garman-Klass and GKYZ. 2 ln 2 - 1 makes the estimator unbiased
  /// under driftless Brownian motion.
  double open_close_coefficient = 2.0 * std::numbers::ln2 - 1.0;
};

namespace detail {

inline bool needs_previous_close(VolMethod m) {
  return m == VolMethod::close_to_close || m == VolMethod::gkyz || m == VolMethod::yang_zhang ||
         m == VolMethod::moving_average || m == VolMethod::constant_vol;
}

inline double checked_sqrt(double variance, const EstimatorKind& kind) {
  if (variance < 0.0) {
    throw Error(Module::estimators, Errc::NegativeVarianceEstimate,
                to_string(kind) + " variance sum is " + std::to_string(variance));
  }
  return std::sqrt(variance);
}

/// Daily volatility of the bars; kinds needing c_{i-1} use bars[0] only as the previous close.
inline double estimate(std::span<const OhlcBar> bars, const EstimatorKind& kind, const EstimatorOptions& opt) {
  const std::size_t n_bars = bars.size();
  const std::size_t first = needs_previous_close(kind.method) ? 1 : 0;
  if (n_bars < first + 1) {
    throw Error(Module::estimators, Errc::TooShort, to_string(kind) + " needs more bars");
  }
  const double N = static_cast<double>(n_bars - first);
  double sum = 0.0;
  switch (kind.method) {
    case VolMethod::close_to_close:
    case VolMethod::moving_average:
    case VolMethod::constant_vol:
      for (std::size_t i = 1; i < n_bars; ++i) {
        const double r = std::log(bars[i].close / bars[i - 1].close);
        sum += r * r;
      }
      return std::sqrt(sum / N);
    case VolMethod::parkinson:
      for (const auto& b : bars) {
        const double hl = std::log(b.high / b.low);
        sum += hl * hl;
      }
      return std::sqrt(sum / (4.0 * std::numbers::ln2 * N));
    case VolMethod::garman_klass:
      for (const auto& b : bars) {
        const double hl = std::log(b.high / b.low);
        const double co = std::log(b.close / b.open);
        sum += 0.5 * hl * hl - opt.open_close_coefficient * co * co;
      }
      return checked_sqrt(sum / N, kind);
    case VolMethod::rogers_satchell:
      for (const auto& b : bars) {
        sum += std::log(b.high / b.close) * std::log(b.high / b.open) +
               std::log(b.low / b.close) * std::log(b.low / b.open);
      }
      return checked_sqrt(sum / N, kind);
    case VolMethod::gkyz:
      for (std::size_t i = 1; i < n_bars; ++i) {
        const auto& b = bars[i];
        const double oc = std::log(b.open / bars[i - 1].close);
        const double hl = std::log(b.high / b.low);
        const double co = std::log(b.close / b.open);
        sum += oc * oc + 0.5 * hl * hl - opt.open_close_coefficient * co * co;
      }
      return checked_sqrt(sum / N, kind);
    case VolMethod::yang_zhang: {
      if (n_bars - first < 2) {
        throw Error(Module::estimators, Errc::TooShort, "yang-zhang needs at least two returns");
      }
      double mean_on = 0.0, mean_oc = 0.0;
      for (std::size_t i = 1; i < n_bars; ++i) {
        mean_on += std::log(bars[i].open / bars[i - 1].close);
        mean_oc += std::log(bars[i].close / bars[i].open);
      }
      mean_on /= N;
      mean_oc /= N;
      double var_on = 0.0, var_oc = 0.0, rs = 0.0;
      for (std::size_t i = 1; i < n_bars; ++i) {
        const auto& b = bars[i];
        const double on = std::log(b.open / bars[i - 1].close) - mean_on;
        const double oc = std::log(b.close / b.open) - mean_oc;
        var_on += on * on;
        var_oc += oc * oc;
        rs += std::log(b.high / b.close) * std::log(b.high / b.open) +
              std::log(b.low / b.close) * std::log(b.low / b.open);
      }
      var_on /= N - 1.0;
      var_oc /= N - 1.0;
      rs /= N;
      const double k = opt.yang_zhang_numerator / (1.34 + (N + 1.0) / (N - 1.0));
      return checked_sqrt(var_on + k * var_oc + (1.0 - k) * rs, kind);
    }
  }
  throw Error(Module::estimators, Errc::InvalidArgument, "unknown estimator");
}

}  // namespace detail

/// Daily-scale volatility over the whole series. moving_average uses the last `window` bars.
inline double estimate_vol(const OhlcSeries& series, const EstimatorKind& kind, const EstimatorOptions& opt = {}) {
  auto bars = series.bars();
  if (kind.method == VolMethod::moving_average) {
    if (kind.window < 2) throw Error(Module::estimators, Errc::InvalidArgument, "moving average window must be >= 2");
    if (kind.window > bars.size()) {
      throw Error(Module::estimators, Errc::WindowTooLarge, "window exceeds series length");
    }
    bars = bars.last(kind.window);
  }
  return detail::estimate(bars, kind, opt);
}

/// Value at bar t estimated from bars [t - window + 1, t]; the first window - 1 bars carry no value.
/// constant_vol repeats the full-sample estimate at every bar. For moving_average, `window`
/// is the averaging window.
inline VolSeries rolling_vol(const OhlcSeries& series, const EstimatorKind& kind, std::size_t window,
                             const EstimatorOptions& opt = {}) {
  const auto bars = series.bars();
  if (window < 2) throw Error(Module::estimators, Errc::InvalidArgument, "window must be >= 2");
  if (window > bars.size()) throw Error(Module::estimators, Errc::WindowTooLarge, "window exceeds series length");
  std::vector<TradingDate> dates;
  std::vector<double> values;
  if (kind.method == VolMethod::constant_vol) {
    const double v = detail::estimate(bars, kind, opt);
    for (const auto& b : bars) {
      dates.push_back(b.date);
      values.push_back(v);
    }
    return VolSeries(std::move(dates), std::move(values), VolScale::daily);
  }
  const EstimatorKind per_window =
      kind.method == VolMethod::moving_average ? EstimatorKind{VolMethod::close_to_close} : kind;
  for (std::size_t t = window - 1; t < bars.size(); ++t) {
    dates.push_back(bars[t].date);
    values.push_back(detail::estimate(bars.subspan(t + 1 - window, window), per_window, opt));
  }
  return VolSeries(std::move(dates), std::move(values), VolScale::daily);
}

/// One-step-ahead moving-average volatility: entry j is the zero-mean standard deviation of
/// returns[j .. j + window - 1] and forecasts returns[j + window].
inline std::vector<double> moving_average_forecast(std::span<const double> returns, std::size_t window) {
  if (window < 1) throw Error(Module::estimators, Errc::InvalidArgument, "window must be >= 1");
  if (window >= returns.size()) throw Error(Module::estimators, Errc::WindowTooLarge, "window exceeds series length");
  std::vector<double> out;
  out.reserve(returns.size() - window);
  for (std::size_t t = window; t < returns.size(); ++t) {
    double s = 0.0;
    for (std::size_t j = t - window; j < t; ++j) s += returns[j] * returns[j];
    out.push_back(std::sqrt(s / static_cast<double>(window)));
  }
  return out;
}

struct EfficiencyReport {
  EstimatorKind kind;
  double efficiency = 0.0;            ///< reference_variance / estimator_variance
  double estimator_variance = 0.0;    ///< across trials, daily vol units
  double reference_variance = 0.0;    ///< close-to-close, same paths
  double estimator_mean = 0.0;
  double reference_mean = 0.0;
};

struct EfficiencyConfig {
  double sigma = 0.2;  ///< annualized GBM volatility
  std::size_t horizon_days = 252;
  std::size_t trials = 2000;
  std::size_t intrabar_steps = 390;
  std::uint64_t seed = 42;
  double overnight_vol = 0.0;
};

/// Efficiencies of several estimators measured on the same simulated bars per trial.
inline std::vector<EfficiencyReport> efficiency_table(std::span<const EstimatorKind> kinds, const EfficiencyConfig& cfg,
                                                      const EstimatorOptions& opt = {}) {
  if (cfg.trials < 100) throw Error(Module::estimators, Errc::InvalidArgument, "need at least 100 trials");
  if (cfg.intrabar_steps < 100) {
    throw Error(Module::estimators, Errc::InvalidArgument, "need at least 100 intrabar steps");
  }
  const std::size_t k = kinds.size();
  // Row t holds [close-to-close, kinds...] for trial t.
  std::vector<double> est(cfg.trials * (k + 1));
  parallel_for(cfg.trials, [&](std::size_t t) {
    const auto bars = simulate_gbm_bars(cfg.sigma, cfg.horizon_days, cfg.intrabar_steps,
                                        substream_seed(cfg.seed, t), {.overnight_vol = cfg.overnight_vol});
    est[t * (k + 1)] = estimate_vol(bars, EstimatorKind{VolMethod::close_to_close}, opt);
    for (std::size_t j = 0; j < k; ++j) est[t * (k + 1) + j + 1] = estimate_vol(bars, kinds[j], opt);
  });
  auto moments = [&](std::size_t col) {
    const double n = static_cast<double>(cfg.trials);
    double mean = 0.0;
    for (std::size_t t = 0; t < cfg.trials; ++t) mean += est[t * (k + 1) + col];
    mean /= n;
    double ss = 0.0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const double d = est[t * (k + 1) + col] - mean;
      ss += d * d;
    }
    return std::pair{mean, ss / (n - 1.0)};
  };
  const auto [ref_mean, ref_var] = moments(0);
  std::vector<EfficiencyReport> out;
  for (std::size_t j = 0; j < k; ++j) {
    const auto [mean, var] = moments(j + 1);
    if (!(var > 0.0)) {
      throw Error(Module::estimators, Errc::DegenerateVariance, to_string(kinds[j]) + " has zero variance");
    }
    out.push_back({kinds[j], ref_var / var, var, ref_var, mean, ref_mean});
  }
  return out;
}

inline EfficiencyReport efficiency(const EstimatorKind& kind, const EfficiencyConfig& cfg,
                                   const EstimatorOptions& opt = {}) {
  return efficiency_table(std::span<const EstimatorKind>(&kind, 1), cfg, opt).front();
}

}  // namespace volkit

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <type_traits>
#include <variant>
#include <vector>

#include "volkit/error.hpp"
#include "volkit/marketdata.hpp"
#include "volkit/parallel.hpp"
#include "volkit/random.hpp"
#include "volkit/varswap.hpp"

namespace volkit {

/// Zero-drift geometric Brownian motion with constant annualized volatility.
struct GbmParams {
  double sigma = 0.2;
};

using SdeModel = std::variant<GbmParams, SabrParams, HestonParams, SteinParams, LambdaSabrParams>;

struct SdeSpec {
  SdeModel model;
  double horizon = 1.0;  ///< T in years
  double spot0 = 100.0;
  double rate = 0.0;     ///< drift of S for Heston and Stein
};

struct PathConfig {
  std::size_t n_paths = 10000;
  std::size_t n_steps = 252;
  std::uint64_t seed = 42;
};

struct SimulatedPath {
  std::vector<double> spot;  ///< n_steps + 1 points
  std::vector<double> vol;   ///< sigma_t; Heston reports sqrt(max(v, 0)), Stein keeps the sign
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
};

namespace detail {

inline McEstimate summarize(const std::vector<double>& samples) {
  const auto n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double sd = samples.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return {mean, sd / std::sqrt(n), samples.size()};
}

/// Euler update of the volatility state. The state is sigma for SABR, Stein and lambda-SABR and
/// the variance for Heston (full truncation). GBM keeps its constant sigma.
struct VolStepper {
  const SdeModel& model;

  [[nodiscard]] double initial() const {
    return std::visit(
        [](const auto& p) -> double {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, GbmParams>) return p.sigma;
          else if constexpr (std::is_same_v<P, SabrParams>) return p.alpha;
          else if constexpr (std::is_same_v<P, HestonParams>) return p.v0;
          else if constexpr (std::is_same_v<P, SteinParams>) return p.sigma0;
          else return p.alpha;
        },
        model);
  }

  [[nodiscard]] double rho() const {
    return std::visit(
        [](const auto& p) -> double {
          if constexpr (std::is_same_v<std::decay_t<decltype(p)>, GbmParams>) return 0.0;
          else return p.rho;
        },
        model);
  }

  /// Instantaneous variance carried by the state.
  [[nodiscard]] double variance(double x) const {
    if (std::holds_alternative<HestonParams>(model)) return std::max(x, 0.0);
    return x * x;
  }

  [[nodiscard]] double advance(double x, double dw, double dt) const {
    return std::visit(
        [&](const auto& p) -> double {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, GbmParams>) {
            return x;
          } else if constexpr (std::is_same_v<P, SabrParams>) {
            return x + p.nu * x * dw;
          } else if constexpr (std::is_same_v<P, HestonParams>) {
            const double v = std::max(x, 0.0);
            return x + p.kappa * (p.theta - v) * dt + p.nu * std::sqrt(v) * dw;
          } else if constexpr (std::is_same_v<P, SteinParams>) {
            return x + p.kappa * (p.theta - x) * dt + p.nu * dw;
          } else {
            return x + p.kappa * (p.theta - x) * dt + p.nu * x * dw;
          }
        },
        model);
  }
};

inline void validate_spec(const SdeSpec& spec, const PathConfig& cfg) {
  if (cfg.n_paths < 1 || cfg.n_steps < 1) {
    throw Error(Module::simulate, Errc::InvalidArgument, "n_paths and n_steps must be >= 1");
  }
  if (!(spec.horizon > 0.0) || !(spec.spot0 > 0.0)) {
    throw Error(Module::simulate, Errc::InvalidArgument, "horizon and spot0 must be > 0");
  }
  std::visit(
      [](const auto& p) {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, GbmParams>) {
          if (!(p.sigma >= 0.0)) throw Error(Module::simulate, Errc::InvalidParams, "sigma must be >= 0");
        } else {
          try {
            validate(p);
          } catch (const Error& e) {
            throw Error(Module::simulate, e.code(), e.what());
          }
        }
      },
      spec.model);
}

inline double beta_of(const SdeModel& m) {
  if (auto* s = std::get_if<SabrParams>(&m)) return s->beta;
  if (auto* l = std::get_if<LambdaSabrParams>(&m)) return l->beta;
  return 1.0;
}

}  // namespace detail

/// Euler-Maruyama paths. log S is advanced with the local volatility sigma_t S^{beta-1}
/// (beta = 1 outside the SABR family), which keeps S positive.
inline std::vector<SimulatedPath> simulate_paths(const SdeSpec& spec, const PathConfig& cfg) {
  detail::validate_spec(spec, cfg);
  const detail::VolStepper stepper{spec.model};
  const double dt = spec.horizon / static_cast<double>(cfg.n_steps);
  const double sqdt = std::sqrt(dt);
  const double rho = stepper.rho();
  const double rho_c = std::sqrt(1.0 - rho * rho);
  const double beta = detail::beta_of(spec.model);
  const bool drifted = std::holds_alternative<HestonParams>(spec.model) ||
                       std::holds_alternative<SteinParams>(spec.model);
  const double mu = drifted ? spec.rate : 0.0;

  std::vector<SimulatedPath> paths(cfg.n_paths);
  parallel_for(cfg.n_paths, [&](std::size_t p) {
    NormalStream g(cfg.seed, p);
    auto& out = paths[p];
    out.spot.resize(cfg.n_steps + 1);
    out.vol.resize(cfg.n_steps + 1);
    double log_s = std::log(spec.spot0);
    double x = stepper.initial();
    out.spot[0] = spec.spot0;
    out.vol[0] = std::holds_alternative<HestonParams>(spec.model) ? std::sqrt(std::max(x, 0.0)) : x;
    for (std::size_t i = 1; i <= cfg.n_steps; ++i) {
      const double z1 = g(), z2 = g();
      const double dw1 = sqdt * z1;
      const double dw2 = sqdt * (rho * z1 + rho_c * z2);
      const double s = std::exp(log_s);
      const double local = std::sqrt(stepper.variance(x)) * (beta == 1.0 ? 1.0 : std::pow(s, beta - 1.0));
      log_s += (mu - 0.5 * local * local) * dt + local * dw1;
      x = stepper.advance(x, dw2, dt);
      out.spot[i] = std::exp(log_s);
      out.vol[i] = std::holds_alternative<HestonParams>(spec.model) ? std::sqrt(std::max(x, 0.0)) : x;
    }
  });
  return paths;
}

namespace detail {

// Trapezoidal (1/T) integral of sigma_t^2 along one path, for one or two resolutions.
// With `coarse_out` set, also integrates a path on half the steps driven by summed pairs of
// the same increments.
inline double integrated_variance(const SdeSpec& spec, std::size_t n_steps, std::uint64_t seed, std::size_t path,
                                  double* coarse_out) {
  const VolStepper stepper{spec.model};
  const double dt = spec.horizon / static_cast<double>(n_steps);
  const double sqdt = std::sqrt(dt);
  const double rho = stepper.rho();
  const double rho_c = std::sqrt(1.0 - rho * rho);
  NormalStream g(seed, path);
  double x = stepper.initial();
  double xc = x;
  double fine = 0.5 * stepper.variance(x);
  double coarse = fine;
  double pending = 0.0;
  for (std::size_t i = 1; i <= n_steps; ++i) {
    const double z1 = g(), z2 = g();
    const double dw2 = sqdt * (rho * z1 + rho_c * z2);
    x = stepper.advance(x, dw2, dt);
    fine += (i == n_steps ? 0.5 : 1.0) * stepper.variance(x);
    if (coarse_out) {
      if (i % 2 == 1) {
        pending = dw2;
      } else {
        xc = stepper.advance(xc, pending + dw2, 2.0 * dt);
        coarse += (i == n_steps ? 0.5 : 1.0) * stepper.variance(xc);
      }
    }
  }
  if (coarse_out) *coarse_out = coarse * 2.0 * dt / spec.horizon;
  return fine * dt / spec.horizon;
}

}  // namespace detail

/// Monte-Carlo estimate of (1/T) E[int_0^T sigma_t^2 dt], the fair variance strike.
inline McEstimate mc_variance_strike(const SdeSpec& spec, const PathConfig& cfg) {
  detail::validate_spec(spec, cfg);
  std::vector<double> samples(cfg.n_paths);
  parallel_for(cfg.n_paths, [&](std::size_t p) {
    samples[p] = detail::integrated_variance(spec, cfg.n_steps, cfg.seed, p, nullptr);
  });
  return detail::summarize(samples);
}

struct StepHalvingEstimate {
  McEstimate coarse;      ///< cfg.n_steps
  McEstimate fine;        ///< 2 cfg.n_steps, same Brownian increments
  McEstimate difference;  ///< fine - coarse, paired per path
};

/// Strike estimate at n and 2n steps on shared Brownian paths, isolating discretization bias.
inline StepHalvingEstimate mc_step_halving(const SdeSpec& spec, const PathConfig& cfg) {
  detail::validate_spec(spec, cfg);
  std::vector<double> fine(cfg.n_paths), coarse(cfg.n_paths), diff(cfg.n_paths);
  parallel_for(cfg.n_paths, [&](std::size_t p) {
    fine[p] = detail::integrated_variance(spec, 2 * cfg.n_steps, cfg.seed, p, &coarse[p]);
    diff[p] = fine[p] - coarse[p];
  });
  return {detail::summarize(coarse), detail::summarize(fine), detail::summarize(diff)};
}

struct GbmBarOptions {
  double spot0 = 100.0;
  /// Annualized volatility of the close-to-open gap. Zero means o_i = c_{i-1}.
  double overnight_vol = 0.0;
};

/// Daily OHLC bars from a zero-drift GBM sampled `intrabar_steps` times per trading day.
inline OhlcSeries simulate_gbm_bars(double sigma, std::size_t days, std::size_t intrabar_steps, std::uint64_t seed,
                                    const GbmBarOptions& opt = {}) {
  if (intrabar_steps < 1 || days < 1) {
    throw Error(Module::simulate, Errc::InvalidArgument, "days and intrabar_steps must be >= 1");
  }
  if (!(sigma >= 0.0) || !(opt.overnight_vol >= 0.0) || !(opt.spot0 > 0.0)) {
    throw Error(Module::simulate, Errc::InvalidParams, "volatilities must be >= 0 and spot0 > 0");
  }
  const double dt = 1.0 / (kTradingDaysPerYear * static_cast<double>(intrabar_steps));
  const double step_sd = sigma * std::sqrt(dt);
  const double step_drift = -0.5 * sigma * sigma * dt;
  const double gap_sd = opt.overnight_vol / std::sqrt(kTradingDaysPerYear);
  NormalStream g(seed, 0);
  auto dates = weekday_calendar(days);
  std::vector<OhlcBar> bars;
  bars.reserve(days);
  double log_s = std::log(opt.spot0);
  for (std::size_t d = 0; d < days; ++d) {
    if (gap_sd > 0.0 && d > 0) log_s += -0.5 * gap_sd * gap_sd + gap_sd * g();
    const double open = std::exp(log_s);
    double hi = log_s, lo = log_s;
    for (std::size_t i = 0; i < intrabar_steps; ++i) {
      log_s += step_drift + step_sd * g();
      hi = std::max(hi, log_s);
      lo = std::min(lo, log_s);
    }
    const double close = std::exp(log_s);
    // exp is monotone, but keep the bar invariant exact under rounding.
    bars.push_back({dates[d], open, std::max({std::exp(hi), open, close}), std::min({std::exp(lo), open, close}),
                    close});
  }
  return OhlcSeries(std::move(bars), "gbm");
}

}  // namespace volkit

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "volkit/error.hpp"
#include "volkit/marketdata.hpp"

namespace volkit {

/// Realized variance is quoted in "points": 100 x annualized variance.
inline constexpr double kVariancePoints = 100.0;

// ---------------------------------------------------------------------------
// Model parameters. rho and beta only affect simulation; no closed-form strike reads them.
// ---------------------------------------------------------------------------

struct SabrParams {
  double alpha = 0.2;  ///< initial volatility
  double nu = 0.0;     ///< vol of vol
  double rho = 0.0;
  double beta = 1.0;
};

struct HestonParams {
  double v0 = 0.04;     ///< initial variance
  double kappa = 1.0;   ///< variance mean reversion speed
  double theta = 0.04;  ///< long-term variance
  double nu = 0.0;
  double rho = 0.0;
};

struct SteinParams {
  double sigma0 = 0.2;  ///< initial volatility
  double kappa = 1.0;
  double theta = 0.2;   ///< long-term volatility
  double nu = 0.0;
  double rho = 0.0;
};

struct LambdaSabrParams {
  double alpha = 0.2;  ///< initial volatility
  double kappa = 1.0;
  double theta = 0.2;
  double nu = 0.0;
  double rho = 0.0;
  double beta = 1.0;
};

namespace detail {

inline void require_maturity(double T) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw Error(Module::varswap, Errc::InvalidArgument, "maturity must be > 0");
  }
}

inline void require_correlation(double rho, Module m) {
  if (!(rho >= -1.0 && rho <= 1.0)) throw Error(m, Errc::InvalidParams, "rho must lie in [-1, 1]");
}

// (1 - e^{-x}) / x, second-order Taylor below 1e-6.
inline double one_minus_exp_over(double x) {
  if (std::abs(x) < 1e-6) return 1.0 - x / 2.0 + x * x / 6.0;
  return -std::expm1(-x) / x;
}

// (e^{x} - 1) / x, second-order Taylor below 1e-6.
inline double expm1_over(double x) {
  if (std::abs(x) < 1e-6) return 1.0 + x / 2.0 + x * x / 6.0;
  return std::expm1(x) / x;
}

}  // namespace detail

inline void validate(const SabrParams& p) {
  if (!(p.alpha > 0.0) || !(p.nu >= 0.0) || !(p.beta >= 0.0 && p.beta <= 1.0)) {
    throw Error(Module::varswap, Errc::InvalidParams, "SABR requires alpha > 0, nu >= 0, beta in [0,1]");
  }
  detail::require_correlation(p.rho, Module::varswap);
}

inline void validate(const HestonParams& p) {
  if (!(p.v0 > 0.0) || !(p.kappa > 0.0) || !(p.theta > 0.0) || !(p.nu >= 0.0)) {
    throw Error(Module::varswap, Errc::InvalidParams, "Heston requires v0, kappa, theta > 0 and nu >= 0");
  }
  detail::require_correlation(p.rho, Module::varswap);
}

inline void validate(const SteinParams& p) {
  if (!(p.sigma0 > 0.0) || !(p.kappa > 0.0) || !(p.theta > 0.0) || !(p.nu >= 0.0)) {
    throw Error(Module::varswap, Errc::InvalidParams, "Stein requires sigma0, kappa, theta > 0 and nu >= 0");
  }
  detail::require_correlation(p.rho, Module::varswap);
}

inline void validate(const LambdaSabrParams& p) {
  if (!(p.alpha > 0.0) || !(p.kappa > 0.0) || !(p.theta > 0.0) || !(p.nu >= 0.0) ||
      !(p.beta >= 0.0 && p.beta <= 1.0)) {
    throw Error(Module::varswap, Errc::InvalidParams,
                "lambda-SABR requires alpha, kappa, theta > 0, nu >= 0, beta in [0,1]");
  }
  detail::require_correlation(p.rho, Module::varswap);
}

// ---------------------------------------------------------------------------
// Closed-form fair strikes (natural variance units)
// ---------------------------------------------------------------------------

/// alpha^2 (e^{nu^2 T} - 1) / (nu^2 T); equals alpha^2 at nu = 0.
inline double strike_sabr(const SabrParams& p, double T) {
  validate(p);
  detail::require_maturity(T);
  return p.alpha * p.alpha * detail::expm1_over(p.nu * p.nu * T);
}

/// theta + (v0 - theta) (1 - e^{-kappa T}) / (kappa T).
inline double strike_heston(const HestonParams& p, double T) {
  validate(p);
  detail::require_maturity(T);
  return p.theta + (p.v0 - p.theta) * detail::one_minus_exp_over(p.kappa * T);
}

/// Time average of E[sigma_t^2] for an Ornstein-Uhlenbeck volatility.
inline double strike_stein(const SteinParams& p, double T) {
  validate(p);
  detail::require_maturity(T);
  const double gap = p.sigma0 - p.theta;
  const double stationary = p.nu * p.nu / (2.0 * p.kappa);
  return p.theta * p.theta + stationary +
         2.0 * p.theta * gap * detail::one_minus_exp_over(p.kappa * T) +
         (gap * gap - stationary) * detail::one_minus_exp_over(2.0 * p.kappa * T);
}

/// The published five-term lambda-SABR strike, evaluated term by term as printed (including
/// kappa + nu/2 in the first term). Not validated against a derivation; compare with
/// mc_variance_strike before relying on it.
inline double strike_lambda_sabr(const LambdaSabrParams& p, double T) {
  validate(p);
  detail::require_maturity(T);
  const double a = p.alpha, k = p.kappa, th = p.theta, nu = p.nu;
  const double damp = 2.0 * k - nu * nu;
  if (std::abs(damp) <= 1e-12 * std::max(2.0 * k, nu * nu)) {
    throw Error(Module::varswap, Errc::SingularParameters, "2 kappa == nu^2");
  }
  const double kh = k + nu * nu / 2.0;
  const double t1 = std::pow(k * th / (k + nu / 2.0), 2);
  const double t2 = a * a / (damp * T) * (-std::expm1(-damp * T));
  const double t3 = k * k * th * th / (2.0 * kh * kh * kh * T) * (-std::expm1(-2.0 * kh * T));
  const double t4 = 2.0 * a * th / (k * kh * T) * (-std::expm1(-k * T));
  const double t5 = 2.0 * a * k * th / (kh * (2.0 * k + nu * nu / 2.0) * T) *
                    (-std::expm1(-(2.0 * k + nu * nu / 2.0) * T));
  return t1 + t2 + t3 + t4 + t5;
}

/// Vol of vol that reproduces an observed strike under SABR: solves
/// strike_sabr({alpha, nu}, T) = kvar for nu >= 0.
inline double implied_volvol(double kvar, double alpha, double T) {
  detail::require_maturity(T);
  if (!(alpha > 0.0)) throw Error(Module::varswap, Errc::InvalidParams, "alpha must be > 0");
  const double target = kvar / (alpha * alpha);
  if (target < 1.0 - 1e-12) {
    throw Error(Module::varswap, Errc::NoRoot, "strike below alpha^2 has no nonnegative vol of vol");
  }
  if (target <= 1.0) return 0.0;
  // Solve (e^x - 1)/x = target in x = nu^2 T; the left side is increasing in x.
  auto f = [target](double x) { return detail::expm1_over(x) - target; };
  double hi = 1.0;
  while (f(hi) < 0.0) hi *= 2.0;
  double lo = 0.0;
  std::uintmax_t iters = 200;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-14 * std::max(1.0, std::abs(b)); };
  auto [x0, x1] = boost::math::tools::toms748_solve(f, lo, hi, f(lo), f(hi), tol, iters);
  const double x = 0.5 * (x0 + x1);
  return std::sqrt(x / T);
}

// ---------------------------------------------------------------------------
// Black pricing on forward-normalized units
// ---------------------------------------------------------------------------

enum class OptionSide { put, call };

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Undiscounted Black premium.
inline double black_scholes_price(double forward, double strike, double vol, double T, OptionSide side) {
  if (!(forward > 0.0) || !(strike > 0.0) || !(vol >= 0.0) || !(T >= 0.0)) {
    throw Error(Module::varswap, Errc::InvalidArgument, "forward, strike > 0 and vol, T >= 0 required");
  }
  const double sd = vol * std::sqrt(T);
  if (sd == 0.0) {
    return side == OptionSide::call ? std::max(forward - strike, 0.0) : std::max(strike - forward, 0.0);
  }
  const double d1 = std::log(forward / strike) / sd + 0.5 * sd;
  const double d2 = d1 - sd;
  if (side == OptionSide::call) return forward * normal_cdf(d1) - strike * normal_cdf(d2);
  return strike * normal_cdf(-d2) - forward * normal_cdf(-d1);
}

/// Black implied vol of an undiscounted premium, by bracketed root search.
inline double black_implied_vol(double forward, double strike, double T, double price, OptionSide side) {
  const double intrinsic =
      side == OptionSide::call ? std::max(forward - strike, 0.0) : std::max(strike - forward, 0.0);
  const double upper = side == OptionSide::call ? forward : strike;
  if (!(price >= intrinsic) || !(price < upper)) {
    throw Error(Module::varswap, Errc::NoRoot, "premium outside no-arbitrage bounds");
  }
  if (price == intrinsic) return 0.0;
  auto f = [&](double v) { return black_scholes_price(forward, strike, v, T, side) - price; };
  double hi = 1.0;
  while (f(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e4) throw Error(Module::varswap, Errc::NoRoot, "implied vol not bracketed");
  }
  std::uintmax_t iters = 200;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-15 * std::max(1.0, std::abs(b)); };
  auto [v0, v1] = boost::math::tools::toms748_solve(f, 0.0, hi, f(0.0), f(hi), tol, iters);
  return 0.5 * (v0 + v1);
}

// ---------------------------------------------------------------------------
// Option chains and replication
// ---------------------------------------------------------------------------

/// One out-of-the-money quote. `strike` is a fraction of the forward (1.0 = at the money);
/// `price` is the undiscounted premium divided by the forward.
struct OptionQuote {
  double strike = 1.0;
  OptionSide side = OptionSide::put;
  double price = 0.0;
  std::optional<double> implied_vol;
};

class OptionChain {
 public:
  OptionChain(double forward, double rate, double maturity, std::vector<OptionQuote> puts,
              std::vector<OptionQuote> calls)
      : forward_(forward), rate_(rate), maturity_(maturity), puts_(std::move(puts)), calls_(std::move(calls)) {
    if (!(forward_ > 0.0) || !(maturity_ > 0.0) || !std::isfinite(rate_)) {
      throw Error(Module::varswap, Errc::InvalidArgument, "forward and maturity must be > 0");
    }
    if (puts_.empty() && calls_.empty()) throw Error(Module::varswap, Errc::EmptyChain, "no quotes");
    check_side(puts_, OptionSide::put);
    check_side(calls_, OptionSide::call);
  }

  /// Builds a chain whose premiums come from a flat-or-smiled vol function of strike.
  template <typename VolFn>
  static OptionChain from_vols(double forward, double rate, double maturity, std::span<const double> put_strikes,
                               std::span<const double> call_strikes, VolFn&& vol_of) {
    std::vector<OptionQuote> puts, calls;
    for (double k : put_strikes) {
      const double v = vol_of(k);
      puts.push_back({k, OptionSide::put, black_scholes_price(1.0, k, v, maturity, OptionSide::put), v});
    }
    for (double k : call_strikes) {
      const double v = vol_of(k);
      calls.push_back({k, OptionSide::call, black_scholes_price(1.0, k, v, maturity, OptionSide::call), v});
    }
    return OptionChain(forward, rate, maturity, std::move(puts), std::move(calls));
  }

  [[nodiscard]] double forward() const noexcept { return forward_; }
  [[nodiscard]] double rate() const noexcept { return rate_; }
  [[nodiscard]] double maturity() const noexcept { return maturity_; }
  [[nodiscard]] double spot() const noexcept { return forward_ * std::exp(-rate_ * maturity_); }
  [[nodiscard]] std::span<const OptionQuote> puts() const noexcept { return puts_; }
  [[nodiscard]] std::span<const OptionQuote> calls() const noexcept { return calls_; }

 private:
  static void check_side(const std::vector<OptionQuote>& q, OptionSide side) {
    for (std::size_t i = 0; i < q.size(); ++i) {
      if (q[i].side != side) throw Error(Module::varswap, Errc::InvalidArgument, "quote on wrong side");
      if (!(q[i].strike > 0.0) || !(q[i].price >= 0.0)) {
        throw Error(Module::varswap, Errc::InvalidArgument, "strike must be > 0 and price >= 0");
      }
      if (side == OptionSide::put && q[i].strike > 1.0) {
        throw Error(Module::varswap, Errc::InvalidArgument, "puts must be out of the money (k <= 1)");
      }
      if (side == OptionSide::call && q[i].strike < 1.0) {
        throw Error(Module::varswap, Errc::InvalidArgument, "calls must be out of the money (k >= 1)");
      }
      if (i > 0 && !(q[i].strike > q[i - 1].strike)) {
        throw Error(Module::varswap, Errc::UnsortedStrikes, "strikes must be strictly increasing");
      }
    }
  }

  double forward_;
  double rate_;
  double maturity_;
  std::vector<OptionQuote> puts_;
  std::vector<OptionQuote> calls_;
};

struct Corridor {
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
};

struct ReplicationOptions {
  std::optional<Corridor> corridor;
  /// 1 = rectangle rule on the quoted strikes. m > 1 interpolates implied vol linearly
  /// between quotes (flat beyond the outermost ones), reprices on m midpoints per quoted
  /// interval and integrates those.
  std::size_t refinement = 1;
};

namespace detail {

inline bool in_corridor(double k, const std::optional<Corridor>& c) {
  return !c || (k >= c->lower && k <= c->upper);
}

inline double quote_vol(const OptionQuote& q, double T) {
  if (q.implied_vol) return *q.implied_vol;
  return black_implied_vol(1.0, q.strike, T, q.price, q.side);
}

}  // namespace detail

/// Fair variance strike (natural units) from out-of-the-money quotes:
/// (2/T) [sum_puts P(k_i)/k_i^2 (k_i - k_{i-1}) + sum_calls C(k_i)/k_i^2 (k_i - k_{i-1})],
/// prices normalized by the forward so discount factors cancel. The lowest quote on each side
/// only anchors the first interval.
inline double replication_strike(const OptionChain& chain, const ReplicationOptions& opt = {}) {
  const double T = chain.maturity();
  if (opt.corridor && !(opt.corridor->lower < opt.corridor->upper)) {
    throw Error(Module::varswap, Errc::InvalidArgument, "corridor lower bound must be below upper");
  }
  if (opt.refinement == 0) throw Error(Module::varswap, Errc::InvalidArgument, "refinement must be >= 1");

  if (opt.refinement == 1) {
    double sum = 0.0;
    for (auto side : {chain.puts(), chain.calls()}) {
      for (std::size_t i = 1; i < side.size(); ++i) {
        const double k = side[i].strike;
        if (!detail::in_corridor(k, opt.corridor)) continue;
        sum += side[i].price / (k * k) * (k - side[i - 1].strike);
      }
    }
    return 2.0 / T * sum;
  }

  // Merge both sides into one strike -> vol node list; ATM quotes on both sides are averaged.
  std::vector<std::pair<double, double>> nodes;
  for (auto side : {chain.puts(), chain.calls()}) {
    for (const auto& q : side) {
      const double v = detail::quote_vol(q, T);
      if (!nodes.empty() && nodes.back().first == q.strike) {
        nodes.back().second = 0.5 * (nodes.back().second + v);
      } else {
        nodes.emplace_back(q.strike, v);
      }
    }
  }
  auto vol_at = [&](double k) {
    if (k <= nodes.front().first) return nodes.front().second;
    if (k >= nodes.back().first) return nodes.back().second;
    auto it = std::upper_bound(nodes.begin(), nodes.end(), k,
                               [](double x, const auto& n) { return x < n.first; });
    const auto& [k1, v1] = *it;
    const auto& [k0, v0] = *(it - 1);
    return v0 + (v1 - v0) * (k - k0) / (k1 - k0);
  };
  double sum = 0.0;
  const auto m = static_cast<double>(opt.refinement);
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double k0 = nodes[i - 1].first, k1 = nodes[i].first;
    const double h = (k1 - k0) / m;
    for (std::size_t j = 0; j < opt.refinement; ++j) {
      const double k = k0 + (static_cast<double>(j) + 0.5) * h;
      if (!detail::in_corridor(k, opt.corridor)) continue;
      const auto side = k < 1.0 ? OptionSide::put : OptionSide::call;
      sum += black_scholes_price(1.0, k, vol_at(k), T, side) / (k * k) * h;
    }
  }
  return 2.0 / T * sum;
}

/// Fills the [lower, upper] strike grid at `step` spacing, holding implied vol flat at the
/// outermost quoted strike on each side.
inline OptionChain extend_flat_wings(const OptionChain& chain, double lower = 0.5, double upper = 1.5,
                                     double step = 0.05) {
  if (!(step > 0.0) || !(lower < 1.0) || !(upper > 1.0)) {
    throw Error(Module::varswap, Errc::InvalidArgument, "need lower < 1 < upper and step > 0");
  }
  const double T = chain.maturity();
  std::vector<OptionQuote> puts(chain.puts().begin(), chain.puts().end());
  std::vector<OptionQuote> calls(chain.calls().begin(), chain.calls().end());
  if (!puts.empty()) {
    const double v = detail::quote_vol(puts.front(), T);
    std::vector<OptionQuote> wing;
    for (int i = 0;; ++i) {
      const double k = lower + step * i;
      if (k >= puts.front().strike - 1e-12) break;
      wing.push_back({k, OptionSide::put, black_scholes_price(1.0, k, v, T, OptionSide::put), v});
    }
    puts.insert(puts.begin(), wing.begin(), wing.end());
  }
  if (!calls.empty()) {
    const double v = detail::quote_vol(calls.back(), T);
    const int n = static_cast<int>(std::floor((upper - 1.0) / step + 1e-9));
    for (int i = 0; i <= n; ++i) {
      const double k = 1.0 + step * i;
      if (k <= calls.back().strike + 1e-12) continue;
      calls.push_back({k, OptionSide::call, black_scholes_price(1.0, k, v, T, OptionSide::call), v});
    }
  }
  return OptionChain(chain.forward(), chain.rate(), T, std::move(puts), std::move(calls));
}

/// Reads `#forward=`, `#rate=`, `#maturity_years=` metadata and
/// `side,strike_pct,price` or `side,strike_pct,implied_vol` rows (strike as fraction of forward).
inline OptionChain parse_option_chain_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<double> forward, rate, maturity;
  std::optional<bool> vol_quoted;
  std::vector<OptionQuote> puts, calls;
  std::vector<std::size_t> put_lines, call_lines;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      const auto eq = text.find('=');
      if (eq == std::string_view::npos) continue;
      const auto key = text.substr(1, eq - 1);
      const auto value = detail::parse_double(text.substr(eq + 1));
      if (!value) throw Error(Module::varswap, Errc::InvalidArgument, "bad metadata value", line_no);
      if (key == "forward") forward = value;
      else if (key == "rate") rate = value;
      else if (key == "maturity_years") maturity = value;
      continue;
    }
    if (!vol_quoted) {
      if (text == "side,strike_pct,price") vol_quoted = false;
      else if (text == "side,strike_pct,implied_vol") vol_quoted = true;
      else throw Error(Module::varswap, Errc::InvalidArgument, "unexpected chain header", line_no);
      continue;
    }
    const auto f = detail::split(text);
    if (f.size() != 3) throw Error(Module::varswap, Errc::InvalidArgument, "wrong field count", line_no);
    const auto k = detail::parse_double(f[1]);
    const auto x = detail::parse_double(f[2]);
    if (!k || !x) throw Error(Module::varswap, Errc::InvalidArgument, "bad number", line_no);
    OptionQuote q;
    q.strike = *k;
    if (f[0] == "put") q.side = OptionSide::put;
    else if (f[0] == "call") q.side = OptionSide::call;
    else throw Error(Module::varswap, Errc::InvalidArgument, "side must be put or call", line_no);
    if (*vol_quoted) q.implied_vol = *x;
    else q.price = *x;
    (q.side == OptionSide::put ? puts : calls).push_back(q);
  }
  if (!forward || !maturity) {
    throw Error(Module::varswap, Errc::InvalidArgument, "chain needs #forward= and #maturity_years=");
  }
  const double T = *maturity;
  if (vol_quoted && *vol_quoted) {
    for (auto* side : {&puts, &calls}) {
      for (auto& q : *side) q.price = black_scholes_price(1.0, q.strike, *q.implied_vol, T, q.side);
    }
  }
  if (puts.empty() && calls.empty()) throw Error(Module::varswap, Errc::EmptyChain, "no quotes");
  return OptionChain(*forward, rate.value_or(0.0), T, std::move(puts), std::move(calls));
}

inline OptionChain load_option_chain_csv(const std::filesystem::path& path) {
  auto in = detail::open_input(path, Module::varswap);
  return parse_option_chain_csv(in);
}

// ---------------------------------------------------------------------------
// Realized variance and mark-to-market
// ---------------------------------------------------------------------------

/// Sum of squared daily log returns of `closes`.
inline double sum_squared_log_returns(std::span<const double> closes) {
  double s = 0.0;
  for (std::size_t i = 1; i < closes.size(); ++i) {
    if (!(closes[i] > 0.0) || !(closes[i - 1] > 0.0)) {
      throw Error(Module::varswap, Errc::InvalidArgument, "prices must be strictly positive");
    }
    const double r = std::log(closes[i] / closes[i - 1]);
    s += r * r;
  }
  return s;
}

/// 100 x 252/N x sum ln(P_t/P_{t-1})^2 over the N = closes.size() - 1 returns, in variance points.
inline double realized_variance(std::span<const double> closes) {
  if (closes.size() < 2) throw Error(Module::varswap, Errc::TooShort, "need at least one return");
  const double n = static_cast<double>(closes.size() - 1);
  return kVariancePoints * kTradingDaysPerYear / n * sum_squared_log_returns(closes);
}

struct VarSwapTerms {
  double strike = 0.04;   ///< K_var, natural units
  double maturity = 1.0;  ///< T in years
  double notional = 1.0;
};

inline void validate(const VarSwapTerms& c) {
  if (!(c.strike > 0.0) || !(c.maturity > 0.0) || !std::isfinite(c.notional)) {
    throw Error(Module::varswap, Errc::InvalidArgument, "contract needs strike > 0 and maturity > 0");
  }
}

/// Long-position value at time t in units of K_var (times notional):
/// [ (t/T) RV_t + ((T - t)/T) imp - K ] / K, where RV_t annualizes the squared log returns of
/// `closes_to_date` (inception close first) over the elapsed t years, so (t/T) RV_t = sum / T.
inline double mark_to_market(const VarSwapTerms& contract, std::span<const double> closes_to_date, double imp,
                             double t) {
  validate(contract);
  const double T = contract.maturity;
  if (!(t >= 0.0) || !(t <= T)) throw Error(Module::varswap, Errc::TimeOutOfRange, "t must lie in [0, T]");
  const double accrued = closes_to_date.size() >= 2 ? sum_squared_log_returns(closes_to_date) / T : 0.0;
  const double value = accrued + (T - t) / T * imp - contract.strike;
  return contract.notional * value / contract.strike;
}

/// Same, with imp_t^T from the SABR strike at the remaining maturity using inception (alpha, nu).
inline double mark_to_market(const VarSwapTerms& contract, std::span<const double> closes_to_date,
                             const SabrParams& inception, double t) {
  validate(contract);
  if (!(t >= 0.0) || !(t <= contract.maturity)) {
    throw Error(Module::varswap, Errc::TimeOutOfRange, "t must lie in [0, T]");
  }
  const double remaining = contract.maturity - t;
  const double imp = remaining > 0.0 ? strike_sabr(inception, remaining) : inception.alpha * inception.alpha;
  return mark_to_market(contract, closes_to_date, imp, t);
}

struct MtmPath {
  std::vector<TradingDate> dates;
  std::vector<double> mtm;       ///< scaled by notional / K_var
  std::vector<double> realized;  ///< annualized realized variance to date (0 at inception)
  std::vector<double> implied;   ///< imp_t^T
};

/// Daily MtM over a contract's life. closes[0] is the inception close; t_i = T i / (closes.size() - 1).
inline MtmPath mtm_path(const VarSwapTerms& contract, std::span<const double> closes, const SabrParams& inception,
                        std::span<const TradingDate> dates = {}) {
  validate(contract);
  if (closes.size() < 2) throw Error(Module::varswap, Errc::TooShort, "need closes through maturity");
  const std::size_t n = closes.size() - 1;
  MtmPath out;
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = i == n ? contract.maturity : contract.maturity * static_cast<double>(i) / static_cast<double>(n);
    const auto sub = closes.first(i + 1);
    const double remaining = contract.maturity - t;
    out.implied.push_back(remaining > 0.0 ? strike_sabr(inception, remaining) : inception.alpha * inception.alpha);
    out.realized.push_back(i == 0 ? 0.0 : sum_squared_log_returns(sub) / t);
    out.mtm.push_back(mark_to_market(contract, sub, out.implied.back(), t));
    if (!dates.empty()) out.dates.push_back(dates[i]);
  }
  return out;
}

}  // namespace volkit

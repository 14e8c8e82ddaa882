#pragma once

#include <cmath>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "volkit/error.hpp"
#include "volkit/marketdata.hpp"
#include "volkit/varswap.hpp"

namespace volkit {

inline constexpr std::size_t kTradingDaysPerMonth = 21;

struct StrategyConfig {
  std::size_t maturity_months = 1;  ///< 1, 3, 6 or 12
  double notional = 1.0;
  bool strikes_in_points = false;   ///< strike file quotes K_var x 100
};

/// Strike and SABR parameters quoted on an entry date.
struct StrikeQuote {
  TradingDate date;
  double kvar = 0.0;
  double alpha = 0.0;
  double nu = 0.0;
};

struct ContractRecord {
  TradingDate entry;
  TradingDate expiry;
  double strike = 0.0;
  SabrParams sabr;
  double realized = 0.0;  ///< annualized realized variance over the life
  double payoff = 0.0;    ///< notional (realized - K) / K
};

struct PnlReport {
  std::vector<TradingDate> dates;
  std::vector<double> cum_mtm;
  std::vector<double> ret_mtm;  ///< ret_mtm[i] = cum_mtm[i + 1] - cum_mtm[i]
  std::optional<double> sharpe; ///< absent when ret_mtm has zero dispersion
  std::vector<ContractRecord> contracts;
  std::size_t max_live = 0;
};

/// mean / sample standard deviation, not annualized. Dispersion below 1e-12 (in notional units) counts as none.
inline double sharpe(std::span<const double> ret) {
  if (ret.size() < 2) throw Error(Module::backtest, Errc::DegenerateSeries, "need at least two increments");
  const double n = static_cast<double>(ret.size());
  double mean = 0.0, scale = 0.0;
  for (double v : ret) {
    mean += v;
    scale = std::max(scale, std::abs(v));
  }
  mean /= n;
  double ss = 0.0;
  for (double v : ret) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 1e-12 * std::max(scale, 1.0))) throw Error(Module::backtest, Errc::DegenerateSeries, "increments have zero dispersion");
  return mean / sd;
}

/// Long variance swaps entered every 21 trading days and held to maturity (21 x months days).
/// The portfolio value on day d is the sum of settled payoffs plus the MtM of live contracts.
/// A contract expiring on day d settles at that close, and a replacement may be entered the
/// same day. The report runs from the first entry to the last expiry.
inline PnlReport run_long_strategy(const OhlcSeries& closes, std::span<const StrikeQuote> strikes,
                                   const StrategyConfig& config) {
  const std::size_t m = config.maturity_months;
  if (m != 1 && m != 3 && m != 6 && m != 12) {
    throw Error(Module::backtest, Errc::InvalidArgument, "maturity must be 1, 3, 6 or 12 months");
  }
  const std::size_t life = kTradingDaysPerMonth * m;
  const double T = static_cast<double>(life) / kTradingDaysPerYear;
  const std::size_t n = closes.size();
  if (n < life + 1) {
    throw Error(Module::backtest, Errc::CalendarGap,
                "closes span " + std::to_string(n) + " days; a " + std::to_string(m) + "m contract needs " +
                    std::to_string(life + 1));
  }
  std::unordered_map<std::string, const StrikeQuote*> by_date;
  for (const auto& q : strikes) by_date[q.date.label] = &q;

  const auto px = closes.closes();
  struct Live {
    std::size_t entry;
    VarSwapTerms terms;
    SabrParams sabr;
    double sum_sq = 0.0;
  };
  std::vector<std::size_t> entries;
  for (std::size_t e = 0; e + life <= n - 1; e += kTradingDaysPerMonth) entries.push_back(e);
  const std::size_t last_day = entries.back() + life;

  PnlReport out;
  std::vector<Live> live;
  std::size_t next_entry = 0;
  double settled = 0.0;
  for (std::size_t d = 0; d <= last_day; ++d) {
    for (auto& c : live) {
      const double r = std::log(px[d] / px[d - 1]);
      c.sum_sq += r * r;
    }
    // Settle contracts reaching maturity today.
    for (auto it = live.begin(); it != live.end();) {
      if (d - it->entry == life) {
        ContractRecord rec;
        rec.entry = closes[it->entry].date;
        rec.expiry = closes[d].date;
        rec.strike = it->terms.strike;
        rec.sabr = it->sabr;
        rec.realized = it->sum_sq / T;
        rec.payoff = mark_to_market(it->terms, std::span<const double>(px).subspan(it->entry, life + 1), 0.0, T);
        settled += rec.payoff;
        out.contracts.push_back(rec);
        it = live.erase(it);
      } else {
        ++it;
      }
    }
    if (next_entry < entries.size() && entries[next_entry] == d) {
      const auto found = by_date.find(closes[d].date.label);
      if (found == by_date.end()) {
        throw Error(Module::backtest, Errc::MissingStrikeData, "no strike quote for " + closes[d].date.label);
      }
      const auto& q = *found->second;
      Live c{d, {config.strikes_in_points ? q.kvar / kVariancePoints : q.kvar, T, config.notional}, {q.alpha, q.nu}};
      validate(c.terms);
      validate(c.sabr);
      live.push_back(c);
      ++next_entry;
    }
    out.max_live = std::max(out.max_live, live.size());

    double value = settled;
    for (const auto& c : live) {
      const double t = T * static_cast<double>(d - c.entry) / static_cast<double>(life);
      const double remaining = T - t;
      const double imp = remaining > 0.0 ? strike_sabr(c.sabr, remaining) : c.sabr.alpha * c.sabr.alpha;
      value += c.terms.notional * (c.sum_sq / T + remaining / T * imp - c.terms.strike) / c.terms.strike;
    }
    out.dates.push_back(closes[d].date);
    out.cum_mtm.push_back(value);
  }
  for (std::size_t i = 1; i < out.cum_mtm.size(); ++i) out.ret_mtm.push_back(out.cum_mtm[i] - out.cum_mtm[i - 1]);
  try {
    out.sharpe = sharpe(out.ret_mtm);
  } catch (const Error&) {
    out.sharpe.reset();
  }
  return out;
}

/// Quotes for every bar with K_var equal to the SABR strike for the configured maturity.
inline std::vector<StrikeQuote> synthetic_strikes(const OhlcSeries& closes, const StrategyConfig& config,
                                                  double alpha, double nu) {
  const double T = static_cast<double>(kTradingDaysPerMonth * config.maturity_months) / kTradingDaysPerYear;
  const SabrParams p{alpha, nu};
  const double k = strike_sabr(p, T) * (config.strikes_in_points ? kVariancePoints : 1.0);
  std::vector<StrikeQuote> out;
  for (const auto& b : closes.bars()) out.push_back({b.date, k, alpha, nu});
  return out;
}

/// CSV with header date,kvar,alpha,nu.
inline std::vector<StrikeQuote> parse_strike_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<StrikeQuote> out;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = detail::split(body);
    if (!header) {
      if (fields.size() != 4 || fields[0] != "date" || fields[1] != "kvar" || fields[2] != "alpha" ||
          fields[3] != "nu") {
        throw Error(Module::backtest, Errc::MalformedRow, "expected header date,kvar,alpha,nu", line_no);
      }
      header = true;
      continue;
    }
    if (fields.size() != 4) throw Error(Module::backtest, Errc::MalformedRow, "expected 4 fields", line_no);
    const auto k = detail::parse_double(fields[1]), a = detail::parse_double(fields[2]),
               v = detail::parse_double(fields[3]);
    if (fields[0].empty() || !k || !a || !v) throw Error(Module::backtest, Errc::MalformedRow, "unparseable field", line_no);
    out.push_back({{static_cast<std::int64_t>(out.size()), std::string(fields[0])}, *k, *a, *v});
  }
  if (!header) throw Error(Module::backtest, Errc::MissingStrikeData, "strike file is empty");
  return out;
}

inline std::vector<StrikeQuote> load_strike_csv(const std::filesystem::path& path) {
  auto in = detail::open_input(path, Module::backtest);
  return parse_strike_csv(in);
}

}  // namespace volkit

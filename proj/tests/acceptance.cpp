// Acceptance harness: one PASS/FAIL line per criterion, exit status 0 only if all pass.
// Usage: volkit_acceptance [--cli <path to volkit binary>]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "volkit/volkit.hpp"

using namespace volkit;

namespace {

std::string trimmed(std::string s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == ';')) s.pop_back();
  return s;
}

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<std::string> info;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

OhlcSeries bars(const std::vector<std::array<double, 4>>& ohlc) {
  const auto dates = weekday_calendar(ohlc.size());
  std::vector<OhlcBar> out;
  for (std::size_t i = 0; i < ohlc.size(); ++i) out.push_back({dates[i], ohlc[i][0], ohlc[i][1], ohlc[i][2], ohlc[i][3]});
  return OhlcSeries(std::move(out));
}

std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  NormalStream g(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = sd * g();
  return x;
}

// --- 1 -------------------------------------------------------------------------------------
Outcome estimator_exactness() {
  const double park = std::sqrt(1.0 / (4.0 * std::log(2.0))) * std::log(1.02);
  const double cc = std::log(1.01);
  const double rs = std::sqrt(std::log(1.01) * std::log(1.01) + std::log(0.99) * std::log(0.99));
  const double e1 = std::abs(estimate_vol(bars({{101, 102, 100, 101}}), {VolMethod::parkinson}) - park);
  const double e2 = std::abs(estimate_vol(bars({{100, 100, 100, 100}, {101, 101, 101, 101}}), {VolMethod::close_to_close}) - cc);
  const double e3 = std::abs(estimate_vol(bars({{100, 101, 99, 100}}), {VolMethod::rogers_satchell}) - rs);
  Outcome o;
  o.pass = e1 <= 1e-12 && e2 <= 1e-12 && e3 <= 1e-12;
  o.detail = fmt("abs error vs closed-form expressions: parkinson %.1e, close-to-close %.1e, rogers-satchell %.1e", e1,
                 e2, e3);
  o.info.push_back(fmt("quoted decimals vs exact expression values: parkinson 0.0118935 vs %.9f (diff %.1e), "
                       "close-to-close 0.00995033 vs %.9f (diff %.1e), rogers-satchell 0.0140721 vs %.9f (diff %.1e)",
                       park, std::abs(park - 0.0118935), cc, std::abs(cc - 0.00995033), rs, std::abs(rs - 0.0140721)));
  o.info.push_back(fmt("0.0140721 equals 2 ln^2(1.01) = %.7f, i.e. |ln 0.99| taken as ln 1.01",
                       std::sqrt(2.0 * std::log(1.01) * std::log(1.01))));
  return o;
}

// --- 2 -------------------------------------------------------------------------------------
Outcome efficiency_reproduction() {
  const EfficiencyConfig cfg{.sigma = 0.2, .horizon_days = 252, .trials = 2000, .intrabar_steps = 390, .seed = 42};
  const std::vector<EstimatorKind> kinds{{VolMethod::close_to_close}, {VolMethod::parkinson}, {VolMethod::garman_klass}};
  const auto t = efficiency_table(kinds, cfg);
  Outcome o;
  o.pass = t[0].efficiency == 1.0 && t[1].efficiency >= 4.3 && t[1].efficiency <= 5.2 && t[2].efficiency >= 6.0 &&
           t[2].efficiency <= 7.4;
  o.detail = fmt("close-to-close %.6f, parkinson %.3f (want [4.3, 5.2]), garman-klass %.3f (want [6.0, 7.4])",
                 t[0].efficiency, t[1].efficiency, t[2].efficiency);
  o.info.push_back(fmt("mean daily vol: true %.6f, close-to-close %.6f, parkinson %.6f, garman-klass %.6f",
                       0.2 / std::sqrt(252.0), t[0].reference_mean, t[1].estimator_mean, t[2].estimator_mean));
  return o;
}

// --- 3 -------------------------------------------------------------------------------------
Outcome garch_recovery() {
  GarchParams truth;
  truth.alpha0 = 1e-6;
  truth.alpha1 = 0.1;
  truth.beta1 = 0.85;
  truth.sigma0 = std::sqrt(truth.alpha0 / (1.0 - truth.alpha1 - truth.beta1));
  int within = 0, converged = 0, ll_ok = 0;
  double worst_gap = std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto sim = simulate(GarchModelKind::Garch11, truth, 5000, 1000 + seed);
    const auto f = fit(GarchModelKind::Garch11, sim.returns);
    within += std::abs(f.params.alpha1 - truth.alpha1) <= 0.05 && std::abs(f.params.beta1 - truth.beta1) <= 0.05;
    if (!f.converged) continue;
    ++converged;
    // True dynamics under the same mu and sigma0 conditioning the fit maximizes over.
    GarchParams at_truth = f.params;
    at_truth.alpha0 = truth.alpha0;
    at_truth.alpha1 = truth.alpha1;
    at_truth.beta1 = truth.beta1;
    const double gap = f.log_likelihood - log_likelihood(GarchModelKind::Garch11, at_truth, sim.returns);
    worst_gap = std::min(worst_gap, gap);
    ll_ok += gap >= 0.0;
  }
  Outcome o;
  o.pass = within >= 18 && ll_ok == converged;
  o.detail = fmt("alpha1, beta1 within 0.05 in %d/20 seeds (want >= 18); loglik >= true-parameter loglik in %d/%d "
                 "converged runs (smallest gap %.4f)",
                 within, ll_ok, converged, worst_gap);
  return o;
}

// --- 4 -------------------------------------------------------------------------------------
Outcome fat_tails() {
  GarchParams arch;
  arch.alpha0 = 2e-5;
  arch.alpha1 = 0.3;
  arch.sigma0 = std::sqrt(arch.alpha0 / (1.0 - arch.alpha1));
  GarchParams garch;
  garch.alpha0 = 1e-6;
  garch.alpha1 = 0.1;
  garch.beta1 = 0.85;
  garch.sigma0 = std::sqrt(garch.alpha0 / 0.05);
  int ok = 0;
  double min_arch = 1e9, min_garch = 1e9;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const double ka = moments(simulate(GarchModelKind::Arch, arch, 100000, 2000 + seed).returns.values()).kurtosis;
    const double kg = moments(simulate(GarchModelKind::Garch11, garch, 100000, 3000 + seed).returns.values()).kurtosis;
    min_arch = std::min(min_arch, ka);
    min_garch = std::min(min_garch, kg);
    ok += (ka > 3.0) + (kg > 3.0);
  }
  Outcome o;
  o.pass = ok == 40;
  o.detail = fmt("kurtosis > 3 in %d/40 runs; min ARCH(2e-5, 0.3) %.3f, min GARCH(1e-6, 0.1, 0.85) %.3f", ok, min_arch,
                 min_garch);
  return o;
}

// --- 5 -------------------------------------------------------------------------------------
Outcome ljung_box_calibration() {
  int rejections = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) rejections += ljung_box(gaussian(500, 5000 + seed), 10).reject;
  const std::vector<double> rho{0.3};
  const auto hand = ljung_box_statistic(100, rho);
  const double rate = rejections / 1000.0;
  Outcome o;
  o.pass = rate >= 0.03 && rate <= 0.07 && std::abs(hand.q - 9.2727) <= 1e-4 && std::abs(hand.p_value - 0.00232) <= 1e-4;
  o.detail = fmt("null rejection rate %.3f at N=500, h=10 (want [0.03, 0.07]); hand fixture Q=%.6f p=%.6f", rate, hand.q,
                 hand.p_value);
  return o;
}

// --- 6 -------------------------------------------------------------------------------------
Outcome spurious_ma_lag() {
  GarchParams p;
  p.alpha0 = 1e-6;
  p.alpha1 = 0.1;
  p.beta1 = 0.85;
  p.sigma0 = std::sqrt(2e-5);
  const std::size_t windows[] = {21, 63};
  int neg21 = 0, neg63 = 0;
  double mean21 = 0.0, mean63 = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto sim = simulate(GarchModelKind::Garch11, p, 5000, 6000 + seed);
    const auto scan = ma_window_lag_scan(sim.returns.values(), windows);
    neg21 += scan[0].rho_at_window < 0.0;
    neg63 += scan[1].rho_at_window < 0.0;
    mean21 += scan[0].rho_at_window / 50.0;
    mean63 += scan[1].rho_at_window / 50.0;
  }
  Outcome o;
  o.pass = neg21 >= 40 && neg63 >= 40;
  o.detail = fmt("rho_w < 0 in %d/50 (w=21) and %d/50 (w=63) seeds, want >= 40 each; mean rho_21 %.4f, rho_63 %.4f",
                 neg21, neg63, mean21, mean63);
  o.info.push_back("iid returns also show rho_w near -1/w, so the sign alone does not separate GARCH data from noise");
  return o;
}

// --- 7 -------------------------------------------------------------------------------------
Outcome closed_form_vs_mc() {
  const PathConfig cfg{.n_paths = 100000, .n_steps = 500, .seed = 20240};
  struct Case {
    std::string name;
    SdeModel model;
    double closed;
    bool asserted;
  };
  const SabrParams sabr{0.2, 0.5};
  const HestonParams heston{0.04, 2.0, 0.09, 0.3, -0.5};
  const SteinParams stein{0.25, 3.0, 0.2, 0.1, 0.0};
  const LambdaSabrParams lsabr{0.2, 2.0, 0.2, 0.3, 0.0};
  const std::vector<Case> cases{{"sabr", sabr, strike_sabr(sabr, 1.0), true},
                                {"heston", heston, strike_heston(heston, 1.0), true},
                                {"stein", stein, strike_stein(stein, 1.0), true},
                                {"lambda-sabr", lsabr, strike_lambda_sabr(lsabr, 1.0), false}};
  Outcome o;
  o.pass = true;
  std::ostringstream detail;
  for (const auto& c : cases) {
    const auto h = mc_step_halving(SdeSpec{c.model, 1.0}, cfg);
    const double z = (h.coarse.mean - c.closed) / h.coarse.std_error;
    const double shift = (h.fine.mean - h.coarse.mean) / h.coarse.std_error;
    const bool halving_ok = std::abs(shift) <= 2.0;
    o.pass = o.pass && halving_ok && (!c.asserted || std::abs(z) <= 3.0);
    o.info.push_back(fmt("%s: closed form %.7f, MC %.7f +- %.7f (%+.2f stderr%s), 1000-step MC %.7f (shift %+.2f "
                         "stderr, paired diff %.2e +- %.1e)",
                         c.name.c_str(), c.closed, h.coarse.mean, h.coarse.std_error, z,
                         c.asserted ? "" : ", reported only", h.fine.mean, shift, h.difference.mean,
                         h.difference.std_error));
    if (!c.asserted) {
      o.info.push_back(fmt("lambda-sabr relative gap closed form vs MC: %+.2f%%", 100.0 * (c.closed - h.coarse.mean) / h.coarse.mean));
    }
    detail << c.name << (c.asserted ? fmt(" %+.2f", z) : std::string(" n/a")) << fmt(" / %+.2f; ", shift);
  }
  o.detail = "z-score vs closed form / step-halving shift, in stderr: " + trimmed(detail.str());
  return o;
}

// --- 8 -------------------------------------------------------------------------------------
Outcome analytic_limits() {
  double worst = 0.0;
  std::ostringstream d;
  for (double T : {0.25, 1.0, 5.0}) {
    for (double nu : {0.0, 1e-9, 1e-6}) {
      worst = std::max(worst, std::abs(strike_sabr({0.2, nu}, T) - 0.04));
    }
    worst = std::max(worst, std::abs(strike_heston({0.09, 1.7, 0.09, 0.4, -0.3}, T) - 0.09));
    worst = std::max(worst, std::abs(strike_stein({0.2, 2.5, 0.2, 0.0, 0.1}, T) - 0.04));
  }
  Outcome o;
  o.pass = worst <= 1e-12;
  o.detail = fmt("largest deviation from the limit over T in {0.25, 1, 5}: %.1e", worst);
  return o;
}

// --- 9 -------------------------------------------------------------------------------------
Outcome replication_accuracy() {
  std::vector<double> puts, calls;
  for (int i = 10; i <= 20; ++i) puts.push_back(0.05 * i);
  for (int i = 20; i <= 30; ++i) calls.push_back(0.05 * i);
  const auto chain = OptionChain::from_vols(100.0, 0.0, 1.0 / 12.0, puts, calls, [](double) { return 0.2; });
  const double literal = replication_strike(chain);
  const double refined = replication_strike(chain, {.corridor = std::nullopt, .refinement = 8});
  const double corridor = replication_strike(chain, {.corridor = Corridor{0.9, 1.1}, .refinement = 8});
  const double rel = std::abs(refined - 0.04) / 0.04;
  Outcome o;
  o.pass = rel <= 0.05 && corridor < refined;
  o.detail = fmt("refined (8 sub-intervals) %.6f, %.2f%% from 0.04; corridor [0.9, 1.1] %.6f < %.6f", refined,
                 100.0 * rel, corridor, refined);
  o.info.push_back(fmt("rectangle rule on the quoted 5%% grid only: %.6f (%.2f%% from 0.04)", literal,
                       100.0 * std::abs(literal - 0.04) / 0.04));
  return o;
}

// --- 10 ------------------------------------------------------------------------------------
Outcome mtm_boundaries() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst0 = 0.0, worstT = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const SabrParams inc{0.1 + 0.4 * u(rng), 1.5 * u(rng)};
    const std::size_t days = 5 + static_cast<std::size_t>(250 * u(rng));
    const double T = static_cast<double>(days) / 252.0;
    const VarSwapTerms c{strike_sabr(inc, T), T, 0.5 + u(rng)};
    const auto path = simulate_gbm_bars(inc.alpha, days, 1, 9000 + trial).closes();
    worst0 = std::max(worst0, std::abs(mark_to_market(c, std::span(path).first(1), inc, 0.0)));
    double ss = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i) ss += std::pow(std::log(path[i] / path[i - 1]), 2);
    const double realized = 252.0 / static_cast<double>(days) * ss;
    const double expected = c.notional * (realized - c.strike) / c.strike;
    worstT = std::max(worstT, std::abs(mark_to_market(c, path, inc, T) - expected));
  }
  double worst_tel = 0.0;
  for (std::size_t m : {1, 3, 6, 12}) {
    const auto s = simulate_gbm_bars(0.2, 800, 1, 9500 + m);
    const StrategyConfig cfg{m, 1.0, false};
    const auto pnl = run_long_strategy(s, synthetic_strikes(s, cfg, 0.2, 0.6), cfg);
    double sum = 0.0;
    for (double r : pnl.ret_mtm) sum += r;
    worst_tel = std::max(worst_tel, std::abs(sum - (pnl.cum_mtm.back() - pnl.cum_mtm.front())));
  }
  Outcome o;
  o.pass = worst0 <= 1e-12 && worstT <= 1e-12 && worst_tel <= 1e-12;
  o.detail = fmt("200 random contracts: max |MtM_0| %.1e, max |MtM_T - (RV - K)/K| %.1e; backtest telescoping residual "
                 "%.1e over 1m/3m/6m/12m",
                 worst0, worstT, worst_tel);
  return o;
}

// --- 11 ------------------------------------------------------------------------------------
std::vector<double> ar1(std::size_t n, double a, std::uint64_t seed, double sd = 1.0) {
  auto y = gaussian(n, seed, sd);
  for (std::size_t t = 1; t < n; ++t) y[t] += a * y[t - 1];
  return y;
}

std::vector<double> random_walk(std::size_t n, std::uint64_t seed) { return ar1(n, 1.0, seed); }

Outcome stationarity_machinery() {
  int rw = 0, ar = 0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    rw += adf_test(random_walk(1000, 11000 + s)).reject;
    ar += adf_test(ar1(1000, 0.5, 12000 + s)).reject;
  }
  const auto hl = half_life(0.5);
  int coint = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto common = random_walk(1000, 13000 + s);
    auto y1 = ar1(1000, 0.5, 14000 + s, 0.5), y2 = ar1(1000, 0.5, 15000 + s, 0.5);
    for (std::size_t i = 0; i < 1000; ++i) {
      y1[i] += common[i];
      y2[i] += common[i];
    }
    const auto dates = weekday_calendar(1000);
    const auto scan = stationarity_scan({{"a", dates, y1}, {"b", dates, y2}}, true);
    coint += !scan.singles[0].adf->reject && !scan.singles[1].adf->reject && scan.pairwise[0][1].adf->reject;
  }
  Outcome o;
  o.pass = rw <= 35 && ar >= 475 && hl.days == 1.0 && coint >= 180;
  o.detail = fmt("ADF size %.1f%% (want <= 7%%), power %.1f%% (want >= 95%%), half_life(0.5) = %.17g, cointegrated "
                 "pairs flagged in %d/200 (want >= 180)",
                 rw / 5.0, ar / 5.0, hl.days, coint);
  return o;
}

// --- 12 ------------------------------------------------------------------------------------
std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const std::string& cli) {
  Outcome o;
  if (cli.empty()) {
    o.detail = "no --cli path given";
    return o;
  }
  const std::string data = VOLKIT_DATA_DIR;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"simulate", "simulate --model heston --params " + data + "/heston.json --seed 99 --paths 20000 --steps 200 --step-halving"},
      {"efficiency", "efficiency --method all --seed 7 --trials 300 --steps 120 --days 126"},
      {"simulate-sabr", "simulate --model sabr --params " + data + "/sabr.json --seed 3 --paths 5000 --steps 100"}};
  o.pass = true;
  std::ostringstream d;
  for (const auto& [name, args] : commands) {
    std::vector<std::string> outputs;
    for (const char* threads : {"1", "4", "4"}) {
      const std::string file = "acceptance_" + name + "_" + std::to_string(outputs.size()) + ".json";
      const std::string cmd = "VOLKIT_THREADS=" + std::string(threads) + " '" + cli + "' " + args + " > " + file;
      if (std::system(cmd.c_str()) != 0) {
        o.pass = false;
        d << name << " failed to run; ";
        break;
      }
      outputs.push_back(slurp(file));
    }
    if (outputs.size() != 3) continue;
    const bool same = !outputs[0].empty() && outputs[0] == outputs[1] && outputs[1] == outputs[2];
    o.pass = o.pass && same;
    d << name << (same ? " identical" : " DIFFERS") << " (" << outputs[0].size() << " bytes); ";
  }
  o.detail = "serial vs 4 threads vs rerun: " + trimmed(d.str());
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--cli") cli = argv[i + 1];
  }
  struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "estimator exactness", 1.0, estimator_exactness},
      {2, "efficiency reproduction", 120.0, efficiency_reproduction},
      {3, "garch recovery", 300.0, garch_recovery},
      {4, "fat tails", 0.0, fat_tails},
      {5, "ljung-box calibration", 0.0, ljung_box_calibration},
      {6, "spurious moving-average lag", 0.0, spurious_ma_lag},
      {7, "closed form vs monte carlo", 600.0, closed_form_vs_mc},
      {8, "analytic limits", 0.0, analytic_limits},
      {9, "replication accuracy", 0.0, replication_accuracy},
      {10, "mark-to-market boundaries", 0.0, mtm_boundaries},
      {11, "stationarity machinery", 0.0, stationarity_machinery},
      {12, "determinism", 0.0, [&] { return determinism(cli); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0.0 && secs >= c.budget_seconds) {
      o.pass = false;
      o.detail += fmt(" [over the %.0f s budget]", c.budget_seconds);
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.detail
              << fmt(" (%.1f s)", secs) << std::endl;
    for (const auto& line : o.info) std::cout << "     info: " << line << std::endl;
  }
  std::cout << (failed == 0 ? "ALL PASS" : fmt("%d criteria FAILED", failed)) << std::endl;
  return failed == 0 ? 0 : 1;
}

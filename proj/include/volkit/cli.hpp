#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "volkit/backtest.hpp"
#include "volkit/diagnostics.hpp"
#include "volkit/error.hpp"
#include "volkit/estimators.hpp"
#include "volkit/garch.hpp"
#include "volkit/marketdata.hpp"
#include "volkit/report.hpp"
#include "volkit/simulate.hpp"
#include "volkit/stationarity.hpp"
#include "volkit/varswap.hpp"

namespace volkit::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kDataError = 2 };

namespace detail {

[[noreturn]] inline void usage(const std::string& msg) { throw Error(Module::cli, Errc::UsageError, msg); }

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto part : volkit::detail::split(s)) {
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

inline std::vector<std::size_t> parse_size_list(const std::string& s, const std::string& flag) {
  std::vector<std::size_t> out;
  for (const auto& part : split_list(s)) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc{} || p != part.data() + part.size() || v == 0) usage(flag + " expects positive integers, got '" + part + "'");
    out.push_back(v);
  }
  if (out.empty()) usage(flag + " is empty");
  return out;
}

inline EstimatorKind parse_kind(const std::string& name) {
  auto k = parse_estimator(name);
  if (!k) usage("unknown method '" + name + "'; valid kinds: " + std::string(kEstimatorNames));
  if (k->method == VolMethod::moving_average && k->window < 2) usage("moving-average window must be >= 2");
  return *k;
}

inline GarchModelKind parse_model(const std::string& name) {
  auto k = parse_garch_kind(name);
  if (!k) usage("unknown model '" + name + "'; valid models: arch, garch, gjr, egarch, ewma");
  return *k;
}

inline EgarchForm parse_egarch_form(const std::string& s) {
  if (s == "printed") return EgarchForm::printed;
  if (s == "nelson") return EgarchForm::nelson;
  usage("--egarch-form must be printed or nelson");
}

struct EstimatorFlags {
  double yz_numerator = 10.34;
  std::string gk_coefficient = "standard";

  void attach(CLI::App* app) {
    app->add_option("--yz-numerator", yz_numerator, "Numerator a of the Yang-Zhang weight a/(1.34+(N+1)/(N-1))")
        ->capture_default_str();
    app->add_option("--gk-coefficient", gk_coefficient,
                    "Weight on ln(c/o)^2 in Garman-Klass: standard (2ln2-1) or printed (2ln2)")
        ->capture_default_str();
  }
  [[nodiscard]] EstimatorOptions options() const {
    EstimatorOptions o;
    o.yang_zhang_numerator = yz_numerator;
    if (gk_coefficient == "printed") o.open_close_coefficient = 2.0 * std::numbers::ln2;
    else if (gk_coefficient != "standard") usage("--gk-coefficient must be standard or printed");
    return o;
  }
};

inline Json read_json_file(const std::string& path) {
  auto in = volkit::detail::open_input(path, Module::cli);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(Module::cli, Errc::InvalidArgument, path + ": " + e.what());
  }
}

inline double get_number(const Json& j, const char* key, std::optional<double> fallback = std::nullopt) {
  if (j.contains(key)) {
    if (!j[key].is_number()) throw Error(Module::cli, Errc::InvalidArgument, std::string("'") + key + "' must be a number");
    return j[key].get<double>();
  }
  if (fallback) return *fallback;
  throw Error(Module::cli, Errc::InvalidArgument, std::string("params file lacks '") + key + "'");
}

inline double maturity_of(const Json& j) {
  if (j.contains("T")) return get_number(j, "T");
  return get_number(j, "maturity");
}

inline SdeModel sde_model_of(const std::string& model, const Json& j) {
  if (model == "gbm") return GbmParams{get_number(j, "sigma")};
  if (model == "sabr") return SabrParams{get_number(j, "alpha"), get_number(j, "nu"), get_number(j, "rho", 0.0), get_number(j, "beta", 1.0)};
  if (model == "heston") {
    return HestonParams{get_number(j, "v0"), get_number(j, "kappa"), get_number(j, "theta"), get_number(j, "nu"),
                        get_number(j, "rho", 0.0)};
  }
  if (model == "stein") {
    return SteinParams{get_number(j, "sigma0"), get_number(j, "kappa"), get_number(j, "theta"), get_number(j, "nu"),
                       get_number(j, "rho", 0.0)};
  }
  if (model == "lambda-sabr") {
    return LambdaSabrParams{get_number(j, "alpha"), get_number(j, "kappa"), get_number(j, "theta"),
                            get_number(j, "nu"), get_number(j, "rho", 0.0), get_number(j, "beta", 1.0)};
  }
  usage("unknown model '" + model + "'; valid models: gbm, sabr, heston, stein, lambda-sabr");
}

inline Json params_json(const SdeModel& m) {
  return std::visit(
      [](const auto& p) -> Json {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, GbmParams>) return {{"sigma", p.sigma}};
        else if constexpr (std::is_same_v<P, SabrParams>) return {{"alpha", p.alpha}, {"nu", p.nu}, {"rho", p.rho}, {"beta", p.beta}};
        else if constexpr (std::is_same_v<P, HestonParams>)
          return {{"v0", p.v0}, {"kappa", p.kappa}, {"theta", p.theta}, {"nu", p.nu}, {"rho", p.rho}};
        else if constexpr (std::is_same_v<P, SteinParams>)
          return {{"sigma0", p.sigma0}, {"kappa", p.kappa}, {"theta", p.theta}, {"nu", p.nu}, {"rho", p.rho}};
        else
          return {{"alpha", p.alpha}, {"kappa", p.kappa}, {"theta", p.theta}, {"nu", p.nu}, {"rho", p.rho}, {"beta", p.beta}};
      },
      m);
}

inline double closed_form_strike(const SdeModel& m, double T) {
  return std::visit(
      [T](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, GbmParams>) return p.sigma * p.sigma;
        else if constexpr (std::is_same_v<P, SabrParams>) return strike_sabr(p, T);
        else if constexpr (std::is_same_v<P, HestonParams>) return strike_heston(p, T);
        else if constexpr (std::is_same_v<P, SteinParams>) return strike_stein(p, T);
        else return strike_lambda_sabr(p, T);
      },
      m);
}

inline Json garch_params_json(GarchModelKind kind, const GarchParams& p) {
  Json j{{"mu", p.mu}, {"sigma0", p.sigma0}};
  switch (kind) {
    case GarchModelKind::Arch:
      j["alpha0"] = p.alpha0;
      j["alpha1"] = p.alpha1;
      break;
    case GarchModelKind::Garch11:
      j["alpha0"] = p.alpha0;
      j["alpha1"] = p.alpha1;
      j["beta1"] = p.beta1;
      break;
    case GarchModelKind::GjrGarch:
    case GarchModelKind::EGarch:
      j["alpha0"] = p.alpha0;
      j["alpha1"] = p.alpha1;
      j["beta1"] = p.beta1;
      j["gamma1"] = p.gamma1;
      break;
    case GarchModelKind::Ewma:
      j["lambda"] = p.lambda;
      break;
  }
  return j;
}

inline std::string egarch_form_name(EgarchForm f) { return f == EgarchForm::printed ? "printed" : "nelson"; }

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Module::cli, Errc::InvalidArgument, "cannot write " + path);
  f << text;
}

inline std::string tidy_text(std::span<const TidyRow> rows, std::string_view x_name = "date") {
  std::ostringstream s;
  write_tidy_csv(s, rows, x_name);
  return s.str();
}

inline Json adf_json(const StationarityCell& c) {
  Json j = Json::object();
  if (c.adf) {
    j["statistic"] = c.adf->statistic;
    j["p_value"] = c.adf->p_value;
    j["lag_order"] = c.adf->lag_order;
    j["reject"] = c.adf->reject;
  }
  j["half_life"] = c.half_life ? Json(c.half_life->days) : Json(nullptr);
  if (!c.error.empty()) j["error"] = c.error;
  return j;
}

inline LabeledSeries load_level_series(const std::string& path) {
  auto in = volkit::detail::open_input(path, Module::cli);
  std::string first;
  while (std::getline(in, first) && volkit::detail::trim(first).empty()) {}
  in.clear();
  in.seekg(0);
  const std::string stem = std::filesystem::path(path).stem().string();
  if (first.starts_with("#scale=") || volkit::detail::trim(first) == "date,value,series") {
    const auto v = parse_vol_csv(in);
    return {stem, {v.dates().begin(), v.dates().end()}, {v.values().begin(), v.values().end()}};
  }
  const auto s = parse_ohlc_csv(in, stem);
  return {stem, s.dates(), s.closes()};
}

}  // namespace detail

/// Runs one subcommand. Reports go to `out`; diagnostics to `err`.
/// Returns 0 on success, 1 on usage errors, 2 on data or numeric errors.
inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace detail;
  CLI::App app{"volkit: historical volatility estimation and variance swap analytics"};
  app.name("volkit");
  app.require_subcommand(1, 1);
  std::string format = "json";

  // estimate
  auto* est = app.add_subcommand("estimate", "Volatility of an OHLC series with one estimator");
  std::string est_method, est_input;
  std::optional<std::size_t> est_window;
  bool est_annualize = false;
  double days_per_year = kTradingDaysPerYear;
  EstimatorFlags est_flags;
  est->add_option("--method", est_method, std::string("Estimator: ") + std::string(kEstimatorNames))->required();
  est->add_option("--input", est_input, "OHLC or close-only CSV")->required();
  est->add_option("--window", est_window, "Rolling window in bars; omit for a full-sample estimate");
  est->add_flag("--annualize", est_annualize, "Scale daily volatility by sqrt(days per year)");
  est->add_option("--days-per-year", days_per_year, "Annualization constant")->capture_default_str();
  est->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  est_flags.attach(est);

  // efficiency
  auto* eff = app.add_subcommand("efficiency", "Monte-Carlo efficiency versus close-to-close on driftless GBM bars");
  std::string eff_method;
  EfficiencyConfig eff_cfg;
  std::uint64_t eff_seed = 0;
  EstimatorFlags eff_flags;
  eff->add_option("--method", eff_method, "Estimator, or 'all' for the advanced OHLC estimators")->required();
  eff->add_option("--trials", eff_cfg.trials, "Simulated series")->capture_default_str();
  eff->add_option("--steps", eff_cfg.intrabar_steps, "Intrabar steps per day")->capture_default_str();
  eff->add_option("--seed", eff_seed, "Master seed")->required();
  eff->add_option("--days", eff_cfg.horizon_days, "Bars per series")->capture_default_str();
  eff->add_option("--sigma", eff_cfg.sigma, "Annualized GBM volatility")->capture_default_str();
  eff->add_option("--overnight-vol", eff_cfg.overnight_vol, "Annualized close-to-open gap volatility")->capture_default_str();
  eff_flags.attach(eff);

  // fit-garch
  auto* fg = app.add_subcommand("fit-garch", "Maximum-likelihood fit of an ARCH-family model to close-to-close returns");
  std::string fg_model, fg_input, fg_vol_csv, fg_form = "printed";
  std::size_t fg_step = 0, fg_start = 250;
  fg->add_option("--model", fg_model, "arch, garch, gjr, egarch or ewma")->required();
  fg->add_option("--input", fg_input, "OHLC or close-only CSV")->required();
  fg->add_option("--refit-step", fg_step, "Refit every n returns on an increasing window (0 = single fit)")->capture_default_str();
  fg->add_option("--refit-start", fg_start, "Returns in the first refit window (>= 50)")->capture_default_str();
  fg->add_option("--egarch-form", fg_form, "printed or nelson")->capture_default_str();
  fg->add_option("--vol-csv", fg_vol_csv, "Write the filtered volatility as date,value,series CSV");

  // diagnose
  auto* dg = app.add_subcommand("diagnose", "Residual diagnostics (moments, ACF, Ljung-Box, vol of vol) per estimator");
  std::string dg_input, dg_methods = "all", dg_lags = "10,15,20", dg_ma = "21,63", dg_acf_csv, dg_qq_csv, dg_vol_csv;
  std::size_t dg_window = 21;
  EstimatorFlags dg_flags;
  dg->add_option("--input", dg_input, "OHLC CSV")->required();
  dg->add_option("--methods", dg_methods, "'all' or a comma list of estimator and GARCH model names")->capture_default_str();
  dg->add_option("--lags", dg_lags, "Ljung-Box lags")->capture_default_str();
  dg->add_option("--window", dg_window, "Rolling window for the OHLC estimators")->capture_default_str();
  dg->add_option("--ma-windows", dg_ma, "Windows for the moving-average lag scan")->capture_default_str();
  dg->add_option("--acf-csv", dg_acf_csv, "Write ACF plot data (lag,value,series)");
  dg->add_option("--qq-csv", dg_qq_csv, "Write QQ plot data (quantile,value,series)");
  dg->add_option("--vol-csv", dg_vol_csv, "Write every volatility series (date,value,series)");
  dg_flags.attach(dg);

  // price-varswap
  auto* pv = app.add_subcommand("price-varswap", "Fair variance-swap strike from a model or an option chain");
  std::string pv_model, pv_params, pv_chain, pv_corridor;
  std::size_t pv_refine = 1;
  bool pv_wings = false, pv_points = false;
  pv->add_option("--model", pv_model, "sabr, heston, stein, lambda-sabr or replication")->required();
  pv->add_option("--params", pv_params, "JSON model parameters incl. maturity (T); for sabr, kvar+alpha without nu solves for nu");
  pv->add_option("--chain", pv_chain, "Option chain CSV (replication)");
  pv->add_option("--corridor", pv_corridor, "Strike band lower,upper as fractions of the forward (replication)");
  pv->add_option("--refine", pv_refine, "Sub-intervals per quoted strike interval; 1 = quoted grid only")->capture_default_str();
  pv->add_flag("--extend-wings", pv_wings, "Extend quotes to 50%-150% in 5% steps at flat vol (replication)");
  pv->add_flag("--points", pv_points, "Report strikes in variance points (x100)");

  // simulate
  auto* sm = app.add_subcommand("simulate", "Monte-Carlo variance strike of a stochastic-volatility model");
  std::string sm_model, sm_params;
  PathConfig sm_cfg{100000, 500, 0};
  bool sm_halving = false;
  sm->add_option("--model", sm_model, "gbm, sabr, heston, stein or lambda-sabr")->required();
  sm->add_option("--params", sm_params, "JSON model parameters incl. maturity (T)")->required();
  sm->add_option("--paths", sm_cfg.n_paths, "Monte-Carlo paths")->capture_default_str();
  sm->add_option("--steps", sm_cfg.n_steps, "Euler steps")->capture_default_str();
  sm->add_option("--seed", sm_cfg.seed, "Master seed")->required();
  sm->add_flag("--step-halving", sm_halving, "Also report the estimate at 2x steps on shared increments");

  // stationarity
  auto* st = app.add_subcommand("stationarity", "ADF p-values and AR(1) half-lives for series and their spreads");
  std::string st_inputs, st_csv;
  bool st_pairwise = false, st_align = false;
  st->add_option("--inputs", st_inputs, "Comma list of close-only, OHLC or vol CSV files")->required();
  st->add_flag("--pairwise", st_pairwise, "Also test every unit-beta spread");
  st->add_flag("--align", st_align, "Keep only dates present in every input instead of failing on a mismatch");
  st->add_option("--csv", st_csv, "Write the results table as CSV");

  // backtest
  auto* bt = app.add_subcommand("backtest", "Rolling long variance-swap strategy");
  std::string bt_input, bt_strikes, bt_maturity, bt_csv;
  StrategyConfig bt_cfg;
  bt->add_option("--input", bt_input, "Close-only or OHLC CSV")->required();
  bt->add_option("--strikes", bt_strikes, "CSV date,kvar,alpha,nu of entry quotes")->required();
  bt->add_option("--maturity", bt_maturity, "1m, 3m, 6m or 12m")->required()->check(CLI::IsMember({"1m", "3m", "6m", "12m"}));
  bt->add_option("--notional", bt_cfg.notional, "Notional per contract")->capture_default_str();
  bt->add_flag("--points", bt_cfg.strikes_in_points, "Strike file quotes kvar in variance points (x100)");
  bt->add_option("--csv", bt_csv, "Write cumMtM and retMtM as date,value,series CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    Json report;
    std::string text;

    if (est->parsed()) {
      const auto series = load_ohlc_csv(est_input);
      const auto kind = parse_kind(est_method);
      const auto opt = est_flags.options();
      VolSeries vol;
      if (est_window) {
        vol = rolling_vol(series, kind, *est_window, opt);
      } else {
        const double v = estimate_vol(series, kind, opt);
        vol = VolSeries({series[series.size() - 1].date}, {v}, VolScale::daily);
      }
      if (est_annualize) vol = annualize(vol, days_per_year);
      if (format == "csv") {
        std::ostringstream s;
        write_vol_csv(s, vol, to_string(kind));
        text = s.str();
      } else {
        report["method"] = to_string(kind);
        report["window"] = est_window ? Json(*est_window)
                           : kind.method == VolMethod::moving_average ? Json(kind.window)
                                                                      : Json(nullptr);
        report["vol"] = vol.size() > 0 ? Json(vol[vol.size() - 1]) : Json(nullptr);
        report["scale"] = std::string(to_string(vol.scale()));
        report["n_bars"] = series.size();
        if (est_window) {
          Json arr = Json::array();
          for (std::size_t i = 0; i < vol.size(); ++i) arr.push_back({{"date", vol.dates()[i].label}, {"value", vol[i]}});
          report["series"] = arr;
        }
      }
    } else if (eff->parsed()) {
      eff_cfg.seed = eff_seed;
      std::vector<EstimatorKind> kinds;
      if (eff_method == "all") {
        kinds = {{VolMethod::parkinson}, {VolMethod::garman_klass}, {VolMethod::rogers_satchell}, {VolMethod::gkyz},
                 {VolMethod::yang_zhang}};
      } else {
        kinds.push_back(parse_kind(eff_method));
      }
      const auto rows = efficiency_table(kinds, eff_cfg, eff_flags.options());
      Json results = Json::array();
      for (const auto& r : rows) {
        results.push_back({{"method", to_string(r.kind)},
                           {"efficiency", r.efficiency},
                           {"estimator_variance", r.estimator_variance},
                           {"reference_variance", r.reference_variance},
                           {"estimator_mean", r.estimator_mean},
                           {"reference_mean", r.reference_mean}});
      }
      report["results"] = results;
      report["config"] = {{"trials", eff_cfg.trials}, {"steps", eff_cfg.intrabar_steps}, {"days", eff_cfg.horizon_days},
                          {"sigma", eff_cfg.sigma},   {"seed", eff_cfg.seed},            {"overnight_vol", eff_cfg.overnight_vol},
                          {"yz_numerator", eff_flags.yz_numerator}, {"gk_coefficient", eff_flags.gk_coefficient}};
      report["vol_scale"] = "daily";
    } else if (fg->parsed()) {
      const auto kind = parse_model(fg_model);
      GarchFitOptions opt;
      opt.egarch_form = parse_egarch_form(fg_form);
      const auto returns = log_returns(load_ohlc_csv(fg_input));
      report["model"] = std::string(to_string(kind));
      if (kind == GarchModelKind::EGarch) report["egarch_form"] = egarch_form_name(opt.egarch_form);
      report["n_returns"] = returns.size();
      VolSeries vol;
      if (fg_step > 0) {
        const auto rr = refit_increasing_window(kind, returns, fg_start, fg_step, opt);
        Json refits = Json::array();
        for (const auto& e : rr.entries) {
          Json r{{"date", e.date.label}, {"window", e.window}};
          if (e.params) {
            r["params"] = garch_params_json(kind, *e.params);
            r["last_vol"] = e.last_vol;
          } else {
            r["error"] = e.error;
          }
          refits.push_back(r);
        }
        report["refits"] = refits;
        report["errors"] = rr.errors;
        vol = rr.vol;
      } else {
        const auto f = fit(kind, returns, opt);
        report["params"] = garch_params_json(kind, f.params);
        report["loglik"] = f.log_likelihood;
        report["converged"] = f.converged;
        report["degenerate"] = f.degenerate;
        report["iterations"] = f.iterations;
        report["last_vol"] = f.vol[f.vol.size() - 1];
        vol = f.vol;
      }
      if (!fg_vol_csv.empty()) {
        std::ostringstream s;
        write_vol_csv(s, vol, std::string(to_string(kind)));
        write_file(fg_vol_csv, s.str());
        report["vol_csv"] = fg_vol_csv;
      }
    } else if (dg->parsed()) {
      const auto series = load_ohlc_csv(dg_input);
      const auto returns = log_returns(series);
      const auto lags = parse_size_list(dg_lags, "--lags");
      const auto ma_windows = parse_size_list(dg_ma, "--ma-windows");
      const auto opt = dg_flags.options();
      std::vector<std::string> methods =
          dg_methods == "all"
              ? std::vector<std::string>{"constant", "ma21", "ma63", "parkinson", "garman-klass", "rogers-satchell",
                                         "gkyz", "yang-zhang", "garch", "gjr", "egarch", "ewma"}
              : split_list(dg_methods);
      // Validate every name before doing any work.
      for (const auto& m : methods) {
        if (!parse_garch_kind(m)) parse_kind(m);
      }
      std::vector<TidyRow> acf_rows, qq_rows, vol_rows;
      Json table = Json::object();
      for (const auto& m : methods) {
        Json entry;
        try {
          VolSeries vol;
          std::size_t lag = 1;
          if (auto g = parse_garch_kind(m)) {
            vol = fit(*g, returns).vol;
            lag = 0;
          } else {
            const auto kind = parse_kind(m);
            const std::size_t w = kind.method == VolMethod::moving_average ? kind.window : dg_window;
            vol = rolling_vol(series, kind, kind.method == VolMethod::constant_vol ? 2 : w, opt);
            if (kind.method == VolMethod::constant_vol) lag = 0;
          }
          const auto res = residuals(returns, vol, m, lag);
          std::vector<double> sq(res.values.size());
          for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = res.values[i] * res.values[i];
          const auto mom = moments(res.values);
          entry["n"] = res.values.size();
          entry["skewness"] = mom.skewness;
          entry["kurtosis"] = mom.kurtosis;
          Json lb = Json::array(), lb_sq = Json::array();
          for (std::size_t h : lags) {
            const auto a = ljung_box(res.values, h);
            const auto b = ljung_box(sq, h);
            lb.push_back({{"lag", h}, {"q", a.q}, {"p_value", a.p_value}, {"reject", a.reject}});
            lb_sq.push_back({{"lag", h}, {"q", b.q}, {"p_value", b.p_value}, {"reject", b.reject}});
          }
          entry["ljung_box"] = lb;
          entry["ljung_box_squared"] = lb_sq;
          try {
            entry["vol_of_vol"] = vol_of_vol(vol);
          } catch (const Error& e) {
            entry["vol_of_vol"] = nullptr;
            entry["vol_of_vol_error"] = e.what();
          }
          const auto a1 = acf(res.values), a2 = acf(sq);
          for (std::size_t i = 1; i <= a1.max_lag(); ++i) acf_rows.push_back({std::to_string(i), a1.at(i), m + ":res"});
          for (std::size_t i = 1; i <= a2.max_lag(); ++i) acf_rows.push_back({std::to_string(i), a2.at(i), m + ":res2"});
          for (const auto& [q, v] : qq_data(res.values)) qq_rows.push_back({format_decimal(q), v, m});
          append_rows(vol_rows, vol.dates(), vol.values(), m);
        } catch (const Error& e) {
          entry = Json{{"error", e.what()}};
        }
        table[m] = entry;
      }
      report["methods"] = table;
      Json scan = Json::array();
      for (std::size_t w : ma_windows) {
        try {
          const std::size_t ws[] = {w};
          const auto r = ma_window_lag_scan(returns.values(), ws).front();
          scan.push_back({{"window", w}, {"rho_at_window", r.rho_at_window}, {"band", r.acf.band}});
        } catch (const Error& e) {
          scan.push_back({{"window", w}, {"error", e.what()}});
        }
      }
      report["ma_lag_scan"] = scan;
      report["n_returns"] = returns.size();
      report["significance"] = kSignificance;
      if (!dg_acf_csv.empty()) write_file(dg_acf_csv, tidy_text(acf_rows, "lag"));
      if (!dg_qq_csv.empty()) write_file(dg_qq_csv, tidy_text(qq_rows, "quantile"));
      if (!dg_vol_csv.empty()) write_file(dg_vol_csv, tidy_text(vol_rows));
    } else if (pv->parsed()) {
      const double scale = pv_points ? kVariancePoints : 1.0;
      report["model"] = pv_model;
      report["units"] = pv_points ? "points" : "variance";
      if (pv_model == "replication") {
        if (pv_chain.empty()) usage("--model replication needs --chain");
        auto chain = load_option_chain_csv(pv_chain);
        if (pv_wings) chain = extend_flat_wings(chain);
        ReplicationOptions opt;
        opt.refinement = pv_refine;
        if (!pv_corridor.empty()) {
          const auto parts = split_list(pv_corridor);
          const auto lo = parts.size() == 2 ? volkit::detail::parse_double(parts[0]) : std::nullopt;
          const auto hi = parts.size() == 2 ? volkit::detail::parse_double(parts[1]) : std::nullopt;
          if (!lo || !hi) usage("--corridor expects lower,upper");
          opt.corridor = Corridor{*lo, *hi};
          report["corridor"] = {*lo, *hi};
        } else {
          report["corridor"] = nullptr;
        }
        report["strike"] = replication_strike(chain, opt) * scale;
        report["maturity"] = chain.maturity();
        report["forward"] = chain.forward();
        report["n_puts"] = chain.puts().size();
        report["n_calls"] = chain.calls().size();
        report["refinement"] = pv_refine;
      } else {
        if (pv_params.empty()) usage("--model " + pv_model + " needs --params");
        if (pv_model == "gbm") usage("unknown model 'gbm'; valid models: sabr, heston, stein, lambda-sabr, replication");
        const auto j = read_json_file(pv_params);
        const double T = maturity_of(j);
        report["maturity"] = T;
        if (pv_model == "sabr" && j.contains("kvar") && !j.contains("nu")) {
          const double kvar = get_number(j, "kvar") / scale;
          const double alpha = get_number(j, "alpha");
          report["params"] = {{"kvar", kvar * scale}, {"alpha", alpha}};
          report["nu"] = implied_volvol(kvar, alpha, T);
        } else {
          const auto m = sde_model_of(pv_model, j);
          report["params"] = params_json(m);
          report["strike"] = closed_form_strike(m, T) * scale;
        }
      }
    } else if (sm->parsed()) {
      const auto j = read_json_file(sm_params);
      SdeSpec spec{sde_model_of(sm_model, j), maturity_of(j)};
      report["model"] = sm_model;
      report["params"] = params_json(spec.model);
      report["maturity"] = spec.horizon;
      report["n_paths"] = sm_cfg.n_paths;
      report["n_steps"] = sm_cfg.n_steps;
      report["seed"] = sm_cfg.seed;
      auto mc_json = [](const McEstimate& e) { return Json{{"mean", e.mean}, {"std_error", e.std_error}}; };
      McEstimate est_mc;
      if (sm_halving) {
        const auto h = mc_step_halving(spec, sm_cfg);
        est_mc = h.coarse;
        report["step_halving"] = {{"fine", mc_json(h.fine)}, {"difference", mc_json(h.difference)},
                                  {"fine_steps", 2 * sm_cfg.n_steps}};
      } else {
        est_mc = mc_variance_strike(spec, sm_cfg);
      }
      report["mean"] = est_mc.mean;
      report["std_error"] = est_mc.std_error;
      try {
        const double cf = closed_form_strike(spec.model, spec.horizon);
        report["closed_form"] = cf;
        report["discrepancy"] = est_mc.mean - cf;
        report["discrepancy_stderr"] = est_mc.std_error > 0.0 ? Json((est_mc.mean - cf) / est_mc.std_error) : Json(nullptr);
      } catch (const Error& e) {
        report["closed_form"] = nullptr;
        report["closed_form_error"] = e.what();
      }
    } else if (st->parsed()) {
      std::vector<LabeledSeries> series;
      for (const auto& p : split_list(st_inputs)) series.push_back(load_level_series(p));
      if (st_align) series = intersect_dates(series);
      report["n_observations"] = series.empty() ? 0 : series.front().values.size();
      const auto scan = stationarity_scan(series, st_pairwise);
      Json singles = Json::object();
      for (std::size_t i = 0; i < scan.labels.size(); ++i) singles[scan.labels[i]] = adf_json(scan.singles[i]);
      report["labels"] = scan.labels;
      report["singles"] = singles;
      std::ostringstream csv;
      csv << "series_a,series_b,statistic,p_value,half_life\n";
      auto csv_row = [&](const std::string& a, const std::string& b, const StationarityCell& c) {
        csv << a << ',' << b << ',' << (c.adf ? format_decimal(c.adf->statistic) : "NA") << ','
            << (c.adf ? format_decimal(c.adf->p_value) : "NA") << ','
            << (c.half_life ? format_decimal(c.half_life->days) : "NA") << '\n';
      };
      for (std::size_t i = 0; i < scan.labels.size(); ++i) csv_row(scan.labels[i], "", scan.singles[i]);
      if (st_pairwise) {
        Json p_matrix = Json::array(), hl_matrix = Json::array(), corr = Json::array();
        for (std::size_t i = 0; i < scan.labels.size(); ++i) {
          Json prow = Json::array(), hrow = Json::array(), crow = Json::array();
          for (std::size_t j = 0; j < scan.labels.size(); ++j) {
            const auto& c = scan.pairwise[i][j];
            prow.push_back(i == j || !c.adf ? Json(nullptr) : Json(c.adf->p_value));
            hrow.push_back(i == j || !c.half_life ? Json(nullptr) : Json(c.half_life->days));
            crow.push_back(correlation(series[i], series[j]));
            if (i != j) csv_row(scan.labels[i], scan.labels[j], c);
          }
          p_matrix.push_back(prow);
          hl_matrix.push_back(hrow);
          corr.push_back(crow);
        }
        report["pairwise_p_value"] = p_matrix;
        report["pairwise_half_life"] = hl_matrix;
        report["correlation"] = corr;
      }
      if (!st_csv.empty()) write_file(st_csv, csv.str());
    } else if (bt->parsed()) {
      bt_cfg.maturity_months = static_cast<std::size_t>(std::stoul(bt_maturity));
      const auto closes = load_ohlc_csv(bt_input);
      const auto strikes = load_strike_csv(bt_strikes);
      const auto pnl = run_long_strategy(closes, strikes, bt_cfg);
      report["maturity"] = bt_maturity;
      report["sharpe"] = pnl.sharpe ? Json(*pnl.sharpe) : Json(nullptr);
      report["sharpe_degenerate"] = !pnl.sharpe.has_value();
      report["final_cum_mtm"] = pnl.cum_mtm.back();
      report["max_live"] = pnl.max_live;
      report["n_days"] = pnl.dates.size();
      Json contracts = Json::array();
      for (const auto& c : pnl.contracts) {
        contracts.push_back({{"entry", c.entry.label}, {"expiry", c.expiry.label}, {"strike", c.strike},
                             {"alpha", c.sabr.alpha}, {"nu", c.sabr.nu}, {"realized", c.realized},
                             {"payoff", c.payoff}});
      }
      report["contracts"] = contracts;
      Json cum = Json::array(), ret = Json::array();
      for (std::size_t i = 0; i < pnl.dates.size(); ++i) {
        cum.push_back({{"date", pnl.dates[i].label}, {"value", pnl.cum_mtm[i]}});
        if (i > 0) ret.push_back({{"date", pnl.dates[i].label}, {"value", pnl.ret_mtm[i - 1]}});
      }
      report["cum_mtm"] = cum;
      report["ret_mtm"] = ret;
      if (!bt_csv.empty()) {
        std::vector<TidyRow> rows;
        append_rows(rows, pnl.dates, pnl.cum_mtm, "cumMtM");
        append_rows(rows, std::span(pnl.dates).subspan(1), pnl.ret_mtm, "retMtM");
        write_file(bt_csv, tidy_text(rows));
      }
    }

    if (text.empty()) text = emit_json(report);
    out << text;
    out.flush();
    return kSuccess;
  } catch (const Error& e) {
    err << "volkit: " << e.what() << "\n";
    return e.code() == Errc::UsageError ? kUsage : kDataError;
  } catch (const std::exception& e) {
    err << "volkit: " << e.what() << "\n";
    return kDataError;
  }
}

}  // namespace volkit::cli

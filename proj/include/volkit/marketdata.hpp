#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "volkit/error.hpp"

namespace volkit {

/// Trading days per year used for annualization.
inline constexpr double kTradingDaysPerYear = 252.0;

struct TradingDate {
  std::int64_t ordinal = 0;  ///< position in the trading calendar, >= 0
  std::string label;         ///< ISO-8601 calendar label, carried opaquely

  friend bool operator==(const TradingDate&, const TradingDate&) = default;
};

struct OhlcBar {
  TradingDate date;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
};

namespace detail {

inline void check_bar(const OhlcBar& b, std::optional<std::size_t> line) {
  const bool finite = std::isfinite(b.open) && std::isfinite(b.high) && std::isfinite(b.low) &&
                      std::isfinite(b.close);
  if (!finite || b.open <= 0.0 || b.high <= 0.0 || b.low <= 0.0 || b.close <= 0.0) {
    throw Error(Module::marketdata, Errc::OrderViolation,
                "prices must be finite and strictly positive at " + b.date.label, line);
  }
  if (b.high < std::max(b.open, b.close) || b.low > std::min(b.open, b.close) || b.high < b.low) {
    throw Error(Module::marketdata, Errc::OrderViolation,
                "bar " + b.date.label + " violates low <= open,close <= high", line);
  }
}

}  // namespace detail

/// Ordered daily bars for one asset. Close-only data is stored with o = h = l = c.
class OhlcSeries {
 public:
  OhlcSeries(std::vector<OhlcBar> bars, std::string asset = {}, bool close_only = false)
      : bars_(std::move(bars)), asset_(std::move(asset)), close_only_(close_only) {
    if (bars_.empty()) throw Error(Module::marketdata, Errc::EmptySeries, "no bars");
    for (std::size_t i = 0; i < bars_.size(); ++i) {
      detail::check_bar(bars_[i], std::nullopt);
      if (i > 0 && (bars_[i].date.ordinal <= bars_[i - 1].date.ordinal ||
                    bars_[i].date.label <= bars_[i - 1].date.label)) {
        throw Error(Module::marketdata, Errc::OrderViolation,
                    "dates not strictly increasing at " + bars_[i].date.label);
      }
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return bars_.size(); }
  [[nodiscard]] std::span<const OhlcBar> bars() const noexcept { return bars_; }
  [[nodiscard]] const OhlcBar& operator[](std::size_t i) const { return bars_[i]; }
  [[nodiscard]] const std::string& asset() const noexcept { return asset_; }
  [[nodiscard]] bool close_only() const noexcept { return close_only_; }

  [[nodiscard]] std::vector<double> closes() const {
    std::vector<double> out;
    out.reserve(bars_.size());
    for (const auto& b : bars_) out.push_back(b.close);
    return out;
  }

  [[nodiscard]] std::vector<TradingDate> dates() const {
    std::vector<TradingDate> out;
    out.reserve(bars_.size());
    for (const auto& b : bars_) out.push_back(b.date);
    return out;
  }

  /// Bars [first, first + count).
  [[nodiscard]] OhlcSeries slice(std::size_t first, std::size_t count) const {
    if (first + count > bars_.size() || count == 0) {
      throw Error(Module::marketdata, Errc::InvalidArgument, "slice out of range");
    }
    return OhlcSeries(std::vector<OhlcBar>(bars_.begin() + static_cast<std::ptrdiff_t>(first),
                                           bars_.begin() + static_cast<std::ptrdiff_t>(first + count)),
                      asset_, close_only_);
  }

 private:
  std::vector<OhlcBar> bars_;
  std::string asset_;
  bool close_only_ = false;
};

/// Natural-log returns aligned to the later date of each pair.
class ReturnSeries {
 public:
  ReturnSeries() = default;
  ReturnSeries(std::vector<TradingDate> dates, std::vector<double> values)
      : dates_(std::move(dates)), values_(std::move(values)) {
    if (dates_.size() != values_.size()) {
      throw Error(Module::marketdata, Errc::Misaligned, "dates and values differ in length");
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::span<const TradingDate> dates() const noexcept { return dates_; }
  [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<TradingDate> dates_;
  std::vector<double> values_;
};

enum class VolScale { daily, annualized };

constexpr std::string_view to_string(VolScale s) noexcept {
  return s == VolScale::daily ? "daily" : "annualized";
}

/// Per-date volatility. Dates without an estimate (e.g. rolling warm-up) are simply absent.
class VolSeries {
 public:
  VolSeries() = default;
  VolSeries(std::vector<TradingDate> dates, std::vector<double> values, VolScale scale)
      : dates_(std::move(dates)), values_(std::move(values)), scale_(scale) {
    if (dates_.size() != values_.size()) {
      throw Error(Module::marketdata, Errc::Misaligned, "dates and values differ in length");
    }
    for (double v : values_) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(Module::marketdata, Errc::InvalidArgument, "volatility must be finite and >= 0");
      }
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::span<const TradingDate> dates() const noexcept { return dates_; }
  [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
  [[nodiscard]] VolScale scale() const noexcept { return scale_; }

 private:
  std::vector<TradingDate> dates_;
  std::vector<double> values_;
  VolScale scale_ = VolScale::daily;
};

inline std::vector<double> log_returns(std::span<const double> closes) {
  if (closes.size() < 2) {
    throw Error(Module::marketdata, Errc::TooShort, "need at least two prices for a return");
  }
  std::vector<double> out(closes.size() - 1);
  for (std::size_t i = 1; i < closes.size(); ++i) {
    if (!(closes[i] > 0.0) || !(closes[i - 1] > 0.0)) {
      throw Error(Module::marketdata, Errc::InvalidArgument, "prices must be strictly positive");
    }
    out[i - 1] = std::log(closes[i] / closes[i - 1]);
  }
  return out;
}

inline ReturnSeries log_returns(const OhlcSeries& series) {
  const auto closes = series.closes();
  auto values = log_returns(std::span<const double>(closes));
  std::vector<TradingDate> dates;
  dates.reserve(values.size());
  for (std::size_t i = 1; i < series.size(); ++i) dates.push_back(series[i].date);
  return ReturnSeries(std::move(dates), std::move(values));
}

inline VolSeries annualize(const VolSeries& vol, double days_per_year = kTradingDaysPerYear) {
  if (vol.scale() == VolScale::annualized) {
    throw Error(Module::marketdata, Errc::AlreadyAnnualized, "series is already annualized");
  }
  const double factor = std::sqrt(days_per_year);
  std::vector<double> values(vol.values().begin(), vol.values().end());
  for (double& v : values) v *= factor;
  return VolSeries({vol.dates().begin(), vol.dates().end()}, std::move(values), VolScale::annualized);
}

/// Weekday ISO labels starting at `first` (skipped forward to a weekday). Synthetic series only;
/// no holiday calendar.
inline std::vector<TradingDate> weekday_calendar(std::size_t count,
                                                 std::chrono::sys_days first =
                                                     std::chrono::year{2000} / std::chrono::January / 3) {
  using namespace std::chrono;
  std::vector<TradingDate> out;
  out.reserve(count);
  sys_days d = first;
  while (out.size() < count) {
    const weekday wd{d};
    if (wd != Saturday && wd != Sunday) {
      const year_month_day ymd{d};
      char buf[16];
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                    static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
      out.push_back({static_cast<std::int64_t>(out.size()), buf});
    }
    d += days{1};
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Shortest decimal that round-trips to the same double.
inline std::string format_decimal(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::ifstream open_input(const std::filesystem::path& path, Module module) {
  std::ifstream in(path);
  if (!in) throw Error(module, Errc::MissingFile, path.string());
  return in;
}

}  // namespace detail

/// Parses `date,open,high,low,close` or `date,close`. Rows are sorted by date label.
inline OhlcSeries parse_ohlc_csv(std::istream& in, std::string asset = {}) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<bool> close_only;
  struct Row {
    OhlcBar bar;
    std::size_t line;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    if (!close_only) {
      if (text == "date,open,high,low,close") {
        close_only = false;
      } else if (text == "date,close") {
        close_only = true;
      } else {
        throw Error(Module::marketdata, Errc::MalformedRow,
                    "expected header date,open,high,low,close or date,close", line_no);
      }
      continue;
    }
    const auto fields = detail::split(text);
    const std::size_t expected = *close_only ? 2 : 5;
    if (fields.size() != expected || fields[0].empty()) {
      throw Error(Module::marketdata, Errc::MalformedRow, "wrong field count", line_no);
    }
    OhlcBar bar;
    bar.date.label = std::string(fields[0]);
    std::vector<double> px;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto v = detail::parse_double(fields[i]);
      if (!v) throw Error(Module::marketdata, Errc::MalformedRow, "bad number '" + std::string(fields[i]) + "'", line_no);
      px.push_back(*v);
    }
    if (*close_only) {
      bar.open = bar.high = bar.low = bar.close = px[0];
    } else {
      bar.open = px[0];
      bar.high = px[1];
      bar.low = px[2];
      bar.close = px[3];
    }
    detail::check_bar(bar, line_no);
    rows.push_back({std::move(bar), line_no});
  }
  if (!close_only) throw Error(Module::marketdata, Errc::MalformedRow, "missing header", line_no + 1);
  if (rows.empty()) throw Error(Module::marketdata, Errc::EmptySeries, "no rows after header");
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.bar.date.label < b.bar.date.label; });
  std::vector<OhlcBar> bars;
  bars.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].bar.date.label == rows[i - 1].bar.date.label) {
      throw Error(Module::marketdata, Errc::OrderViolation, "duplicate date " + rows[i].bar.date.label,
                  rows[i].line);
    }
    rows[i].bar.date.ordinal = static_cast<std::int64_t>(i);
    bars.push_back(std::move(rows[i].bar));
  }
  return OhlcSeries(std::move(bars), std::move(asset), *close_only);
}

inline OhlcSeries load_ohlc_csv(const std::filesystem::path& path) {
  auto in = detail::open_input(path, Module::marketdata);
  return parse_ohlc_csv(in, path.stem().string());
}

inline void write_ohlc_csv(std::ostream& out, const OhlcSeries& series) {
  if (series.close_only()) {
    out << "date,close\n";
    for (const auto& b : series.bars()) out << b.date.label << ',' << format_decimal(b.close) << '\n';
    return;
  }
  out << "date,open,high,low,close\n";
  for (const auto& b : series.bars()) {
    out << b.date.label << ',' << format_decimal(b.open) << ',' << format_decimal(b.high) << ','
        << format_decimal(b.low) << ',' << format_decimal(b.close) << '\n';
  }
}

/// Tidy `date,value,series` rows, preceded by a `#scale=` line.
inline void write_vol_csv(std::ostream& out, const VolSeries& vol, std::string_view name) {
  out << "#scale=" << to_string(vol.scale()) << '\n' << "date,value,series\n";
  for (std::size_t i = 0; i < vol.size(); ++i) {
    out << vol.dates()[i].label << ',' << format_decimal(vol[i]) << ',' << name << '\n';
  }
}

inline VolSeries parse_vol_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  VolScale scale = VolScale::daily;
  bool header = false;
  std::vector<TradingDate> dates;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    if (text.starts_with("#scale=")) {
      const auto s = text.substr(7);
      if (s == "daily") scale = VolScale::daily;
      else if (s == "annualized") scale = VolScale::annualized;
      else throw Error(Module::marketdata, Errc::MalformedRow, "unknown scale", line_no);
      continue;
    }
    if (!header) {
      if (text != "date,value,series") {
        throw Error(Module::marketdata, Errc::MalformedRow, "expected header date,value,series", line_no);
      }
      header = true;
      continue;
    }
    const auto fields = detail::split(text);
    if (fields.size() != 3) throw Error(Module::marketdata, Errc::MalformedRow, "wrong field count", line_no);
    auto v = detail::parse_double(fields[1]);
    if (!v || *v < 0.0) throw Error(Module::marketdata, Errc::MalformedRow, "bad volatility", line_no);
    dates.push_back({static_cast<std::int64_t>(dates.size()), std::string(fields[0])});
    values.push_back(*v);
  }
  if (values.empty()) throw Error(Module::marketdata, Errc::EmptySeries, "no rows after header");
  return VolSeries(std::move(dates), std::move(values), scale);
}

}  // namespace volkit

#include <cmath>
#include <sstream>

#include "test_util.hpp"

using namespace volkit;
using namespace volkit::testing;

TEST(ParseOhlc, ReadsTwoBars) {
  std::istringstream in("date,open,high,low,close\n2020-01-02,100,101,99,100.5\n2020-01-03,100.5,102,100,101\n");
  const auto s = parse_ohlc_csv(in, "X");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].date.label, "2020-01-02");
  EXPECT_DOUBLE_EQ(s[1].high, 102.0);
  EXPECT_DOUBLE_EQ(s[1].close, 101.0);
  EXPECT_EQ(s.asset(), "X");
  EXPECT_FALSE(s.close_only());
}

TEST(ParseOhlc, HighBelowLowIsOrderViolationWithLine) {
  std::istringstream in("date,open,high,low,close\n2020-01-02,100,101,99,100\n2020-01-03,100,99,100,100\n");
  try {
    parse_ohlc_csv(in);
    FAIL() << "no throw";
  } catch (const Error& e) {
    EXPECT_EQ(e.qualified_code(), "marketdata.OrderViolation");
    ASSERT_TRUE(e.line().has_value());
    EXPECT_EQ(*e.line(), 3u);
  }
}

TEST(ParseOhlc, EmptyAfterHeader) {
  std::istringstream in("date,open,high,low,close\n");
  EXPECT_VOLKIT_ERROR(parse_ohlc_csv(in), "marketdata.EmptySeries");
}

TEST(ParseOhlc, MalformedRowsAndHeader) {
  std::istringstream bad_num("date,close\n2020-01-02,abc\n");
  EXPECT_VOLKIT_ERROR(parse_ohlc_csv(bad_num), "marketdata.MalformedRow");
  std::istringstream bad_header("when,close\n2020-01-02,1\n");
  EXPECT_VOLKIT_ERROR(parse_ohlc_csv(bad_header), "marketdata.MalformedRow");
  std::istringstream negative("date,close\n2020-01-02,-1\n");
  EXPECT_VOLKIT_ERROR(parse_ohlc_csv(negative), "marketdata.OrderViolation");
}

TEST(ParseOhlc, CloseOnlyFillsAllFields) {
  std::istringstream in("date,close\n2020-01-02,100\n2020-01-03,101\n");
  const auto s = parse_ohlc_csv(in);
  EXPECT_TRUE(s.close_only());
  EXPECT_DOUBLE_EQ(s[1].open, 101.0);
  EXPECT_DOUBLE_EQ(s[1].low, 101.0);
}

TEST(ParseOhlc, DuplicateDateRejected) {
  std::istringstream in("date,close\n2020-01-02,100\n2020-01-02,101\n");
  EXPECT_VOLKIT_ERROR(parse_ohlc_csv(in), "marketdata.OrderViolation");
}

TEST(LoadOhlc, MissingFile) {
  EXPECT_VOLKIT_ERROR(load_ohlc_csv("/nonexistent/bars.csv"), "marketdata.MissingFile");
}

TEST(LoadOhlc, SampleFileUsesStemAsAsset) {
  const auto s = load_ohlc_csv(std::string(VOLKIT_DATA_DIR) + "/spx_like.csv");
  EXPECT_EQ(s.asset(), "spx_like");
  EXPECT_GT(s.size(), 500u);
}

TEST(OhlcCsv, RoundTripIsExact) {
  const auto s = simulate_gbm_bars(0.3, 40, 20, 9, {100.0, 0.1});
  std::ostringstream out;
  write_ohlc_csv(out, s);
  std::istringstream in(out.str());
  const auto back = parse_ohlc_csv(in);
  ASSERT_EQ(back.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(back[i].open, s[i].open);
    EXPECT_EQ(back[i].high, s[i].high);
    EXPECT_EQ(back[i].low, s[i].low);
    EXPECT_EQ(back[i].close, s[i].close);
    EXPECT_EQ(back[i].date.label, s[i].date.label);
  }
}

TEST(LogReturns, Examples) {
  const std::vector<double> flat{100, 100, 100};
  const auto r0 = log_returns(std::span<const double>(flat));
  EXPECT_EQ(r0, (std::vector<double>{0.0, 0.0}));
  const std::vector<double> up{100, 101};
  EXPECT_NEAR(log_returns(std::span<const double>(up))[0], 0.00995033, 1e-8);
  const std::vector<double> one{100};
  EXPECT_VOLKIT_ERROR(log_returns(std::span<const double>(one)), "marketdata.TooShort");
}

TEST(LogReturns, SeriesDatesStartAtSecondBar) {
  const auto s = closes_from({100, 101, 99});
  const auto r = log_returns(s);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r.dates()[0], s[1].date);
  EXPECT_DOUBLE_EQ(r[1], std::log(99.0 / 101.0));
}

TEST(LogReturns, SumTelescopes) {
  const auto s = simulate_gbm_bars(0.2, 100, 5, 3);
  const auto r = log_returns(s);
  double sum = 0.0;
  for (double x : r.values()) sum += x;
  EXPECT_NEAR(sum, std::log(s[s.size() - 1].close / s[0].close), 1e-12);
}

TEST(Annualize, Examples) {
  const auto dates = weekday_calendar(2);
  const VolSeries daily(dates, {0.01, 0.0}, VolScale::daily);
  const auto a = annualize(daily);
  EXPECT_NEAR(a[0], 0.158745, 1e-6);
  EXPECT_EQ(a[1], 0.0);
  EXPECT_EQ(a.scale(), VolScale::annualized);
  EXPECT_VOLKIT_ERROR(annualize(a), "marketdata.AlreadyAnnualized");
}

TEST(VolCsv, RoundTripPreservesValuesAndScale) {
  const auto dates = weekday_calendar(3);
  const VolSeries v(dates, {0.1, 1.0 / 3.0, 0.123456789012345678}, VolScale::annualized);
  std::ostringstream out;
  write_vol_csv(out, v, "x");
  std::istringstream in(out.str());
  const auto back = parse_vol_csv(in);
  EXPECT_EQ(back.scale(), VolScale::annualized);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i], v[i]);
    EXPECT_EQ(back.dates()[i].label, dates[i].label);
  }
}

TEST(Calendar, SkipsWeekends) {
  const auto d = weekday_calendar(6);
  EXPECT_EQ(d[0].label, "2000-01-03");
  EXPECT_EQ(d[4].label, "2000-01-07");
  EXPECT_EQ(d[5].label, "2000-01-10");
  EXPECT_EQ(d[5].ordinal, 5);
}

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace volkit {

enum class Module {
  marketdata,
  estimators,
  garch,
  diagnostics,
  varswap,
  simulate,
  stationarity,
  backtest,
  cli,
};

enum class Errc {
  MissingFile,
  MalformedRow,
  OrderViolation,
  EmptySeries,
  TooShort,
  AlreadyAnnualized,
  WindowTooLarge,
  NegativeVarianceEstimate,
  DegenerateVariance,
  InvalidParams,
  NonPositiveVariance,
  Unsupported,
  NonStationary,
  DidNotConverge,
  ZeroVol,
  Misaligned,
  DegenerateSample,
  LagTooLarge,
  NonPositiveVol,
  EmptyChain,
  UnsortedStrikes,
  SingularParameters,
  NoRoot,
  TimeOutOfRange,
  NonStationaryCoefficient,
  SingularRegression,
  MissingStrikeData,
  CalendarGap,
  DegenerateSeries,
  InvalidArgument,
  SerializationError,
  UsageError,
};

constexpr std::string_view to_string(Module m) noexcept {
  switch (m) {
    case Module::marketdata: return "marketdata";
    case Module::estimators: return "estimators";
    case Module::garch: return "garch";
    case Module::diagnostics: return "diagnostics";
    case Module::varswap: return "varswap";
    case Module::simulate: return "simulate";
    case Module::stationarity: return "stationarity";
    case Module::backtest: return "backtest";
    case Module::cli: return "cli";
  }
  return "unknown";
}

constexpr std::string_view to_string(Errc c) noexcept {
  switch (c) {
    case Errc::MissingFile: return "MissingFile";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::OrderViolation: return "OrderViolation";
    case Errc::EmptySeries: return "EmptySeries";
    case Errc::TooShort: return "TooShort";
    case Errc::AlreadyAnnualized: return "AlreadyAnnualized";
    case Errc::WindowTooLarge: return "WindowTooLarge";
    case Errc::NegativeVarianceEstimate: return "NegativeVarianceEstimate";
    case Errc::DegenerateVariance: return "DegenerateVariance";
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::NonPositiveVariance: return "NonPositiveVariance";
    case Errc::Unsupported: return "Unsupported";
    case Errc::NonStationary: return "NonStationary";
    case Errc::DidNotConverge: return "DidNotConverge";
    case Errc::ZeroVol: return "ZeroVol";
    case Errc::Misaligned: return "Misaligned";
    case Errc::DegenerateSample: return "DegenerateSample";
    case Errc::LagTooLarge: return "LagTooLarge";
    case Errc::NonPositiveVol: return "NonPositiveVol";
    case Errc::EmptyChain: return "EmptyChain";
    case Errc::UnsortedStrikes: return "UnsortedStrikes";
    case Errc::SingularParameters: return "SingularParameters";
    case Errc::NoRoot: return "NoRoot";
    case Errc::TimeOutOfRange: return "TimeOutOfRange";
    case Errc::NonStationaryCoefficient: return "NonStationaryCoefficient";
    case Errc::SingularRegression: return "SingularRegression";
    case Errc::MissingStrikeData: return "MissingStrikeData";
    case Errc::CalendarGap: return "CalendarGap";
    case Errc::DegenerateSeries: return "DegenerateSeries";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::SerializationError: return "SerializationError";
    case Errc::UsageError: return "UsageError";
  }
  return "Unknown";
}

/// Exception carrying a module-qualified error code, e.g. `marketdata.MalformedRow`.
/// Input-file errors also carry the 1-based line number.
class Error : public std::runtime_error {
 public:
  Error(Module module, Errc code, const std::string& detail,
        std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(format(module, code, detail, line)),
        module_(module),
        code_(code),
        line_(line) {}

  [[nodiscard]] Module module() const noexcept { return module_; }
  [[nodiscard]] Errc code() const noexcept { return code_; }
  [[nodiscard]] std::optional<std::size_t> line() const noexcept { return line_; }

  [[nodiscard]] std::string qualified_code() const {
    return std::string(to_string(module_)) + "." + std::string(to_string(code_));
  }

 private:
  static std::string format(Module module, Errc code, const std::string& detail,
                            std::optional<std::size_t> line) {
    std::string out = std::string(to_string(module)) + "." + std::string(to_string(code));
    if (line) out += " (line " + std::to_string(*line) + ")";
    if (!detail.empty()) out += ": " + detail;
    return out;
  }

  Module module_;
  Errc code_;
  std::optional<std::size_t> line_;
};

}  // namespace volkit

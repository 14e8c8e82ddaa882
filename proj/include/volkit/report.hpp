#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"

#include "volkit/error.hpp"
#include "volkit/marketdata.hpp"

namespace volkit {

using Json = nlohmann::json;

namespace detail {

inline void emit_json(std::ostream& out, const Json& j, const std::string& path, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << inner << Json(it.key()).dump() << ": ";
        emit_json(out, it.value(), path + "." + it.key(), indent + 1);
      }
      out << "\n" << pad << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      out << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i > 0) out << ",\n";
        out << inner;
        emit_json(out, j[i], path + "[" + std::to_string(i) + "]", indent + 1);
      }
      out << "\n" << pad << "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        throw Error(Module::cli, Errc::SerializationError, "non-finite value at " + (path.empty() ? "$" : "$" + path));
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << buf;
      return;
    }
    default:
      out << j.dump();
      return;
  }
}

}  // namespace detail

/// Deterministic JSON text: keys in lexicographic order, two-space indent, doubles with 17
/// significant digits. Throws cli.SerializationError naming the path of any NaN or Inf.
inline std::string emit_json(const Json& j) {
  std::ostringstream out;
  detail::emit_json(out, j, "", 0);
  out << "\n";
  return out.str();
}

struct TidyRow {
  std::string x;  ///< date label, or lag / quantile for non-dated plots
  double value = 0.0;
  std::string series;
};

/// Long-format plot data `<x_name>,value,series`, values in shortest round-trip form.
inline void write_tidy_csv(std::ostream& out, std::span<const TidyRow> rows, std::string_view x_name = "date") {
  out << x_name << ",value,series\n";
  for (const auto& r : rows) {
    if (!std::isfinite(r.value)) {
      throw Error(Module::cli, Errc::SerializationError, "non-finite value in series " + r.series + " at " + r.x);
    }
    out << r.x << ',' << format_decimal(r.value) << ',' << r.series << '\n';
  }
}

inline void append_rows(std::vector<TidyRow>& rows, std::span<const TradingDate> dates, std::span<const double> values,
                        const std::string& series) {
  for (std::size_t i = 0; i < values.size(); ++i) rows.push_back({dates[i].label, values[i], series});
}

}  // namespace volkit

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace volkit {

struct NelderMeadOptions {
  double initial_step = 0.5;
  double f_tolerance = 1e-8;  ///< stop when max f - min f over the simplex falls below this
  std::size_t max_iterations = 2000;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
};

/// Minimizes `f` with the Nelder-Mead simplex (reflection 1, expansion 2, contraction 0.5,
/// shrink 0.5). Non-finite objective values are treated as +inf.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, const NelderMeadOptions& opt = {}) {
  const std::size_t n = x0.size();
  auto eval = [&](const std::vector<double>& x) {
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> pts(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += opt.initial_step;
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(pts[i]);

  std::vector<std::size_t> order(n + 1);
  NelderMeadResult res;
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  auto along = [&](double t, std::vector<double>& out, const std::vector<double>& worst) {
    for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + t * (worst[j] - centroid[j]);
  };

  for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    if (std::isfinite(fv[worst]) && fv[worst] - fv[best] < opt.f_tolerance) {
      res.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j] / static_cast<double>(n);
    }

    along(-1.0, xr, pts[worst]);
    const double fr = eval(xr);
    if (fr < fv[best]) {
      along(-2.0, xe, pts[worst]);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = xe;
        fv[worst] = fe;
      } else {
        pts[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      pts[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    // Outside contraction when the reflected point beats the worst, inside otherwise.
    const bool outside = fr < fv[worst];
    along(outside ? -0.5 : 0.5, xc, pts[worst]);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fv[worst])) {
      pts[worst] = xc;
      fv[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < n; ++j) pts[i][j] = pts[best][j] + 0.5 * (pts[i][j] - pts[best][j]);
      fv[i] = eval(pts[i]);
    }
  }

  const auto it = std::min_element(fv.begin(), fv.end());
  res.x = pts[static_cast<std::size_t>(it - fv.begin())];
  res.f = *it;
  return res;
}

}  // namespace volkit

#pragma once

// Plain Nelder-Mead simplex with restarts around the incumbent.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace tonegar::optim {

struct NelderMeadOptions {
  int max_evaluations = 4000;
  double f_tolerance = 1e-15;  // spread of simplex values, relative to 1 + |f_best|
  double x_tolerance = 1e-9;   // simplex diameter
  int restarts = 3;            // fresh simplex around the optimum after convergence
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
  std::vector<double> trace;  // best value after each iteration, nonincreasing
};

using Objective = std::function<double(const std::vector<double>&)>;

namespace detail {

struct Simplex {
  std::vector<std::vector<double>> pts;
  std::vector<double> vals;
};

inline double diameter(const Simplex& s) {
  double d = 0.0;
  for (std::size_t i = 1; i < s.pts.size(); ++i) {
    for (std::size_t j = 0; j < s.pts[i].size(); ++j) d = std::max(d, std::fabs(s.pts[i][j] - s.pts[0][j]));
  }
  return d;
}

}  // namespace detail

/// Minimizes f from x0 with initial per-coordinate steps. Non-finite values
/// are treated as +inf.
inline NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, std::vector<double> step,
                                    const NelderMeadOptions& opt = {}) {
  const std::size_t n = x0.size();
  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : HUGE_VAL;
  };

  res.x = x0;
  res.value = eval(x0);
  for (int round = 0; round <= opt.restarts; ++round) {
    detail::Simplex s;
    s.pts.push_back(res.x);
    s.vals.push_back(res.value);
    for (std::size_t i = 0; i < n; ++i) {
      auto p = res.x;
      p[i] += step[i];
      s.pts.push_back(p);
      s.vals.push_back(eval(p));
    }
    const double before = res.value;
    bool converged = false;
    std::vector<std::size_t> order(n + 1);
    while (res.evaluations < opt.max_evaluations) {
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s.vals[a] < s.vals[b]; });
      detail::Simplex sorted;
      for (auto i : order) {
        sorted.pts.push_back(s.pts[i]);
        sorted.vals.push_back(s.vals[i]);
      }
      s = std::move(sorted);
      if (s.vals[0] < res.value) {
        res.value = s.vals[0];
        res.x = s.pts[0];
      }
      res.trace.push_back(res.value);
      if (std::fabs(s.vals[n] - s.vals[0]) <= opt.f_tolerance * (1.0 + std::fabs(s.vals[0])) &&
          detail::diameter(s) <= opt.x_tolerance) {
        converged = true;
        break;
      }

      std::vector<double> centroid(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) centroid[j] += s.pts[i][j] / static_cast<double>(n);
      }
      auto along = [&](double t) {
        std::vector<double> p(n);
        for (std::size_t j = 0; j < n; ++j) p[j] = centroid[j] + t * (s.pts[n][j] - centroid[j]);
        return p;
      };
      auto xr = along(-1.0);
      const double fr = eval(xr);
      if (fr < s.vals[0]) {
        auto xe = along(-2.0);
        const double fe = eval(xe);
        if (fe < fr) {
          s.pts[n] = xe, s.vals[n] = fe;
        } else {
          s.pts[n] = xr, s.vals[n] = fr;
        }
      } else if (fr < s.vals[n - 1]) {
        s.pts[n] = xr, s.vals[n] = fr;
      } else {
        const bool outside = fr < s.vals[n];
        auto xc = along(outside ? -0.5 : 0.5);
        const double fc = eval(xc);
        if (fc < (outside ? fr : s.vals[n])) {
          s.pts[n] = xc, s.vals[n] = fc;
        } else {
          for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) s.pts[i][j] = s.pts[0][j] + 0.5 * (s.pts[i][j] - s.pts[0][j]);
            s.vals[i] = eval(s.pts[i]);
          }
        }
      }
    }
    for (std::size_t i = 0; i < s.vals.size(); ++i) {
      if (s.vals[i] < res.value) res.value = s.vals[i], res.x = s.pts[i];
    }
    res.converged = converged;
    if (!converged) break;
    // A restart that finds nothing new ends the search.
    if (round > 0 && !(res.value < before - opt.f_tolerance * (1.0 + std::fabs(before)))) break;
  }
  return res;
}

}  // namespace tonegar::optim

#pragma once

// Skewed Student's t: f(y) = (2/s) t(z; nu) T(a z sqrt((nu+1)/(nu+z^2)); nu+1),
// z = (y - mu)/s. Fitted to a handful of quantiles by least squares.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "tonegar/calendar.hpp"
#include "tonegar/delimited.hpp"
#include "tonegar/error.hpp"
#include "tonegar/nelder_mead.hpp"
#include "tonegar/student_t.hpp"

namespace tonegar::dist {

struct SkewTParams {
  double mu = 0.0;
  double sigma = 1.0;
  double alpha = 0.0;
  double nu = 30.0;

  void validate() const {
    if (!std::isfinite(mu) || !std::isfinite(alpha)) throw NumericalError("skewed t location/shape must be finite");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw NumericalError("skewed t scale must be positive");
    if (!(nu > 0.0)) throw NumericalError("skewed t degrees of freedom must be positive");
  }
};

class SkewT {
 public:
  explicit SkewT(const SkewTParams& p) : p_(p), t_nu_((p.validate(), p.nu)), t_nu1_(p.nu + 1.0) {
    // The skewed t is a scale mixture of a skew normal, so its mass below the
    // location matches the skew normal's: 1/2 - atan(alpha)/pi.
    f_mu_ = 0.5 - std::atan(p.alpha) / std::numbers::pi;
  }

  [[nodiscard]] const SkewTParams& params() const { return p_; }

  /// Density of the standardized variable z.
  [[nodiscard]] double std_pdf(double z) const {
    const double arg = p_.alpha * z * std::sqrt((p_.nu + 1.0) / (p_.nu + z * z));
    return 2.0 * t_nu_.pdf(z) * t_nu1_.cdf(arg);
  }

  [[nodiscard]] double pdf(double y) const { return std_pdf((y - p_.mu) / p_.sigma) / p_.sigma; }

  [[nodiscard]] double std_cdf(double z) const {
    if (std::isnan(z)) throw NumericalError("skewed t cdf at NaN");
    if (z == HUGE_VAL) return 1.0;
    if (z == -HUGE_VAL) return 0.0;
    double v;
    if (std::fabs(z) <= kCentral) {
      v = f_mu_ + integrate(0.0, z);
    } else if (z > 0) {
      v = 1.0 - integrate(z, HUGE_VAL);
    } else {
      v = integrate(-HUGE_VAL, z);
    }
    return std::clamp(v, 0.0, 1.0);
  }

  [[nodiscard]] double cdf(double y) const { return std_cdf((y - p_.mu) / p_.sigma); }

  /// Standardized quantiles for ascending levels, found by safeguarded
  /// Newton steps. Each cdf update integrates only the stretch just walked.
  [[nodiscard]] std::vector<double> std_quantiles(const std::vector<double>& taus) const {
    std::vector<std::size_t> order(taus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return taus[a] < taus[b]; });
    std::vector<double> out(taus.size());
    // Walk outward from z = 0 (where F is known) in both directions.
    double z = 0.0, f = f_mu_;
    for (auto it = order.begin(); it != order.end(); ++it) {
      if (taus[*it] < f_mu_) continue;
      out[*it] = solve(taus[*it], z, f);
    }
    z = 0.0, f = f_mu_;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      if (taus[*it] >= f_mu_) continue;
      out[*it] = solve(taus[*it], z, f);
    }
    return out;
  }

  [[nodiscard]] double quantile(double tau) const {
    if (!(tau > 0.0 && tau < 1.0)) throw NumericalError("quantile level must lie in (0, 1)");
    return p_.mu + p_.sigma * std_quantiles({tau})[0];
  }

 private:
  static constexpr double kCentral = 4.0;

  [[nodiscard]] double integrate(double a, double b) const {
    if (a == b) return 0.0;
    auto f = [this](double z) { return std_pdf(z); };
    using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
    if (!std::isfinite(a) || !std::isfinite(b)) {
      double err = 0.0;
      return GK::integrate(f, a, b, 12, 1e-10, &err);
    }
    // Bisection on an absolute error target: probability mass needs absolute
    // accuracy, and a relative target over-refines where the density is tiny.
    auto adapt = [&](auto&& self, double lo, double hi, double tol, int depth) -> double {
      double err = 0.0;
      const double r = GK::integrate(f, lo, hi, 0, 0.0, &err);
      if (err <= tol || depth == 0) return r;
      const double mid = 0.5 * (lo + hi);
      return self(self, lo, mid, 0.5 * tol, depth - 1) + self(self, mid, hi, 0.5 * tol, depth - 1);
    };
    return adapt(adapt, a, b, 1e-13, 16);
  }

  /// Root of F(z) = tau starting from a point (z, F(z)); updates the point.
  double solve(double tau, double& z, double& fz) const {
    if (!(tau > 0.0 && tau < 1.0)) throw NumericalError("quantile level must lie in (0, 1)");
    double lo = -HUGE_VAL, hi = HUGE_VAL, flo = 0.0, fhi = 1.0;
    if (fz <= tau) lo = z, flo = fz;
    if (fz >= tau) hi = z, fhi = fz;
    for (int iter = 0; iter < 200; ++iter) {
      const double r = fz - tau;
      if (std::fabs(r) <= 1e-13) return z;
      if (std::isfinite(lo) && std::isfinite(hi) && hi - lo <= 1e-13 * (1.0 + std::fabs(z))) return z;
      const double d = std_pdf(z);
      double next = d > 0.0 ? z - r / d : std::numeric_limits<double>::quiet_NaN();
      const double reach = std::max(1.0, std::fabs(z));
      if (!std::isfinite(next) || std::fabs(next - z) > 4.0 * reach) next = z + (r > 0 ? -reach : reach);
      if (!(next > lo && next < hi)) {
        next = (std::isfinite(lo) && std::isfinite(hi)) ? 0.5 * (lo + hi) : (r > 0 ? z - reach : z + reach);
      }
      const double fn = fz + integrate(z, next);
      z = next;
      fz = fn;
      if (fz < tau) {
        lo = z, flo = fz;
      } else {
        hi = z, fhi = fz;
      }
    }
    (void)flo, (void)fhi;
    throw NumericalError("skewed t quantile search failed to converge at tau " + std::to_string(tau));
  }

  SkewTParams p_;
  StudentT t_nu_;
  StudentT t_nu1_;
  double f_mu_ = 0.5;
};

inline double skew_t_pdf(double y, const SkewTParams& p) { return SkewT(p).pdf(y); }
inline double skew_t_cdf(double y, const SkewTParams& p) { return SkewT(p).cdf(y); }
inline double skew_t_quantile(double tau, const SkewTParams& p) { return SkewT(p).quantile(tau); }

/// Growth-at-Risk: the tau-quantile of the fitted distribution.
inline double gar(const SkewTParams& p, double tau = 0.05) { return skew_t_quantile(tau, p); }

struct FitBounds {
  double alpha_max = 30.0;
  double nu_min = 2.0;
  double nu_max = 1e4;
};

struct SkewTFit {
  SkewTParams params;
  double objective = 0.0;
  int evaluations = 0;
  std::vector<double> trace;  // best objective so far, nonincreasing
};

class FitError : public NumericalError {
 public:
  FitError(const std::string& msg, SkewTParams best_params, double best_objective)
      : NumericalError(msg), best(best_params), objective(best_objective) {}
  SkewTParams best;
  double objective;
};

struct FitOptions {
  FitBounds bounds;
  int starts = 3;
  std::uint64_t jitter_seed = 20240501;
  optim::NelderMeadOptions simplex{};
};

namespace detail {

struct Profile {
  double mu = 0.0;
  double sigma = 0.0;
  double objective = 0.0;
};

/// Best location/scale for fixed standardized quantiles (ordinary least squares).
inline Profile profile(const std::vector<double>& q, const std::vector<double>& z) {
  const double n = static_cast<double>(q.size());
  double mq = 0.0, mz = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) mq += q[i] / n, mz += z[i] / n;
  double sqz = 0.0, szz = 0.0, sqq = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    sqz += (q[i] - mq) * (z[i] - mz);
    szz += (z[i] - mz) * (z[i] - mz);
    sqq += (q[i] - mq) * (q[i] - mq);
  }
  Profile p;
  const double floor = 1e-10 * (1.0 + std::sqrt(sqq / n));
  p.sigma = szz > 0.0 ? std::max(sqz / szz, floor) : floor;
  p.mu = mq - p.sigma * mz;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double e = q[i] - p.mu - p.sigma * z[i];
    p.objective += e * e;
  }
  return p;
}

}  // namespace detail

/// Least-squares quantile matching. Location and scale are profiled out in
/// closed form; the simplex searches shape and tail thickness with
/// nu = nu_min + exp(n) and alpha clamped to the bounds.
inline SkewTFit fit_skew_t(const std::map<double, double>& quantile_estimates, const FitOptions& opt = {}) {
  if (quantile_estimates.size() < 4) throw NumericalError("skewed t fit needs at least 4 quantile levels");
  std::vector<double> taus, q;
  for (const auto& [tau, value] : quantile_estimates) {
    if (!(tau > 0.0 && tau < 1.0)) throw NumericalError("quantile level must lie in (0, 1)");
    if (!std::isfinite(value)) throw NumericalError("quantile estimate is not finite");
    taus.push_back(tau);
    q.push_back(value);
  }
  const auto& b = opt.bounds;
  auto unpack = [&](const std::vector<double>& x, double& alpha, double& nu) {
    alpha = std::clamp(x[0], -b.alpha_max, b.alpha_max);
    nu = b.nu_min + std::exp(std::clamp(x[1], -20.0, std::log(b.nu_max - b.nu_min)));
  };
  auto profiled = [&](const std::vector<double>& x) {
    double alpha, nu;
    unpack(x, alpha, nu);
    const SkewT d({0.0, 1.0, alpha, nu});
    return detail::profile(q, d.std_quantiles(taus));
  };
  // Clamped coordinates still pay a small penalty so the simplex walks back.
  auto objective = [&](const std::vector<double>& x) {
    double excess = std::max(0.0, std::fabs(x[0]) - b.alpha_max);
    excess += std::max(0.0, x[1] - std::log(b.nu_max - b.nu_min)) + std::max(0.0, -20.0 - x[1]);
    return profiled(x).objective + excess * excess;
  };

  std::mt19937_64 rng(opt.jitter_seed);
  auto jitter = [&rng] {
    return (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * 0.5;
  };
  const double n0 = std::log(30.0 - b.nu_min);
  SkewTFit best;
  best.objective = HUGE_VAL;
  bool any_converged = false;
  std::vector<double> best_x;
  for (int s = 0; s < opt.starts; ++s) {
    std::vector<double> x0{0.0, n0};
    if (s > 0) x0 = {jitter() * 2.0, n0 + jitter() * 2.0};
    const auto r = optim::nelder_mead(objective, x0, {0.5, 0.5}, opt.simplex);
    best.evaluations += r.evaluations;
    for (double v : r.trace) {
      const double prev = best.trace.empty() ? HUGE_VAL : best.trace.back();
      best.trace.push_back(std::min(prev, v));
    }
    any_converged = any_converged || r.converged;
    if (r.value < best.objective) {
      best.objective = r.value;
      best_x = r.x;
    }
  }
  double alpha, nu;
  unpack(best_x, alpha, nu);
  const auto prof = profiled(best_x);
  best.params = {prof.mu, prof.sigma, alpha, nu};
  best.objective = prof.objective;
  if (!any_converged) {
    throw FitError("skewed t quantile matching did not converge within " +
                       std::to_string(opt.simplex.max_evaluations) + " evaluations per start",
                   best.params, best.objective);
  }
  return best;
}

/// Sum of squared gaps between target quantiles and the distribution's.
inline double matching_objective(const std::map<double, double>& quantile_estimates, const SkewTParams& p) {
  const SkewT d(p);
  double s = 0.0;
  for (const auto& [tau, value] : quantile_estimates) {
    const double e = value - d.quantile(tau);
    s += e * e;
  }
  return s;
}

struct FittedOrigin {
  Quarter quarter;
  SkewTParams params;
  double gar05 = 0.0;
  double objective = 0.0;
};

/// quarter,mu,sigma,alpha,nu,gar05,objective
inline delimited::Writer fit_writer(const std::vector<FittedOrigin>& fits) {
  delimited::Writer w({"quarter", "mu", "sigma", "alpha", "nu", "gar05", "objective"});
  for (const auto& f : fits) {
    w.add(f.quarter.str(), f.params.mu, f.params.sigma, f.params.alpha, f.params.nu, f.gar05, f.objective);
  }
  return w;
}

}  // namespace tonegar::dist

#pragma once

// Student's t density and cdf. The cdf goes through the regularized
// incomplete beta function (modified Lentz continued fraction).

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "tonegar/error.hpp"

namespace tonegar::dist {

namespace detail {

/// Continued fraction for I_x(a, b), valid (fast) for x < (a+1)/(a+b+2).
inline double beta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b). `one_minus_x` lets callers pass 1-x
/// computed without cancellation.
inline double incomplete_beta(double a, double b, double x, double one_minus_x) {
  if (!(a > 0.0) || !(b > 0.0)) throw NumericalError("incomplete beta needs positive shape parameters");
  if (x <= 0.0) return 0.0;
  if (one_minus_x <= 0.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                                b * std::log(one_minus_x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_cf(a, b, x) / a;
  return 1.0 - front * detail::beta_cf(b, a, one_minus_x) / b;
}

inline double incomplete_beta(double a, double b, double x) { return incomplete_beta(a, b, x, 1.0 - x); }

/// Standard Student's t with nu > 0 degrees of freedom.
class StudentT {
 public:
  explicit StudentT(double nu) : nu_(nu) {
    if (!(nu > 0.0)) throw NumericalError("Student t degrees of freedom must be positive");
    // Gamma(nu/2) / Gamma(nu/2 + 1/2) directly: the lgamma difference cancels
    // badly for large nu.
    const double ratio = std::log(boost::math::tgamma_delta_ratio(0.5 * nu, 0.5));
    log_norm_ = -ratio - 0.5 * std::log(nu * std::numbers::pi);
    log_beta_ = ratio + 0.5 * std::log(std::numbers::pi);
  }

  [[nodiscard]] double nu() const { return nu_; }

  [[nodiscard]] double pdf(double t) const {
    return std::exp(log_norm_ - 0.5 * (nu_ + 1.0) * std::log1p(t * t / nu_));
  }

  [[nodiscard]] double cdf(double t) const {
    if (std::isnan(t)) return t;
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    // Tail mass P(|T| > |t|) / 2 = I_x(nu/2, 1/2) / 2 with x = nu / (nu + t^2).
    const double t2 = t * t;
    const double denom = nu_ + t2;
    const double x = nu_ / denom;
    const double omx = t2 / denom;
    const double tail = 0.5 * incomplete_beta_cached(x, omx, -std::log1p(t2 / nu_));
    return t > 0 ? 1.0 - tail : tail;
  }

 private:
  [[nodiscard]] double incomplete_beta_cached(double x, double omx, double log_x) const {
    const double a = 0.5 * nu_, b = 0.5;
    if (x <= 0.0) return 0.0;
    if (omx <= 0.0) return 1.0;
    const double la = log_x, lb = std::log(omx);
    const double front = std::exp(a * la + b * lb - log_beta_);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_cf(a, b, x) / a;
    return 1.0 - front * detail::beta_cf(b, a, omx) / b;
  }

  double nu_;
  double log_norm_;
  double log_beta_;
};

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace tonegar::dist

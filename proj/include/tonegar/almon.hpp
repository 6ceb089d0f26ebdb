#pragma once

// Unnormalized Almon lag polynomials w(k) = sum_i theta_i k^i and the linear
// endpoint restrictions w(C-1) = 0, w'(C-1) = 0.

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "tonegar/error.hpp"

namespace tonegar::almon {

/// w_k for k = 0..lags-1 (Horner evaluation).
inline Eigen::VectorXd weights(const Eigen::VectorXd& theta, int lags) {
  Eigen::VectorXd w(lags);
  for (int k = 0; k < lags; ++k) {
    double acc = 0.0;
    for (Eigen::Index i = theta.size() - 1; i >= 0; --i) acc = acc * k + theta[i];
    w[k] = acc;
  }
  return w;
}

/// dw/dk at lag k.
inline double derivative(const Eigen::VectorXd& theta, double k) {
  double acc = 0.0;
  for (Eigen::Index i = theta.size() - 1; i >= 1; --i) acc = acc * k + static_cast<double>(i) * theta[i];
  return acc;
}

/// Q with Q(i, k) = k^i, i = 0..degree, k = 0..lags-1.
inline Eigen::MatrixXd lag_power_matrix(int degree, int lags) {
  Eigen::MatrixXd q(degree + 1, lags);
  for (int k = 0; k < lags; ++k) {
    double pw = 1.0;
    for (int i = 0; i <= degree; ++i) {
      q(i, k) = pw;
      pw *= k;
    }
  }
  return q;
}

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Maps free parameters (length degree-restrictions+1) to full coefficients
/// (length degree+1). Column j holds the coefficients of (C-1-k)^r * k^j, so
/// every image has a root of multiplicity r at the last lag: r = 1 forces
/// w(C-1) = 0, r = 2 also forces w'(C-1) = 0. r = 0 gives the identity.
inline Eigen::MatrixXd restriction_map(int degree, int restrictions, int lags) {
  if (degree < 0 || restrictions < 0 || lags < 1) throw ConfigError("invalid Almon dimensions");
  if (restrictions > degree) {
    throw ConfigError("number of endpoint restrictions (" + std::to_string(restrictions) +
                      ") exceeds polynomial degree (" + std::to_string(degree) + ")");
  }
  const int free = degree - restrictions + 1;
  const double last = lags - 1;
  Eigen::MatrixXd map = Eigen::MatrixXd::Zero(degree + 1, free);
  for (int j = 0; j < free; ++j) {
    for (int m = 0; m <= restrictions; ++m) {
      const double sign = (m % 2) ? -1.0 : 1.0;
      map(m + j, j) = binomial(restrictions, m) * std::pow(last, restrictions - m) * sign;
    }
  }
  return map;
}

}  // namespace tonegar::almon

#pragma once

// Linear quantile regression: min_beta sum_i rho_tau(y_i - x_i' beta).
//
// A smoothed (Huberized) check loss minimized by BFGS under a shrinking
// smoothing width gives a warm start. The finishing pass walks the vertices of
// the exact piecewise-linear objective: at a basis of k observations with zero
// residual it evaluates the directional derivative along the 2k edges, moves
// along the steepest descending edge with an exact line search over the kinks,
// and stops when no edge descends.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tonegar/error.hpp"

namespace tonegar::quantreg {

/// (tau - 1{y < yhat}) (y - yhat)
inline double pinball(double y, double yhat, double tau) {
  const double u = y - yhat;
  return (tau - (y < yhat ? 1.0 : 0.0)) * u;
}

/// Check function rho_tau(u) = u (tau - 1{u < 0}).
inline double check(double u, double tau) { return u * (tau - (u < 0.0 ? 1.0 : 0.0)); }

inline double objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                        double tau) {
  const Eigen::VectorXd r = y - x * beta;
  double s = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) s += check(r[i], tau);
  return s;
}

class RankDeficientError : public NumericalError {
 public:
  RankDeficientError(const std::string& msg, std::vector<int> columns)
      : NumericalError(msg), collinear_columns(std::move(columns)) {}
  std::vector<int> collinear_columns;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& msg, int iters, double obj)
      : NumericalError(msg), iterations(iters), best_objective(obj) {}
  int iterations;
  double best_objective;
};

struct Options {
  int smoothing_steps = 6;
  double smoothing_decay = 0.2;
  int bfgs_iterations = 200;
  int max_vertex_steps = -1;  // < 0: 100 + 20 n
};

struct Fit {
  Eigen::VectorXd beta;
  double objective = 0.0;
  int vertex_steps = 0;
  int smoothing_iterations = 0;
};

namespace detail {

// C^1 convex approximation of rho_tau: quadratic on |u| <= h.
inline double smooth_check(double u, double tau, double h, double& grad) {
  if (u > h) {
    grad = tau;
    return tau * u;
  }
  if (u < -h) {
    grad = tau - 1.0;
    return (tau - 1.0) * u;
  }
  grad = u / (2.0 * h) + tau - 0.5;
  return u * u / (4.0 * h) + u * (tau - 0.5) + h / 4.0;
}

inline double smooth_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                               double tau, double h, Eigen::VectorXd& grad) {
  const Eigen::VectorXd r = y - x * beta;
  Eigen::VectorXd dr(r.size());
  double f = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) f += smooth_check(r[i], tau, h, dr[i]);
  grad = -x.transpose() * dr;
  return f;
}

// BFGS with Armijo backtracking on the smoothed objective.
inline int bfgs(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double tau, double h, Eigen::VectorXd& beta,
                int max_iter) {
  const Eigen::Index k = beta.size();
  Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(k, k);
  Eigen::VectorXd g;
  double f = smooth_objective(x, y, beta, tau, h, g);
  // Initial inverse-Hessian scale from the quadratic zone curvature.
  hinv *= 2.0 * h / std::max(1.0, static_cast<double>(x.rows()));
  int it = 0;
  for (; it < max_iter; ++it) {
    if (g.norm() <= 1e-12 * (1.0 + std::abs(f))) break;
    Eigen::VectorXd dir = -hinv * g;
    double slope = g.dot(dir);
    if (slope >= 0.0) {
      hinv.setIdentity();
      hinv *= 2.0 * h / std::max(1.0, static_cast<double>(x.rows()));
      dir = -hinv * g;
      slope = g.dot(dir);
    }
    double step = 1.0;
    Eigen::VectorXd g_new;
    Eigen::VectorXd cand;
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      cand = beta + step * dir;
      f_new = smooth_objective(x, y, cand, tau, h, g_new);
      if (f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const Eigen::VectorXd s = cand - beta;
    const Eigen::VectorXd yk = g_new - g;
    const double sy = s.dot(yk);
    beta = cand;
    const double f_old = f;
    f = f_new;
    g = g_new;
    if (sy > 1e-16 * s.norm() * yk.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(k, k);
      hinv = (id - rho * s * yk.transpose()) * hinv * (id - rho * yk * s.transpose()) + rho * s * s.transpose();
    }
    if (std::abs(f_old - f) <= 1e-15 * (1.0 + std::abs(f))) break;
  }
  return it;
}

// Picks k linearly independent rows, preferring small |residual|.
inline std::vector<Eigen::Index> initial_basis(const Eigen::MatrixXd& x, const Eigen::VectorXd& r) {
  const Eigen::Index n = x.rows(), k = x.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(r[a]) < std::abs(r[b]); });
  std::vector<Eigen::Index> basis;
  Eigen::MatrixXd ortho(k, 0);
  for (const auto i : order) {
    Eigen::VectorXd v = x.row(i).transpose();
    const double norm0 = v.norm();
    if (norm0 == 0.0) continue;
    for (Eigen::Index j = 0; j < ortho.cols(); ++j) v -= ortho.col(j).dot(v) * ortho.col(j);
    for (Eigen::Index j = 0; j < ortho.cols(); ++j) v -= ortho.col(j).dot(v) * ortho.col(j);
    if (v.norm() <= 1e-9 * norm0) continue;
    ortho.conservativeResize(Eigen::NoChange, ortho.cols() + 1);
    ortho.col(ortho.cols() - 1) = v / v.norm();
    basis.push_back(i);
    if (static_cast<Eigen::Index>(basis.size()) == k) break;
  }
  return basis;
}

}  // namespace detail

/// Throws RankDeficientError listing the columns that are linear combinations
/// of the others (0-based, in the caller's column order).
inline void check_rank(const Eigen::MatrixXd& x) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  const auto rank = qr.rank();
  if (rank == x.cols()) return;
  std::vector<int> cols;
  for (Eigen::Index j = rank; j < x.cols(); ++j) cols.push_back(static_cast<int>(qr.colsPermutation().indices()[j]));
  std::sort(cols.begin(), cols.end());
  std::ostringstream msg;
  msg << "rank-deficient design (rank " << rank << " of " << x.cols() << "); collinear column(s):";
  for (int c : cols) msg << ' ' << c;
  throw RankDeficientError(msg.str(), cols);
}

/// Exact quantile regression of y on the columns of x (include an intercept
/// column yourself). Requires more rows than columns and full column rank.
inline Fit fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double tau, const Options& opt = {}) {
  const Eigen::Index n = x.rows(), k = x.cols();
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("quantile level must lie in (0, 1)");
  if (y.size() != n) throw ConfigError("design and response lengths differ");
  if (k == 0) throw ConfigError("design has no columns");
  if (n <= k) {
    throw ConfigError("quantile regression needs more observations (" + std::to_string(n) + ") than parameters (" +
                      std::to_string(k) + ")");
  }
  if (!x.allFinite() || !y.allFinite()) throw NumericalError("non-finite value in quantile regression input");

  // Work on columns scaled to unit max-abs; undone at the end.
  Eigen::VectorXd scale(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    scale[j] = x.col(j).cwiseAbs().maxCoeff();
    if (scale[j] == 0.0) scale[j] = 1.0;
  }
  const Eigen::MatrixXd xs = x * scale.cwiseInverse().asDiagonal();
  check_rank(xs);

  Fit out;
  // Warm start: least squares, then a continuation over the smoothing width.
  Eigen::VectorXd beta = xs.colPivHouseholderQr().solve(y);
  {
    const Eigen::VectorXd r = y - xs * beta;
    double h = std::max(r.cwiseAbs().mean(), 1e-8 * (1.0 + y.cwiseAbs().maxCoeff()));
    for (int s = 0; s < opt.smoothing_steps; ++s) {
      out.smoothing_iterations += detail::bfgs(xs, y, tau, h, beta, opt.bfgs_iterations);
      h *= opt.smoothing_decay;
    }
  }

  const double y_scale = std::max(1.0, y.cwiseAbs().maxCoeff());
  const double zero_tol = 1e-11 * y_scale;
  auto basis = detail::initial_basis(xs, y - xs * beta);
  if (static_cast<Eigen::Index>(basis.size()) != k) check_rank(xs);  // unreachable with full rank

  const int max_steps = opt.max_vertex_steps >= 0 ? opt.max_vertex_steps : static_cast<int>(100 + 20 * n);
  Eigen::MatrixXd xh(k, k);
  Eigen::VectorXd yh(k);
  std::vector<char> in_basis(static_cast<std::size_t>(n), 0);
  double prev_obj = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_beta;
  double best_obj = prev_obj;

  for (int step = 0;; ++step) {
    for (Eigen::Index j = 0; j < k; ++j) {
      xh.row(j) = xs.row(basis[static_cast<std::size_t>(j)]);
      yh[j] = y[basis[static_cast<std::size_t>(j)]];
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(xh);
    if (!lu.isInvertible()) throw NumericalError("singular basis in quantile regression vertex walk");
    const Eigen::MatrixXd binv = lu.inverse();
    beta = binv * yh;
    Eigen::VectorXd r = y - xs * beta;
    std::fill(in_basis.begin(), in_basis.end(), 0);
    for (const auto i : basis) {
      r[i] = 0.0;
      in_basis[static_cast<std::size_t>(i)] = 1;
    }
    double obj = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) obj += check(r[i], tau);
    if (obj < best_obj) {
      best_obj = obj;
      best_beta = beta;
    }
    // Roundoff can make a nominal descent step land marginally higher; stop there.
    if (obj > prev_obj + 1e-12 * (1.0 + std::abs(prev_obj))) break;
    prev_obj = obj;
    out.vertex_steps = step;

    const Eigen::MatrixXd v = xs * binv;  // v(i, j) = x_i' (column j of B^-1)
    double best_d = 0.0;
    Eigen::Index leave = -1;
    double leave_sign = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      for (const double sgn : {1.0, -1.0}) {
        // Moving along d = sgn * B^-1 e_j: basic residual j changes at rate -sgn.
        double d = check(-sgn, tau);
        for (Eigen::Index i = 0; i < n; ++i) {
          if (in_basis[static_cast<std::size_t>(i)]) continue;
          const double rate = -sgn * v(i, j);
          if (std::abs(r[i]) <= zero_tol) {
            d += check(rate, tau);
          } else {
            d += rate * (tau - (r[i] < 0.0 ? 1.0 : 0.0));
          }
        }
        if (d < best_d - 1e-12 * (1.0 + std::abs(obj))) {
          best_d = d;
          leave = j;
          leave_sign = sgn;
        }
      }
    }
    if (leave < 0) break;  // no descending edge: optimal vertex
    if (step >= max_steps) {
      throw ConvergenceError("quantile regression did not converge after " + std::to_string(step) +
                                 " vertex steps (objective " + std::to_string(obj) + ")",
                             step, obj);
    }

    // Exact line search: the slope grows by |a_i| at each kink crossed.
    struct Kink {
      double t;
      Eigen::Index i;
      double weight;
    };
    std::vector<Kink> kinks;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (in_basis[static_cast<std::size_t>(i)] || std::abs(r[i]) <= zero_tol) continue;
      const double a = leave_sign * v(i, leave);
      if (a == 0.0) continue;
      const double t = r[i] / a;
      if (t > 0.0) kinks.push_back({t, i, std::abs(a)});
    }
    std::sort(kinks.begin(), kinks.end(), [](const Kink& p, const Kink& q) {
      return p.t < q.t || (p.t == q.t && p.i < q.i);
    });
    double slope = best_d;
    Eigen::Index enter = -1;
    for (const auto& kk : kinks) {
      slope += kk.weight;
      if (slope >= 0.0) {
        enter = kk.i;
        break;
      }
    }
    if (enter < 0) throw NumericalError("quantile regression objective unbounded along an edge");
    basis[static_cast<std::size_t>(leave)] = enter;
  }

  out.beta = best_beta.cwiseQuotient(scale);
  out.objective = objective(x, y, out.beta, tau);
  return out;
}

}  // namespace tonegar::quantreg

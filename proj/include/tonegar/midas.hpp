#pragma once

// MIDAS quantile regression: next-quarter growth on weekly lags collapsed
// through a restricted unnormalized Almon polynomial.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "tonegar/almon.hpp"
#include "tonegar/calendar.hpp"
#include "tonegar/error.hpp"
#include "tonegar/quantreg.hpp"
#include "tonegar/series.hpp"

namespace tonegar::midas {

using quantreg::pinball;

inline Eigen::VectorXd almon_weights(const Eigen::VectorXd& theta_full, int lags) {
  return almon::weights(theta_full, lags);
}

inline Eigen::MatrixXd restriction_map(int degree, int restrictions, int lags) {
  return almon::restriction_map(degree, restrictions, lags);
}

struct MidasConfig {
  int weeks_per_quarter = 13;
  int lag_quarters = 8;
  int degree = 3;
  int restrictions = 2;
  std::vector<double> tau_grid{0.05, 0.25, 0.50, 0.75, 0.95};
  int horizon = 1;
  /// Rows whose lag vector has more than this share of carried-forward weeks are flagged.
  double max_filled_share = 0.2;

  [[nodiscard]] int lags() const { return lag_quarters * weeks_per_quarter; }
  [[nodiscard]] int free_params() const { return degree - restrictions + 1; }

  void validate() const {
    if (weeks_per_quarter < 1) throw ConfigError("weeks per quarter must be >= 1");
    if (lag_quarters < 1) throw ConfigError("lag quarters must be >= 1");
    if (degree < 0) throw ConfigError("polynomial degree must be >= 0");
    if (restrictions < 0 || restrictions > 2) throw ConfigError("endpoint restrictions must be 0, 1 or 2");
    if (restrictions > degree) throw ConfigError("endpoint restrictions exceed polynomial degree");
    if (lags() < degree + 1) throw ConfigError("total weekly lags must be at least degree + 1");
    if (horizon != 1) throw ConfigError("only one-quarter-ahead horizons are supported");
    if (tau_grid.empty()) throw ConfigError("quantile grid is empty");
    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
      if (!(tau_grid[i] > 0.0 && tau_grid[i] < 1.0)) throw ConfigError("quantile levels must lie in (0, 1)");
      if (i && !(tau_grid[i] > tau_grid[i - 1])) throw ConfigError("quantile grid must be strictly ascending");
    }
  }
};

struct SkippedQuarter {
  Quarter quarter;
  std::string reason;
};

struct RegressorPanel {
  MidasConfig config;
  std::vector<Quarter> quarters;  // quarter t of each row; the target is t+1
  Eigen::VectorXd y;              // growth in quarter t+1
  Eigen::MatrixXd x;              // collapsed regressors, rows x free_params
  Eigen::MatrixXd raw_lags;       // rows x C, column k = week k before the quarter end
  std::vector<int> filled;        // carried-forward cells per row
  std::vector<bool> flagged;
  std::vector<SkippedQuarter> skipped;

  [[nodiscard]] Eigen::Index rows() const { return y.size(); }

  /// Rows [begin, end).
  [[nodiscard]] RegressorPanel slice(Eigen::Index begin, Eigen::Index end) const {
    RegressorPanel p;
    p.config = config;
    const auto len = end - begin;
    p.quarters.assign(quarters.begin() + begin, quarters.begin() + end);
    p.y = y.segment(begin, len);
    p.x = x.middleRows(begin, len);
    p.raw_lags = raw_lags.middleRows(begin, len);
    p.filled.assign(filled.begin() + begin, filled.begin() + end);
    p.flagged.assign(flagged.begin() + begin, flagged.begin() + end);
    return p;
  }

  /// Keeps only rows whose quarter is in `keep` (sorted).
  [[nodiscard]] RegressorPanel select(const std::vector<Quarter>& keep) const {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < rows(); ++i) {
      if (std::binary_search(keep.begin(), keep.end(), quarters[static_cast<std::size_t>(i)])) idx.push_back(i);
    }
    RegressorPanel p;
    p.config = config;
    const auto n = static_cast<Eigen::Index>(idx.size());
    p.y.resize(n);
    p.x.resize(n, x.cols());
    p.raw_lags.resize(n, raw_lags.cols());
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto i = idx[static_cast<std::size_t>(r)];
      p.quarters.push_back(quarters[static_cast<std::size_t>(i)]);
      p.y[r] = y[i];
      p.x.row(r) = x.row(i);
      p.raw_lags.row(r) = raw_lags.row(i);
      p.filled.push_back(filled[static_cast<std::size_t>(i)]);
      p.flagged.push_back(flagged[static_cast<std::size_t>(i)]);
    }
    return p;
  }
};

/// Collapsing matrix M' Q mapping a raw lag vector (length C) to the free regressors.
inline Eigen::MatrixXd collapse_matrix(const MidasConfig& cfg) {
  const Eigen::MatrixXd q = almon::lag_power_matrix(cfg.degree, cfg.lags());
  const Eigen::MatrixXd m = almon::restriction_map(cfg.degree, cfg.restrictions, cfg.lags());
  return m.transpose() * q;
}

/// Raw lag vector for quarter t: lag 0 is the last ISO week ending on or
/// before the quarter's last day, then C-1 weeks backwards. Missing weeks take
/// the last observed value before them. Returns nullopt when the oldest lag
/// precedes the start of the series.
inline std::optional<Eigen::VectorXd> lag_vector(const WeeklySeries& weekly, Quarter t, int lags, int& filled) {
  filled = 0;
  if (weekly.empty()) return std::nullopt;
  const IsoWeek newest = last_complete_week(t);
  const IsoWeek oldest = newest.shifted(-(lags - 1));
  if (oldest < weekly.begin()->first) return std::nullopt;
  Eigen::VectorXd v(lags);
  auto it = weekly.lower_bound(oldest);
  double last = 0.0;
  bool have_last = false;
  if (it == weekly.end() || it->first != oldest) {
    auto prev = weekly.lower_bound(oldest);
    --prev;  // oldest >= begin, so a predecessor exists
    last = prev->second;
    have_last = true;
  }
  IsoWeek w = oldest;
  for (int k = lags - 1; k >= 0; --k) {
    if (it != weekly.end() && it->first == w) {
      last = it->second;
      have_last = true;
      ++it;
    } else {
      ++filled;
    }
    if (!have_last) return std::nullopt;
    v[k] = last;
    w = w.shifted(1);
  }
  return v;
}

/// One row per quarter t with a known y_{t+1} and full weekly history.
inline RegressorPanel build_design(const WeeklySeries& weekly, const QuarterlySeries& growth, const MidasConfig& cfg) {
  cfg.validate();
  const int lags = cfg.lags();
  const Eigen::MatrixXd collapse = collapse_matrix(cfg);
  RegressorPanel p;
  p.config = cfg;
  std::vector<Eigen::VectorXd> raw;
  std::vector<double> ys;
  for (const auto& [target, value] : growth) {
    const Quarter t = target.prev();
    int filled = 0;
    auto lagv = lag_vector(weekly, t, lags, filled);
    if (!lagv) {
      p.skipped.push_back({t, "insufficient weekly history"});
      continue;
    }
    p.quarters.push_back(t);
    ys.push_back(value);
    raw.push_back(std::move(*lagv));
    p.filled.push_back(filled);
    p.flagged.push_back(filled > cfg.max_filled_share * lags);
  }
  const auto n = static_cast<Eigen::Index>(raw.size());
  p.y = Eigen::Map<const Eigen::VectorXd>(ys.data(), n);
  p.raw_lags.resize(n, lags);
  for (Eigen::Index i = 0; i < n; ++i) p.raw_lags.row(i) = raw[static_cast<std::size_t>(i)].transpose();
  p.x = p.raw_lags * collapse.transpose();
  return p;
}

struct MidasQrModel {
  double tau = 0.5;
  double intercept = 0.0;
  Eigen::VectorXd theta_free;
  Eigen::VectorXd theta_full;
  Eigen::VectorXd implied_weights;  // w(k), k = 0..C-1
  double objective = 0.0;
  MidasConfig config;
};

inline Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd d(x.rows(), x.cols() + 1);
  d.col(0).setOnes();
  d.rightCols(x.cols()) = x;
  return d;
}

/// Minimizes the pinball loss of beta0 + X_t' theta_free over the panel rows.
inline MidasQrModel fit_quantile(const RegressorPanel& panel, double tau, const quantreg::Options& opt = {}) {
  const auto& cfg = panel.config;
  const Eigen::MatrixXd design = with_intercept(panel.x);
  quantreg::Fit fit;
  try {
    fit = quantreg::fit(design, panel.y, tau, opt);
  } catch (const quantreg::RankDeficientError& e) {
    std::string names;
    for (int c : e.collinear_columns) names += (names.empty() ? "" : ", ") + (c == 0 ? std::string("intercept")
                                                                                      : "almon_" + std::to_string(c - 1));
    throw quantreg::RankDeficientError("MIDAS design is rank deficient; collinear: " + names, e.collinear_columns);
  }
  MidasQrModel m;
  m.tau = tau;
  m.config = cfg;
  m.intercept = fit.beta[0];
  m.theta_free = fit.beta.tail(fit.beta.size() - 1);
  m.theta_full = almon::restriction_map(cfg.degree, cfg.restrictions, cfg.lags()) * m.theta_free;
  m.implied_weights = almon::weights(m.theta_full, cfg.lags());
  m.objective = fit.objective;
  return m;
}

inline double predict(const MidasQrModel& m, const Eigen::VectorXd& x_row) {
  if (x_row.size() != m.theta_free.size()) {
    throw ConfigError("regressor vector has " + std::to_string(x_row.size()) + " entries, model expects " +
                      std::to_string(m.theta_free.size()));
  }
  return m.intercept + x_row.dot(m.theta_free);
}

/// Same prediction through the implied weekly weights: beta0 + sum_k w(k) x_k.
inline double predict_from_lags(const MidasQrModel& m, const Eigen::VectorXd& raw_lags) {
  if (raw_lags.size() != m.implied_weights.size()) throw ConfigError("lag vector length mismatch");
  return m.intercept + raw_lags.dot(m.implied_weights);
}

/// Sorts predicted quantiles so they are nondecreasing in tau.
inline std::vector<double> rearrange(std::vector<double> predictions) {
  std::sort(predictions.begin(), predictions.end());
  return predictions;
}

struct QuantileModels {
  std::vector<MidasQrModel> models;  // ascending tau

  [[nodiscard]] std::vector<double> taus() const {
    std::vector<double> t;
    for (const auto& m : models) t.push_back(m.tau);
    return t;
  }

  /// Predictions at every tau, rearranged to be monotone.
  [[nodiscard]] std::vector<double> predict(const Eigen::VectorXd& x_row) const {
    std::vector<double> out;
    for (const auto& m : models) out.push_back(midas::predict(m, x_row));
    return rearrange(std::move(out));
  }
};

inline QuantileModels fit_quantile_grid(const RegressorPanel& panel, const std::vector<double>& tau_grid,
                                        const quantreg::Options& opt = {}) {
  if (!std::is_sorted(tau_grid.begin(), tau_grid.end())) throw ConfigError("quantile grid must be ascending");
  QuantileModels out;
  for (double tau : tau_grid) out.models.push_back(fit_quantile(panel, tau, opt));
  return out;
}

inline nlohmann::json to_json(const MidasQrModel& m) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"tau", m.tau},
          {"intercept", m.intercept},
          {"theta_free", vec(m.theta_free)},
          {"theta_full", vec(m.theta_full)},
          {"implied_weights", vec(m.implied_weights)},
          {"objective", m.objective},
          {"config",
           {{"weeks_per_quarter", m.config.weeks_per_quarter},
            {"lag_quarters", m.config.lag_quarters},
            {"degree", m.config.degree},
            {"restrictions", m.config.restrictions}}}};
}

}  // namespace tonegar::midas

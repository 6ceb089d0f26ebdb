#pragma once

// Rolling out-of-sample backtest, pinball aggregates, skill scores and the
// Diebold-Mariano comparison.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tonegar/calendar.hpp"
#include "tonegar/delimited.hpp"
#include "tonegar/error.hpp"
#include "tonegar/midas.hpp"
#include "tonegar/quantreg.hpp"
#include "tonegar/series.hpp"
#include "tonegar/skew_t.hpp"
#include "tonegar/student_t.hpp"

namespace tonegar::eval {

enum class Headline { SkewT, RawQuantile };

struct BacktestConfig {
  int window = 80;
  int horizon = 1;
  double tau = 0.05;
  midas::MidasConfig model;
  Headline headline = Headline::SkewT;
  quantreg::Options solver{};
  dist::FitOptions skew{};

  void validate() const {
    model.validate();
    if (horizon != 1) throw ConfigError("only one-quarter-ahead backtests are supported");
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("evaluation quantile must lie in (0, 1)");
    if (window < model.free_params() + 10) {
      throw ConfigError("rolling window of " + std::to_string(window) + " quarters is below free parameters + 10");
    }
    if (headline == Headline::SkewT) {
      if (model.tau_grid.size() < 4) throw ConfigError("skewed t headline needs at least 4 quantile levels");
      if (std::find(model.tau_grid.begin(), model.tau_grid.end(), tau) == model.tau_grid.end()) {
        // The raw quantile is reported alongside and must be on the grid.
        throw ConfigError("evaluation quantile must be one of the grid levels");
      }
    }
  }
};

struct ForecastRecord {
  Quarter origin;
  Quarter target;
  std::string predictor;
  double forecast = 0.0;   // headline
  double raw_quantile = 0.0;
  double realized = 0.0;
  double loss = 0.0;
  std::optional<dist::SkewTParams> skew;
  std::optional<std::string> error;

  [[nodiscard]] bool ok() const { return !error.has_value(); }
};

namespace detail {

inline std::vector<double> grid_for(const BacktestConfig& cfg) {
  if (cfg.headline == Headline::RawQuantile) return {cfg.tau};
  return cfg.model.tau_grid;
}

}  // namespace detail

/// Forecast for panel row `origin` fitted on rows [origin - window, origin).
inline ForecastRecord forecast_at(const midas::RegressorPanel& panel, Eigen::Index origin, const std::string& name,
                                  const BacktestConfig& cfg) {
  ForecastRecord rec;
  rec.origin = panel.quarters[static_cast<std::size_t>(origin)];
  rec.target = rec.origin.next();
  rec.predictor = name;
  rec.realized = panel.y[origin];
  try {
    const auto train = panel.slice(origin - cfg.window, origin);
    const auto taus = detail::grid_for(cfg);
    const auto models = midas::fit_quantile_grid(train, taus, cfg.solver);
    const Eigen::VectorXd x = panel.x.row(origin).transpose();
    const auto q = models.predict(x);
    const auto at = std::find(taus.begin(), taus.end(), cfg.tau) - taus.begin();
    rec.raw_quantile = q[static_cast<std::size_t>(at)];
    rec.forecast = rec.raw_quantile;
    if (cfg.headline == Headline::SkewT) {
      std::map<double, double> qmap;
      for (std::size_t i = 0; i < taus.size(); ++i) qmap[taus[i]] = q[i];
      const auto fit = dist::fit_skew_t(qmap, cfg.skew);
      rec.skew = fit.params;
      rec.forecast = dist::gar(fit.params, cfg.tau);
    }
    rec.loss = quantreg::pinball(rec.realized, rec.forecast, cfg.tau);
  } catch (const Error& e) {
    rec.error = e.what();
    rec.loss = 0.0;
  }
  return rec;
}

/// One record per origin row o in [window, rows): the model is fitted on the
/// `window` rows before o (whose targets are all known at o) and predicts
/// row o's target quarter.
inline std::vector<ForecastRecord> rolling_backtest(const midas::RegressorPanel& panel, const std::string& name,
                                                    const BacktestConfig& cfg) {
  cfg.validate();
  if (panel.rows() < cfg.window + 1) {
    throw ConfigError("panel of " + std::to_string(panel.rows()) + " rows is too short for a " +
                      std::to_string(cfg.window) + "-quarter window");
  }
  std::vector<ForecastRecord> out;
  for (Eigen::Index o = cfg.window; o < panel.rows(); ++o) out.push_back(forecast_at(panel, o, name, cfg));
  return out;
}

enum class Aggregate { Mean, Median };

inline std::string_view to_string(Aggregate a) { return a == Aggregate::Mean ? "mean" : "median"; }

inline double aggregate(std::vector<double> losses, Aggregate mode) {
  if (losses.empty()) throw Error("cannot aggregate an empty loss series");
  if (mode == Aggregate::Mean) {
    double s = 0.0;
    for (double l : losses) s += l;
    return s / static_cast<double>(losses.size());
  }
  std::sort(losses.begin(), losses.end());
  const auto n = losses.size();
  return n % 2 ? losses[n / 2] : 0.5 * (losses[n / 2 - 1] + losses[n / 2]);
}

/// Aggregate pinball loss over the successful records.
inline double aggregate_loss(const std::vector<ForecastRecord>& records, Aggregate mode) {
  std::vector<double> l;
  for (const auto& r : records) {
    if (r.ok()) l.push_back(r.loss);
  }
  return aggregate(std::move(l), mode);
}

inline double qss(double qs_model, double qs_benchmark) {
  if (!(qs_benchmark > 0.0)) throw Error("quantile skill score needs a positive benchmark loss");
  return 1.0 - qs_model / qs_benchmark;
}

struct DmResult {
  double statistic = 0.0;
  double p_value = 0.5;
  std::size_t n = 0;
  bool degenerate = false;  // zero variance of the loss differential
  bool small_sample = true;
};

/// Diebold-Mariano test of equal accuracy at horizon one, d = l1 - l2. The
/// p-value is one-sided for "series 1 has lower loss"; with small_sample the
/// statistic gets the Harvey-Leybourne-Newbold factor and a t(n-1) reference.
inline DmResult dm_test(const std::vector<double>& l1, const std::vector<double>& l2, bool small_sample = true) {
  if (l1.size() != l2.size()) throw Error("loss series differ in length");
  const std::size_t n = l1.size();
  if (n < 5) throw Error("Diebold-Mariano test needs at least 5 paired losses");
  const double nn = static_cast<double>(n);
  std::vector<double> d(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = l1[i] - l2[i];
    mean += d[i];
  }
  mean /= nn;
  double gamma0 = 0.0;
  for (double v : d) gamma0 += (v - mean) * (v - mean);
  gamma0 /= nn;

  DmResult r;
  r.n = n;
  r.small_sample = small_sample;
  auto reference = [&](double s) { return small_sample ? dist::StudentT(nn - 1.0).cdf(s) : dist::normal_cdf(s); };
  if (!(gamma0 > 0.0)) {
    r.degenerate = true;
    r.statistic = mean == 0.0 ? 0.0 : (mean < 0.0 ? -HUGE_VAL : HUGE_VAL);
    r.p_value = mean == 0.0 ? 0.5 : (mean < 0.0 ? 0.0 : 1.0);
    return r;
  }
  r.statistic = mean / std::sqrt(gamma0 / nn);
  if (small_sample) {
    constexpr double h = 1.0;
    r.statistic *= std::sqrt((nn + 1.0 - 2.0 * h + h * (h - 1.0) / nn) / nn);
  }
  r.p_value = reference(r.statistic);
  return r;
}

struct LossSummary {
  std::string predictor;
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
};

struct EvalSummary {
  std::string subset = "full";
  bool empty = false;
  std::size_t excluded = 0;  // records dropped for fit errors on either side
  std::vector<std::string> excluded_reasons;
  LossSummary model;
  LossSummary benchmark;
  double qss_mean = 0.0;
  double qss_median = 0.0;
  std::optional<DmResult> dm;
};

/// Pairs model and benchmark records by target quarter and scores the pairs
/// where both forecasts succeeded. `keep` restricts the target quarters.
template <typename Keep>
EvalSummary summarize_if(const std::vector<ForecastRecord>& model, const std::vector<ForecastRecord>& benchmark,
                         Keep keep, std::string subset = "full") {
  EvalSummary s;
  s.subset = std::move(subset);
  s.model.predictor = model.empty() ? "model" : model.front().predictor;
  s.benchmark.predictor = benchmark.empty() ? "benchmark" : benchmark.front().predictor;
  std::map<Quarter, const ForecastRecord*> bench;
  for (const auto& b : benchmark) bench[b.target] = &b;
  std::vector<const ForecastRecord*> sorted;
  for (const auto& m : model) sorted.push_back(&m);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->origin < b->origin; });
  std::vector<double> lm, lb;
  for (const auto* m : sorted) {
    if (!keep(m->target)) continue;
    const auto it = bench.find(m->target);
    if (it == bench.end()) {
      ++s.excluded;
      s.excluded_reasons.push_back(m->target.str() + ": no benchmark forecast");
      continue;
    }
    if (!m->ok() || !it->second->ok()) {
      ++s.excluded;
      s.excluded_reasons.push_back(m->target.str() + ": " + (m->ok() ? *it->second->error : *m->error));
      continue;
    }
    lm.push_back(m->loss);
    lb.push_back(it->second->loss);
  }
  if (lm.empty()) {
    s.empty = true;
    return s;
  }
  s.model.n = s.benchmark.n = lm.size();
  s.model.mean = aggregate(lm, Aggregate::Mean);
  s.model.median = aggregate(lm, Aggregate::Median);
  s.benchmark.mean = aggregate(lb, Aggregate::Mean);
  s.benchmark.median = aggregate(lb, Aggregate::Median);
  s.qss_mean = s.benchmark.mean > 0.0 ? qss(s.model.mean, s.benchmark.mean) : std::nan("");
  s.qss_median = s.benchmark.median > 0.0 ? qss(s.model.median, s.benchmark.median) : std::nan("");
  if (lm.size() >= 5) s.dm = dm_test(lm, lb, true);
  return s;
}

inline EvalSummary summarize(const std::vector<ForecastRecord>& model, const std::vector<ForecastRecord>& benchmark) {
  return summarize_if(model, benchmark, [](Quarter) { return true; });
}

using RecessionFlags = std::map<Quarter, bool>;

/// Summary over records whose target quarter is flagged. Every target must
/// have a flag.
inline EvalSummary recession_subset(const std::vector<ForecastRecord>& model,
                                    const std::vector<ForecastRecord>& benchmark, const RecessionFlags& flags) {
  for (const auto* set : {&model, &benchmark}) {
    for (const auto& r : *set) {
      if (!flags.count(r.target)) throw ConfigError("no recession flag for target quarter " + r.target.str());
    }
  }
  return summarize_if(
      model, benchmark, [&](Quarter q) { return flags.at(q); }, "recession");
}

inline RecessionFlags read_recession_flags(const std::filesystem::path& path) {
  const auto t = delimited::read_table(path);
  const auto cq = t.column("quarter");
  const auto cf = t.find_column("recession") ? *t.find_column("recession") : (cq == 0 ? 1 : 0);
  RecessionFlags out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto where = path.string() + ":" + std::to_string(t.line_numbers[r]);
    if (row.size() <= std::max(cq, cf)) throw IoError(where + ": too few fields");
    const auto v = delimited::parse_int(row[cf]);
    if (!v || (*v != 0 && *v != 1)) throw IoError(where + ": recession flag must be 0 or 1");
    out[Quarter::parse(row[cq])] = *v == 1;
  }
  return out;
}

/// Restricts both panels to their common quarters.
inline std::pair<midas::RegressorPanel, midas::RegressorPanel> align(const midas::RegressorPanel& a,
                                                                     const midas::RegressorPanel& b) {
  std::vector<Quarter> common;
  std::set_intersection(a.quarters.begin(), a.quarters.end(), b.quarters.begin(), b.quarters.end(),
                        std::back_inserter(common));
  return {a.select(common), b.select(common)};
}

struct Comparison {
  std::vector<ForecastRecord> model;
  std::vector<ForecastRecord> benchmark;
  EvalSummary full;
  std::optional<EvalSummary> recession;
};

struct Predictor {
  std::string name;
  WeeklySeries weekly;
};

/// Builds both designs, aligns them and runs the two backtests.
inline Comparison compare(const Predictor& model, const Predictor& benchmark, const QuarterlySeries& growth,
                          const BacktestConfig& cfg, const RecessionFlags* flags = nullptr) {
  cfg.validate();
  auto [pm, pb] = align(midas::build_design(model.weekly, growth, cfg.model),
                        midas::build_design(benchmark.weekly, growth, cfg.model));
  Comparison c;
  c.model = rolling_backtest(pm, model.name, cfg);
  c.benchmark = rolling_backtest(pb, benchmark.name, cfg);
  c.full = summarize(c.model, c.benchmark);
  if (flags) c.recession = recession_subset(c.model, c.benchmark, *flags);
  return c;
}

struct GridCell {
  int lag_quarters = 0;
  int window = 0;
  bool feasible = true;
  std::string reason;
  std::size_t panel_rows = 0;
  std::size_t records = 0;
  EvalSummary summary;
};

/// One cell per (lag order, window). Cells whose aligned panel has fewer than
/// window + 1 rows are marked infeasible.
inline std::vector<GridCell> robustness_grid(const Predictor& model, const Predictor& benchmark,
                                             const QuarterlySeries& growth, const BacktestConfig& base,
                                             const std::vector<int>& lag_orders = {2, 4, 6, 8},
                                             const std::vector<int>& windows = {40, 60, 80, 100}) {
  std::vector<GridCell> out;
  for (int lag : lag_orders) {
    auto cfg = base;
    cfg.model.lag_quarters = lag;
    cfg.model.validate();
    auto [pm, pb] = align(midas::build_design(model.weekly, growth, cfg.model),
                          midas::build_design(benchmark.weekly, growth, cfg.model));
    for (int w : windows) {
      GridCell cell;
      cell.lag_quarters = lag;
      cell.window = w;
      cell.panel_rows = static_cast<std::size_t>(pm.rows());
      cfg.window = w;
      try {
        cfg.validate();
      } catch (const ConfigError& e) {
        cell.feasible = false;
        cell.reason = e.what();
        out.push_back(std::move(cell));
        continue;
      }
      if (pm.rows() < w + 1) {
        cell.feasible = false;
        cell.reason = "panel has " + std::to_string(pm.rows()) + " rows, window needs " + std::to_string(w + 1);
        out.push_back(std::move(cell));
        continue;
      }
      const auto rm = rolling_backtest(pm, model.name, cfg);
      const auto rb = rolling_backtest(pb, benchmark.name, cfg);
      cell.records = rm.size();
      cell.summary = summarize(rm, rb);
      out.push_back(std::move(cell));
    }
  }
  return out;
}

inline delimited::Writer records_writer(const std::vector<ForecastRecord>& records) {
  delimited::Writer w({"origin", "target", "predictor", "forecast", "raw_quantile", "realized", "loss", "mu", "sigma",
                       "alpha", "nu", "error"});
  for (const auto& r : records) {
    auto opt = [&](double dist::SkewTParams::*f) {
      return r.skew ? delimited::format_double((*r.skew).*f) : std::string{};
    };
    w.row({r.origin.str(), r.target.str(), r.predictor, r.ok() ? delimited::format_double(r.forecast) : "",
           r.ok() ? delimited::format_double(r.raw_quantile) : "", delimited::format_double(r.realized),
           r.ok() ? delimited::format_double(r.loss) : "", opt(&dist::SkewTParams::mu),
           opt(&dist::SkewTParams::sigma), opt(&dist::SkewTParams::alpha), opt(&dist::SkewTParams::nu),
           r.error.value_or("")});
  }
  return w;
}

inline delimited::Writer summary_writer(const std::vector<EvalSummary>& summaries) {
  delimited::Writer w({"subset", "model", "benchmark", "n", "excluded", "model_mean", "model_median", "benchmark_mean",
                       "benchmark_median", "qss_mean", "qss_median", "dm_stat", "dm_p_value", "dm_degenerate"});
  for (const auto& s : summaries) {
    if (s.empty) {
      w.row({s.subset, s.model.predictor, s.benchmark.predictor, "0", std::to_string(s.excluded), "", "", "", "", "",
             "", "", "", ""});
      continue;
    }
    w.row({s.subset, s.model.predictor, s.benchmark.predictor, std::to_string(s.model.n), std::to_string(s.excluded),
           delimited::format_double(s.model.mean), delimited::format_double(s.model.median),
           delimited::format_double(s.benchmark.mean), delimited::format_double(s.benchmark.median),
           delimited::format_double(s.qss_mean), delimited::format_double(s.qss_median),
           s.dm ? delimited::format_double(s.dm->statistic) : "", s.dm ? delimited::format_double(s.dm->p_value) : "",
           s.dm ? (s.dm->degenerate ? "1" : "0") : ""});
  }
  return w;
}

inline delimited::Writer grid_writer(const std::vector<GridCell>& cells) {
  delimited::Writer w({"lag_quarters", "window", "feasible", "panel_rows", "records", "model_mean", "model_median",
                       "benchmark_mean", "benchmark_median", "qss_mean", "qss_median", "dm_stat", "dm_p_value",
                       "reason"});
  for (const auto& c : cells) {
    if (!c.feasible || c.summary.empty) {
      w.row({std::to_string(c.lag_quarters), std::to_string(c.window), c.feasible ? "1" : "0",
             std::to_string(c.panel_rows), std::to_string(c.records), "", "", "", "", "", "", "", "",
             c.feasible ? "no scored records" : c.reason});
      continue;
    }
    const auto& s = c.summary;
    w.row({std::to_string(c.lag_quarters), std::to_string(c.window), "1", std::to_string(c.panel_rows),
           std::to_string(c.records), delimited::format_double(s.model.mean), delimited::format_double(s.model.median),
           delimited::format_double(s.benchmark.mean), delimited::format_double(s.benchmark.median),
           delimited::format_double(s.qss_mean), delimited::format_double(s.qss_median),
           s.dm ? delimited::format_double(s.dm->statistic) : "", s.dm ? delimited::format_double(s.dm->p_value) : "",
           ""});
  }
  return w;
}

/// Actual growth against both headline forecasts, by target quarter.
inline delimited::Writer forecast_plot_writer(const Comparison& c) {
  delimited::Writer w({"target", "actual", "model_forecast", "benchmark_forecast"});
  std::map<Quarter, const ForecastRecord*> bench;
  for (const auto& b : c.benchmark) bench[b.target] = &b;
  for (const auto& m : c.model) {
    const auto it = bench.find(m.target);
    const auto* b = it == bench.end() ? nullptr : it->second;
    w.row({m.target.str(), delimited::format_double(m.realized), m.ok() ? delimited::format_double(m.forecast) : "",
           b && b->ok() ? delimited::format_double(b->forecast) : ""});
  }
  return w;
}

/// Forecast errors (actual minus forecast) for both predictors.
inline delimited::Writer error_plot_writer(const Comparison& c) {
  delimited::Writer w({"target", "model_error", "benchmark_error"});
  std::map<Quarter, const ForecastRecord*> bench;
  for (const auto& b : c.benchmark) bench[b.target] = &b;
  for (const auto& m : c.model) {
    const auto it = bench.find(m.target);
    const auto* b = it == bench.end() ? nullptr : it->second;
    w.row({m.target.str(), m.ok() ? delimited::format_double(m.realized - m.forecast) : "",
           b && b->ok() ? delimited::format_double(b->realized - b->forecast) : ""});
  }
  return w;
}

}  // namespace tonegar::eval

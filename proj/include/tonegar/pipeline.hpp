#pragma once

// Pipeline configuration and the stage commands behind the command-line tool.
// Every stage reads its inputs from disk and writes delimited outputs plus the
// resolved configuration, so running stages one by one equals one combined run.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tonegar/corpus.hpp"
#include "tonegar/delimited.hpp"
#include "tonegar/error.hpp"
#include "tonegar/eval.hpp"
#include "tonegar/index.hpp"
#include "tonegar/midas.hpp"
#include "tonegar/quantreg.hpp"
#include "tonegar/sentiment.hpp"
#include "tonegar/series.hpp"
#include "tonegar/skew_t.hpp"
#include "tonegar/synth.hpp"

namespace tonegar::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char* kOutputRootEnv = "TONEGAR_OUTPUT_ROOT";

struct Paths {
  fs::path metadata;
  fs::path text_root;  // defaults to the metadata file's directory
  fs::path lexicon;
  fs::path caps_daily;
  fs::path caps_quarterly;
  fs::path gdp;
  fs::path benchmark;
  fs::path recession;
  fs::path output = "tonegar-out";
};

struct PipelineConfig {
  Paths paths;
  corpus::FiltrationConfig filter;
  eval::BacktestConfig backtest;
  index::Series series = index::Series::Tone;
  std::string model_name = "tone";
  std::string benchmark_name = "benchmark";
  std::string gdp_column = "growth";
  std::vector<int> grid_lags{2, 4, 6, 8};
  std::vector<int> grid_windows{40, 60, 80, 100};
  synth::SynthConfig synth;
  std::uint64_t seed = 20240917;

  [[nodiscard]] fs::path text_root() const {
    if (!paths.text_root.empty()) return paths.text_root;
    return paths.metadata.has_parent_path() ? paths.metadata.parent_path() : fs::path(".");
  }
  [[nodiscard]] fs::path stage_dir(const std::string& stage) const { return paths.output / stage; }
};

inline std::string_view headline_name(eval::Headline h) { return h == eval::Headline::SkewT ? "skew_t" : "raw"; }

inline json to_json(const PipelineConfig& c) {
  const auto& m = c.backtest.model;
  return {{"paths",
           {{"metadata", c.paths.metadata.generic_string()},
            {"text_root", c.paths.text_root.generic_string()},
            {"lexicon", c.paths.lexicon.generic_string()},
            {"caps_daily", c.paths.caps_daily.generic_string()},
            {"caps_quarterly", c.paths.caps_quarterly.generic_string()},
            {"gdp", c.paths.gdp.generic_string()},
            {"benchmark", c.paths.benchmark.generic_string()},
            {"recession", c.paths.recession.generic_string()},
            {"output", c.paths.output.generic_string()}}},
          {"filter", {{"word_floor", c.filter.word_floor}, {"max_filings_per_year", c.filter.max_filings_per_year}}},
          {"midas",
           {{"weeks_per_quarter", m.weeks_per_quarter},
            {"lag_quarters", m.lag_quarters},
            {"degree", m.degree},
            {"restrictions", m.restrictions},
            {"tau_grid", m.tau_grid},
            {"horizon", m.horizon}}},
          {"backtest",
           {{"window", c.backtest.window},
            {"tau", c.backtest.tau},
            {"headline", headline_name(c.backtest.headline)},
            {"series", index::to_string(c.series)},
            {"model_name", c.model_name},
            {"benchmark_name", c.benchmark_name},
            {"gdp_column", c.gdp_column}}},
          {"grid", {{"lag_orders", c.grid_lags}, {"windows", c.grid_windows}}},
          {"synth", synth::config_json(c.synth)},
          {"seed", c.seed}};
}

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* key) { return k == key; })) {
      throw ConfigError("unknown setting '" + where + "." + k + "'");
    }
  }
}

template <typename T>
void get(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

inline fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace detail

/// Reads a configuration object; relative paths resolve against `base_dir`.
inline PipelineConfig config_from_json(const json& j, const fs::path& base_dir = ".") {
  PipelineConfig c;
  try {
    detail::reject_unknown(j, {"paths", "filter", "midas", "backtest", "grid", "synth", "seed"}, "config");
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      detail::reject_unknown(p, {"metadata", "text_root", "lexicon", "caps_daily", "caps_quarterly", "gdp",
                                 "benchmark", "recession", "output"},
                             "paths");
      auto path = [&](const char* key, fs::path& field) {
        if (p.contains(key)) field = detail::resolve(base_dir, p.at(key).get<std::string>());
      };
      path("metadata", c.paths.metadata), path("text_root", c.paths.text_root), path("lexicon", c.paths.lexicon);
      path("caps_daily", c.paths.caps_daily), path("caps_quarterly", c.paths.caps_quarterly);
      path("gdp", c.paths.gdp), path("benchmark", c.paths.benchmark), path("recession", c.paths.recession);
      path("output", c.paths.output);
    }
    if (j.contains("filter")) {
      const auto& f = j.at("filter");
      detail::reject_unknown(f, {"word_floor", "max_filings_per_year"}, "filter");
      detail::get(f, "word_floor", c.filter.word_floor);
      detail::get(f, "max_filings_per_year", c.filter.max_filings_per_year);
    }
    if (j.contains("midas")) {
      const auto& m = j.at("midas");
      detail::reject_unknown(m, {"weeks_per_quarter", "lag_quarters", "degree", "restrictions", "tau_grid", "horizon"},
                             "midas");
      auto& mc = c.backtest.model;
      detail::get(m, "weeks_per_quarter", mc.weeks_per_quarter);
      detail::get(m, "lag_quarters", mc.lag_quarters);
      detail::get(m, "degree", mc.degree);
      detail::get(m, "restrictions", mc.restrictions);
      detail::get(m, "tau_grid", mc.tau_grid);
      detail::get(m, "horizon", mc.horizon);
    }
    if (j.contains("backtest")) {
      const auto& b = j.at("backtest");
      detail::reject_unknown(b, {"window", "tau", "headline", "series", "model_name", "benchmark_name", "gdp_column"},
                             "backtest");
      detail::get(b, "window", c.backtest.window);
      detail::get(b, "tau", c.backtest.tau);
      detail::get(b, "model_name", c.model_name);
      detail::get(b, "benchmark_name", c.benchmark_name);
      detail::get(b, "gdp_column", c.gdp_column);
      if (b.contains("headline")) {
        const auto h = b.at("headline").get<std::string>();
        if (h == "skew_t") {
          c.backtest.headline = eval::Headline::SkewT;
        } else if (h == "raw") {
          c.backtest.headline = eval::Headline::RawQuantile;
        } else {
          throw ConfigError("backtest.headline must be 'skew_t' or 'raw'");
        }
      }
      if (b.contains("series")) {
        const auto s = b.at("series").get<std::string>();
        bool found = false;
        for (auto v : index::kAllSeries) {
          if (delimited::lower(index::to_string(v)) == delimited::lower(s)) c.series = v, found = true;
        }
        if (!found) throw ConfigError("unknown backtest.series '" + s + "'");
      }
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      detail::reject_unknown(g, {"lag_orders", "windows"}, "grid");
      detail::get(g, "lag_orders", c.grid_lags);
      detail::get(g, "windows", c.grid_windows);
    }
    detail::get(j, "seed", c.seed);
    c.synth.seed = c.seed;
    if (j.contains("synth")) c.synth = synth::config_from_json(j.at("synth"), c.synth);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  return c;
}

inline PipelineConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open configuration file " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("configuration file " + file.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j, file.has_parent_path() ? file.parent_path() : fs::path("."));
}

/// The output root environment variable wins over the configured directory.
inline void apply_environment(PipelineConfig& c) {
  if (const char* root = std::getenv(kOutputRootEnv); root && *root) c.paths.output = root;
}

/// Every configured input path must exist before any stage runs.
inline void validate_inputs(const PipelineConfig& c) {
  const std::pair<const char*, const fs::path*> inputs[] = {
      {"metadata", &c.paths.metadata},   {"text_root", &c.paths.text_root}, {"lexicon", &c.paths.lexicon},
      {"caps_daily", &c.paths.caps_daily}, {"caps_quarterly", &c.paths.caps_quarterly}, {"gdp", &c.paths.gdp},
      {"benchmark", &c.paths.benchmark}, {"recession", &c.paths.recession}};
  for (const auto& [name, path] : inputs) {
    if (!path->empty() && !fs::exists(*path)) {
      throw ConfigError(std::string("configured ") + name + " path does not exist: " + path->string());
    }
  }
  c.backtest.model.validate();
  if (c.filter.word_floor == 0) throw ConfigError("word floor must be positive");
}

inline void require(const fs::path& p, const char* what) {
  if (p.empty()) throw ConfigError(std::string("no ") + what + " path configured");
  if (!fs::exists(p)) throw IoError(std::string(what) + " not found: " + p.string());
}

inline void write_text(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << s;
}

inline void write_resolved(const PipelineConfig& c, const std::string& stage) {
  write_text(c.stage_dir(stage) / "resolved_config.json", to_json(c).dump(2) + "\n");
}

// ---------------------------------------------------------------- filter

struct FilterOutputs {
  corpus::FiltrationResult result;
  std::vector<corpus::RowError> row_errors;
};

/// Per-year filing counts (figure 1) and word-count mean/median (figures 2-3) per stage.
inline void write_stage_plots(const corpus::FiltrationReport& rep, const fs::path& dir) {
  std::set<int> years;
  for (const auto& s : rep.stages) {
    for (const auto& [y, st] : s.words_by_year) years.insert(y);
  }
  std::vector<std::string> header{"year"};
  for (const auto& s : rep.stages) header.push_back(s.name);
  delimited::Writer counts(header), means(header), medians(header);
  for (int y : years) {
    std::vector<std::string> c{std::to_string(y)}, m{std::to_string(y)}, md{std::to_string(y)};
    for (const auto& s : rep.stages) {
      const auto it = s.words_by_year.find(y);
      const bool has = it != s.words_by_year.end();
      c.push_back(std::to_string(has ? it->second.n : 0));
      m.push_back(has ? delimited::format_double(it->second.mean) : "");
      md.push_back(has ? delimited::format_double(it->second.median) : "");
    }
    counts.row(c), means.row(m), medians.row(md);
  }
  counts.save(dir / "fig1_filings_per_year.csv");
  means.save(dir / "fig2_mean_words_per_year.csv");
  medians.save(dir / "fig3_median_words_per_year.csv");

  delimited::Writer table({"stage", "n", "mean_words", "median_words", "sd_words"});
  for (const auto& s : rep.stages) table.add(s.name, s.words.n, s.words.mean, s.words.median, s.words.stddev);
  table.save(dir / "word_count_by_stage.csv");
}

inline FilterOutputs cmd_filter(const PipelineConfig& c) {
  validate_inputs(c);
  if (c.paths.metadata.empty()) throw ConfigError("no metadata path configured");
  FilterOutputs out;
  std::vector<corpus::FilingRecord> records;
  fs::path metadata = c.paths.metadata;
  fs::path text_root = c.text_root();
  if (fs::is_directory(metadata)) {
    text_root = c.paths.text_root.empty() ? metadata : c.paths.text_root;
    metadata /= "metadata.csv";
  }
  if (fs::exists(metadata)) {
    auto loaded = corpus::load_corpus(metadata, text_root);
    records = std::move(loaded.records);
    out.row_errors = std::move(loaded.errors);
  }
  out.result = corpus::run_filtration(std::move(records), c.filter);

  const auto dir = c.stage_dir("filter");
  fs::create_directories(dir);
  write_text(dir / "filtration_report.csv", out.result.report.to_text());
  corpus::manifest_writer(out.result.records).save(dir / "manifest.csv");
  delimited::Writer reasons({"reason", "count"});
  for (const auto& [r, n] : out.result.report.drop_reasons) reasons.add(r, n);
  reasons.save(dir / "drop_reasons.csv");
  delimited::Writer errs({"line", "doc_id", "message"});
  for (const auto& e : out.row_errors) errs.add(e.line, e.doc_id, e.message);
  errs.save(dir / "ingest_errors.csv");
  write_stage_plots(out.result.report, dir);
  // Later stages read the texts through the manifest, relative to this root.
  write_text(dir / "text_root.txt", fs::absolute(text_root).lexically_normal().generic_string() + "\n");
  write_resolved(c, "filter");
  return out;
}

// ---------------------------------------------------------------- index

inline index::CapSources load_caps(const PipelineConfig& c) {
  index::CapSources caps;
  if (!c.paths.caps_daily.empty()) index::load_daily_caps(c.paths.caps_daily, caps);
  if (!c.paths.caps_quarterly.empty()) index::load_quarterly_caps(c.paths.caps_quarterly, caps);
  if (caps.empty()) throw ConfigError("no market-cap records: configure caps_daily and/or caps_quarterly");
  return caps;
}

struct IndexOutputs {
  std::vector<sentiment::SentimentObservation> observations;
  std::map<index::Series, index::IndexBuild> builds;
};

inline fs::path index_file(const PipelineConfig& c, index::Series s) {
  return c.stage_dir("index") / ("weekly_" + delimited::lower(index::to_string(s)) + ".csv");
}

inline IndexOutputs cmd_index(const PipelineConfig& c) {
  validate_inputs(c);
  require(c.paths.lexicon, "lexicon");
  const auto fdir = c.stage_dir("filter");
  require(fdir / "manifest.csv", "filtered manifest (run the filter stage first)");
  fs::path text_root = c.text_root();
  if (std::ifstream tr(fdir / "text_root.txt"); tr) {
    std::string line;
    std::getline(tr, line);
    if (!line.empty()) text_root = line;
  }
  const auto lex = sentiment::load_lexicon(c.paths.lexicon);
  const auto caps = load_caps(c);

  auto loaded = corpus::load_corpus(fdir / "manifest.csv", text_root);
  if (!loaded.errors.empty()) {
    throw IoError("cannot reload filtered filing " + loaded.errors.front().doc_id + ": " + loaded.errors.front().message);
  }
  auto extracted = corpus::apply_extraction(std::move(loaded.records), c.filter.patterns);
  if (!extracted.dropped.empty()) throw IoError("filtered filing lost its sections: " + extracted.dropped.front().doc_id);

  IndexOutputs out;
  out.observations = sentiment::build_observations(extracted.kept, lex);
  const auto dir = c.stage_dir("index");
  fs::create_directories(dir);
  sentiment::observation_writer(out.observations).save(dir / "observations.csv");

  std::size_t resolved = 0;
  for (auto s : index::kAllSeries) {
    auto b = index::build_index(out.observations, caps, s);
    resolved += b.points.size();
    index::index_writer(b.points).save(index_file(c, s));
    out.builds[s] = std::move(b);
  }
  bool any_growth = false;
  for (const auto& o : out.observations) any_growth = any_growth || o.tone_growth.has_value();
  if (any_growth && out.builds[index::Series::Tone].primary_caps + out.builds[index::Series::Tone].fallback_caps == 0) {
    throw ConfigError("no filing could be matched to a market cap; check the cap files");
  }

  const auto& tone = out.builds[c.series];
  delimited::Writer gaps({"iso_year", "iso_week"});
  for (const auto& g : tone.gaps) gaps.add(g.year, g.week);
  gaps.save(dir / "gaps.csv");
  delimited::Writer fails({"doc_id", "firm_id", "filing_date"});
  for (const auto& f : tone.cap_failures) fails.add(f.doc_id, f.firm_id, f.filing_date.str());
  fails.save(dir / "cap_failures.csv");
  delimited::Writer sources({"series", "points", "primary_caps", "fallback_caps", "cap_failures", "gaps"});
  for (const auto& [s, b] : out.builds) {
    sources.add(index::to_string(s), b.points.size(), b.primary_caps, b.fallback_caps, b.cap_failures.size(),
                b.gaps.size());
  }
  sources.save(dir / "index_summary.csv");

  // Figures 5-6: all five weekly series side by side.
  std::set<IsoWeek> weeks;
  for (const auto& [s, b] : out.builds) {
    for (const auto& p : b.points) weeks.insert(p.week);
  }
  std::vector<std::string> header{"iso_year", "iso_week", "week_monday"};
  std::vector<std::map<IsoWeek, double>> cols;
  for (const auto& [s, b] : out.builds) {
    header.push_back(delimited::lower(index::to_string(s)));
    cols.push_back(b.as_series());
  }
  delimited::Writer fig(header);
  for (const auto& w : weeks) {
    std::vector<std::string> row{std::to_string(w.year), std::to_string(w.week), w.monday().str()};
    for (const auto& col : cols) {
      const auto it = col.find(w);
      row.push_back(it == col.end() ? "" : delimited::format_double(it->second));
    }
    fig.row(row);
  }
  fig.save(dir / "fig5_6_sentiment_growth.csv");
  write_resolved(c, "index");
  (void)resolved;
  return out;
}

// ---------------------------------------------------------------- backtest

struct BacktestInputs {
  eval::Predictor model;
  eval::Predictor benchmark;
  QuarterlySeries gdp;
  std::optional<eval::RecessionFlags> recession;
};

inline BacktestInputs load_backtest_inputs(const PipelineConfig& c) {
  BacktestInputs in;
  const auto idx = index_file(c, c.series);
  require(idx, "weekly index (run the index stage first)");
  require(c.paths.benchmark, "benchmark predictor");
  require(c.paths.gdp, "GDP series");
  in.model = {c.model_name, read_weekly_series(idx)};
  in.benchmark = {c.benchmark_name, read_weekly_series(c.paths.benchmark)};
  in.gdp = read_quarterly_series(c.paths.gdp, c.gdp_column);
  if (!c.paths.recession.empty()) in.recession = eval::read_recession_flags(c.paths.recession);
  return in;
}

/// Quarterly mean of a weekly predictor (weeks assigned by their Sunday).
inline QuarterlySeries quarterly_mean(const WeeklySeries& weekly) {
  std::map<Quarter, std::pair<double, int>> acc;
  for (const auto& [w, v] : weekly) {
    auto& a = acc[quarter_of(w.sunday())];
    a.first += v;
    ++a.second;
  }
  QuarterlySeries out;
  for (const auto& [q, a] : acc) out[q] = a.first / a.second;
  return out;
}

/// Figures 7-8: next-quarter growth against the quarterly mean predictor,
/// with OLS and quantile-regression lines.
inline void write_scatter(const eval::Predictor& p, const QuarterlySeries& gdp, const fs::path& file,
                          const fs::path& lines_file) {
  const auto qm = quarterly_mean(p.weekly);
  std::vector<double> xs, ys;
  delimited::Writer w({"quarter", "predictor_mean", "next_quarter_growth"});
  for (const auto& [q, x] : qm) {
    const auto it = gdp.find(q.next());
    if (it == gdp.end()) continue;
    xs.push_back(x);
    ys.push_back(it->second);
    w.add(q.str(), x, it->second);
  }
  w.save(file);
  delimited::Writer lines({"fit", "intercept", "slope"});
  if (xs.size() >= 3) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(xs.size()), 2);
    Eigen::VectorXd y(static_cast<Eigen::Index>(ys.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      x(static_cast<Eigen::Index>(i), 0) = 1.0;
      x(static_cast<Eigen::Index>(i), 1) = xs[i];
      y[static_cast<Eigen::Index>(i)] = ys[i];
    }
    const Eigen::VectorXd ols = x.colPivHouseholderQr().solve(y);
    lines.add("ols", ols[0], ols[1]);
    for (double tau : {0.05, 0.5, 0.95}) {
      try {
        const auto f = quantreg::fit(x, y, tau);
        lines.add("q" + delimited::format_double(tau), f.beta[0], f.beta[1]);
      } catch (const Error&) {
        lines.row({"q" + delimited::format_double(tau), "", ""});
      }
    }
  }
  lines.save(lines_file);
}

inline eval::Comparison cmd_backtest(const PipelineConfig& c) {
  validate_inputs(c);
  const auto in = load_backtest_inputs(c);
  const auto cmp = eval::compare(in.model, in.benchmark, in.gdp, c.backtest, in.recession ? &*in.recession : nullptr);

  const auto dir = c.stage_dir("backtest");
  fs::create_directories(dir);
  auto all = cmp.model;
  all.insert(all.end(), cmp.benchmark.begin(), cmp.benchmark.end());
  eval::records_writer(all).save(dir / "forecasts.csv");
  std::vector<eval::EvalSummary> sums{cmp.full};
  if (cmp.recession) sums.push_back(*cmp.recession);
  eval::summary_writer(sums).save(dir / "summary.csv");
  eval::forecast_plot_writer(cmp).save(dir / "fig9_forecasts.csv");
  eval::error_plot_writer(cmp).save(dir / "fig10_errors.csv");
  for (const auto* recs : {&cmp.model, &cmp.benchmark}) {
    std::vector<dist::FittedOrigin> fits;
    for (const auto& r : *recs) {
      if (r.ok() && r.skew) fits.push_back({r.origin, *r.skew, r.forecast, 0.0});
    }
    if (!fits.empty()) {
      // Objective re-evaluated from the stored quantiles would need the raw
      // grid; the fit writer keeps the column for the file layout.
      dist::fit_writer(fits).save(dir / ("skew_t_fits_" + (recs == &cmp.model ? c.model_name : c.benchmark_name) +
                                         ".csv"));
    }
  }
  write_scatter(in.model, in.gdp, dir / "fig7_scatter_model.csv", dir / "fig7_lines_model.csv");
  write_scatter(in.benchmark, in.gdp, dir / "fig8_scatter_benchmark.csv", dir / "fig8_lines_benchmark.csv");

  // Full-sample MIDAS quantile models for reproducibility.
  json models = json::object();
  for (const auto* p : {&in.model, &in.benchmark}) {
    json arr = json::array();
    const auto panel = midas::build_design(p->weekly, in.gdp, c.backtest.model);
    try {
      for (double tau : c.backtest.model.tau_grid) arr.push_back(midas::to_json(midas::fit_quantile(panel, tau)));
    } catch (const Error& e) {
      arr.push_back({{"error", e.what()}});
    }
    models[p->name] = arr;
  }
  write_text(dir / "models.json", models.dump(2) + "\n");
  write_resolved(c, "backtest");
  return cmp;
}

// ---------------------------------------------------------------- grid

inline std::vector<eval::GridCell> cmd_grid(const PipelineConfig& c) {
  validate_inputs(c);
  const auto in = load_backtest_inputs(c);
  auto cells = eval::robustness_grid(in.model, in.benchmark, in.gdp, c.backtest, c.grid_lags, c.grid_windows);
  const auto dir = c.stage_dir("grid");
  fs::create_directories(dir);
  eval::grid_writer(cells).save(dir / "robustness_grid.csv");
  write_resolved(c, "grid");
  return cells;
}

// ---------------------------------------------------------------- synth

/// Generates a synthetic corpus under <output>/synth together with a
/// pipeline configuration that points at it.
inline synth::SynthCorpus cmd_synth(const PipelineConfig& c) {
  auto sc = synth::generate(c.synth);
  const auto dir = c.stage_dir("synth");
  synth::write(sc, dir);
  PipelineConfig next = c;
  next.paths.metadata = "metadata.csv";
  next.paths.text_root = "";
  next.paths.lexicon = "lexicon.csv";
  next.paths.caps_daily = "caps_daily.csv";
  next.paths.caps_quarterly = "caps_quarterly.csv";
  next.paths.gdp = "gdp.csv";
  next.paths.benchmark = "benchmark_weekly.csv";
  next.paths.recession = "recession.csv";
  next.paths.output = "run";
  auto j = to_json(next);
  j["paths"].erase("text_root");
  write_text(dir / "pipeline.json", j.dump(2) + "\n");
  write_resolved(c, "synth");
  return sc;
}

// ---------------------------------------------------------------- report

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline std::string markdown_table(const fs::path& csv) {
  const auto t = delimited::read_table(csv);
  std::string out = "|";
  for (const auto& h : t.header) out += " " + h + " |";
  out += "\n|";
  for (std::size_t i = 0; i < t.header.size(); ++i) out += " --- |";
  out += "\n";
  for (const auto& row : t.rows) {
    out += "|";
    for (const auto& cell : row) out += " " + cell + " |";
    out += "\n";
  }
  return out;
}

/// Collects whatever stage outputs exist into <output>/report.md.
inline std::string cmd_report(const PipelineConfig& c) {
  std::string r = "# Tone growth-at-risk report\n";
  auto section = [&](const std::string& title, const fs::path& csv) {
    r += "\n## " + title + "\n\n";
    r += fs::exists(csv) ? markdown_table(csv) : "(not run)\n";
  };
  section("Filtration stages", c.stage_dir("filter") / "filtration_report.csv");
  section("Word counts by stage", c.stage_dir("filter") / "word_count_by_stage.csv");
  section("Weekly index", c.stage_dir("index") / "index_summary.csv");
  section("Out-of-sample evaluation", c.stage_dir("backtest") / "summary.csv");
  section("Robustness grid", c.stage_dir("grid") / "robustness_grid.csv");
  r += "\nHeadline forecast: " + std::string(headline_name(c.backtest.headline)) +
       " 5% quantile. Skill scores are 1 - loss(model)/loss(benchmark) for the named aggregate; the DM p-value is "
       "one-sided (model more accurate) with the small-sample correction and a t(n-1) reference.\n";
  write_text(c.paths.output / "report.md", r);
  return r;
}

}  // namespace tonegar::pipeline

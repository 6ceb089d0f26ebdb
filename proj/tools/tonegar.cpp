// Command-line driver: tonegar <filter|index|backtest|grid|synth|report|all> [options]

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tonegar/pipeline.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::optional<int> window;
  std::optional<int> lag_quarters;
  std::optional<std::size_t> word_floor;
  std::string headline;
};

tonegar::pipeline::PipelineConfig resolve(const Overrides& o) {
  using namespace tonegar;
  auto c = o.config.empty() ? pipeline::PipelineConfig{} : pipeline::load_config(o.config);
  // config file < environment < command line
  pipeline::apply_environment(c);
  if (!o.output.empty()) c.paths.output = o.output;
  if (o.seed) c.seed = *o.seed, c.synth.seed = *o.seed;
  if (o.window) c.backtest.window = *o.window;
  if (o.lag_quarters) c.backtest.model.lag_quarters = *o.lag_quarters;
  if (o.word_floor) c.filter.word_floor = *o.word_floor;
  if (o.headline == "skew_t") c.backtest.headline = eval::Headline::SkewT;
  if (o.headline == "raw") c.backtest.headline = eval::Headline::RawQuantile;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace tonegar;
  CLI::App app{"Filing-tone growth-at-risk pipeline"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("-c,--config", o.config, "pipeline configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option("-o,--output", o.output, "output root (overrides config and TONEGAR_OUTPUT_ROOT)");
  app.add_option("--seed", o.seed, "seed for the synthetic generator");
  app.add_option("--window", o.window, "rolling estimation window in quarters");
  app.add_option("--lag-quarters", o.lag_quarters, "MIDAS lag length in quarters");
  app.add_option("--word-floor", o.word_floor, "minimum extracted words per filing");
  app.add_option("--headline", o.headline, "headline forecast")->check(CLI::IsMember({"skew_t", "raw"}));

  auto* filter = app.add_subcommand("filter", "filter filings and write the manifest and stage report");
  auto* index = app.add_subcommand("index", "score filtered filings and build the weekly index");
  auto* backtest = app.add_subcommand("backtest", "rolling out-of-sample comparison against the benchmark");
  auto* grid = app.add_subcommand("grid", "robustness grid over lag lengths and windows");
  auto* synth = app.add_subcommand("synth", "write a synthetic corpus with its ground truth");
  auto* report = app.add_subcommand("report", "collect stage outputs into report.md");
  auto* all = app.add_subcommand("all", "filter, index, backtest, grid and report");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto c = resolve(o);
    if (*synth) {
      const auto sc = pipeline::cmd_synth(c);
      std::cout << "synthetic corpus: " << sc.docs.size() << " filings in " << c.stage_dir("synth").string()
                << "\n";
      return 0;
    }
    pipeline::validate_inputs(c);
    if (*filter || *all) {
      const auto f = pipeline::cmd_filter(c);
      std::cout << f.result.report.to_text();
      if (!f.row_errors.empty()) std::cerr << f.row_errors.size() << " metadata rows skipped (see ingest_errors.csv)\n";
    }
    if (*index || *all) {
      const auto ix = pipeline::cmd_index(c);
      const auto& b = ix.builds.at(c.series);
      std::cout << "index: " << b.points.size() << " weeks, " << b.cap_failures.size() << " filings without caps\n";
    }
    if (*backtest || *all) {
      const auto cmp = pipeline::cmd_backtest(c);
      std::cout << "QSS (mean) " << cmp.full.qss_mean << ", QSS (median) " << cmp.full.qss_median;
      if (cmp.full.dm) std::cout << ", DM " << cmp.full.dm->statistic << " (p " << cmp.full.dm->p_value << ")";
      std::cout << "\n";
    }
    if (*grid || *all) {
      const auto cells = pipeline::cmd_grid(c);
      std::cout << "grid: " << cells.size() << " cells\n";
    }
    if (*report || *all) {
      pipeline::cmd_report(c);
      std::cout << "report: " << (c.paths.output / "report.md").string() << "\n";
    }
  } catch (const tonegar::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

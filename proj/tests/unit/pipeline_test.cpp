// Drives the command-line binary end to end on a small synthetic corpus.

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "oracles.hpp"
#include "tonegar/delimited.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli() {
  const char* p = std::getenv("TONEGAR_CLI");
  return p ? p : "tonegar";
}

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + cli() + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

// Small enough for a few seconds per full run; raw quantile headline.
const char* kConfig = R"({
  "seed": 7,
  "synth": {"firms": 12, "years": 18, "panel_quarters": 40, "lag_quarters": 2},
  "midas": {"lag_quarters": 2},
  "backtest": {"window": 30, "headline": "raw"},
  "grid": {"lag_orders": [1, 2], "windows": [30, 60]}
})";

/// Every regular file under `root`, relative, except the resolved configs
/// (they name the output directory).
std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file() || e.path().filename() == "resolved_config.json") continue;
    out[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
  }
  return out;
}

class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = oracle::scratch("pipeline");
    write(dir_ / "config.json", kConfig);
    ASSERT_EQ(run("-c " + (dir_ / "config.json").string() + " -o " + (dir_ / "gen").string() + " synth"), 0);
    synth_ = dir_ / "gen" / "synth";
    ASSERT_TRUE(fs::exists(synth_ / "pipeline.json"));
  }
  static fs::path dir_;
  static fs::path synth_;

  static std::string cfg() { return "-c " + (synth_ / "pipeline.json").string(); }
};
fs::path Pipeline::dir_;
fs::path Pipeline::synth_;

}  // namespace

TEST_F(Pipeline, AllIsDeterministic) {
  ASSERT_EQ(run(cfg() + " -o " + (dir_ / "a").string() + " all"), 0);
  ASSERT_EQ(run(cfg() + " -o " + (dir_ / "b").string() + " all"), 0);
  const auto a = tree(dir_ / "a"), b = tree(dir_ / "b");
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a, b);
  for (const char* f : {"filter/filtration_report.csv", "filter/manifest.csv", "index/weekly_tone.csv",
                        "backtest/forecasts.csv", "backtest/summary.csv", "grid/robustness_grid.csv", "report.md"}) {
    EXPECT_TRUE(a.count(f)) << f;
  }
  EXPECT_TRUE(fs::exists(dir_ / "a" / "backtest" / "resolved_config.json"));
}

TEST_F(Pipeline, SeparateStagesMatchACombinedRun) {
  const auto out = (dir_ / "staged").string();
  if (!fs::exists(dir_ / "a")) {
    ASSERT_EQ(run(cfg() + " -o " + (dir_ / "a").string() + " all"), 0);
  }
  for (const char* stage : {"filter", "index", "backtest", "grid", "report"}) {
    ASSERT_EQ(run(cfg() + " -o " + out + " " + stage), 0) << stage;
  }
  EXPECT_EQ(tree(out), tree(dir_ / "a"));
}

TEST_F(Pipeline, SelfComparisonScoresZero) {
  const auto out = dir_ / "self";
  ASSERT_EQ(run(cfg() + " -o " + out.string() + " filter"), 0);
  ASSERT_EQ(run(cfg() + " -o " + out.string() + " index"), 0);
  auto j = nlohmann::json::parse(slurp(synth_ / "pipeline.json"));
  for (auto& [k, v] : j["paths"].items()) {
    if (k != "output") v = (synth_ / v.get<std::string>()).string();
  }
  j["paths"]["benchmark"] = (out / "index" / "weekly_tone.csv").string();
  write(dir_ / "self.json", j.dump());
  ASSERT_EQ(run("-c " + (dir_ / "self.json").string() + " -o " + out.string() + " backtest"), 0);
  const auto t = tonegar::delimited::read_table(out / "backtest" / "summary.csv");
  const auto qss = t.column("qss_mean"), dm = t.column("dm_stat");
  ASSERT_FALSE(t.rows.empty());
  EXPECT_EQ(*tonegar::delimited::parse_double(t.rows[0][qss]), 0.0);
  EXPECT_EQ(*tonegar::delimited::parse_double(t.rows[0][dm]), 0.0);
}

TEST_F(Pipeline, EmptyCorpusDirectoryReportsZeroCounts) {
  fs::create_directories(dir_ / "empty");
  write(dir_ / "empty.json", R"({"paths": {"metadata": "empty"}})");
  const auto out = dir_ / "empty-out";
  ASSERT_EQ(run("-c " + (dir_ / "empty.json").string() + " -o " + out.string() + " filter"), 0);
  const auto t = tonegar::delimited::read_table(out / "filter" / "filtration_report.csv");
  ASSERT_FALSE(t.rows.empty());
  for (const auto& row : t.rows) EXPECT_EQ(row[1], "0");
}

TEST_F(Pipeline, MissingInputIsAnError) {
  write(dir_ / "missing.json", R"({"paths": {"metadata": "empty", "lexicon": "no-such-lexicon.csv"}})");
  EXPECT_NE(run("-c " + (dir_ / "missing.json").string() + " -o " + (dir_ / "m").string() + " filter"), 0);
  write(dir_ / "unknown.json", R"({"pathz": {}})");
  EXPECT_NE(run("-c " + (dir_ / "unknown.json").string() + " filter"), 0);
  EXPECT_NE(run("bogus-subcommand"), 0);
}

TEST_F(Pipeline, OutputRootPrecedence) {
  const auto env_root = dir_ / "env-root";
  const auto flag_root = dir_ / "flag-root";
  fs::remove_all(env_root);
  fs::remove_all(flag_root);
  ASSERT_EQ(run(cfg() + " filter", "TONEGAR_OUTPUT_ROOT=" + env_root.string()), 0);
  EXPECT_TRUE(fs::exists(env_root / "filter" / "manifest.csv"));
  EXPECT_TRUE(fs::exists(env_root / "filter" / "resolved_config.json"));
  ASSERT_EQ(run(cfg() + " -o " + flag_root.string() + " filter", "TONEGAR_OUTPUT_ROOT=" + env_root.string() + "-x"),
            0);
  EXPECT_TRUE(fs::exists(flag_root / "filter" / "manifest.csv"));
  EXPECT_FALSE(fs::exists(fs::path(env_root.string() + "-x")));
}

#pragma once

// Small synthetic weekly/quarterly panels shared by the eval and acceptance tests.

#include <cstring>
#include <random>

#include "tonegar/eval.hpp"

namespace fixture {

using namespace tonegar;

struct WeeklyPanel {
  WeeklySeries signal;
  WeeklySeries noise;  // unrelated predictor for comparisons
  QuarterlySeries growth;
};

/// `quarters` growth targets starting at `first`, each preceded by at least
/// `history_quarters` of weekly data. The lower tail of growth widens when the
/// signal's last quarter average is low.
inline WeeklyPanel weekly_panel(unsigned seed, int quarters, int history_quarters = 10,
                                Quarter first = Quarter{1985, 1}) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0, 1);
  WeeklyPanel p;
  const Quarter start = first.shifted(-history_quarters - 1);
  const IsoWeek stop = last_complete_week(first.shifted(quarters));
  double s = 0.0, z = 0.0;
  for (IsoWeek w = week_of(start.first_day()); !(stop < w); w = w.shifted(1)) {
    s = 0.8 * s + 0.6 * n(rng);
    z = 0.8 * z + 0.6 * n(rng);
    p.signal[w] = s;
    p.noise[w] = z;
  }
  for (int i = 0; i < quarters; ++i) {
    const Quarter t = first.shifted(i);
    double avg = 0.0;
    IsoWeek w = last_complete_week(t.prev());
    for (int k = 0; k < 13; ++k, w = w.shifted(-1)) avg += p.signal.at(w) / 13.0;
    p.growth[t] = 2.5 + 0.5 * avg + 1.5 * (1.0 + 1.5 * std::max(0.0, -avg)) * n(rng);
  }
  return p;
}

/// Poisons every weekly value after the origin quarter and every growth value
/// from the target quarter on.
inline void poison_after(WeeklySeries& weekly, QuarterlySeries& growth, Quarter origin, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> junk(-1e6, 1e6);
  const IsoWeek cut = last_complete_week(origin);
  for (auto it = weekly.upper_bound(cut); it != weekly.end(); ++it) it->second = junk(rng);
  for (auto it = growth.upper_bound(origin); it != growth.end(); ++it) it->second = junk(rng);
}

inline bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

struct PoisonResult {
  std::size_t origins = 0;
  std::size_t identical = 0;
};

/// Reruns each origin of a rolling backtest on data poisoned beyond it.
inline PoisonResult poisoning_check(const WeeklySeries& weekly, const QuarterlySeries& growth,
                                    const eval::BacktestConfig& cfg) {
  const auto panel = midas::build_design(weekly, growth, cfg.model);
  const auto clean = eval::rolling_backtest(panel, "clean", cfg);
  PoisonResult out;
  for (const auto& rec : clean) {
    auto w = weekly;
    auto g = growth;
    poison_after(w, g, rec.origin, 77u + static_cast<unsigned>(out.origins));
    const auto dirty = midas::build_design(w, g, cfg.model);
    const auto row = std::find(dirty.quarters.begin(), dirty.quarters.end(), rec.origin) - dirty.quarters.begin();
    const auto again = eval::forecast_at(dirty, row, "dirty", cfg);
    ++out.origins;
    const bool same = rec.ok() == again.ok() && same_bits(rec.forecast, again.forecast) &&
                      same_bits(rec.raw_quantile, again.raw_quantile);
    out.identical += same;
  }
  return out;
}

}  // namespace fixture

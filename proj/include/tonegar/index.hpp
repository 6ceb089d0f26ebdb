#pragma once

// Market-cap resolution and the weekly cap-weighted sentiment index.

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "tonegar/calendar.hpp"
#include "tonegar/delimited.hpp"
#include "tonegar/error.hpp"
#include "tonegar/sentiment.hpp"
#include "tonegar/series.hpp"

namespace tonegar::index {

enum class CapSource { PrimaryDaily, FallbackQuarterly };

inline std::string_view to_string(CapSource s) {
  return s == CapSource::PrimaryDaily ? "primary_daily" : "fallback_quarterly";
}

struct MarketCapRecord {
  std::string firm_id;
  Date date;
  double price = 0.0;
  double shares_outstanding = 0.0;
  double cap = 0.0;  // price * shares_outstanding
  CapSource source = CapSource::PrimaryDaily;
};

struct QuarterlyCap {
  Date start;
  Date end;
  double price = 0.0;
  double shares = 0.0;
};

/// Daily close/shares keyed by (firm, date) plus quarterly fallback ranges per firm.
class CapSources {
 public:
  void add_daily(const std::string& firm, Date date, double price, double shares) {
    validate(price, shares);
    daily_[{firm, date}] = {price, shares};
  }

  void add_quarterly(const std::string& firm, Date start, Date end, double price, double shares) {
    validate(price, shares);
    if (end < start) throw IoError("quarterly cap range ends before it starts for firm " + firm);
    auto& v = quarterly_[firm];
    v.push_back({start, end, price, shares});
    std::sort(v.begin(), v.end(), [](const QuarterlyCap& a, const QuarterlyCap& b) {
      return std::tie(a.start, a.end) < std::tie(b.start, b.end);
    });
  }

  [[nodiscard]] bool empty() const { return daily_.empty() && quarterly_.empty(); }

  /// Daily record on the filing date when present, else the first quarterly
  /// record whose [start, end] covers the date.
  [[nodiscard]] std::optional<MarketCapRecord> resolve(const std::string& firm, Date date) const {
    if (const auto it = daily_.find({firm, date}); it != daily_.end()) {
      const auto [price, shares] = it->second;
      return MarketCapRecord{firm, date, price, shares, price * shares, CapSource::PrimaryDaily};
    }
    if (const auto it = quarterly_.find(firm); it != quarterly_.end()) {
      for (const auto& q : it->second) {
        if (q.start <= date && date <= q.end) {
          return MarketCapRecord{firm, date, q.price, q.shares, q.price * q.shares, CapSource::FallbackQuarterly};
        }
      }
    }
    return std::nullopt;
  }

 private:
  static void validate(double price, double shares) {
    if (!(price > 0.0) || !(shares > 0.0)) throw IoError("price and shares outstanding must be positive");
  }

  std::map<std::pair<std::string, Date>, std::pair<double, double>> daily_;
  std::map<std::string, std::vector<QuarterlyCap>> quarterly_;
};

inline std::optional<MarketCapRecord> resolve_cap(const std::string& firm, Date filing_date,
                                                  const CapSources& sources) {
  return sources.resolve(firm, filing_date);
}

/// Daily file: firm_id,date,price,shares.
inline void load_daily_caps(const std::filesystem::path& path, CapSources& into) {
  const auto t = delimited::read_table(path);
  const auto cf = t.column("firm_id"), cd = t.column("date"), cp = t.column("price"), cs = t.column("shares");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto where = path.string() + ":" + std::to_string(t.line_numbers[r]);
    if (row.size() <= std::max({cf, cd, cp, cs})) throw IoError(where + ": too few fields");
    const auto price = delimited::parse_double(row[cp]);
    const auto shares = delimited::parse_double(row[cs]);
    if (!price || !shares) throw IoError(where + ": malformed number");
    into.add_daily(row[cf], Date::parse(row[cd]), *price, *shares);
  }
}

/// Quarterly fallback file: firm_id,quarter_start,quarter_end,price,shares.
inline void load_quarterly_caps(const std::filesystem::path& path, CapSources& into) {
  const auto t = delimited::read_table(path);
  const auto cf = t.column("firm_id"), cs0 = t.column("quarter_start"), ce = t.column("quarter_end"),
             cp = t.column("price"), cs = t.column("shares");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto where = path.string() + ":" + std::to_string(t.line_numbers[r]);
    if (row.size() <= std::max({cf, cs0, ce, cp, cs})) throw IoError(where + ": too few fields");
    const auto price = delimited::parse_double(row[cp]);
    const auto shares = delimited::parse_double(row[cs]);
    if (!price || !shares) throw IoError(where + ": malformed number");
    into.add_quarterly(row[cf], Date::parse(row[cs0]), Date::parse(row[ce]), *price, *shares);
  }
}

/// The five aggregated series: the four categories and Tone.
enum class Series { Positive, Negative, Uncertainty, Litigious, Tone };
inline constexpr std::array<Series, 5> kAllSeries{Series::Positive, Series::Negative, Series::Uncertainty,
                                                  Series::Litigious, Series::Tone};

inline std::string_view to_string(Series s) {
  if (s == Series::Tone) return "Tone";
  return sentiment::name(static_cast<sentiment::Category>(s));
}

inline std::optional<double> series_value(const sentiment::SentimentObservation& o, Series s) {
  if (s == Series::Tone) return o.tone_growth;
  return o.growth[static_cast<std::size_t>(s)];
}

struct WeeklyIndexPoint {
  IsoWeek week;
  double value = 0.0;
  std::size_t n_firms = 0;
  double total_weight = 0.0;
};

struct WeightedGrowth {
  double growth = 0.0;
  double cap = 0.0;
};

/// Cap-weighted mean sum(M g) / sum(M). Returns nullopt for an empty week.
inline std::optional<WeeklyIndexPoint> aggregate_week(IsoWeek week, std::span<const WeightedGrowth> items) {
  if (items.empty()) return std::nullopt;
  double num = 0.0, den = 0.0;
  for (const auto& it : items) {
    num += it.cap * it.growth;
    den += it.cap;
  }
  if (!(den > 0.0)) return std::nullopt;
  double value = num / den;
  // Rounding can push the mean a hair outside the hull of the inputs.
  const auto [lo, hi] = std::minmax_element(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return a.growth < b.growth;
  });
  value = std::clamp(value, lo->growth, hi->growth);
  return WeeklyIndexPoint{week, value, items.size(), den};
}

struct CapFailure {
  std::string doc_id;
  std::string firm_id;
  Date filing_date;
};

struct IndexBuild {
  std::vector<WeeklyIndexPoint> points;  // sorted by week
  std::vector<IsoWeek> gaps;             // empty weeks between the first and last point
  std::vector<CapFailure> cap_failures;
  std::size_t primary_caps = 0;
  std::size_t fallback_caps = 0;

  [[nodiscard]] WeeklySeries as_series() const {
    WeeklySeries s;
    for (const auto& p : points) s[p.week] = p.value;
    return s;
  }
};

/// Aggregates observations with a present value for `series` and a resolvable
/// cap into one point per ISO week of the filing date.
inline IndexBuild build_index(const std::vector<sentiment::SentimentObservation>& observations,
                              const CapSources& caps, Series series = Series::Tone) {
  IndexBuild out;
  // Sorting first makes the floating-point sums independent of input order.
  std::vector<const sentiment::SentimentObservation*> sorted;
  for (const auto& o : observations) sorted.push_back(&o);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    return std::tie(a->filing_date, a->firm_id, a->doc_id) < std::tie(b->filing_date, b->firm_id, b->doc_id);
  });

  std::map<IsoWeek, std::vector<WeightedGrowth>> weeks;
  for (const auto* o : sorted) {
    const auto g = series_value(*o, series);
    if (!g) continue;
    const auto cap = resolve_cap(o->firm_id, o->filing_date, caps);
    if (!cap) {
      out.cap_failures.push_back({o->doc_id, o->firm_id, o->filing_date});
      continue;
    }
    ++(cap->source == CapSource::PrimaryDaily ? out.primary_caps : out.fallback_caps);
    weeks[week_of(o->filing_date)].push_back({*g, cap->cap});
  }
  for (const auto& [wk, items] : weeks) {
    if (auto p = aggregate_week(wk, items)) out.points.push_back(*p);
  }
  for (std::size_t i = 1; i < out.points.size(); ++i) {
    for (IsoWeek w = out.points[i - 1].week.shifted(1); w < out.points[i].week; w = w.shifted(1)) {
      out.gaps.push_back(w);
    }
  }
  return out;
}

/// iso_year,iso_week,value,n_firms
inline delimited::Writer index_writer(const std::vector<WeeklyIndexPoint>& points) {
  delimited::Writer w({"iso_year", "iso_week", "value", "n_firms"});
  for (const auto& p : points) w.add(p.week.year, p.week.week, p.value, p.n_firms);
  return w;
}

}  // namespace tonegar::index

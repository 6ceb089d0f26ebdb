#pragma once

// Weekly and quarterly time series plus their delimited file formats.

#include <filesystem>
#include <map>
#include <string>

#include "tonegar/calendar.hpp"
#include "tonegar/delimited.hpp"
#include "tonegar/error.hpp"

namespace tonegar {

/// Sparse weekly series; missing weeks are gaps.
using WeeklySeries = std::map<IsoWeek, double>;
using QuarterlySeries = std::map<Quarter, double>;

/// Reads (iso_year, iso_week, value); extra columns are ignored.
inline WeeklySeries read_weekly_series(const std::filesystem::path& path) {
  const auto t = delimited::read_table(path);
  const auto cy = t.column("iso_year"), cw = t.column("iso_week"), cv = t.column("value");
  WeeklySeries out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto y = row.size() > cy ? delimited::parse_int(row[cy]) : std::nullopt;
    const auto w = row.size() > cw ? delimited::parse_int(row[cw]) : std::nullopt;
    const auto v = row.size() > cv ? delimited::parse_double(row[cv]) : std::nullopt;
    if (!y || !w || !v || *w < 1 || *w > 53) {
      throw IoError(path.string() + ":" + std::to_string(t.line_numbers[r]) + ": malformed weekly row");
    }
    out[IsoWeek{static_cast<int>(*y), static_cast<int>(*w)}] = *v;
  }
  return out;
}

inline void write_weekly_series(const std::filesystem::path& path, const WeeklySeries& s) {
  delimited::Writer w({"iso_year", "iso_week", "value"});
  for (const auto& [wk, v] : s) w.add(wk.year, wk.week, v);
  w.save(path);
}

/// Reads (quarter, <value column>) where quarter looks like 2001Q3.
inline QuarterlySeries read_quarterly_series(const std::filesystem::path& path,
                                             const std::string& value_column = "value") {
  const auto t = delimited::read_table(path);
  const auto cq = t.column("quarter");
  const auto cv = t.column(value_column);
  QuarterlySeries out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto v = row.size() > cv ? delimited::parse_double(row[cv]) : std::nullopt;
    if (row.size() <= cq || !v) {
      throw IoError(path.string() + ":" + std::to_string(t.line_numbers[r]) + ": malformed quarterly row");
    }
    out[Quarter::parse(row[cq])] = *v;
  }
  return out;
}

inline void write_quarterly_series(const std::filesystem::path& path, const QuarterlySeries& s,
                                   const std::string& value_column = "value") {
  delimited::Writer w({"quarter", value_column});
  for (const auto& [q, v] : s) w.add(q.str(), v);
  w.save(path);
}

}  // namespace tonegar

#pragma once

// Calendar helpers: ISO dates, ISO-8601 weeks and calendar quarters.

#include <charconv>
#include <chrono>
#include <compare>
#include <cstdio>
#include <string>
#include <string_view>

#include "tonegar/error.hpp"

namespace tonegar {

/// A calendar day. Thin value wrapper over std::chrono::sys_days.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days days) : days_{days} {}
  constexpr Date(int y, unsigned m, unsigned d)
      : days_{std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}}} {}

  /// Parses YYYY-MM-DD. Throws IoError on malformed or impossible dates.
  static Date parse(std::string_view text) {
    int y = 0;
    unsigned m = 0, d = 0;
    auto ok = text.size() == 10 && text[4] == '-' && text[7] == '-';
    if (ok) {
      ok = std::from_chars(text.data(), text.data() + 4, y).ec == std::errc{} &&
           std::from_chars(text.data() + 5, text.data() + 7, m).ec == std::errc{} &&
           std::from_chars(text.data() + 8, text.data() + 10, d).ec == std::errc{};
    }
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                    std::chrono::day{d}};
    if (!ok || !ymd.ok()) throw IoError("invalid date '" + std::string(text) + "'");
    return Date{std::chrono::sys_days{ymd}};
  }

  [[nodiscard]] constexpr std::chrono::sys_days days() const { return days_; }
  [[nodiscard]] constexpr std::chrono::year_month_day ymd() const {
    return std::chrono::year_month_day{days_};
  }
  [[nodiscard]] constexpr int year() const { return static_cast<int>(ymd().year()); }
  [[nodiscard]] constexpr unsigned month() const { return static_cast<unsigned>(ymd().month()); }
  [[nodiscard]] constexpr unsigned day() const { return static_cast<unsigned>(ymd().day()); }
  /// 1 = Monday ... 7 = Sunday.
  [[nodiscard]] constexpr unsigned iso_weekday() const {
    return std::chrono::weekday{days_}.iso_encoding();
  }
  [[nodiscard]] constexpr Date plus_days(int n) const {
    return Date{days_ + std::chrono::days{n}};
  }
  [[nodiscard]] constexpr long serial() const { return days_.time_since_epoch().count(); }

  [[nodiscard]] std::string str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
    return buf;
  }

  friend constexpr auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

/// ISO-8601 week identifier (weeks start on Monday; week 1 holds the first Thursday).
struct IsoWeek {
  int year = 0;
  int week = 0;

  friend constexpr auto operator<=>(const IsoWeek&, const IsoWeek&) = default;

  /// Monday of this week.
  [[nodiscard]] Date monday() const {
    // Jan 4th is always in week 1.
    const Date jan4{year, 1, 4};
    const Date week1_monday = jan4.plus_days(-static_cast<int>(jan4.iso_weekday() - 1));
    return week1_monday.plus_days(7 * (week - 1));
  }
  [[nodiscard]] Date sunday() const { return monday().plus_days(6); }
  [[nodiscard]] IsoWeek shifted(int weeks) const;

  [[nodiscard]] std::string str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-W%02d", year, week);
    return buf;
  }
};

/// ISO week containing `date`.
inline IsoWeek week_of(Date date) {
  // The ISO year is the year of the Thursday of the same week.
  const Date thursday = date.plus_days(4 - static_cast<int>(date.iso_weekday()));
  const int iso_year = thursday.year();
  const Date jan1{iso_year, 1, 1};
  const int week = static_cast<int>((thursday.serial() - jan1.serial()) / 7) + 1;
  return IsoWeek{iso_year, week};
}

inline IsoWeek IsoWeek::shifted(int weeks) const { return week_of(monday().plus_days(7 * weeks)); }

/// Number of weeks from `from` to `to` (positive when `to` is later).
inline int weeks_between(IsoWeek from, IsoWeek to) {
  return static_cast<int>((to.monday().serial() - from.monday().serial()) / 7);
}

/// Calendar (or fiscal) quarter.
struct Quarter {
  int year = 0;
  int q = 1;  // 1..4

  friend constexpr auto operator<=>(const Quarter&, const Quarter&) = default;

  [[nodiscard]] constexpr int ordinal() const { return year * 4 + (q - 1); }
  [[nodiscard]] static constexpr Quarter from_ordinal(int n) {
    const int y = n >= 0 ? n / 4 : -((-n + 3) / 4);
    return Quarter{y, n - y * 4 + 1};
  }
  [[nodiscard]] constexpr Quarter shifted(int n) const { return from_ordinal(ordinal() + n); }
  [[nodiscard]] constexpr Quarter next() const { return shifted(1); }
  [[nodiscard]] constexpr Quarter prev() const { return shifted(-1); }

  [[nodiscard]] Date first_day() const {
    return Date{year, static_cast<unsigned>(3 * (q - 1) + 1), 1};
  }
  [[nodiscard]] Date last_day() const { return next().first_day().plus_days(-1); }

  /// Accepts "2001Q3", "2001-Q3", "2001q3".
  static Quarter parse(std::string_view text) {
    Quarter out;
    const auto pos = text.find_first_of("Qq");
    bool ok = pos != std::string_view::npos && pos + 2 == text.size();
    if (ok) {
      auto year_part = text.substr(0, pos);
      if (!year_part.empty() && year_part.back() == '-') year_part.remove_suffix(1);
      ok = std::from_chars(year_part.data(), year_part.data() + year_part.size(), out.year).ec ==
               std::errc{} &&
           year_part.size() == 4;
      out.q = text[pos + 1] - '0';
      ok = ok && out.q >= 1 && out.q <= 4;
    }
    if (!ok) throw IoError("invalid quarter '" + std::string(text) + "'");
    return out;
  }

  [[nodiscard]] std::string str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04dQ%d", year, q);
    return buf;
  }
};

inline Quarter quarter_of(Date date) {
  return Quarter{date.year(), static_cast<int>((date.month() - 1) / 3 + 1)};
}

/// Last ISO week whose Sunday falls on or before the quarter's last day.
inline IsoWeek last_complete_week(Quarter quarter) {
  const Date end = quarter.last_day();
  const IsoWeek w = week_of(end);
  return w.sunday() <= end ? w : w.shifted(-1);
}

}  // namespace tonegar

#pragma once

// Dictionary word-count sentiment, prior-year matching and year-over-year growth.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "tonegar/calendar.hpp"
#include "tonegar/corpus.hpp"
#include "tonegar/delimited.hpp"
#include "tonegar/error.hpp"
#include "tonegar/tokenize.hpp"

namespace tonegar::sentiment {

enum class Category : std::uint8_t { Positive = 0, Negative = 1, Uncertainty = 2, Litigious = 3 };
inline constexpr std::size_t kCategoryCount = 4;
inline constexpr std::array<Category, kCategoryCount> kCategories{Category::Positive, Category::Negative,
                                                                  Category::Uncertainty, Category::Litigious};

constexpr std::size_t index(Category c) { return static_cast<std::size_t>(c); }

inline std::string_view name(Category c) {
  static constexpr std::array<std::string_view, kCategoryCount> names{"Positive", "Negative", "Uncertainty",
                                                                      "Litigious"};
  return names[index(c)];
}

template <typename T>
using PerCategory = std::array<T, kCategoryCount>;

class Lexicon {
 public:
  Lexicon() = default;

  void add(std::string_view word, Category c) {
    std::string key;
    key.reserve(word.size());
    for (char ch : word) key.push_back(fold_case(ch));
    auto& mask = masks_[key];
    const auto bit = static_cast<std::uint8_t>(1u << index(c));
    if (!(mask & bit)) ++sizes_[index(c)];
    mask |= bit;
  }

  /// Bitmask of categories for an already case-folded token (0 when absent).
  [[nodiscard]] std::uint8_t lookup(std::string_view folded) const {
    const auto it = masks_.find(std::string(folded));
    return it == masks_.end() ? 0 : it->second;
  }

  [[nodiscard]] bool contains(Category c, std::string_view word) const {
    std::string key;
    for (char ch : word) key.push_back(fold_case(ch));
    return lookup(key) & (1u << index(c));
  }

  [[nodiscard]] std::size_t size(Category c) const { return sizes_[index(c)]; }

  /// Words of one category, sorted.
  [[nodiscard]] std::vector<std::string> words(Category c) const {
    std::vector<std::string> out;
    for (const auto& [w, m] : masks_) {
      if (m & (1u << index(c))) out.push_back(w);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Header columns that were neither the word column nor a known category.
  std::size_t ignored_columns = 0;

 private:
  std::unordered_map<std::string, std::uint8_t> masks_;
  PerCategory<std::size_t> sizes_{};
};

/// Loads a word list with a "Word" column and one flag column per category
/// (nonzero = member), the layout of the LM master dictionary.
inline Lexicon load_lexicon(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("lexicon not found: " + path.string());
  const auto table = delimited::read_table(path);
  const auto word_col = table.column("word");
  std::array<std::optional<std::size_t>, kCategoryCount> cols;
  for (auto c : kCategories) cols[index(c)] = table.find_column(name(c));

  Lexicon lex;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i == word_col) continue;
    if (std::none_of(cols.begin(), cols.end(), [&](auto col) { return col && *col == i; })) ++lex.ignored_columns;
  }
  for (const auto& row : table.rows) {
    if (word_col >= row.size() || row[word_col].empty()) continue;
    for (auto c : kCategories) {
      const auto col = cols[index(c)];
      if (!col || *col >= row.size()) continue;
      const auto flag = delimited::parse_double(row[*col]);
      if (flag && *flag != 0.0 && !std::isnan(*flag)) lex.add(row[word_col], c);
    }
  }
  for (auto c : kCategories) {
    if (lex.size(c) == 0) {
      throw ConfigError("lexicon '" + path.string() + "' has no " + std::string(name(c)) + " words");
    }
  }
  return lex;
}

struct WordCounts {
  std::size_t total = 0;
  PerCategory<std::size_t> hits{};
};

inline WordCounts count_words(std::string_view text, const Lexicon& lex) {
  WordCounts out;
  for_each_token(text, [&](std::string_view tok) {
    ++out.total;
    const auto mask = lex.lookup(tok);
    if (!mask) return;
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      if (mask & (1u << c)) ++out.hits[c];
    }
  });
  return out;
}

using Ratios = PerCategory<double>;
using Growth = PerCategory<std::optional<double>>;

inline Ratios ratios_from_counts(const WordCounts& wc) {
  if (wc.total == 0) throw Error("cannot compute sentiment ratios of an empty text");
  Ratios r{};
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    r[c] = static_cast<double>(wc.hits[c]) / static_cast<double>(wc.total);
  }
  return r;
}

/// Category hits over total tokens. Throws when the text has no tokens.
inline Ratios sentiment_ratios(std::string_view text, const Lexicon& lex) {
  return ratios_from_counts(count_words(text, lex));
}

/// (S_t - S_base) / S_base per category; absent where the baseline ratio is zero.
inline Growth sentiment_growth(const Ratios& current, const Ratios& baseline) {
  Growth g;
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    if (baseline[c] > 0.0) g[c] = (current[c] - baseline[c]) / baseline[c];
  }
  return g;
}

inline std::optional<double> tone_growth(const Growth& g) {
  const auto& pos = g[index(Category::Positive)];
  const auto& neg = g[index(Category::Negative)];
  if (!pos || !neg) return std::nullopt;
  return *pos - *neg;
}

struct SentimentObservation {
  std::string doc_id;
  std::string firm_id;
  Date filing_date;
  Quarter fiscal_quarter;
  corpus::FormType form;
  std::size_t word_count = 0;
  Ratios ratios{};
  Growth growth{};
  std::optional<double> tone_growth;
  std::optional<std::string> baseline_doc_id;
};

inline bool chronological_less(const SentimentObservation& a, const SentimentObservation& b) {
  return std::tie(a.filing_date, a.doc_id) < std::tie(b.filing_date, b.doc_id);
}

/// Finds the prior-year baseline of `current` among `history` (same firm,
/// filed strictly before `current`). The baseline has fiscal quarter
/// (year-1, same quarter) and the same form type. With k same-type filings in
/// the prior-year quarter: k == 1 -> that filing serves every current filing;
/// k > 1 -> pairing by chronological rank, no counterpart beyond rank k.
/// Returns the index into `history`, or nullopt.
inline std::optional<std::size_t> match_prior(const SentimentObservation& current,
                                              std::span<const SentimentObservation> history) {
  const Quarter target{current.fiscal_quarter.year - 1, current.fiscal_quarter.q};
  std::vector<std::size_t> prior;
  std::size_t rank = 0;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const auto& h = history[i];
    if (h.firm_id != current.firm_id || !(h.form == current.form)) continue;
    if (!chronological_less(h, current)) continue;
    if (h.fiscal_quarter == target) prior.push_back(i);
    if (h.fiscal_quarter == current.fiscal_quarter) ++rank;
  }
  if (prior.empty()) return std::nullopt;
  if (prior.size() == 1) return prior.front();
  std::sort(prior.begin(), prior.end(),
            [&](std::size_t a, std::size_t b) { return chronological_less(history[a], history[b]); });
  if (rank < prior.size()) return prior[rank];
  return std::nullopt;
}

inline SentimentObservation observe(const corpus::FilingRecord& rec, const Lexicon& lex) {
  SentimentObservation o;
  o.doc_id = rec.doc_id;
  o.firm_id = rec.firm_id;
  o.filing_date = rec.filing_date;
  o.fiscal_quarter = rec.fiscal_quarter;
  o.form = rec.form;
  const auto wc = count_words(rec.extracted_text ? *rec.extracted_text : rec.raw_text, lex);
  o.word_count = wc.total;
  o.ratios = ratios_from_counts(wc);
  return o;
}

/// Scores every record and attaches growth rates against matched baselines.
/// Output is sorted by (firm, filing date, doc id).
inline std::vector<SentimentObservation> build_observations(const std::vector<corpus::FilingRecord>& records,
                                                            const Lexicon& lex) {
  std::map<std::string, std::vector<SentimentObservation>> by_firm;
  for (const auto& r : records) by_firm[r.firm_id].push_back(observe(r, lex));

  std::vector<SentimentObservation> out;
  out.reserve(records.size());
  for (auto& [firm, obs] : by_firm) {
    std::sort(obs.begin(), obs.end(), chronological_less);
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const std::span<const SentimentObservation> history{obs.data(), i};
      if (const auto j = match_prior(obs[i], history)) {
        obs[i].growth = sentiment_growth(obs[i].ratios, obs[*j].ratios);
        obs[i].tone_growth = tone_growth(obs[i].growth);
        obs[i].baseline_doc_id = obs[*j].doc_id;
      }
    }
    for (auto& o : obs) out.push_back(std::move(o));
  }
  return out;
}

inline delimited::Writer observation_writer(const std::vector<SentimentObservation>& obs) {
  delimited::Writer w({"doc_id", "firm_id", "form_type", "filing_date", "fiscal_year", "fiscal_quarter",
                       "word_count", "s_positive", "s_negative", "s_uncertainty", "s_litigious", "g_positive",
                       "g_negative", "g_uncertainty", "g_litigious", "tone_growth", "baseline_doc_id"});
  auto opt = [](const std::optional<double>& v) { return v ? delimited::format_double(*v) : std::string{}; };
  for (const auto& o : obs) {
    w.row({o.doc_id, o.firm_id, o.form.label, o.filing_date.str(), std::to_string(o.fiscal_quarter.year),
           std::to_string(o.fiscal_quarter.q), std::to_string(o.word_count),
           delimited::format_double(o.ratios[0]), delimited::format_double(o.ratios[1]),
           delimited::format_double(o.ratios[2]), delimited::format_double(o.ratios[3]), opt(o.growth[0]),
           opt(o.growth[1]), opt(o.growth[2]), opt(o.growth[3]), opt(o.tone_growth),
           o.baseline_doc_id.value_or("")});
  }
  return w;
}

}  // namespace tonegar::sentiment

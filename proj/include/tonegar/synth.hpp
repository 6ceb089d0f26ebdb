#pragma once

// Synthetic filings corpus with planted sentiment rates, market caps, a GDP
// process whose lower tail loads on the tone signal, and the ground truth the
// pipeline should recover (stage counts, weekly index, DGP parameters).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tonegar/calendar.hpp"
#include "tonegar/corpus.hpp"
#include "tonegar/delimited.hpp"
#include "tonegar/error.hpp"
#include "tonegar/index.hpp"
#include "tonegar/random.hpp"
#include "tonegar/sentiment.hpp"
#include "tonegar/series.hpp"

namespace tonegar::synth {

struct SynthConfig {
  std::uint64_t seed = 20240917;
  int firms = 40;
  int start_year = 1994;
  int years = 29;
  int panel_quarters = 100;  // GDP targets with full weekly history

  int target_words_min = 900;
  int target_words_max = 1500;
  double pos_rate = 0.03;
  double neg_rate = 0.03;
  double uncertainty_rate = 0.015;
  double litigious_rate = 0.01;
  double latent_phi = 0.8;
  double latent_sd = 0.35;
  double tone_sensitivity = 0.5;  // rates scale with exp(-+ k * latent)
  double doc_noise = 0.05;

  int nonstandard_docs = 12;
  int headerless_docs = 8;
  int short_docs = 6;  // besides the 609 / 610 boundary pair
  int duplicates_before = 4;
  int duplicates_after = 4;
  int over_frequency_years = 3;
  double fallback_cap_share = 0.12;
  double missing_cap_share = 0.02;

  std::optional<Date> neg_window_start;
  std::optional<Date> neg_window_end;
  double neg_multiplier = 2.0;

  double tone_loading = 2.0;  // 0 removes every link from tone to growth
  double gdp_mean = 2.5;
  double gdp_sd = 1.5;
  double location_coef = 0.5;
  double tail_coef = 1.5;
  double benchmark_phi = 0.9;
  int lag_quarters = 8;
  int weeks_per_quarter = 13;

  [[nodiscard]] int end_year() const { return start_year + years - 1; }

  void validate() const {
    if (firms < 2 || years < 4) throw ConfigError("synthetic corpus needs at least 2 firms and 4 years");
    if (target_words_min < 610 || target_words_max < target_words_min) {
      throw ConfigError("synthetic target word range must start at or above the word floor");
    }
    if (panel_quarters < 1) throw ConfigError("panel_quarters must be positive");
    const double total = pos_rate * 4 + neg_rate * 4 * std::max(1.0, neg_multiplier) + uncertainty_rate + litigious_rate;
    if (total >= 1.0) throw ConfigError("planted word rates are too high");
  }
};

enum class Fate { Kept, NonStandard, NoSection, Short, Duplicate, OverFrequency };

inline std::string_view to_string(Fate f) {
  switch (f) {
    case Fate::Kept: return "kept";
    case Fate::NonStandard: return "nonstandard_form";
    case Fate::NoSection: return "no_target_section";
    case Fate::Short: return "below_word_floor";
    case Fate::Duplicate: return "same_day_duplicate";
    case Fate::OverFrequency: return "over_frequency_firm_year";
  }
  return "?";
}

enum class DocKind { Regular, ExtraFiling, NonStandard, Headerless };

struct SynthDoc {
  std::string doc_id;
  std::string firm_id;
  std::string form_label;
  Date filing_date;
  Quarter fiscal_quarter;
  DocKind kind = DocKind::Regular;
  Fate fate = Fate::Kept;
  int target_words = 0;
  std::array<std::size_t, 4> hits{};  // planted target-section hits per category
  std::string text;

  [[nodiscard]] std::string text_path() const { return "texts/" + doc_id + ".txt"; }
};

struct DailyCap {
  std::string firm_id;
  Date date;
  double price = 0.0;
  double shares = 0.0;
};

struct QuarterlyCapRow {
  std::string firm_id;
  Date start;
  Date end;
  double price = 0.0;
  double shares = 0.0;
};

struct TruthPoint {
  double value = 0.0;
  std::size_t n_firms = 0;
};

struct Truth {
  std::vector<std::pair<std::string, std::size_t>> stages;
  std::map<std::string, std::size_t> drop_reasons;
  std::map<std::string, double> tone_by_doc;  // kept docs with a baseline
  std::map<IsoWeek, TruthPoint> index;
  QuarterlySeries signal;  // standardized Almon signal per panel quarter
  Quarter first_panel_quarter;
  std::size_t cap_failures = 0;
};

struct SynthCorpus {
  SynthConfig config;
  std::vector<SynthDoc> docs;
  std::array<std::vector<std::string>, 4> lexicon;  // Positive, Negative, Uncertainty, Litigious
  std::vector<std::string> filler;
  std::vector<DailyCap> daily_caps;
  std::vector<QuarterlyCapRow> quarterly_caps;
  QuarterlySeries gdp;
  WeeklySeries benchmark;
  std::map<Quarter, bool> recession;
  Truth truth;

  [[nodiscard]] std::string metadata_csv() const {
    delimited::Writer w({"doc_id", "firm_id", "form_type", "filing_date", "fiscal_year", "fiscal_quarter", "text_path"});
    for (const auto& d : docs) {
      w.add(d.doc_id, d.firm_id, d.form_label, d.filing_date.str(), d.fiscal_quarter.year, d.fiscal_quarter.q,
            d.text_path());
    }
    return w.str();
  }

  [[nodiscard]] std::string lexicon_csv() const {
    delimited::Writer w({"Word", "Positive", "Negative", "Uncertainty", "Litigious"});
    for (std::size_t c = 0; c < 4; ++c) {
      for (const auto& word : lexicon[c]) {
        std::vector<std::string> row{word, "0", "0", "0", "0"};
        row[c + 1] = "2009";  // the master dictionary stores the year a word was added
        w.row(row);
      }
    }
    return w.str();
  }

  /// FNV-1a over the manifest and every document text.
  [[nodiscard]] std::uint64_t checksum() const {
    Fnv1a h;
    h.update(metadata_csv());
    for (const auto& d : docs) {
      h.update(d.doc_id);
      h.update("\n");
      h.update(d.text);
    }
    return h.value();
  }

  [[nodiscard]] std::vector<corpus::FilingRecord> records() const {
    std::vector<corpus::FilingRecord> out;
    for (const auto& d : docs) {
      corpus::FilingRecord r;
      r.doc_id = d.doc_id;
      r.firm_id = d.firm_id;
      r.form = corpus::parse_form_type(d.form_label);
      r.filing_date = d.filing_date;
      r.fiscal_quarter = d.fiscal_quarter;
      r.text_path = d.text_path();
      r.raw_text = d.text;
      r.word_count = count_tokens(d.text);
      out.push_back(std::move(r));
    }
    return out;
  }

  [[nodiscard]] sentiment::Lexicon lexicon_object() const {
    sentiment::Lexicon lex;
    for (std::size_t c = 0; c < 4; ++c) {
      for (const auto& w : lexicon[c]) lex.add(w, sentiment::kCategories[c]);
    }
    return lex;
  }

  [[nodiscard]] index::CapSources caps() const {
    index::CapSources s;
    for (const auto& d : daily_caps) s.add_daily(d.firm_id, d.date, d.price, d.shares);
    for (const auto& q : quarterly_caps) s.add_quarterly(q.firm_id, q.start, q.end, q.price, q.shares);
    return s;
  }

  [[nodiscard]] WeeklySeries truth_series() const {
    WeeklySeries s;
    for (const auto& [w, p] : truth.index) s[w] = p.value;
    return s;
  }
};

namespace detail {

inline const std::array<std::vector<std::string>, 4>& word_lists() {
  static const std::array<std::vector<std::string>, 4> lists{
      std::vector<std::string>{"achieve", "benefit", "gain", "improve", "strong", "success", "profitable",
                               "favorable", "excellent", "opportunity", "advance", "exceed", "rebound",
                               "strength", "reward", "progress"},
      std::vector<std::string>{"loss", "decline", "adverse", "impairment", "weak", "failure", "deficit",
                               "downturn", "deteriorate", "shortfall", "default", "severe", "unfavorable",
                               "negative", "penalty", "closure"},
      std::vector<std::string>{"approximately", "possibly", "uncertain", "depend", "fluctuate", "variable",
                               "unknown", "contingent", "roughly", "assume"},
      std::vector<std::string>{"lawsuit", "plaintiff", "court", "claimant", "statute", "testimony", "tribunal",
                               "allegation", "defendant", "jurisdiction"}};
  return lists;
}

/// Consonant-vowel pseudo words; none can begin a header line or hit the lexicon.
inline std::vector<std::string> filler_words() {
  static const std::string consonants = "bdfgklmnprstvz";
  static const std::string vowels = "aeiou";
  std::vector<std::string> out;
  for (char c1 : consonants) {
    for (char v1 : vowels) {
      for (char c2 : std::string("lmnrst")) {
        for (char v2 : std::string("aeo")) out.push_back(std::string{c1, v1, c2, v2});
      }
    }
  }
  return out;
}

struct Rates {
  std::array<double, 4> p{};
};

class TextWriter {
 public:
  TextWriter(Rng& rng, const std::vector<std::string>& filler, const std::array<std::vector<std::string>, 4>& lex)
      : rng_(rng), filler_(filler), lex_(lex) {}

  /// Body of exactly n tokens drawn at the given rates; adds hits to `hits`.
  std::string body(int n, const Rates& r, std::array<std::size_t, 4>& hits) {
    std::string out;
    int on_line = 0;
    for (int i = 0; i < n; ++i) {
      const double u = rng_.uniform();
      const double v = rng_.uniform();
      double acc = 0.0;
      int cat = -1;
      for (int c = 0; c < 4; ++c) {
        acc += r.p[static_cast<std::size_t>(c)];
        if (u < acc) {
          cat = c;
          break;
        }
      }
      const auto& list = cat < 0 ? filler_ : lex_[static_cast<std::size_t>(cat)];
      const auto& word = list[static_cast<std::size_t>(v * static_cast<double>(list.size()))];
      if (cat >= 0) ++hits[static_cast<std::size_t>(cat)];
      if (on_line) out.push_back(' ');
      // Upper-case sentence starts now and then; the tokenizer folds case.
      if (on_line == 0 && (i % 3 == 0)) {
        out.push_back(static_cast<char>(word[0] - 'a' + 'A'));
        out.append(word, 1);
      } else {
        out.append(word);
      }
      if (++on_line == 12) {
        out.append(".\n");
        on_line = 0;
      } else if (i % 7 == 6) {
        out.push_back(',');
      }
    }
    if (on_line) out.append(".\n");
    return out;
  }

  /// Non-target text with sentinel lexicon words that must not be counted.
  std::string sentinel_body() {
    std::array<std::size_t, 4> ignored{};
    Rates r;
    r.p = {0.08, 0.12, 0.05, 0.05};
    return body(static_cast<int>(rng_.uniform_int(30, 60)), r, ignored);
  }

 private:
  Rng& rng_;
  const std::vector<std::string>& filler_;
  const std::array<std::vector<std::string>, 4>& lex_;
};

inline std::array<int, 3> split_words(int n) {
  const int a = n * 3 / 10, b = n * 11 / 20;
  return {a, b, n - a - b};
}

inline std::string annual_text(TextWriter& tw, int n, const Rates& r, std::array<std::size_t, 4>& hits) {
  const auto s = split_words(n);
  std::string t = "UNITED STATES SECURITIES AND EXCHANGE COMMISSION\nFORM 10-K\n\nPART I\n\nITEM 1. BUSINESS\n";
  t += tw.sentinel_body();
  t += "\nItem 1A. Risk Factors\n";
  t += tw.body(s[0], r, hits);
  t += "\nITEM 1B. UNRESOLVED STAFF COMMENTS\n";
  t += tw.sentinel_body();
  t += "\nITEM 2. PROPERTIES\n";
  t += tw.sentinel_body();
  t += "\nPART II\n\nITEM 7. MANAGEMENT'S DISCUSSION AND ANALYSIS OF FINANCIAL CONDITION AND RESULTS OF OPERATIONS\n";
  t += tw.body(s[1], r, hits);
  t += "\nITEM 7A. QUANTITATIVE AND QUALITATIVE DISCLOSURES ABOUT MARKET RISK\n";
  t += tw.body(s[2], r, hits);
  t += "\nITEM 8. FINANCIAL STATEMENTS AND SUPPLEMENTARY DATA\n";
  t += tw.sentinel_body();
  return t;
}

inline std::string quarterly_text(TextWriter& tw, int n, const Rates& r, std::array<std::size_t, 4>& hits) {
  const auto s = split_words(n);
  std::string t = "FORM 10-Q\n\nPART I. FINANCIAL INFORMATION\n\nITEM 1. FINANCIAL STATEMENTS\n";
  t += tw.sentinel_body();
  t += "\nITEM 2. MANAGEMENT'S DISCUSSION AND ANALYSIS OF FINANCIAL CONDITION AND RESULTS OF OPERATIONS\n";
  t += tw.body(s[1], r, hits);
  t += "\n  Item   3.  Quantitative and Qualitative Disclosures About Market Risk\n";
  t += tw.body(s[2], r, hits);
  t += "\nITEM 4. CONTROLS AND PROCEDURES\n";
  t += tw.sentinel_body();
  t += "\nPART II. OTHER INFORMATION\n\nITEM 1. LEGAL PROCEEDINGS\n";
  t += tw.sentinel_body();
  t += "\nITEM 1A. RISK FACTORS\n";
  t += tw.body(s[0], r, hits);
  t += "\nITEM 6. EXHIBITS\n";
  t += tw.sentinel_body();
  return t;
}

inline std::string headerless_text(TextWriter& tw) {
  std::string t = "FORM 10-Q\n\nEXHIBIT INDEX ONLY\n";
  std::array<std::size_t, 4> ignored{};
  Rates r;
  r.p = {0.03, 0.03, 0.01, 0.01};
  t += tw.body(800, r, ignored);
  return t;
}

inline std::string firm_name(int f) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "F%03d", f);
  return buf;
}

inline std::string doc_id(const std::string& firm, Quarter fq, std::string_view form, char tag) {
  std::string code;
  for (char c : form) {
    if (std::isalnum(static_cast<unsigned char>(c))) code.push_back(c);
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s-%04dq%d-%s-%c", firm.c_str(), fq.year, fq.q, code.c_str(), tag);
  return buf;
}

}  // namespace detail

/// Truth weekly index from planted counts, following the matching, cap and
/// weighting rules directly on the generator's own bookkeeping.
inline void compute_truth_index(SynthCorpus& sc) {
  auto& truth = sc.truth;
  truth.tone_by_doc.clear();
  truth.index.clear();
  truth.cap_failures = 0;
  std::map<std::tuple<std::string, std::string, int>, const SynthDoc*> kept;  // firm, form, fiscal ordinal
  for (const auto& d : sc.docs) {
    if (d.fate == Fate::Kept) kept[{d.firm_id, d.form_label, d.fiscal_quarter.ordinal()}] = &d;
  }
  std::map<std::pair<std::string, Date>, double> daily;
  for (const auto& c : sc.daily_caps) daily[{c.firm_id, c.date}] = c.price * c.shares;

  std::map<IsoWeek, std::pair<double, double>> sums;
  std::map<IsoWeek, std::size_t> counts;
  for (const auto& [key, d] : kept) {
    const auto& [firm, form, ord] = key;
    const auto base = kept.find({firm, form, ord - 4});
    if (base == kept.end() || !(base->second->filing_date < d->filing_date)) continue;
    const auto* b = base->second;
    auto ratio = [](const SynthDoc& x, int c) {
      return static_cast<double>(x.hits[static_cast<std::size_t>(c)]) / static_cast<double>(x.target_words);
    };
    const double bp = ratio(*b, 0), bn = ratio(*b, 1);
    if (bp == 0.0 || bn == 0.0) continue;
    const double tone = (ratio(*d, 0) - bp) / bp - (ratio(*d, 1) - bn) / bn;
    truth.tone_by_doc[d->doc_id] = tone;

    std::optional<double> cap;
    if (auto it = daily.find({firm, d->filing_date}); it != daily.end()) cap = it->second;
    if (!cap) {
      for (const auto& q : sc.quarterly_caps) {
        if (q.firm_id == firm && q.start <= d->filing_date && d->filing_date <= q.end) {
          cap = q.price * q.shares;
          break;
        }
      }
    }
    if (!cap) {
      ++truth.cap_failures;
      continue;
    }
    auto& s = sums[week_of(d->filing_date)];
    s.first += *cap * tone;
    s.second += *cap;
    ++counts[week_of(d->filing_date)];
  }
  for (const auto& [w, s] : sums) truth.index[w] = {s.first / s.second, counts[w]};
}

/// Standardized Almon-weighted signal over the carried-forward truth index,
/// with weights (1 - k/(C-1))^2.
inline QuarterlySeries tone_signal(const std::map<IsoWeek, TruthPoint>& idx, int lags, Quarter first, int n) {
  QuarterlySeries raw;
  if (idx.empty()) return raw;
  for (int i = 0; i < n; ++i) {
    const Quarter t = first.shifted(i);
    const IsoWeek newest = last_complete_week(t);
    double s = 0.0;
    for (int k = 0; k < lags; ++k) {
      const IsoWeek w = newest.shifted(-k);
      auto it = idx.upper_bound(w);
      if (it == idx.begin()) throw ConfigError("synthetic index does not cover the lag window");
      --it;
      const double wt = 1.0 - static_cast<double>(k) / (lags - 1);
      s += wt * wt * it->second.value;
    }
    raw[t] = s;
  }
  double mean = 0.0, sd = 0.0;
  for (const auto& [q, v] : raw) mean += v / static_cast<double>(raw.size());
  for (const auto& [q, v] : raw) sd += (v - mean) * (v - mean);
  sd = std::sqrt(sd / static_cast<double>(raw.size() > 1 ? raw.size() - 1 : 1));
  for (auto& [q, v] : raw) v = sd > 0.0 ? (v - mean) / sd : 0.0;
  return raw;
}

inline SynthCorpus generate(const SynthConfig& cfg) {
  cfg.validate();
  SynthCorpus sc;
  sc.config = cfg;
  sc.lexicon = detail::word_lists();
  sc.filler = detail::filler_words();

  Rng structure = Rng::stream(cfg.seed, 1);
  Rng caps_rng = Rng::stream(cfg.seed, 3);
  Rng latent_rng = Rng::stream(cfg.seed, 4);
  Rng gdp_rng = Rng::stream(cfg.seed, 5);
  Rng bench_rng = Rng::stream(cfg.seed, 6);

  // Quarterly latent sentiment level, AR(1).
  std::map<int, double> latent;
  {
    double l = 0.0;
    for (int y = cfg.start_year - 1; y <= cfg.end_year() + 1; ++y) {
      for (int q = 1; q <= 4; ++q) {
        l = cfg.latent_phi * l + cfg.latent_sd * latent_rng.normal();
        latent[Quarter{y, q}.ordinal()] = l;
      }
    }
  }

  // Regular schedule: 10-Q for Q1-Q3, 10-K for Q4.
  std::map<std::pair<int, int>, std::vector<std::size_t>> by_firm_year;  // (firm, filing year) -> docs
  for (int f = 0; f < cfg.firms; ++f) {
    const auto firm = detail::firm_name(f);
    for (int y = cfg.start_year; y <= cfg.end_year(); ++y) {
      for (int q = 1; q <= 4; ++q) {
        SynthDoc d;
        d.firm_id = firm;
        d.fiscal_quarter = {y, q};
        d.form_label = q == 4 ? "10-K" : "10-Q";
        const int delay = q == 4 ? static_cast<int>(structure.uniform_int(55, 85))
                                 : static_cast<int>(structure.uniform_int(25, 44));
        d.filing_date = d.fiscal_quarter.last_day().plus_days(delay);
        d.doc_id = detail::doc_id(firm, d.fiscal_quarter, d.form_label, 'm');
        d.target_words = static_cast<int>(structure.uniform_int(cfg.target_words_min, cfg.target_words_max));
        by_firm_year[{f, d.filing_date.year()}].push_back(sc.docs.size());
        sc.docs.push_back(std::move(d));
      }
    }
  }

  // Each anomaly that touches dedup/cap rules gets its own firm-year.
  std::set<std::pair<int, int>> used;
  auto pick_slot = [&](int min_year, int max_year) {
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const int f = static_cast<int>(structure.uniform_int(0, cfg.firms - 1));
      const int y = static_cast<int>(structure.uniform_int(min_year, max_year));
      const auto it = by_firm_year.find({f, y});
      if (it == by_firm_year.end() || it->second.size() != 4 || used.count({f, y})) continue;
      used.insert({f, y});
      return std::pair{f, y};
    }
    throw ConfigError("synthetic corpus too small for the requested anomalies");
  };
  const int first_full = cfg.start_year + 1, last_full = cfg.end_year();

  // Short documents, including the boundary pair.
  for (int i = 0; i < cfg.short_docs + 2; ++i) {
    const auto slot = pick_slot(first_full, last_full);
    auto& docs = by_firm_year[slot];
    auto& d = sc.docs[docs[static_cast<std::size_t>(structure.uniform_int(0, 3))]];
    d.target_words = i == 0 ? 609 : i == 1 ? 610 : static_cast<int>(structure.uniform_int(150, 609));
    d.fate = d.target_words >= 610 ? Fate::Kept : Fate::Short;
  }
  // Same-day duplicates; the lexicographically first id survives.
  std::vector<SynthDoc> extra;
  for (int i = 0; i < cfg.duplicates_before + cfg.duplicates_after; ++i) {
    const auto slot = pick_slot(first_full, last_full);
    auto& orig = sc.docs[by_firm_year[slot][static_cast<std::size_t>(structure.uniform_int(0, 3))]];
    SynthDoc dup = orig;
    const bool before = i < cfg.duplicates_before;
    dup.doc_id = detail::doc_id(orig.firm_id, orig.fiscal_quarter, orig.form_label, before ? 'a' : 'z');
    dup.kind = DocKind::ExtraFiling;
    dup.target_words = static_cast<int>(structure.uniform_int(cfg.target_words_min, cfg.target_words_max));
    (before ? orig.fate : dup.fate) = Fate::Duplicate;
    extra.push_back(std::move(dup));
  }
  // Firm-years with a fifth filing lose all five.
  for (int i = 0; i < cfg.over_frequency_years; ++i) {
    const auto slot = pick_slot(first_full, last_full);
    for (auto idx : by_firm_year[slot]) sc.docs[idx].fate = Fate::OverFrequency;
    const auto& q2 = *std::find_if(by_firm_year[slot].begin(), by_firm_year[slot].end(),
                                   [&](auto idx) { return sc.docs[idx].fiscal_quarter.q == 2; });
    SynthDoc d = sc.docs[q2];
    d.kind = DocKind::ExtraFiling;
    d.filing_date = d.filing_date.plus_days(9);
    d.doc_id = detail::doc_id(d.firm_id, d.fiscal_quarter, d.form_label, 'r');
    d.fate = Fate::OverFrequency;
    d.target_words = static_cast<int>(structure.uniform_int(cfg.target_words_min, cfg.target_words_max));
    extra.push_back(std::move(d));
  }
  // Non-standard forms and standard forms without recognizable sections.
  static const std::array<std::string, 5> other_forms{"8-K", "10-K405", "10-Q/A", "10-KSB", "S-1"};
  for (int i = 0; i < cfg.nonstandard_docs + cfg.headerless_docs; ++i) {
    SynthDoc d;
    const int f = static_cast<int>(structure.uniform_int(0, cfg.firms - 1));
    d.firm_id = detail::firm_name(f);
    d.filing_date = Date{static_cast<int>(structure.uniform_int(cfg.start_year, cfg.end_year())), 1, 1}.plus_days(
        static_cast<int>(structure.uniform_int(0, 360)));
    d.fiscal_quarter = quarter_of(d.filing_date).prev();
    d.target_words = static_cast<int>(structure.uniform_int(cfg.target_words_min, cfg.target_words_max));
    if (i < cfg.nonstandard_docs) {
      d.kind = DocKind::NonStandard;
      d.form_label = other_forms[static_cast<std::size_t>(i) % other_forms.size()];
      d.fate = Fate::NonStandard;
      d.doc_id = detail::doc_id(d.firm_id, d.fiscal_quarter, d.form_label, static_cast<char>('n'));
      d.doc_id += std::to_string(i);
    } else {
      d.kind = DocKind::Headerless;
      d.form_label = "10-Q";
      d.fate = Fate::NoSection;
      d.doc_id = detail::doc_id(d.firm_id, d.fiscal_quarter, d.form_label, 'h') + std::to_string(i);
    }
    extra.push_back(std::move(d));
  }
  for (auto& d : extra) sc.docs.push_back(std::move(d));
  std::sort(sc.docs.begin(), sc.docs.end(), [](const SynthDoc& a, const SynthDoc& b) { return a.doc_id < b.doc_id; });

  // Texts. Each document draws from its own stream, so changing a rate leaves
  // every other document byte-identical.
  for (auto& d : sc.docs) {
    Fnv1a h;
    h.update(d.doc_id);
    Rng text_rng = Rng::stream(cfg.seed, h.value());
    detail::TextWriter tw(text_rng, sc.filler, sc.lexicon);
    const double l = latent[d.fiscal_quarter.ordinal()];
    const double e_pos = cfg.doc_noise * text_rng.normal();
    const double e_neg = cfg.doc_noise * text_rng.normal();
    detail::Rates r;
    const bool in_window = cfg.neg_window_start && cfg.neg_window_end && *cfg.neg_window_start <= d.filing_date &&
                           d.filing_date <= *cfg.neg_window_end;
    r.p = {cfg.pos_rate * std::exp(-cfg.tone_sensitivity * l + e_pos),
           cfg.neg_rate * std::exp(cfg.tone_sensitivity * l + e_neg) * (in_window ? cfg.neg_multiplier : 1.0),
           cfg.uncertainty_rate, cfg.litigious_rate};
    d.hits = {};
    if (d.kind == DocKind::Headerless) {
      d.text = detail::headerless_text(tw);
      d.target_words = 0;
    } else if (d.form_label == "10-Q" || d.form_label == "10-Q/A") {
      d.text = detail::quarterly_text(tw, d.target_words, r, d.hits);
    } else {
      d.text = detail::annual_text(tw, d.target_words, r, d.hits);
    }
  }

  // Market caps: daily record on the filing date, quarterly fallback, or none.
  std::map<std::string, double> firm_shares;
  for (int f = 0; f < cfg.firms; ++f) firm_shares[detail::firm_name(f)] = std::round(std::exp(caps_rng.normal(17.0, 1.0)));
  std::set<std::pair<std::string, Date>> daily_seen;
  std::set<std::pair<std::string, int>> quarterly_seen;
  for (const auto& d : sc.docs) {
    const double u = caps_rng.uniform();
    const double price = std::round(100.0 * 20.0 * std::exp(0.4 * caps_rng.normal())) / 100.0;
    const double shares = firm_shares[d.firm_id];
    if (u < cfg.missing_cap_share) continue;
    if (u < cfg.missing_cap_share + cfg.fallback_cap_share) {
      const Quarter q = quarter_of(d.filing_date);
      if (quarterly_seen.insert({d.firm_id, q.ordinal()}).second) {
        sc.quarterly_caps.push_back({d.firm_id, q.first_day(), q.last_day(), price, shares});
      }
      continue;
    }
    if (daily_seen.insert({d.firm_id, d.filing_date}).second) {
      sc.daily_caps.push_back({d.firm_id, d.filing_date, price, shares});
    }
  }

  // Stage counts straight from the planted fates.
  auto& truth = sc.truth;
  std::size_t n = sc.docs.size();
  std::map<Fate, std::size_t> fates;
  for (const auto& d : sc.docs) ++fates[d.fate];
  truth.stages.push_back({corpus::stage_names::kInitial, n});
  n -= fates[Fate::NonStandard];
  truth.stages.push_back({corpus::stage_names::kStandard, n});
  n -= fates[Fate::NoSection];
  truth.stages.push_back({corpus::stage_names::kExtracted, n});
  n -= fates[Fate::Short];
  truth.stages.push_back({corpus::stage_names::word_floor(corpus::kDefaultWordFloor), n});
  n -= fates[Fate::Duplicate] + fates[Fate::OverFrequency];
  truth.stages.push_back({corpus::stage_names::kDedup, n});
  for (const auto& [f, c] : fates) {
    if (f != Fate::Kept) truth.drop_reasons[std::string(to_string(f))] = c;
  }

  compute_truth_index(sc);
  if (sc.truth.index.empty()) throw ConfigError("synthetic corpus produced an empty index");

  // GDP: the first panel quarter is the first whose oldest weekly lag is on
  // or after the first index week.
  const int lags = cfg.lag_quarters * cfg.weeks_per_quarter;
  const IsoWeek first_week = sc.truth.index.begin()->first;
  Quarter t0 = quarter_of(first_week.monday());
  while (last_complete_week(t0).shifted(-(lags - 1)) < first_week) t0 = t0.next();
  truth.first_panel_quarter = t0;
  truth.signal = tone_signal(sc.truth.index, lags, t0, cfg.panel_quarters);
  for (const auto& [t, s] : truth.signal) {
    const double eps = gdp_rng.normal();
    const double lam = cfg.tone_loading;
    sc.gdp[t.next()] = cfg.gdp_mean + cfg.location_coef * lam * s +
                       cfg.gdp_sd * (1.0 + cfg.tail_coef * lam * std::max(0.0, -s)) * eps;
  }
  for (const auto& [q, y] : sc.gdp) sc.recession[q] = y < cfg.gdp_mean - 1.28 * cfg.gdp_sd;

  // Uninformative weekly benchmark, AR(1), covering every week of the index span and beyond.
  {
    const IsoWeek from = first_week.shifted(-lags);
    const IsoWeek to = last_complete_week(sc.gdp.rbegin()->first).shifted(cfg.weeks_per_quarter);
    double x = 0.0;
    const double innov = std::sqrt(1.0 - cfg.benchmark_phi * cfg.benchmark_phi);
    for (IsoWeek w = from; w <= to; w = w.shifted(1)) {
      x = cfg.benchmark_phi * x + innov * bench_rng.normal();
      sc.benchmark[w] = x;
    }
  }
  return sc;
}

inline nlohmann::json config_json(const SynthConfig& c) {
  nlohmann::json j{{"seed", c.seed},
                   {"firms", c.firms},
                   {"start_year", c.start_year},
                   {"years", c.years},
                   {"panel_quarters", c.panel_quarters},
                   {"target_words_min", c.target_words_min},
                   {"target_words_max", c.target_words_max},
                   {"pos_rate", c.pos_rate},
                   {"neg_rate", c.neg_rate},
                   {"uncertainty_rate", c.uncertainty_rate},
                   {"litigious_rate", c.litigious_rate},
                   {"latent_phi", c.latent_phi},
                   {"latent_sd", c.latent_sd},
                   {"tone_sensitivity", c.tone_sensitivity},
                   {"doc_noise", c.doc_noise},
                   {"nonstandard_docs", c.nonstandard_docs},
                   {"headerless_docs", c.headerless_docs},
                   {"short_docs", c.short_docs},
                   {"duplicates_before", c.duplicates_before},
                   {"duplicates_after", c.duplicates_after},
                   {"over_frequency_years", c.over_frequency_years},
                   {"fallback_cap_share", c.fallback_cap_share},
                   {"missing_cap_share", c.missing_cap_share},
                   {"neg_multiplier", c.neg_multiplier},
                   {"tone_loading", c.tone_loading},
                   {"gdp_mean", c.gdp_mean},
                   {"gdp_sd", c.gdp_sd},
                   {"location_coef", c.location_coef},
                   {"tail_coef", c.tail_coef},
                   {"benchmark_phi", c.benchmark_phi},
                   {"lag_quarters", c.lag_quarters},
                   {"weeks_per_quarter", c.weeks_per_quarter}};
  if (c.neg_window_start) j["neg_window_start"] = c.neg_window_start->str();
  if (c.neg_window_end) j["neg_window_end"] = c.neg_window_end->str();
  return j;
}

/// Reads overrides from a JSON object; unknown keys are rejected.
inline SynthConfig config_from_json(const nlohmann::json& j, SynthConfig c = {}) {
  const auto known = config_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key) && key != "neg_window_start" && key != "neg_window_end") {
      throw ConfigError("unknown synth setting '" + key + "'");
    }
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  try {
    get("seed", c.seed), get("firms", c.firms), get("start_year", c.start_year), get("years", c.years);
    get("panel_quarters", c.panel_quarters), get("target_words_min", c.target_words_min);
    get("target_words_max", c.target_words_max), get("pos_rate", c.pos_rate), get("neg_rate", c.neg_rate);
    get("uncertainty_rate", c.uncertainty_rate), get("litigious_rate", c.litigious_rate);
    get("latent_phi", c.latent_phi), get("latent_sd", c.latent_sd), get("tone_sensitivity", c.tone_sensitivity);
    get("doc_noise", c.doc_noise), get("nonstandard_docs", c.nonstandard_docs);
    get("headerless_docs", c.headerless_docs), get("short_docs", c.short_docs);
    get("duplicates_before", c.duplicates_before), get("duplicates_after", c.duplicates_after);
    get("over_frequency_years", c.over_frequency_years), get("fallback_cap_share", c.fallback_cap_share);
    get("missing_cap_share", c.missing_cap_share), get("neg_multiplier", c.neg_multiplier);
    get("tone_loading", c.tone_loading), get("gdp_mean", c.gdp_mean), get("gdp_sd", c.gdp_sd);
    get("location_coef", c.location_coef), get("tail_coef", c.tail_coef), get("benchmark_phi", c.benchmark_phi);
    get("lag_quarters", c.lag_quarters), get("weeks_per_quarter", c.weeks_per_quarter);
    if (j.contains("neg_window_start")) c.neg_window_start = Date::parse(j.at("neg_window_start").get<std::string>());
    if (j.contains("neg_window_end")) c.neg_window_end = Date::parse(j.at("neg_window_end").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad synth setting: ") + e.what());
  }
  return c;
}

inline nlohmann::json truth_json(const SynthCorpus& sc) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& [name, n] : sc.truth.stages) stages.push_back({{"stage", name}, {"filings_remaining", n}});
  char sum[32];
  std::snprintf(sum, sizeof sum, "%016llx", static_cast<unsigned long long>(sc.checksum()));
  return {{"config", config_json(sc.config)},
          {"corpus_checksum", sum},
          {"documents", sc.docs.size()},
          {"stages", stages},
          {"drop_reasons", sc.truth.drop_reasons},
          {"index_weeks", sc.truth.index.size()},
          {"cap_failures", sc.truth.cap_failures},
          {"first_panel_quarter", sc.truth.first_panel_quarter.str()},
          {"gdp_quarters", sc.gdp.size()},
          {"dgp",
           {{"equation", "y[t+1] = mean + location_coef*loading*s[t] + sd*(1 + tail_coef*loading*max(0,-s[t]))*e"},
            {"signal_weights", "(1 - k/(C-1))^2 over carried-forward weekly tone, standardized"},
            {"loading", sc.config.tone_loading}}}};
}

/// Writes the corpus and its side files under `dir`.
inline void write(const SynthCorpus& sc, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "texts");
  auto save = [&](const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    out << content;
  };
  save(dir / "metadata.csv", sc.metadata_csv());
  for (const auto& d : sc.docs) save(dir / d.text_path(), d.text);
  save(dir / "lexicon.csv", sc.lexicon_csv());

  delimited::Writer daily({"firm_id", "date", "price", "shares"});
  for (const auto& c : sc.daily_caps) daily.add(c.firm_id, c.date.str(), c.price, c.shares);
  daily.save(dir / "caps_daily.csv");
  delimited::Writer quarterly({"firm_id", "quarter_start", "quarter_end", "price", "shares"});
  for (const auto& c : sc.quarterly_caps) quarterly.add(c.firm_id, c.start.str(), c.end.str(), c.price, c.shares);
  quarterly.save(dir / "caps_quarterly.csv");

  write_quarterly_series(dir / "gdp.csv", sc.gdp, "growth");
  write_weekly_series(dir / "benchmark_weekly.csv", sc.benchmark);
  delimited::Writer rec({"quarter", "recession"});
  for (const auto& [q, f] : sc.recession) rec.add(q.str(), f ? 1 : 0);
  rec.save(dir / "recession.csv");

  delimited::Writer idx({"iso_year", "iso_week", "value", "n_firms"});
  for (const auto& [w, p] : sc.truth.index) idx.add(w.year, w.week, p.value, p.n_firms);
  idx.save(dir / "truth_index.csv");
  save(dir / "truth.json", truth_json(sc).dump(2) + "\n");
}

}  // namespace tonegar::synth

#pragma once

// Filing ingestion, the staged filtration pipeline, and narrative-section
// extraction (Risk Factors, MD&A, Market Risk).

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "tonegar/calendar.hpp"
#include "tonegar/delimited.hpp"
#include "tonegar/error.hpp"
#include "tonegar/tokenize.hpp"

namespace tonegar::corpus {

enum class FormKind { TenK, TenQ, Other };

struct FormType {
  FormKind kind = FormKind::Other;
  std::string label;  // as filed, e.g. "10-K", "10-K-A", "10-QSB"

  [[nodiscard]] bool standard() const { return kind != FormKind::Other; }
  friend bool operator==(const FormType& a, const FormType& b) { return a.label == b.label; }
};

/// Classifies a form label. Only plain 10-K / 10-Q are standard; amendments,
/// transition reports, small-business and 405 variants are Other.
inline FormType parse_form_type(std::string_view label) {
  std::string norm;
  for (char c : label) {
    if (c == ' ' || c == '\t') continue;
    norm.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  FormType out;
  out.label = norm;
  if (norm == "10-K" || norm == "10K") {
    out.kind = FormKind::TenK;
    out.label = "10-K";
  } else if (norm == "10-Q" || norm == "10Q") {
    out.kind = FormKind::TenQ;
    out.label = "10-Q";
  }
  return out;
}

struct FilingRecord {
  std::string doc_id;
  std::string firm_id;
  FormType form;
  Date filing_date;
  Quarter fiscal_quarter;
  std::string text_path;
  std::string raw_text;
  std::optional<std::string> extracted_text;
  std::size_t word_count = 0;  // tokens of extracted_text when present, else raw_text
};

/// Canonical ordering used wherever output order must not depend on input order.
inline bool canonical_less(const FilingRecord& a, const FilingRecord& b) {
  return std::tie(a.firm_id, a.filing_date, a.doc_id) < std::tie(b.firm_id, b.filing_date, b.doc_id);
}

struct RowError {
  std::size_t line = 0;  // line in the metadata file
  std::string doc_id;
  std::string message;
};

struct LoadResult {
  std::vector<FilingRecord> records;
  std::vector<RowError> errors;
};

/// Reads the filing manifest and every referenced text file. Row-level problems
/// (unreadable text, malformed fields) are collected in `errors`; a missing
/// manifest is fatal.
inline LoadResult load_corpus(const std::filesystem::path& metadata_path,
                              const std::filesystem::path& text_root) {
  if (!std::filesystem::exists(metadata_path)) {
    throw IoError("metadata file not found: " + metadata_path.string());
  }
  const auto table = delimited::read_table(metadata_path);
  const auto c_firm = table.column("firm_id");
  const auto c_form = table.column("form_type");
  const auto c_date = table.column("filing_date");
  const auto c_fy = table.column("fiscal_year");
  const auto c_fq = table.column("fiscal_quarter");
  const auto c_path = table.column("text_path");
  const auto c_doc = table.find_column("doc_id");

  LoadResult out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = table.line_numbers[r];
    FilingRecord rec;
    rec.text_path = c_path < row.size() ? row[c_path] : std::string{};
    rec.doc_id = (c_doc && *c_doc < row.size() && !row[*c_doc].empty()) ? row[*c_doc] : rec.text_path;
    auto fail = [&](std::string msg) { out.errors.push_back({line, rec.doc_id, std::move(msg)}); };

    const std::size_t needed = std::max({c_firm, c_form, c_date, c_fy, c_fq, c_path}) + 1;
    if (row.size() < needed) {
      fail("expected at least " + std::to_string(needed) + " fields, got " + std::to_string(row.size()));
      continue;
    }
    rec.firm_id = row[c_firm];
    rec.form = parse_form_type(row[c_form]);
    try {
      rec.filing_date = Date::parse(row[c_date]);
    } catch (const IoError& e) {
      fail(e.what());
      continue;
    }
    const auto fy = delimited::parse_int(row[c_fy]);
    const auto fq = delimited::parse_int(row[c_fq]);
    if (!fy || !fq || *fq < 1 || *fq > 4) {
      fail("invalid fiscal year/quarter '" + row[c_fy] + "'/'" + row[c_fq] + "'");
      continue;
    }
    rec.fiscal_quarter = Quarter{static_cast<int>(*fy), static_cast<int>(*fq)};
    if (rec.firm_id.empty()) {
      fail("empty firm_id");
      continue;
    }

    const auto path = text_root / rec.text_path;
    std::ifstream in(path, std::ios::binary);
    if (rec.text_path.empty() || !in) {
      fail("cannot read text file '" + path.string() + "'");
      continue;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    rec.raw_text = buf.str();
    rec.word_count = count_tokens(rec.raw_text);
    out.records.push_back(std::move(rec));
  }
  return out;
}

struct Split {
  std::vector<FilingRecord> kept;
  std::vector<FilingRecord> dropped;
};

inline Split filter_form_types(std::vector<FilingRecord> records) {
  Split out;
  for (auto& r : records) (r.form.standard() ? out.kept : out.dropped).push_back(std::move(r));
  return out;
}

/// Header patterns for section boundaries. Matched case-insensitively against
/// whitespace-normalized lines; capture group 1 is the item / part number.
struct SectionPatterns {
  std::string item_header = R"(^item\s+(\d+[a-z]?)(?![a-z0-9]))";
  std::string part_header = R"(^part\s+(iv|iii|ii|i)(?![a-z0-9]))";
};

class SectionExtractor {
 public:
  explicit SectionExtractor(const SectionPatterns& patterns = {})
      : item_re_{patterns.item_header, std::regex::ECMAScript | std::regex::icase},
        part_re_{patterns.part_header, std::regex::ECMAScript | std::regex::icase} {}

  /// Concatenates the target sections in document order: Items 1A, 7, 7A of a
  /// 10-K; Part I Items 2, 3 and Part II Item 1A of a 10-Q. A section runs from
  /// the line after its header to the next item or part header. Returns nullopt
  /// when no target header is present.
  [[nodiscard]] std::optional<std::string> extract(const FilingRecord& rec) const {
    if (!rec.form.standard()) return std::nullopt;
    const bool annual = rec.form.kind == FormKind::TenK;

    std::optional<std::string> result;
    bool in_target = false;
    std::string part;  // "" until a Part header is seen
    std::string section;

    auto flush = [&] {
      if (in_target) {
        if (!result) result.emplace();
        if (!section.empty()) {
          if (!result->empty()) result->append("\n\n");
          result->append(section);
        }
      }
      section.clear();
    };

    std::istringstream in(rec.raw_text);
    std::string raw_line;
    std::smatch m;
    while (std::getline(in, raw_line)) {
      const std::string line = normalize_whitespace(raw_line);
      if (line.empty()) continue;
      if (starts_with_icase(line, "part") && std::regex_search(line, m, part_re_)) {
        flush();
        in_target = false;
        part = delimited::lower(m[1].str());
        continue;
      }
      if (starts_with_icase(line, "item") && std::regex_search(line, m, item_re_)) {
        flush();
        in_target = is_target(annual, part, delimited::lower(m[1].str()));
        continue;
      }
      if (in_target) {
        if (!section.empty()) section.push_back('\n');
        section.append(line);
      }
    }
    flush();
    return result;
  }

  static std::string normalize_whitespace(std::string_view s) {
    std::string out;
    bool space = false;
    for (char c : s) {
      if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
        space = !out.empty();
      } else {
        if (space) out.push_back(' ');
        space = false;
        out.push_back(c);
      }
    }
    return out;
  }

 private:
  static bool starts_with_icase(std::string_view line, std::string_view prefix) {
    if (line.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
      if (fold_case(line[i]) != prefix[i]) return false;
    }
    return true;
  }

  static bool is_target(bool annual, const std::string& part, const std::string& item) {
    if (annual) return item == "1a" || item == "7" || item == "7a";
    if (part.empty()) return item == "1a" || item == "2" || item == "3";
    if (part == "i") return item == "2" || item == "3";
    if (part == "ii") return item == "1a";
    return false;
  }

  std::regex item_re_;
  std::regex part_re_;
};

inline std::optional<std::string> extract_sections(const FilingRecord& rec,
                                                   const SectionPatterns& patterns = {}) {
  return SectionExtractor{patterns}.extract(rec);
}

/// Runs extraction over a batch; records without any target section are dropped.
/// Survivors carry extracted_text and the word count of that text.
inline Split apply_extraction(std::vector<FilingRecord> records, const SectionPatterns& patterns = {}) {
  const SectionExtractor extractor{patterns};
  Split out;
  for (auto& r : records) {
    auto text = extractor.extract(r);
    if (text) {
      r.word_count = count_tokens(*text);
      r.extracted_text = std::move(text);
      out.kept.push_back(std::move(r));
    } else {
      out.dropped.push_back(std::move(r));
    }
  }
  return out;
}

constexpr std::size_t kDefaultWordFloor = 610;

/// Keeps records with word_count >= floor (a count equal to the floor is kept).
inline Split apply_word_floor(std::vector<FilingRecord> records, std::size_t floor = kDefaultWordFloor) {
  Split out;
  for (auto& r : records) (r.word_count >= floor ? out.kept : out.dropped).push_back(std::move(r));
  return out;
}

struct DedupSplit {
  std::vector<FilingRecord> kept;
  std::vector<FilingRecord> duplicates;
  std::vector<FilingRecord> over_frequency;
};

constexpr std::size_t kMaxFilingsPerYear = 4;

/// (a) Same firm, same filing date, same form: keep the lexicographically first
/// doc_id. (b) Then drop every filing of a firm-year (calendar year of the
/// filing date) that still has more than four filings. Output is in canonical order.
inline DedupSplit dedup_and_cap(std::vector<FilingRecord> records,
                                std::size_t max_per_year = kMaxFilingsPerYear) {
  std::sort(records.begin(), records.end(), [](const FilingRecord& a, const FilingRecord& b) {
    return std::tie(a.firm_id, a.filing_date, a.form.label, a.doc_id) <
           std::tie(b.firm_id, b.filing_date, b.form.label, b.doc_id);
  });
  DedupSplit out;
  std::vector<FilingRecord> unique;
  for (auto& r : records) {
    if (!unique.empty()) {
      const auto& prev = unique.back();
      if (prev.firm_id == r.firm_id && prev.filing_date == r.filing_date && prev.form == r.form) {
        out.duplicates.push_back(std::move(r));
        continue;
      }
    }
    unique.push_back(std::move(r));
  }
  std::map<std::pair<std::string, int>, std::size_t> per_year;
  for (const auto& r : unique) ++per_year[{r.firm_id, r.filing_date.year()}];
  for (auto& r : unique) {
    if (per_year[{r.firm_id, r.filing_date.year()}] > max_per_year) {
      out.over_frequency.push_back(std::move(r));
    } else {
      out.kept.push_back(std::move(r));
    }
  }
  std::sort(out.kept.begin(), out.kept.end(), canonical_less);
  std::sort(out.duplicates.begin(), out.duplicates.end(), canonical_less);
  std::sort(out.over_frequency.begin(), out.over_frequency.end(), canonical_less);
  return out;
}

struct WordStats {
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;  // sample standard deviation (n-1)
};

inline WordStats word_stats(std::vector<double> values) {
  WordStats s;
  s.n = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = s.n > 1 ? std::sqrt(ss / static_cast<double>(s.n - 1)) : 0.0;
  std::sort(values.begin(), values.end());
  s.median = s.n % 2 ? values[s.n / 2] : 0.5 * (values[s.n / 2 - 1] + values[s.n / 2]);
  return s;
}

/// Summary of the survivors of one stage: overall and per filing year.
struct StageSummary {
  std::string name;
  std::size_t remaining = 0;
  WordStats words;
  std::map<int, WordStats> words_by_year;
};

struct FiltrationReport {
  std::vector<StageSummary> stages;
  std::map<std::string, std::size_t> drop_reasons;

  /// One "name,count" line per stage.
  [[nodiscard]] std::string to_text() const {
    delimited::Writer w({"stage", "filings_remaining"});
    for (const auto& s : stages) w.add(s.name, s.remaining);
    return w.str();
  }
};

struct FiltrationConfig {
  std::size_t word_floor = kDefaultWordFloor;
  std::size_t max_filings_per_year = kMaxFilingsPerYear;
  SectionPatterns patterns;
};

namespace stage_names {
inline const std::string kInitial = "Initial dataset";
inline const std::string kStandard = "Only standard 10-K and 10-Q";
inline const std::string kExtracted = "After extracting MD&A, Risk Factors, and Market Risk sections";
inline std::string word_floor(std::size_t floor) {
  return "After removing short documents (less than " + std::to_string(floor) + " words)";
}
inline const std::string kDedup = "After removing excessive and duplicate filings";
}  // namespace stage_names

inline StageSummary summarize_stage(std::string name, const std::vector<FilingRecord>& records) {
  StageSummary s;
  s.name = std::move(name);
  s.remaining = records.size();
  std::vector<double> all;
  std::map<int, std::vector<double>> by_year;
  for (const auto& r : records) {
    all.push_back(static_cast<double>(r.word_count));
    by_year[r.filing_date.year()].push_back(static_cast<double>(r.word_count));
  }
  s.words = word_stats(std::move(all));
  for (auto& [y, v] : by_year) s.words_by_year[y] = word_stats(std::move(v));
  return s;
}

struct FiltrationResult {
  std::vector<FilingRecord> records;
  FiltrationReport report;
};

/// Form filter -> section extraction -> word floor -> dedup/cap.
inline FiltrationResult run_filtration(std::vector<FilingRecord> records, const FiltrationConfig& cfg = {}) {
  FiltrationResult out;
  auto& rep = out.report;
  rep.stages.push_back(summarize_stage(stage_names::kInitial, records));

  auto forms = filter_form_types(std::move(records));
  for (const auto& r : forms.dropped) ++rep.drop_reasons["form_type:" + r.form.label];
  rep.stages.push_back(summarize_stage(stage_names::kStandard, forms.kept));

  auto extracted = apply_extraction(std::move(forms.kept), cfg.patterns);
  rep.drop_reasons["no_target_section"] += extracted.dropped.size();
  rep.stages.push_back(summarize_stage(stage_names::kExtracted, extracted.kept));

  auto floored = apply_word_floor(std::move(extracted.kept), cfg.word_floor);
  rep.drop_reasons["below_word_floor"] += floored.dropped.size();
  rep.stages.push_back(summarize_stage(stage_names::word_floor(cfg.word_floor), floored.kept));

  auto dedup = dedup_and_cap(std::move(floored.kept), cfg.max_filings_per_year);
  rep.drop_reasons["same_day_duplicate"] += dedup.duplicates.size();
  rep.drop_reasons["over_frequency_firm_year"] += dedup.over_frequency.size();
  rep.stages.push_back(summarize_stage(stage_names::kDedup, dedup.kept));

  out.records = std::move(dedup.kept);
  return out;
}

/// Writes the manifest columns (same layout as the ingestion format).
inline delimited::Writer manifest_writer(const std::vector<FilingRecord>& records) {
  delimited::Writer w({"doc_id", "firm_id", "form_type", "filing_date", "fiscal_year", "fiscal_quarter",
                       "text_path", "word_count"});
  for (const auto& r : records) {
    w.add(r.doc_id, r.firm_id, r.form.label, r.filing_date.str(), r.fiscal_quarter.year,
          r.fiscal_quarter.q, r.text_path, r.word_count);
  }
  return w;
}

}  // namespace tonegar::corpus

#include <fstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tonegar/corpus.hpp"

using namespace tonegar;
using namespace tonegar::corpus;

namespace {

FilingRecord filing(std::string doc, std::string firm, std::string form, Date date, std::string text = "") {
  FilingRecord r;
  r.doc_id = std::move(doc);
  r.firm_id = std::move(firm);
  r.form = parse_form_type(form);
  r.filing_date = date;
  r.fiscal_quarter = quarter_of(date);
  r.raw_text = std::move(text);
  r.word_count = count_tokens(r.raw_text);
  return r;
}

std::string words(int n, const std::string& w = "alpha") {
  std::string s;
  for (int i = 0; i < n; ++i) s += (i ? " " : "") + w;
  return s;
}

std::vector<std::string> labels(const std::vector<FilingRecord>& rs) {
  std::vector<std::string> out;
  for (const auto& r : rs) out.push_back(r.form.label);
  return out;
}

std::vector<std::string> ids(const std::vector<FilingRecord>& rs) {
  std::vector<std::string> out;
  for (const auto& r : rs) out.push_back(r.doc_id);
  return out;
}

}  // namespace

TEST(FormTypes, OnlyPlainTenKAndTenQSurvive) {
  std::vector<FilingRecord> in;
  for (const char* f : {"10-K", "10-K-A", "10-QSB", "10-Q"}) in.push_back(filing(f, "A", f, Date{2001, 1, 2}));
  const auto s = filter_form_types(in);
  EXPECT_EQ(labels(s.kept), (std::vector<std::string>{"10-K", "10-Q"}));
  EXPECT_EQ(s.dropped.size(), 2u);
  EXPECT_TRUE(filter_form_types({}).kept.empty());
}

TEST(FormTypes, MixedFixtureCountedByHand) {
  const char* forms[] = {"10-K",   "10-K405", "10-Q",   "10-KSB", "10-Q-A", "10-K",    "10-QSB",
                         "10-KT",  "10-Q",    "10-K-A", "10-KSB40", "10-Q", "10-QT",   "10-K405-A",
                         "10-K",   "10-KT-A", "10-QSB-A", "10-Q",  "10-KSB-A", "10-D"};
  std::vector<FilingRecord> in;
  for (const char* f : forms) in.push_back(filing(f, "A", f, Date{2001, 1, 2}));
  ASSERT_EQ(in.size(), 20u);
  EXPECT_EQ(filter_form_types(in).kept.size(), 7u);
}

TEST(Extraction, AnnualReportKeepsItemsOneAAndSevenAndSevenA) {
  const std::string text =
      "COVER PAGE SENTINEL_A\n"
      "Item 1. Business\nSENTINEL_B business text\n"
      "Item 1A. Risk Factors\nrisk body one\nrisk body two\n"
      "Item 2. Properties\nSENTINEL_C\n"
      "Item 7. Management's Discussion and Analysis\nmdna body\n"
      "ITEM 7A. Quantitative and Qualitative Disclosures About Market Risk\nmarket body\n"
      "Item 8. Financial Statements\nSENTINEL_D\n";
  const auto out = extract_sections(filing("d", "A", "10-K", Date{2001, 3, 1}, text));
  ASSERT_TRUE(out);
  EXPECT_EQ(*out, "risk body one\nrisk body two\n\nmdna body\n\nmarket body");
  EXPECT_EQ(out->find("SENTINEL"), std::string::npos);
}

TEST(Extraction, NoHeadersMeansAbsent) {
  EXPECT_FALSE(extract_sections(filing("d", "A", "10-K", Date{2001, 3, 1}, words(700))));
}

TEST(Extraction, QuarterlyWithOnlyItemTwo) {
  const std::string text =
      "PART I\nItem 1. Financial Statements\nSENTINEL\n"
      "Item 2. Management's Discussion\nitem two body\n"
      "Item 4. Controls\nSENTINEL\n";
  const auto out = extract_sections(filing("d", "A", "10-Q", Date{2001, 5, 1}, text));
  ASSERT_TRUE(out);
  EXPECT_EQ(*out, "item two body");
}

TEST(Extraction, QuarterlyPartContextDisambiguatesItemNumbers) {
  const std::string text =
      "PART I - FINANCIAL INFORMATION\n"
      "Item 2. MD&A\nmdna\n"
      "Item 3. Market risk\nmarket\n"
      "PART II - OTHER INFORMATION\n"
      "Item 1A. Risk Factors\nrisks\n"
      "Item 2. Unregistered Sales of Equity Securities\nSENTINEL\n"
      "Item 3. Defaults\nSENTINEL\n";
  const auto out = extract_sections(filing("d", "A", "10-Q", Date{2001, 5, 1}, text));
  ASSERT_TRUE(out);
  EXPECT_EQ(*out, "mdna\n\nmarket\n\nrisks");
}

TEST(Extraction, HeadersAreCaseAndSpaceInsensitive) {
  const std::string text = "   iTeM\t\t7.   Discussion\nbody\nitemized 7 costs\n";
  const auto out = extract_sections(filing("d", "A", "10-K", Date{2001, 3, 1}, text));
  ASSERT_TRUE(out);
  EXPECT_EQ(*out, "body\nitemized 7 costs");
}

TEST(WordFloor, BoundaryIsInclusive) {
  std::vector<FilingRecord> in;
  for (int n : {100, 609, 610, 5000}) {
    auto r = filing(std::to_string(n), "A", "10-K", Date{2001, 1, 1});
    r.word_count = static_cast<std::size_t>(n);
    in.push_back(r);
  }
  const auto s = apply_word_floor(in);
  EXPECT_EQ(ids(s.kept), (std::vector<std::string>{"610", "5000"}));
  EXPECT_EQ(ids(s.dropped), (std::vector<std::string>{"100", "609"}));
}

TEST(Dedup, SameDayDuplicateKeepsFirstId) {
  const auto s = dedup_and_cap({filing("b", "A", "10-Q", Date{2001, 3, 15}), filing("a", "A", "10-Q", Date{2001, 3, 15})});
  EXPECT_EQ(ids(s.kept), (std::vector<std::string>{"a"}));
  EXPECT_EQ(ids(s.duplicates), (std::vector<std::string>{"b"}));
}

TEST(Dedup, FiveFilingsInAYearDropTheWholeFirmYear) {
  std::vector<FilingRecord> in;
  for (int m = 1; m <= 5; ++m) in.push_back(filing("b" + std::to_string(m), "B", "10-Q", Date{2005, unsigned(m * 2), 1}));
  in.push_back(filing("b6", "B", "10-Q", Date{2006, 2, 1}));
  const auto s = dedup_and_cap(in);
  EXPECT_EQ(ids(s.kept), (std::vector<std::string>{"b6"}));
  EXPECT_EQ(s.over_frequency.size(), 5u);
}

TEST(Dedup, TenKAndTenQInTheSameQuarterAreBothKept) {
  const auto s = dedup_and_cap({filing("k", "C", "10-K", Date{2003, 2, 10}), filing("q", "C", "10-Q", Date{2003, 3, 10}),
                                filing("q2", "C", "10-Q", Date{2003, 2, 10})});
  EXPECT_EQ(s.kept.size(), 3u);
}

TEST(Dedup, DuplicatesDoNotCountTowardTheCap) {
  std::vector<FilingRecord> in;
  for (int m = 1; m <= 4; ++m) in.push_back(filing("d" + std::to_string(m), "D", "10-Q", Date{2005, unsigned(m * 2), 1}));
  in.push_back(filing("d9", "D", "10-Q", Date{2005, 2, 1}));
  const auto s = dedup_and_cap(in);
  EXPECT_EQ(s.kept.size(), 4u);
  EXPECT_EQ(s.duplicates.size(), 1u);
}

TEST(Filtration, EmptyCorpusReportsZeroEverywhere) {
  const auto r = run_filtration({});
  ASSERT_EQ(r.report.stages.size(), 5u);
  for (const auto& s : r.report.stages) EXPECT_EQ(s.remaining, 0u);
}

TEST(Filtration, StageNamesAndMonotoneCounts) {
  const std::string body = "Item 7. MD&A\n" + words(700) + "\n";
  std::vector<FilingRecord> in{filing("1", "A", "10-K", Date{2001, 3, 1}, body),
                               filing("2", "A", "10-K-A", Date{2001, 4, 1}, body),
                               filing("3", "A", "10-K", Date{2001, 5, 1}, words(800)),
                               filing("4", "A", "10-K", Date{2001, 6, 1}, "Item 7. x\n" + words(100)),
                               filing("5", "A", "10-K", Date{2001, 3, 1}, body)};
  const auto r = run_filtration(in);
  const std::vector<std::string> names{stage_names::kInitial, stage_names::kStandard, stage_names::kExtracted,
                                       stage_names::word_floor(610), stage_names::kDedup};
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < r.report.stages.size(); ++i) {
    EXPECT_EQ(r.report.stages[i].name, names[i]);
    counts.push_back(r.report.stages[i].remaining);
  }
  EXPECT_EQ(counts, (std::vector<std::size_t>{5, 4, 3, 2, 1}));
  EXPECT_EQ(r.report.to_text(),
            "stage,filings_remaining\nInitial dataset,5\nOnly standard 10-K and 10-Q,4\n"
            "\"After extracting MD&A, Risk Factors, and Market Risk sections\",3\n"
            "After removing short documents (less than 610 words),2\n"
            "After removing excessive and duplicate filings,1\n");
}

TEST(Filtration, EverythingPassesKeepsCountsConstant) {
  std::vector<FilingRecord> in;
  for (int i = 0; i < 4; ++i) {
    in.push_back(filing("x" + std::to_string(i), "F" + std::to_string(i), "10-Q", Date{2002, 5, 1},
                        "Item 2. MD&A\n" + words(650)));
  }
  for (const auto& s : run_filtration(in).report.stages) EXPECT_EQ(s.remaining, 4u);
}

TEST(Filtration, MatchesManualCompositionAndIsIdempotent) {
  std::vector<FilingRecord> in;
  std::mt19937 rng(7);
  const char* forms[] = {"10-K", "10-Q", "10-Q-A"};
  for (int i = 0; i < 60; ++i) {
    const int n = 550 + static_cast<int>(rng() % 120);
    const std::string text = (rng() % 6 ? "Item 7. x\nItem 2. y\n" : "") + words(n);
    in.push_back(filing("id" + std::to_string(i), "F" + std::to_string(rng() % 4), forms[rng() % 3],
                        Date{2001, unsigned(1 + rng() % 12), unsigned(1 + rng() % 3)}, text));
  }
  const auto r = run_filtration(in);
  auto manual = dedup_and_cap(apply_word_floor(apply_extraction(filter_form_types(in).kept).kept).kept).kept;
  EXPECT_EQ(ids(r.records), ids(manual));

  EXPECT_EQ(ids(filter_form_types(r.records).kept), ids(r.records));
  EXPECT_EQ(ids(apply_word_floor(r.records).kept), ids(r.records));
  EXPECT_EQ(ids(dedup_and_cap(r.records).kept), ids(r.records));
}

TEST(LoadCorpus, MissingTextIsARowError) {
  const auto dir = oracle::scratch("load");
  std::filesystem::create_directories(dir / "t");
  for (const char* f : {"a", "b"}) std::ofstream(dir / "t" / (std::string(f) + ".txt")) << "Item 7. text";
  std::ofstream(dir / "meta.csv") << "firm_id,form_type,filing_date,fiscal_year,fiscal_quarter,text_path\n"
                                     "A,10-K,2001-03-01,2000,4,t/a.txt\n"
                                     "A,10-Q,2001-05-01,2001,1,t/missing.txt\n"
                                     "B,10-K405,2001-03-02,2000,4,t/b.txt\n";
  const auto r = load_corpus(dir / "meta.csv", dir);
  ASSERT_EQ(r.records.size(), 2u);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0].line, 3u);
  EXPECT_EQ(r.records[1].form.kind, FormKind::Other);
  EXPECT_EQ(r.records[0].fiscal_quarter, (Quarter{2000, 4}));
  EXPECT_THROW(load_corpus(dir / "nope.csv", dir), IoError);
}

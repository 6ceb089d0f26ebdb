#include <fstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tonegar/sentiment.hpp"

using namespace tonegar;
using namespace tonegar::sentiment;

namespace {

Lexicon tiny() {
  Lexicon lex;
  lex.add("good", Category::Positive);
  lex.add("loss", Category::Negative);
  lex.add("may", Category::Uncertainty);
  lex.add("lawsuit", Category::Litigious);
  return lex;
}

SentimentObservation obs(std::string doc, std::string form, Date filed, Quarter fq, std::string firm = "A") {
  SentimentObservation o;
  o.doc_id = std::move(doc);
  o.firm_id = std::move(firm);
  o.form = corpus::parse_form_type(form);
  o.filing_date = filed;
  o.fiscal_quarter = fq;
  return o;
}

std::optional<std::string> baseline(const SentimentObservation& cur, const std::vector<SentimentObservation>& hist) {
  const auto i = match_prior(cur, hist);
  if (!i) return std::nullopt;
  return hist[*i].doc_id;
}

}  // namespace

TEST(Lexicon, LoadsFlagColumnsAndCountsIndependently) {
  const auto dir = oracle::scratch("lexicon");
  std::ofstream(dir / "lm.csv") << "Word,Seq_num,Negative,Positive,Uncertainty,Litigious,Modal\n"
                                   "GOOD,1,0,2009,0,0,0\n"
                                   "LOSS,2,2009,0,0,0,0\n"
                                   "MAY,3,0,0,2009,0,3\n"
                                   "LAWSUIT,4,2011,0,0,2009,0\n"
                                   "TABLE,5,0,0,0,0,0\n";
  const auto lex = load_lexicon(dir / "lm.csv");
  EXPECT_EQ(lex.size(Category::Positive), 1u);
  EXPECT_EQ(lex.size(Category::Negative), 2u);
  EXPECT_TRUE(lex.contains(Category::Negative, "lawsuit"));
  EXPECT_TRUE(lex.contains(Category::Litigious, "Lawsuit"));
  EXPECT_FALSE(lex.contains(Category::Positive, "table"));
  EXPECT_EQ(lex.ignored_columns, 2u);  // Seq_num, Modal

  // Independent one-line scan of the Negative flag column.
  std::ifstream in(dir / "lm.csv");
  std::string line;
  std::getline(in, line);
  std::size_t neg = 0;
  while (std::getline(in, line)) neg += delimited::split_line(line)[2] != "0";
  EXPECT_EQ(lex.size(Category::Negative), neg);
}

TEST(Lexicon, EmptyCategoryIsFatal) {
  const auto dir = oracle::scratch("lexicon-empty");
  std::ofstream(dir / "lm.csv") << "word,positive,negative,uncertainty,litigious\ngood,1,0,0,0\n";
  EXPECT_THROW(load_lexicon(dir / "lm.csv"), ConfigError);
  EXPECT_THROW(load_lexicon(dir / "missing.csv"), IoError);
}

TEST(Ratios, DirectFormula) {
  std::string text;
  for (int i = 0; i < 96; ++i) text += "word ";
  for (int i = 0; i < 4; ++i) text += "LOSS ";
  const auto r = sentiment_ratios(text, tiny());
  EXPECT_DOUBLE_EQ(r[index(Category::Negative)], 0.04);
  EXPECT_DOUBLE_EQ(r[index(Category::Positive)], 0.0);
  for (double v : sentiment_ratios("nothing to see here", tiny())) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(sentiment_ratios("123 -- !!", tiny()), Error);
}

TEST(Ratios, HandCountedParagraph) {
  // 3 positive, 5 negative, 2 uncertainty, 0 litigious hits among 200 tokens.
  std::string text = "Good, good; GOOD. loss loss-loss loss/loss may may ";
  for (int i = 0; i < 190; ++i) text += "filler" + std::string(i % 7 ? " " : "\n");
  const auto r = sentiment_ratios(text, tiny());
  EXPECT_DOUBLE_EQ(r[0], 0.015);
  EXPECT_DOUBLE_EQ(r[1], 0.025);
  EXPECT_DOUBLE_EQ(r[2], 0.01);
  EXPECT_DOUBLE_EQ(r[3], 0.0);
}

TEST(Ratios, DuplicatedTextLeavesRatiosUnchanged) {
  const std::string t = "good loss may lawsuit and some other words here loss";
  EXPECT_EQ(sentiment_ratios(t, tiny()), sentiment_ratios(t + " " + t, tiny()));
}

TEST(Growth, Formula) {
  Ratios cur{0.06, 0.05, 0.01, 0.0}, base{0.05, 0.05, 0.0, 0.0};
  const auto g = sentiment_growth(cur, base);
  EXPECT_DOUBLE_EQ(*g[0], 0.2);
  EXPECT_DOUBLE_EQ(*g[1], 0.0);
  EXPECT_FALSE(g[2]);
  EXPECT_FALSE(g[3]);
}

TEST(Growth, SignFollowsRatioChange) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.001, 0.1);
  for (int i = 0; i < 200; ++i) {
    const Ratios a{u(rng), u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng), u(rng)};
    const auto g = sentiment_growth(a, b);
    for (std::size_t c = 0; c < kCategoryCount; ++c) EXPECT_EQ(*g[c] > 0, a[c] > b[c]);
  }
}

TEST(Tone, DifferenceOfPositiveAndNegative) {
  EXPECT_DOUBLE_EQ(*tone_growth({0.10, 0.05, {}, {}}), 0.05);
  EXPECT_DOUBLE_EQ(*tone_growth({0.07, 0.07, {}, {}}), 0.0);
  EXPECT_FALSE(tone_growth({0.10, std::nullopt, 0.0, 0.0}));
}

TEST(MatchPrior, SameQuarterSameTypePriorYear) {
  const auto cur = obs("c", "10-Q", Date{2003, 5, 1}, Quarter{2003, 1});
  EXPECT_EQ(baseline(cur, {obs("p", "10-Q", Date{2002, 5, 1}, Quarter{2002, 1})}), "p");
}

TEST(MatchPrior, GapYearGivesNothing) {
  const auto cur = obs("c", "10-Q", Date{2003, 5, 1}, Quarter{2003, 1});
  EXPECT_FALSE(baseline(cur, {obs("p", "10-Q", Date{2001, 5, 1}, Quarter{2001, 1})}));
}

TEST(MatchPrior, NoCrossTypePairing) {
  const auto cur = obs("c", "10-K", Date{2003, 8, 1}, Quarter{2003, 2});
  EXPECT_FALSE(baseline(cur, {obs("p", "10-Q", Date{2002, 8, 1}, Quarter{2002, 2})}));
}

TEST(MatchPrior, FirstYearGivesNothing) {
  EXPECT_FALSE(baseline(obs("c", "10-Q", Date{2003, 5, 1}, Quarter{2003, 1}), {}));
}

TEST(MatchPrior, RankPairingIsABijection) {
  std::vector<SentimentObservation> hist{obs("p1", "10-Q", Date{2002, 4, 10}, Quarter{2002, 1}),
                                         obs("p2", "10-Q", Date{2002, 5, 10}, Quarter{2002, 1}),
                                         obs("p3", "10-Q", Date{2002, 6, 10}, Quarter{2002, 1})};
  std::vector<SentimentObservation> cur{obs("c1", "10-Q", Date{2003, 4, 2}, Quarter{2003, 1}),
                                        obs("c2", "10-Q", Date{2003, 4, 20}, Quarter{2003, 1}),
                                        obs("c3", "10-Q", Date{2003, 6, 1}, Quarter{2003, 1})};
  for (std::size_t i = 0; i < cur.size(); ++i) {
    auto h = hist;
    h.insert(h.end(), cur.begin(), cur.begin() + static_cast<long>(i));
    EXPECT_EQ(baseline(cur[i], h), "p" + std::to_string(i + 1));
  }
}

TEST(MatchPrior, SingleBaselineServesEveryCurrentFiling) {
  std::vector<SentimentObservation> hist{obs("p", "10-Q", Date{2002, 5, 1}, Quarter{2002, 1}),
                                         obs("c1", "10-Q", Date{2003, 4, 2}, Quarter{2003, 1})};
  EXPECT_EQ(baseline(obs("c2", "10-Q", Date{2003, 5, 2}, Quarter{2003, 1}), hist), "p");
  EXPECT_EQ(baseline(hist[1], {hist[0]}), "p");
}

TEST(MatchPrior, InvariantToHistoryOrder) {
  std::vector<SentimentObservation> hist{obs("p1", "10-Q", Date{2002, 4, 10}, Quarter{2002, 1}),
                                         obs("p2", "10-Q", Date{2002, 5, 10}, Quarter{2002, 1}),
                                         obs("x", "10-K", Date{2002, 5, 10}, Quarter{2002, 1}),
                                         obs("c1", "10-Q", Date{2003, 4, 2}, Quarter{2003, 1})};
  const auto cur = obs("c2", "10-Q", Date{2003, 4, 20}, Quarter{2003, 1});
  std::sort(hist.begin(), hist.end(), [](auto& a, auto& b) { return a.doc_id < b.doc_id; });
  do {
    EXPECT_EQ(baseline(cur, hist), "p2");
  } while (std::next_permutation(hist.begin(), hist.end(), [](auto& a, auto& b) { return a.doc_id < b.doc_id; }));
}

TEST(BuildObservations, GrowthAndToneAgainstTheMatchedBaseline) {
  auto rec = [](std::string id, Date d, Quarter q, std::string text) {
    corpus::FilingRecord r;
    r.doc_id = std::move(id);
    r.firm_id = "A";
    r.form = corpus::parse_form_type("10-Q");
    r.filing_date = d;
    r.fiscal_quarter = q;
    r.raw_text = std::move(text);
    return r;
  };
  const auto out = build_observations({rec("b", Date{2003, 5, 1}, Quarter{2003, 1}, "good good loss x"),
                                       rec("a", Date{2002, 5, 1}, Quarter{2002, 1}, "good loss x y")},
                                      tiny());
  ASSERT_EQ(out.size(), 2u);
  EXPECT_FALSE(out[0].tone_growth);
  ASSERT_TRUE(out[1].tone_growth);
  EXPECT_EQ(*out[1].baseline_doc_id, "a");
  EXPECT_DOUBLE_EQ(*out[1].tone_growth, (0.5 - 0.25) / 0.25 - 0.0);
  EXPECT_LE(out[0].filing_date, out[1].fiscal_quarter.first_day());
}

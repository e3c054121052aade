// Copyright 2026 The maskbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "maskbench/ingest.h"

#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "maskbench/errors.h"

namespace maskbench {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixture(const std::string& name) {
  return std::string(MASKBENCH_FIXTURES) + "/" + name;
}

Filing plain(std::string body) {
  return load_filing(body, FormatTag::kPlainText, "TEST", "2024-01-31");
}

std::string strip_space(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (!is_space(c)) out.push_back(c);
  }
  return out;
}

std::vector<std::string> texts(const std::vector<Sentence>& sentences) {
  std::vector<std::string> out;
  for (const auto& s : sentences) out.push_back(s.text);
  return out;
}

// --- load_filing -----------------------------------------------------------

TEST(LoadFilingTest, PlainTextIsIdentity) {
  const Filing f = plain("Item 7. MD&A\nRevenue rose.\n");
  EXPECT_EQ(f.body, "Item 7. MD&A\nRevenue rose.\n");
  EXPECT_EQ(f.filing_date, (Date{2024, 1, 31}));
  EXPECT_EQ(f.company_id, "TEST");
}

TEST(LoadFilingTest, NormalizesLineEndings) {
  EXPECT_EQ(plain("a\r\nb\rc\n").body, "a\nb\nc\n");
}

TEST(LoadFilingTest, Errors) {
  EXPECT_THROW(plain("abc\xff"), DecodeError);
  EXPECT_THROW(plain("\xc3\x28"), DecodeError);
  EXPECT_THROW(plain("\xed\xa0\x80"), DecodeError);  // surrogate
  EXPECT_THROW(plain("\xe2\x82"), DecodeError);      // truncated
  EXPECT_THROW(plain(""), EmptyDocument);
  EXPECT_THROW(plain(" \n\t"), EmptyDocument);
  EXPECT_THROW(load_filing("x", FormatTag::kPlainText, "T", "2023-02-29"),
               DecodeError);
  EXPECT_THROW(load_filing("x", FormatTag::kPlainText, "T", "2024/01/01"),
               DecodeError);
}

TEST(LoadFilingTest, SimpleMarkupDropsTagsOutsideTables) {
  const Filing f = load_filing(
      "<p>Costs &amp; fees rose.</p><div>Item&nbsp;7</div>"
      "<table><tr><td>a&amp;b</td></tr></table>",
      FormatTag::kSimpleMarkup, "T", "2024-01-01");
  EXPECT_EQ(f.body,
            "\nCosts & fees rose.\n\nItem 7\n"
            "<table><tr><td>a&amp;b</td></tr></table>");
}

TEST(DateTest, ParseAndPrint) {
  EXPECT_EQ(Date::parse("2024-02-29")->to_string(), "2024-02-29");
  EXPECT_FALSE(Date::parse("2100-02-29"));
  EXPECT_FALSE(Date::parse("2024-13-01"));
  EXPECT_FALSE(Date::parse("2024-1-01"));
}

// --- extract_mdna ----------------------------------------------------------

TEST(ExtractMdnaTest, BetweenItem7AndItem8) {
  const std::string body =
      "Item 1. Business\nStuff.\n"
      "Item 7. Management's Discussion\nRevenue rose.\n"
      "Item 8. Financial Statements\nNumbers.\n";
  const Filing f = plain(body);
  const DocumentSection s = extract_mdna(f);
  EXPECT_EQ(section_text(f, s), "Revenue rose.\n");
  EXPECT_EQ(s.label, "Item 7. Management's Discussion");
  EXPECT_FALSE(s.manual_override);
}

TEST(ExtractMdnaTest, EndsAtNearestItem7A) {
  const Filing f = plain(
      "Item 7. MD&A\nBody text.\nItem 7A. Quantitative\nRisk.\nItem 8. FS\n");
  EXPECT_EQ(section_text(f, extract_mdna(f)), "Body text.\n");
}

TEST(ExtractMdnaTest, PunctuationAndCaseVariants) {
  for (const std::string heading :
       {"ITEM 7 — MANAGEMENT'S DISCUSSION", "Item 7: MD&A", "item 7.",
        "## Item 7. MD&A", "**ITEM 7.** MD&A", "Item\t7 - MD&A",
        "Item\xC2\xA0" "7. MD&A"}) {
    const Filing f = plain(heading + "\nBody.\nITEM 8. FS\n");
    EXPECT_EQ(section_text(f, extract_mdna(f)), "Body.\n") << heading;
  }
}

TEST(ExtractMdnaTest, NotHeadings) {
  // "Item 70", "Item 7A" and prose mentioning item 7 mid-line do not start a
  // section.
  EXPECT_THROW(extract_mdna(plain("Item 70. Other\nBody.\nItem 8.\n")),
               SectionNotFound);
  EXPECT_THROW(extract_mdna(plain("Item 7A. Market risk\nBody.\nItem 8.\n")),
               SectionNotFound);
  EXPECT_THROW(extract_mdna(plain("As discussed in Item 7, sales rose.\n")),
               SectionNotFound);
}

TEST(ExtractMdnaTest, TableOfContentsLosesToBody) {
  const Filing f = plain(
      "Item 7. MD&A\nItem 8. FS\n\nItem 7. MD&A\nLong body text here.\n"
      "More body text.\nItem 8. FS\nStatements.\n");
  EXPECT_EQ(section_text(f, extract_mdna(f)),
            "Long body text here.\nMore body text.\n");
}

TEST(ExtractMdnaTest, NoEndHeadingRunsToEnd) {
  const Filing f = plain("Intro.\nItem 7. MD&A\nBody.\n");
  EXPECT_EQ(section_text(f, extract_mdna(f)), "Body.\n");
}

TEST(ExtractMdnaTest, EndBeforeStartIsMalformed) {
  EXPECT_THROW(extract_mdna(plain("Item 8. FS\nText.\nItem 7. MD&A\n")),
               MalformedDocument);
}

TEST(ExtractMdnaTest, Deterministic) {
  const std::string bytes = read_file(fixture("filings/ACME_2024-02-15.txt"));
  const Filing a = load_filing(bytes, FormatTag::kPlainText, "ACME", "2024-02-15");
  const Filing b = load_filing(bytes, FormatTag::kPlainText, "ACME", "2024-02-15");
  EXPECT_EQ(extract_mdna(a).start_offset, extract_mdna(b).start_offset);
  EXPECT_EQ(extract_mdna(a).end_offset, extract_mdna(b).end_offset);
}

TEST(OverrideSectionTest, ValidatesRange) {
  const Filing f = plain("abcdef");
  const DocumentSection s = override_section(f, 1, 4, "curated");
  EXPECT_TRUE(s.manual_override);
  EXPECT_EQ(section_text(f, s), "bcd");
  EXPECT_THROW(override_section(f, 4, 4, "x"), MalformedDocument);
  EXPECT_THROW(override_section(f, 0, 7, "x"), MalformedDocument);
}

// --- extract_tables --------------------------------------------------------

TEST(ExtractTablesTest, NoTablesIsIdentity) {
  const std::string text = "Revenue rose. Costs fell.\n";
  const TableExtraction t = extract_tables(text);
  EXPECT_TRUE(t.tables.empty());
  EXPECT_EQ(t.narrative.text, text);
}

TEST(ExtractTablesTest, TakesImmediatelyPrecedingSentence) {
  const std::string text =
      "Revenue grew. The following table shows segments: "
      "<table><tr><th>Segment</th><th>2024</th></tr>"
      "<tr><td>A</td><td>$1.2</td></tr></table> Costs fell sharply.";
  const TableExtraction t = extract_tables(text, "X");
  ASSERT_EQ(t.tables.size(), 1u);
  const TableBlock& tb = t.tables[0];
  EXPECT_EQ(tb.table_id, "X-T1");
  EXPECT_EQ(tb.pre_text, "The following table shows segments:");
  EXPECT_EQ(tb.grid, (TableGrid{{"Segment", "2024"}, {"A", "$1.2"}}));
  EXPECT_EQ(t.narrative.text.find("<t"), std::string::npos);
  EXPECT_EQ(texts(segment_narrative(t.narrative)),
            (std::vector<std::string>{"Revenue grew.", "Costs fell sharply."}));
}

TEST(ExtractTablesTest, PipeTables) {
  const std::string text =
      "Segment results follow.\n\n| Segment | 2024 |\n|---|:--:|\n| A | 5 |\n"
      "| B | 6 |\n\nAfter the table.";
  const TableExtraction t = extract_tables(text);
  ASSERT_EQ(t.tables.size(), 1u);
  EXPECT_EQ(t.tables[0].grid,
            (TableGrid{{"Segment", "2024"}, {"A", "5"}, {"B", "6"}}));
  EXPECT_EQ(t.tables[0].pre_text, "Segment results follow.");
  EXPECT_EQ(text.substr(t.tables[0].source_span.begin,
                        t.tables[0].source_span.size()),
            "| Segment | 2024 |\n|---|:--:|\n| A | 5 |\n| B | 6 |");
}

TEST(ExtractTablesTest, AdjacentTablesShareNoPretext) {
  const std::string text =
      "Intro sentence here.\n<table><tr><td>1</td></tr></table>\n"
      "<table><tr><td>2</td></tr></table>\nTail sentence.";
  const TableExtraction t = extract_tables(text);
  ASSERT_EQ(t.tables.size(), 2u);
  EXPECT_EQ(t.tables[0].pre_text, "Intro sentence here.");
  EXPECT_EQ(t.tables[1].pre_text, "");
  EXPECT_FALSE(t.tables[1].pre_text_span.has_value());
}

TEST(ExtractTablesTest, NestedTables) {
  const std::string text =
      "<table><tr><td><table><tr><td>in</td></tr></table></td></tr></table>";
  const TableExtraction t = extract_tables(text);
  ASSERT_EQ(t.tables.size(), 1u);
  EXPECT_EQ(t.tables[0].source_span.end, text.size());
}

TEST(ExtractTablesTest, Errors) {
  EXPECT_THROW(extract_tables("Text. <table><tr><td>1</td></tr>"),
               TableParseError);
  EXPECT_THROW(extract_tables("Text. </table>"), TableParseError);
  EXPECT_THROW(extract_tables("Text. <table></table>"), TableParseError);
}

// --- segment_sentences -----------------------------------------------------

TEST(SegmentTest, TwoSimpleSentences) {
  EXPECT_EQ(texts(segment_sentences("Revenue rose. Costs fell.")),
            (std::vector<std::string>{"Revenue rose.", "Costs fell."}));
}

TEST(SegmentTest, AbbreviationMerged) {
  EXPECT_EQ(texts(segment_sentences("Sales at Acme Inc. rose 5%.")),
            (std::vector<std::string>{"Sales at Acme Inc. rose 5%."}));
}

TEST(SegmentTest, EmptyInput) {
  EXPECT_TRUE(segment_sentences("").empty());
  EXPECT_TRUE(segment_sentences(" \n\n ").empty());
}

TEST(SegmentTest, NumericSplitMerged) {
  EXPECT_EQ(texts(segment_sentences(
                "Backlog grew to 1. 5 times the prior level in the period.")),
            (std::vector<std::string>{
                "Backlog grew to 1. 5 times the prior level in the period."}));
}

TEST(SegmentTest, ShortFragmentMergedForward) {
  EXPECT_EQ(texts(segment_sentences("A. B. Revenue rose strongly.")),
            (std::vector<std::string>{"A. B. Revenue rose strongly."}));
  EXPECT_EQ(texts(segment_sentences("Overview.  Revenue rose strongly.")),
            (std::vector<std::string>{"Overview.  Revenue rose strongly."}));
}

TEST(SegmentTest, MinCharsIsConfigurable) {
  SegmenterOptions opts;
  opts.min_chars = 0;
  EXPECT_EQ(segment_sentences("Overview. Revenue rose strongly.", opts).size(), 2u);
}

TEST(SegmentTest, HandSegmentedCorpus) {
  const std::string raw = read_file(fixture("segmentation_raw.txt"));
  const auto expected = nlohmann::json::parse(
      read_file(fixture("segmentation_expected.json"))).get<std::vector<std::string>>();
  const std::vector<Sentence> got = segment_sentences(raw);
  EXPECT_EQ(texts(got), expected);
  for (const Sentence& s : got) {
    EXPECT_EQ(raw.substr(s.source_span.begin, s.source_span.size()), s.text);
  }
}

// Random documents assembled from sentence-ish pieces and whitespace.
std::string random_narrative(std::mt19937_64& rng) {
  static const std::vector<std::string> kPieces = {
      "Revenue rose.", "Costs fell.", "Sales at Acme Inc. rose 5%.",
      "The U.S. business grew by $1.2 million.", "See Note 12.",
      "Results of Operations", "Why did margins fall?", "Growth was strong!",
      "(See below.)", "Mr. Smith retired on Jan. 4, 2024.", "e.g. leases",
      "Net sales were $3.4 billion.", "Item 4.", "“Quoted sentence.”",
      "Costs were 12.5% of sales.", "A."};
  static const std::vector<std::string> kGaps = {" ", "  ", "\n", "\n\n", " \n \n"};
  std::string out;
  const int n = static_cast<int>(rng() % 12);
  for (int i = 0; i < n; ++i) {
    if (i) out += kGaps[rng() % kGaps.size()];
    out += kPieces[rng() % kPieces.size()];
  }
  return out;
}

TEST(SegmentPropertyTest, OrderedDisjointFaithful) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 3000; ++trial) {
    const std::string text = random_narrative(rng);
    const std::vector<Sentence> s = segment_sentences(text);
    std::string joined;
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_EQ(s[i].index, i);
      EXPECT_FALSE(trim(s[i].text).empty());
      EXPECT_EQ(s[i].text, trim(s[i].text));
      EXPECT_EQ(text.substr(s[i].source_span.begin, s[i].source_span.size()),
                s[i].text);
      if (i) EXPECT_LE(s[i - 1].source_span.end, s[i].source_span.begin);
      joined += s[i].text;
    }
    EXPECT_EQ(strip_space(joined), strip_space(text)) << text;
  }
}

TEST(SegmentPropertyTest, Idempotent) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 3000; ++trial) {
    const std::string text = random_narrative(rng);
    const std::vector<std::string> first = texts(segment_sentences(text));
    std::string joined;
    for (const auto& t : first) joined += (joined.empty() ? "" : " ") + t;
    EXPECT_EQ(texts(segment_sentences(joined)), first) << text;
  }
}

// --- fixture corpus --------------------------------------------------------

class FixtureFilingTest : public ::testing::TestWithParam<std::string> {};

TEST_P(FixtureFilingTest, MatchesByteAccounting) {
  const auto manifest =
      nlohmann::json::parse(read_file(fixture("filings_manifest.json")));
  const auto& m = manifest.at(GetParam());
  const std::string file = m.at("file").get<std::string>();
  const FormatTag fmt = file.ends_with(".html") ? FormatTag::kSimpleMarkup
                                                : FormatTag::kPlainText;
  const std::string date = file.substr(file.find('_') + 1, 10);
  Filing filing = load_filing(read_file(fixture("filings/" + file)), fmt,
                              GetParam(), date);
  EXPECT_EQ(filing.body.size(), m.at("body_length").get<std::size_t>());

  const DocumentSection section = extract_mdna(filing);
  EXPECT_EQ(section.start_offset, m.at("section").at(0).get<std::size_t>());
  EXPECT_EQ(section.end_offset, m.at("section").at(1).get<std::size_t>());

  const TableExtraction ex = extract_tables(section_text(filing, section));
  EXPECT_EQ(ex.narrative.text.size(), m.at("residual_length").get<std::size_t>());

  const IngestedDocument doc = ingest_filing(filing);
  const auto& tables = m.at("tables");
  ASSERT_EQ(doc.tables.size(), tables.size());
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const TableBlock& t = doc.tables[i];
    EXPECT_EQ(t.table_id, GetParam() + "-T" + std::to_string(i + 1));
    EXPECT_EQ(t.source_span.begin, tables[i].at("offsets").at(0).get<std::size_t>());
    EXPECT_EQ(t.source_span.end, tables[i].at("offsets").at(1).get<std::size_t>());
    EXPECT_EQ(t.pre_text, tables[i].at("pre_text").get<std::string>());
    EXPECT_EQ(t.grid.size(), tables[i].at("rows").get<std::size_t>());
    for (const auto& row : t.grid) {
      EXPECT_EQ(row.size(), tables[i].at("cols").get<std::size_t>());
    }
  }
  const auto& sentences = m.at("sentences");
  ASSERT_EQ(doc.sentences.size(), sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    EXPECT_EQ(doc.sentences[i].text, sentences[i].at("text").get<std::string>());
    EXPECT_EQ(doc.sentences[i].source_span.begin,
              sentences[i].at("offsets").at(0).get<std::size_t>());
    EXPECT_EQ(doc.sentences[i].source_span.end,
              sentences[i].at("offsets").at(1).get<std::size_t>());
  }
}

TEST_P(FixtureFilingTest, PartitionProperty) {
  const auto manifest =
      nlohmann::json::parse(read_file(fixture("filings_manifest.json")));
  const std::string file = manifest.at(GetParam()).at("file").get<std::string>();
  const FormatTag fmt = file.ends_with(".html") ? FormatTag::kSimpleMarkup
                                                : FormatTag::kPlainText;
  const IngestedDocument doc = ingest_filing(load_filing(
      read_file(fixture("filings/" + file)), fmt, GetParam(),
      file.substr(file.find('_') + 1, 10)));
  std::vector<CharRange> claimed;
  for (const auto& t : doc.tables) {
    claimed.push_back(t.source_span);
    if (t.pre_text_span) {
      claimed.push_back(*t.pre_text_span);
      EXPECT_EQ(doc.filing.body.substr(t.pre_text_span->begin,
                                       t.pre_text_span->size()),
                t.pre_text);
    }
  }
  for (const auto& s : doc.sentences) {
    claimed.push_back(s.source_span);
    EXPECT_EQ(doc.filing.body.substr(s.source_span.begin, s.source_span.size()),
              s.text);
    EXPECT_GE(s.source_span.begin, doc.section.start_offset);
    EXPECT_LE(s.source_span.end, doc.section.end_offset);
    for (const auto& t : doc.tables) EXPECT_NE(s.text, t.pre_text);
  }
  for (std::size_t i = 0; i < claimed.size(); ++i) {
    for (std::size_t j = i + 1; j < claimed.size(); ++j) {
      EXPECT_FALSE(claimed[i].overlaps(claimed[j]));
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Corpus, FixtureFilingTest,
                         ::testing::Values("ACME", "GOTHAM", "BRIGHTWAY"));

TEST(RecordTest, RoundTrip) {
  const Filing f = plain("Item 7. MD&A\nRevenue grew. Table:\n| a | b |\n| 1 | 2 |\n");
  const IngestedDocument doc = ingest_filing(f);
  ASSERT_EQ(doc.tables.size(), 1u);
  const auto tj = table_record(doc.filing, doc.tables[0]);
  EXPECT_EQ(tj.at("record"), "table");
  EXPECT_EQ(tj.at("company_id"), "TEST");
  EXPECT_EQ(tj.at("filing_date"), "2024-01-31");
  const TableBlock t = table_from_record(nlohmann::json::parse(tj.dump()));
  EXPECT_EQ(t.grid, doc.tables[0].grid);
  EXPECT_EQ(t.pre_text, "Table:");
  EXPECT_EQ(t.source_span, doc.tables[0].source_span);
  ASSERT_EQ(doc.sentences.size(), 1u);
  const auto sj = sentence_record(doc.filing, doc.sentences[0]);
  const Sentence s = sentence_from_record(nlohmann::json::parse(sj.dump()));
  EXPECT_EQ(s.text, "Revenue grew.");
  EXPECT_EQ(s.source_span, doc.sentences[0].source_span);
  EXPECT_EQ(section_record(doc.filing, doc.section).at("offsets").size(), 2u);
}

}  // namespace
}  // namespace maskbench

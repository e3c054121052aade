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

// Filing ingestion: decoding, MD&A location, table/pre-text separation and
// sentence segmentation.
//
// All offsets are UTF-8 byte offsets. Functions here are pure; they can be
// called concurrently on distinct or shared inputs.

#ifndef MASKBENCH_INGEST_H_
#define MASKBENCH_INGEST_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskbench/text_util.h"

namespace maskbench {

struct Date {
  int year = 0;
  int month = 0;
  int day = 0;

  // Strict YYYY-MM-DD with calendar validation.
  static std::optional<Date> parse(std::string_view text);
  std::string to_string() const;
  friend bool operator==(const Date&, const Date&) = default;
};

enum class FormatTag { kPlainText, kSimpleMarkup };

std::optional<FormatTag> format_tag_from_string(std::string_view text);
std::string_view to_string(FormatTag tag);

struct Filing {
  std::string company_id;
  Date filing_date;
  std::string body;
  std::optional<std::string> source_uri;
  FormatTag format = FormatTag::kPlainText;
};

struct DocumentSection {
  std::size_t start_offset = 0;  // into Filing::body
  std::size_t end_offset = 0;
  std::string label;
  // Set when the boundaries came from curation instead of heading search.
  bool manual_override = false;
};

using TableGrid = std::vector<std::vector<std::string>>;

struct TableBlock {
  std::string table_id;
  std::string pre_text;                   // may be empty
  std::optional<CharRange> pre_text_span;  // absent iff pre_text is empty
  TableGrid grid;
  CharRange source_span;

  friend bool operator==(const TableBlock&, const TableBlock&) = default;
};

struct Sentence {
  std::size_t index = 0;
  std::string text;
  CharRange source_span;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

// Text left after tables and pre-texts are cut out, with a map back to the
// offsets of the text it was cut from.
struct NarrativeText {
  struct Piece {
    std::size_t text_begin = 0;
    std::size_t source_begin = 0;
    std::size_t length = 0;
  };

  std::string text;
  std::vector<Piece> pieces;

  std::size_t to_source(std::size_t text_offset) const;
};

struct TableExtraction {
  std::vector<TableBlock> tables;
  NarrativeText narrative;
};

struct SegmenterOptions {
  // Candidates shorter than this with fewer than two lowercase words are
  // treated as conversion fragments.
  std::size_t min_chars = 15;
  // Tokens (without the trailing period) after which a period never ends a
  // sentence. Compared case-insensitively.
  std::vector<std::string> abbreviations = default_abbreviations();

  static std::vector<std::string> default_abbreviations();
};

// Decodes `bytes` (UTF-8, optional BOM) and normalizes CRLF/CR to LF. For
// simple markup, non-table tags are dropped (block tags become newlines) and
// entities outside tables are decoded.
// Throws DecodeError on invalid UTF-8 or a bad date, EmptyDocument when the
// body is blank.
Filing load_filing(std::string_view bytes, FormatTag format,
                   std::string company_id, std::string_view filing_date,
                   std::optional<std::string> source_uri = std::nullopt);

// Locates the MD&A: the text after an "Item 7" heading line up to the next
// "Item 7A" or "Item 8" heading line. Headings must start a line; case and
// trailing punctuation are free. When several "Item 7" headings exist (a
// table of contents), the one giving the longest section wins.
// Throws SectionNotFound or MalformedDocument.
DocumentSection extract_mdna(const Filing& filing);

// Curated boundaries. Throws MalformedDocument when the range is invalid.
DocumentSection override_section(const Filing& filing, std::size_t start,
                                 std::size_t end, std::string label);

std::string_view section_text(const Filing& filing,
                              const DocumentSection& section);

// Cuts HTML-like <table> blocks and pipe-row blocks out of `text`. Each table
// takes the sentence right before it as pre-text. Offsets are relative to
// `text`; table ids are "<id_prefix>-T<n>" numbered from 1.
// Throws TableParseError for unclosed or empty tables.
TableExtraction extract_tables(std::string_view text,
                               std::string_view id_prefix = "doc",
                               const SegmenterOptions& options = {});

// Splits table-free text into sentences with spans relative to `text`.
std::vector<Sentence> segment_sentences(std::string_view text,
                                        const SegmenterOptions& options = {});

// Segments each narrative piece independently and maps spans back through
// the narrative to source offsets, adding `base_offset`.
std::vector<Sentence> segment_narrative(const NarrativeText& narrative,
                                        std::size_t base_offset = 0,
                                        const SegmenterOptions& options = {});

// Everything the later stages need from one filing.
struct IngestedDocument {
  Filing filing;
  DocumentSection section;
  std::vector<TableBlock> tables;     // offsets into Filing::body
  std::vector<Sentence> sentences;    // offsets into Filing::body
};

IngestedDocument ingest_filing(Filing filing,
                               const SegmenterOptions& options = {});

// Line-delimited record encodings. Field names are stable.
nlohmann::ordered_json section_record(const Filing& filing,
                                      const DocumentSection& section);
nlohmann::ordered_json table_record(const Filing& filing,
                                    const TableBlock& table);
nlohmann::ordered_json sentence_record(const Filing& filing,
                                       const Sentence& sentence);

TableBlock table_from_record(const nlohmann::json& record);
Sentence sentence_from_record(const nlohmann::json& record);

}  // namespace maskbench

#endif  // MASKBENCH_INGEST_H_

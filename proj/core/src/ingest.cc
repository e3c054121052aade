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

#include <algorithm>
#include <cstdio>
#include <utility>

#include "maskbench/errors.h"

namespace maskbench {
namespace {

constexpr std::size_t kMaxHeadingLength = 150;

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view p) {
  return pos + p.size() <= s.size() && iequals(s.substr(pos, p.size()), p);
}

// ---------------------------------------------------------------------------
// Decoding

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra;
    unsigned int cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong forms, surrogates and out-of-range code points.
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
        (extra == 3 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

void append_utf8(std::string& out, unsigned int cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Decodes the entity starting at s[pos] == '&'. Returns the consumed length,
// or 0 when the text is not an entity.
std::size_t decode_entity(std::string_view s, std::size_t pos,
                          std::string& out) {
  const std::size_t semi = s.find(';', pos);
  if (semi == std::string_view::npos || semi - pos > 10) return 0;
  const std::string_view name = s.substr(pos + 1, semi - pos - 1);
  if (name.empty()) return 0;
  if (name[0] == '#') {
    unsigned long cp = 0;
    const bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
    const std::string_view digits = name.substr(hex ? 2 : 1);
    if (digits.empty()) return 0;
    for (char c : digits) {
      int v;
      if (is_digit(c)) {
        v = c - '0';
      } else if (hex && c >= 'a' && c <= 'f') {
        v = c - 'a' + 10;
      } else if (hex && c >= 'A' && c <= 'F') {
        v = c - 'A' + 10;
      } else {
        return 0;
      }
      cp = cp * (hex ? 16 : 10) + static_cast<unsigned long>(v);
      if (cp > 0x10FFFF) return 0;
    }
    if (cp == 0xA0) {
      out.push_back(' ');
    } else {
      append_utf8(out, static_cast<unsigned int>(cp));
    }
    return semi - pos + 1;
  }
  static const std::pair<std::string_view, std::string_view> kNamed[] = {
      {"amp", "&"},          {"lt", "<"},           {"gt", ">"},
      {"quot", "\""},        {"apos", "'"},         {"nbsp", " "},
      {"mdash", "—"},   {"ndash", "–"},   {"rsquo", "’"},
      {"lsquo", "‘"},   {"ldquo", "“"},   {"rdquo", "”"},
      {"hellip", "…"},  {"bull", "•"},    {"reg", "®"},
      {"trade", "™"},   {"copy", "©"},
  };
  for (const auto& [n, v] : kNamed) {
    if (name == n) {
      out.append(v);
      return semi - pos + 1;
    }
  }
  return 0;
}

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] == '&') {
      if (std::size_t n = decode_entity(s, i, out); n > 0) {
        i += n;
        continue;
      }
    }
    out.push_back(s[i++]);
  }
  return out;
}

// Lowercase tag name of the tag starting at s[pos] == '<', without '/'.
std::string tag_name(std::string_view s, std::size_t pos) {
  std::size_t i = pos + 1;
  if (i < s.size() && s[i] == '/') ++i;
  std::string name;
  while (i < s.size() && is_alnum(s[i])) name.push_back(ascii_lower(s[i++]));
  return name;
}

bool is_tag_start(std::string_view s, std::size_t pos) {
  if (s[pos] != '<' || pos + 1 >= s.size()) return false;
  const char c = s[pos + 1];
  return is_alpha(c) || c == '/' || c == '!';
}

bool is_table_open(std::string_view s, std::size_t pos) {
  if (!starts_with_ci(s, pos, "<table")) return false;
  const std::size_t after = pos + 6;
  return after < s.size() && (s[after] == '>' || is_space(s[after]));
}

// End offset (one past "</table>") of the table opened at `pos`, honoring
// nesting, or npos when it never closes.
std::size_t find_table_close(std::string_view s, std::size_t pos) {
  int depth = 0;
  for (std::size_t i = pos; i < s.size(); ++i) {
    if (s[i] != '<') continue;
    if (is_table_open(s, i)) {
      ++depth;
    } else if (starts_with_ci(s, i, "</table")) {
      const std::size_t gt = s.find('>', i);
      if (gt == std::string_view::npos) return std::string_view::npos;
      if (--depth == 0) return gt + 1;
    }
  }
  return std::string_view::npos;
}

std::string normalize_markup(std::string_view s) {
  static const std::string_view kBlockTags[] = {
      "p",  "div", "br", "h1", "h2", "h3", "h4", "h5", "h6", "li",
      "ul", "ol",  "hr", "section", "article", "header", "footer", "blockquote",
  };
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (is_table_open(s, i)) {
      std::size_t close = find_table_close(s, i);
      if (close == std::string_view::npos) close = s.size();
      out.append(s.substr(i, close - i));
      i = close;
      continue;
    }
    if (is_tag_start(s, i)) {
      const std::size_t gt = s.find('>', i);
      if (gt != std::string_view::npos) {
        const std::string name = tag_name(s, i);
        if (std::find(std::begin(kBlockTags), std::end(kBlockTags), name) !=
            std::end(kBlockTags)) {
          out.push_back('\n');
        }
        i = gt + 1;
        continue;
      }
    }
    if (s[i] == '&') {
      if (std::size_t n = decode_entity(s, i, out); n > 0) {
        i += n;
        continue;
      }
    }
    out.push_back(s[i++]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Headings

struct Line {
  std::size_t begin;
  std::size_t end;  // excludes the newline
};

std::vector<Line> split_lines(std::string_view s) {
  std::vector<Line> lines;
  std::size_t begin = 0;
  while (begin <= s.size()) {
    std::size_t nl = s.find('\n', begin);
    if (nl == std::string_view::npos) nl = s.size();
    lines.push_back({begin, nl});
    if (nl == s.size()) break;
    begin = nl + 1;
  }
  return lines;
}

// "7", "7A", "8" ... when the line is an item heading.
std::optional<std::string> parse_item_heading(std::string_view line) {
  std::string_view s = trim(line);
  if (s.size() > kMaxHeadingLength) return std::nullopt;
  // Leading emphasis / markdown / leftover tags.
  while (!s.empty()) {
    if (s.front() == '#' || s.front() == '*' || s.front() == '_' ||
        is_space(s.front())) {
      s.remove_prefix(1);
    } else if (s.front() == '<') {
      const std::size_t gt = s.find('>');
      if (gt == std::string_view::npos) break;
      s.remove_prefix(gt + 1);
    } else {
      break;
    }
  }
  if (!starts_with_ci(s, 0, "item")) return std::nullopt;
  std::size_t i = 4;
  const std::size_t gap_start = i;
  while (i < s.size()) {
    if (is_space(s[i])) {
      ++i;
    } else if (s.substr(i, 2) == "\xC2\xA0") {
      i += 2;
    } else {
      break;
    }
  }
  if (i == gap_start) return std::nullopt;
  std::string item;
  while (i < s.size() && is_digit(s[i]) && item.size() < 2) item.push_back(s[i++]);
  if (item.empty()) return std::nullopt;
  if (i < s.size() && is_alpha(s[i])) {
    item.push_back(static_cast<char>(s[i] & ~0x20));
    ++i;
  }
  if (i < s.size() && is_alnum(s[i])) return std::nullopt;
  return item;
}

// ---------------------------------------------------------------------------
// Tables

struct Region {
  CharRange range;
  bool html = false;
};

std::string clean_cell(std::string_view raw) {
  std::string no_tags;
  for (std::size_t i = 0; i < raw.size();) {
    if (is_tag_start(raw, i)) {
      const std::size_t gt = raw.find('>', i);
      if (gt != std::string_view::npos) {
        no_tags.push_back(' ');
        i = gt + 1;
        continue;
      }
    }
    no_tags.push_back(raw[i++]);
  }
  const std::string decoded = decode_entities(no_tags);
  std::string out;
  bool pending_space = false;
  for (char c : decoded) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

TableGrid parse_html_grid(std::string_view s) {
  TableGrid grid;
  std::vector<std::string>* row = nullptr;
  std::size_t cell_start = std::string_view::npos;
  auto close_cell = [&](std::size_t at) {
    if (cell_start != std::string_view::npos && row != nullptr) {
      row->push_back(clean_cell(s.substr(cell_start, at - cell_start)));
    }
    cell_start = std::string_view::npos;
  };
  // Skip the outer <table ...> tag.
  std::size_t i = s.find('>');
  i = (i == std::string_view::npos) ? s.size() : i + 1;
  while (i < s.size()) {
    if (!is_tag_start(s, i)) {
      ++i;
      continue;
    }
    const std::size_t gt = s.find('>', i);
    if (gt == std::string_view::npos) break;
    const bool closing = s[i + 1] == '/';
    const std::string name = tag_name(s, i);
    if (name == "tr") {
      close_cell(i);
      if (!closing) {
        grid.emplace_back();
        row = &grid.back();
      } else {
        row = nullptr;
      }
    } else if (name == "td" || name == "th") {
      close_cell(i);
      if (!closing) {
        if (row == nullptr) {
          grid.emplace_back();
          row = &grid.back();
        }
        cell_start = gt + 1;
      }
    } else if (name == "table" && closing) {
      close_cell(i);
    }
    i = gt + 1;
  }
  std::erase_if(grid, [](const auto& r) { return r.empty(); });
  return grid;
}

bool is_separator_row(const std::vector<std::string>& cells) {
  bool dash = false;
  for (const std::string& c : cells) {
    for (char ch : c) {
      if (ch == '-') {
        dash = true;
      } else if (ch != ':' && !is_space(ch)) {
        return false;
      }
    }
  }
  return dash;
}

std::vector<std::string> split_pipe_row(std::string_view line) {
  std::string_view s = trim(line);
  if (!s.empty() && s.front() == '|') s.remove_prefix(1);
  if (!s.empty() && s.back() == '|') s.remove_suffix(1);
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t bar = s.find('|', start);
    const std::string_view cell =
        s.substr(start, bar == std::string_view::npos ? s.npos : bar - start);
    cells.push_back(clean_cell(cell));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return cells;
}

TableGrid parse_pipe_grid(std::string_view s) {
  TableGrid grid;
  for (const Line& l : split_lines(s)) {
    std::vector<std::string> cells = split_pipe_row(s.substr(l.begin, l.end - l.begin));
    if (is_separator_row(cells)) continue;
    grid.push_back(std::move(cells));
  }
  return grid;
}

std::vector<Region> find_table_regions(std::string_view text) {
  std::vector<Region> regions;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '<' || !is_table_open(text, i)) continue;
    const std::size_t close = find_table_close(text, i);
    if (close == std::string_view::npos) {
      throw TableParseError("unclosed <table> at offset " + std::to_string(i));
    }
    regions.push_back({{i, close}, true});
    i = close - 1;
  }
  // A stray closing tag means the markup is broken.
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '<' && starts_with_ci(text, i, "</table")) {
      const bool inside = std::any_of(regions.begin(), regions.end(),
                                      [&](const Region& r) {
                                        return i >= r.range.begin &&
                                               i < r.range.end;
                                      });
      if (!inside) {
        throw TableParseError("</table> without <table> at offset " +
                              std::to_string(i));
      }
    }
  }
  auto in_html = [&](std::size_t pos) {
    return std::any_of(regions.begin(), regions.end(), [&](const Region& r) {
      return pos >= r.range.begin && pos < r.range.end;
    });
  };
  std::optional<CharRange> run;
  std::vector<Region> pipes;
  for (const Line& l : split_lines(text)) {
    const std::string_view body = trim(text.substr(l.begin, l.end - l.begin));
    const bool pipe_line = !body.empty() && body.front() == '|' && !in_html(l.begin);
    if (pipe_line) {
      const std::size_t start = l.begin + (text.substr(l.begin).find('|'));
      if (!run) {
        run = CharRange{start, l.end};
      } else {
        run->end = l.end;
      }
      // Keep trailing whitespace out of the table span.
      while (run->end > run->begin && is_space(text[run->end - 1])) --run->end;
    } else if (run) {
      pipes.push_back({*run, false});
      run.reset();
    }
  }
  if (run) pipes.push_back({*run, false});
  regions.insert(regions.end(), pipes.begin(), pipes.end());
  std::sort(regions.begin(), regions.end(), [](const Region& a, const Region& b) {
    return a.range.begin < b.range.begin;
  });
  return regions;
}

// ---------------------------------------------------------------------------
// Sentences

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

// Closing quote/bracket at s[i]; returns its byte length or 0.
std::size_t closer_length(std::string_view s, std::size_t i) {
  const char c = s[i];
  if (c == ')' || c == '"' || c == '\'' || c == ']') return 1;
  if (s.substr(i, 3) == "’" || s.substr(i, 3) == "”") return 3;
  return 0;
}

// Strips trailing closers; the remaining last byte is the real terminal.
std::string_view without_closers(std::string_view s) {
  while (!s.empty()) {
    const char c = s.back();
    if (c == ')' || c == '"' || c == '\'' || c == ']') {
      s.remove_suffix(1);
    } else if (s.size() >= 3 && (s.substr(s.size() - 3) == "’" ||
                                 s.substr(s.size() - 3) == "”")) {
      s.remove_suffix(3);
    } else {
      break;
    }
  }
  return s;
}

std::vector<CharRange> candidate_ranges(std::string_view text) {
  std::vector<CharRange> out;
  auto emit = [&](std::size_t b, std::size_t e) {
    while (b < e && is_space(text[b])) ++b;
    while (e > b && is_space(text[e - 1])) --e;
    if (b < e) out.push_back({b, e});
  };
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (is_terminal(c)) {
      std::size_t j = i;
      while (j < text.size() && is_terminal(text[j])) ++j;
      while (j < text.size()) {
        const std::size_t n = closer_length(text, j);
        if (n == 0) break;
        j += n;
      }
      if (j == text.size() || is_space(text[j])) {
        emit(start, j);
        start = j;
      }
      i = j;
      continue;
    }
    if (c == '\n') {
      // Blank line: paragraph break.
      std::size_t j = i + 1;
      while (j < text.size() && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r')) ++j;
      if (j < text.size() && text[j] == '\n') {
        emit(start, i);
        start = j;
        i = j;
        continue;
      }
    }
    ++i;
  }
  emit(start, text.size());
  return out;
}

std::string_view token_before_period(std::string_view s) {
  // s ends with '.'
  std::size_t end = s.size() - 1;
  std::size_t b = end;
  while (b > 0 && !is_space(s[b - 1]) && s[b - 1] != '(' && s[b - 1] != '"') --b;
  return s.substr(b, end - b);
}

std::size_t lowercase_words(std::string_view s) {
  std::size_t count = 0;
  bool in_word = false;
  bool has_lower = false;
  for (char c : s) {
    if (is_space(c)) {
      if (in_word && has_lower) ++count;
      in_word = false;
      has_lower = false;
    } else {
      in_word = true;
      has_lower = has_lower || is_lower(c);
    }
  }
  if (in_word && has_lower) ++count;
  return count;
}

bool is_fragment(std::string_view cand, std::optional<std::string_view> next,
                 const SegmenterOptions& options) {
  const std::string_view core = without_closers(cand);
  if (core.empty() || !is_terminal(core.back())) return true;
  if (core.back() == '.') {
    const std::string_view token = token_before_period(core);
    if (token.size() == 1 && is_alpha(token[0])) return true;
    for (const std::string& abbr : options.abbreviations) {
      if (iequals(token, abbr)) return true;
    }
    if (!token.empty() && is_digit(token.back()) && next && !next->empty() &&
        is_digit(next->front())) {
      return true;
    }
  }
  return cand.size() < options.min_chars && lowercase_words(cand) < 2;
}

}  // namespace

// ---------------------------------------------------------------------------

std::optional<Date> Date::parse(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto num = [&](std::size_t pos, std::size_t len) -> int {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (!is_digit(text[i])) return -1;
      v = v * 10 + (text[i] - '0');
    }
    return v;
  };
  Date d{num(0, 4), num(5, 2), num(8, 2)};
  if (d.year < 0 || d.month < 1 || d.month > 12 || d.day < 1) return std::nullopt;
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (d.year % 4 == 0 && d.year % 100 != 0) || d.year % 400 == 0;
  const int max_day = kDays[d.month - 1] + (d.month == 2 && leap ? 1 : 0);
  if (d.day > max_day) return std::nullopt;
  return d;
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::optional<FormatTag> format_tag_from_string(std::string_view text) {
  if (text == "plain_text") return FormatTag::kPlainText;
  if (text == "simple_markup") return FormatTag::kSimpleMarkup;
  return std::nullopt;
}

std::string_view to_string(FormatTag tag) {
  return tag == FormatTag::kPlainText ? "plain_text" : "simple_markup";
}

std::size_t NarrativeText::to_source(std::size_t text_offset) const {
  auto it = std::upper_bound(
      pieces.begin(), pieces.end(), text_offset,
      [](std::size_t off, const Piece& p) { return off < p.text_begin; });
  if (it == pieces.begin()) return text_offset;
  --it;
  return it->source_begin + (text_offset - it->text_begin);
}

std::vector<std::string> SegmenterOptions::default_abbreviations() {
  return {"Inc",  "Corp", "Co",   "Ltd",  "No",   "Nos",  "U.S",  "U.K",
          "U.S.A", "Mr",  "Mrs",  "Ms",   "Dr",   "St",   "Jr",   "Sr",
          "vs",   "e.g",  "i.e",  "approx", "Jan", "Feb",  "Mar",  "Apr",
          "Jun",  "Jul",  "Aug",  "Sep",  "Sept", "Oct",  "Nov",  "Dec",
          "L.P",  "L.L.C", "N.A", "S.A",  "Fig",  "Ref",  "Dept", "Ave"};
}

Filing load_filing(std::string_view bytes, FormatTag format,
                   std::string company_id, std::string_view filing_date,
                   std::optional<std::string> source_uri) {
  if (bytes.size() >= 3 && bytes.substr(0, 3) == "\xEF\xBB\xBF") {
    bytes.remove_prefix(3);
  }
  if (!valid_utf8(bytes)) {
    throw DecodeError("filing " + company_id + " is not valid UTF-8");
  }
  const auto date = Date::parse(filing_date);
  if (!date) {
    throw DecodeError("filing " + company_id + " has invalid filing date '" +
                      std::string(filing_date) + "'");
  }
  std::string body;
  body.reserve(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (bytes[i] == '\r') {
      body.push_back('\n');
      if (i + 1 < bytes.size() && bytes[i + 1] == '\n') ++i;
    } else {
      body.push_back(bytes[i]);
    }
  }
  if (format == FormatTag::kSimpleMarkup) body = normalize_markup(body);
  if (trim(body).empty()) {
    throw EmptyDocument("filing " + company_id + " has an empty body");
  }
  Filing filing;
  filing.company_id = std::move(company_id);
  filing.filing_date = *date;
  filing.body = std::move(body);
  filing.source_uri = std::move(source_uri);
  filing.format = format;
  return filing;
}

DocumentSection extract_mdna(const Filing& filing) {
  const std::string_view body = filing.body;
  struct Heading {
    Line line;
    std::string item;
  };
  std::vector<Heading> starts, ends;
  for (const Line& l : split_lines(body)) {
    const auto item = parse_item_heading(body.substr(l.begin, l.end - l.begin));
    if (!item) continue;
    if (*item == "7") starts.push_back({l, *item});
    if (*item == "7A" || *item == "8") ends.push_back({l, *item});
  }
  if (starts.empty()) {
    throw SectionNotFound("no Item 7 heading in filing " + filing.company_id);
  }
  std::optional<DocumentSection> best;
  for (const Heading& s : starts) {
    const std::size_t begin = std::min(s.line.end + 1, body.size());
    std::size_t end = body.size();
    bool bounded = false;
    for (const Heading& e : ends) {
      if (e.line.begin > s.line.begin) {
        end = e.line.begin;
        bounded = true;
        break;
      }
    }
    if (!bounded && !ends.empty()) continue;
    if (end <= begin) continue;
    if (!best || end - begin > best->end_offset - best->start_offset) {
      best = DocumentSection{
          begin, end,
          std::string(trim(body.substr(s.line.begin, s.line.end - s.line.begin))),
          false};
    }
  }
  if (!best) {
    throw MalformedDocument("Item 7 heading in filing " + filing.company_id +
                            " is not followed by a section body before the "
                            "next item heading");
  }
  return *best;
}

DocumentSection override_section(const Filing& filing, std::size_t start,
                                 std::size_t end, std::string label) {
  if (!(start < end && end <= filing.body.size())) {
    throw MalformedDocument("invalid curated section [" + std::to_string(start) +
                            ", " + std::to_string(end) + ")");
  }
  return DocumentSection{start, end, std::move(label), true};
}

std::string_view section_text(const Filing& filing,
                              const DocumentSection& section) {
  return std::string_view(filing.body)
      .substr(section.start_offset, section.end_offset - section.start_offset);
}

TableExtraction extract_tables(std::string_view text, std::string_view id_prefix,
                               const SegmenterOptions& options) {
  TableExtraction out;
  const std::vector<Region> regions = find_table_regions(text);
  std::vector<CharRange> removed;
  std::size_t prev_end = 0;
  for (std::size_t n = 0; n < regions.size(); ++n) {
    const Region& r = regions[n];
    if (r.range.begin < prev_end) {
      throw TableParseError("overlapping tables at offset " +
                            std::to_string(r.range.begin));
    }
    const std::string_view raw = text.substr(r.range.begin, r.range.size());
    TableBlock table;
    table.table_id = std::string(id_prefix) + "-T" + std::to_string(n + 1);
    table.grid = r.html ? parse_html_grid(raw) : parse_pipe_grid(raw);
    if (table.grid.empty() || table.grid.front().empty()) {
      throw TableParseError("table " + table.table_id + " has no cells");
    }
    table.source_span = r.range;
    const std::string_view gap = text.substr(prev_end, r.range.begin - prev_end);
    const std::vector<Sentence> before = segment_sentences(gap, options);
    if (!before.empty()) {
      const Sentence& last = before.back();
      table.pre_text = last.text;
      table.pre_text_span = CharRange{prev_end + last.source_span.begin,
                                      prev_end + last.source_span.end};
      removed.push_back(*table.pre_text_span);
    }
    removed.push_back(r.range);
    prev_end = r.range.end;
    out.tables.push_back(std::move(table));
  }
  std::size_t cursor = 0;
  auto keep = [&](std::size_t b, std::size_t e) {
    if (b >= e) return;
    out.narrative.pieces.push_back({out.narrative.text.size(), b, e - b});
    out.narrative.text.append(text.substr(b, e - b));
  };
  for (const CharRange& r : removed) {
    keep(cursor, r.begin);
    cursor = r.end;
  }
  keep(cursor, text.size());
  return out;
}

std::vector<Sentence> segment_sentences(std::string_view text,
                                        const SegmenterOptions& options) {
  const std::vector<CharRange> cands = candidate_ranges(text);
  std::vector<Sentence> out;
  std::optional<CharRange> cur;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    if (!cur) {
      cur = cands[i];
    } else {
      cur->end = cands[i].end;
    }
    const std::optional<std::string_view> next =
        i + 1 < cands.size()
            ? std::optional<std::string_view>(
                  text.substr(cands[i + 1].begin, cands[i + 1].size()))
            : std::nullopt;
    if (next && is_fragment(text.substr(cur->begin, cur->size()), next, options)) {
      continue;
    }
    out.push_back(Sentence{out.size(), std::string(text.substr(cur->begin, cur->size())), *cur});
    cur.reset();
  }
  return out;
}

std::vector<Sentence> segment_narrative(const NarrativeText& narrative,
                                        std::size_t base_offset,
                                        const SegmenterOptions& options) {
  std::vector<Sentence> out;
  for (const NarrativeText::Piece& p : narrative.pieces) {
    const std::string_view piece =
        std::string_view(narrative.text).substr(p.text_begin, p.length);
    for (Sentence s : segment_sentences(piece, options)) {
      s.index = out.size();
      s.source_span = {base_offset + p.source_begin + s.source_span.begin,
                       base_offset + p.source_begin + s.source_span.end};
      out.push_back(std::move(s));
    }
  }
  return out;
}

IngestedDocument ingest_filing(Filing filing, const SegmenterOptions& options) {
  IngestedDocument doc;
  doc.section = extract_mdna(filing);
  const std::string_view text = section_text(filing, doc.section);
  TableExtraction extraction = extract_tables(text, filing.company_id, options);
  const std::size_t base = doc.section.start_offset;
  for (TableBlock& t : extraction.tables) {
    t.source_span = {base + t.source_span.begin, base + t.source_span.end};
    if (t.pre_text_span) {
      t.pre_text_span = CharRange{base + t.pre_text_span->begin,
                                  base + t.pre_text_span->end};
    }
  }
  doc.tables = std::move(extraction.tables);
  doc.sentences = segment_narrative(extraction.narrative, base, options);
  doc.filing = std::move(filing);
  return doc;
}

nlohmann::ordered_json section_record(const Filing& filing,
                                      const DocumentSection& section) {
  nlohmann::ordered_json j;
  j["record"] = "section";
  j["company_id"] = filing.company_id;
  j["filing_date"] = filing.filing_date.to_string();
  j["label"] = section.label;
  j["offsets"] = {section.start_offset, section.end_offset};
  j["manual_override"] = section.manual_override;
  return j;
}

nlohmann::ordered_json table_record(const Filing& filing,
                                    const TableBlock& table) {
  nlohmann::ordered_json j;
  j["record"] = "table";
  j["company_id"] = filing.company_id;
  j["filing_date"] = filing.filing_date.to_string();
  j["table_id"] = table.table_id;
  j["pre_text"] = table.pre_text;
  if (table.pre_text_span) {
    j["pre_text_offsets"] = {table.pre_text_span->begin, table.pre_text_span->end};
  } else {
    j["pre_text_offsets"] = nullptr;
  }
  j["grid"] = table.grid;
  j["offsets"] = {table.source_span.begin, table.source_span.end};
  return j;
}

nlohmann::ordered_json sentence_record(const Filing& filing,
                                       const Sentence& sentence) {
  nlohmann::ordered_json j;
  j["record"] = "sentence";
  j["company_id"] = filing.company_id;
  j["filing_date"] = filing.filing_date.to_string();
  j["sentence_index"] = sentence.index;
  j["text"] = sentence.text;
  j["offsets"] = {sentence.source_span.begin, sentence.source_span.end};
  return j;
}

TableBlock table_from_record(const nlohmann::json& record) {
  TableBlock t;
  t.table_id = record.at("table_id").get<std::string>();
  t.pre_text = record.at("pre_text").get<std::string>();
  const auto& pre = record.at("pre_text_offsets");
  if (!pre.is_null()) {
    t.pre_text_span = CharRange{pre.at(0).get<std::size_t>(), pre.at(1).get<std::size_t>()};
  }
  t.grid = record.at("grid").get<TableGrid>();
  const auto& off = record.at("offsets");
  t.source_span = {off.at(0).get<std::size_t>(), off.at(1).get<std::size_t>()};
  return t;
}

Sentence sentence_from_record(const nlohmann::json& record) {
  Sentence s;
  s.index = record.at("sentence_index").get<std::size_t>();
  s.text = record.at("text").get<std::string>();
  const auto& off = record.at("offsets");
  s.source_span = {off.at(0).get<std::size_t>(), off.at(1).get<std::size_t>()};
  return s;
}

}  // namespace maskbench

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

#include "maskbench/task.h"

#include <algorithm>
#include <utility>

#include "maskbench/errors.h"
#include "maskbench/hash.h"

namespace maskbench {
namespace {

constexpr std::size_t kTaskIdHexChars = 20;

using ojson = nlohmann::ordered_json;

ojson range_json(const CharRange& r) { return ojson::array({r.begin, r.end}); }

ojson sentence_json(const Sentence& s) {
  ojson j;
  j["sentence_index"] = s.index;
  j["text"] = s.text;
  j["offsets"] = range_json(s.source_span);
  return j;
}

ojson table_json(const TableBlock& t) {
  ojson j;
  j["table_id"] = t.table_id;
  j["pre_text"] = t.pre_text;
  j["pre_text_offsets"] = t.pre_text_span ? range_json(*t.pre_text_span) : ojson(nullptr);
  j["grid"] = t.grid;
  j["offsets"] = range_json(t.source_span);
  return j;
}

ojson verdict_json(const AnnotationVerdict& v) {
  ojson j;
  j["task_id"] = v.task_id;
  j["model_name"] = v.model_name;
  j["label"] = std::string(to_string(v.label));
  j["reasoning"] = v.reasoning;
  return j;
}

AnnotationVerdict verdict_from(const nlohmann::json& j) {
  AnnotationVerdict v;
  v.task_id = j.at("task_id").get<std::string>();
  v.model_name = j.at("model_name").get<std::string>();
  const auto label = answer_label_from_string(j.at("label").get<std::string>());
  if (!label) throw std::invalid_argument("unknown answerability label");
  v.label = *label;
  v.reasoning = j.at("reasoning").get<std::string>();
  return v;
}

bool has_mask_token(std::string_view text) {
  return text.find(kMaskToken) != std::string_view::npos;
}

}  // namespace

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::kA: return "A";
    case Scenario::kB: return "B";
    case Scenario::kC: return "C";
    case Scenario::kD: return "D";
  }
  return "A";
}

std::optional<Scenario> scenario_from_string(std::string_view text) {
  const std::string_view t = trim(text);
  if (t.size() != 1) return std::nullopt;
  switch (t[0]) {
    case 'A': case 'a': return Scenario::kA;
    case 'B': case 'b': return Scenario::kB;
    case 'C': case 'c': return Scenario::kC;
    case 'D': case 'd': return Scenario::kD;
    default: return std::nullopt;
  }
}

std::string_view to_string(AnswerLabel label) {
  switch (label) {
    case AnswerLabel::kAnswerable: return "answerable";
    case AnswerLabel::kUnanswerable: return "unanswerable";
    case AnswerLabel::kAbstain: return "abstain";
  }
  return "abstain";
}

std::optional<AnswerLabel> answer_label_from_string(std::string_view text) {
  const std::string t = to_lower_ascii(trim(text));
  if (t == "answerable") return AnswerLabel::kAnswerable;
  if (t == "unanswerable") return AnswerLabel::kUnanswerable;
  if (t == "abstain") return AnswerLabel::kAbstain;
  return std::nullopt;
}

std::string TaskInstance::restored_sentence() const {
  std::string out = corrupted_sentence;
  const std::size_t at = out.find(kMaskToken);
  if (at != std::string::npos) out.replace(at, kMaskToken.size(), ground_truth.surface);
  return out;
}

std::string make_task_id(std::string_view company_id, std::size_t sentence_index,
                         const CharRange& range) {
  std::string key(company_id);
  key += '\x1f';
  key += std::to_string(sentence_index);
  key += '\x1f';
  key += std::to_string(range.begin);
  key += '\x1f';
  key += std::to_string(range.end);
  return sha256_hex(key).substr(0, kTaskIdHexChars);
}

HintText derive_hint(const NumericSpan& span) {
  if (std::find(span.unit_groups.begin(), span.unit_groups.end(), "per_share") !=
      span.unit_groups.end()) {
    return {"as a per-share amount"};
  }
  switch (span.kind) {
    case SpanKind::kPercent: return {"as a percentage"};
    case SpanKind::kMoney: return {"as an absolute amount"};
    default: return {"as a numeric value with its unit"};
  }
}

TaskInstance build_task(const IngestedDocument& doc, const Sentence& sentence,
                        const NumericSpan& span) {
  const std::string& text = sentence.text;
  if (!span.has_unit_or_scale) {
    throw NotMaskable("span '" + span.surface + "' has no unit or scale");
  }
  if (span.char_range.end > text.size() ||
      text.compare(span.char_range.begin, span.char_range.size(), span.surface) != 0) {
    throw NotMaskable("span '" + span.surface + "' does not match sentence " +
                      std::to_string(sentence.index));
  }
  if (has_mask_token(text)) {
    throw NotMaskable("sentence " + std::to_string(sentence.index) +
                      " already contains the mask token");
  }
  TaskInstance task;
  task.company_id = doc.filing.company_id;
  task.filing_date = doc.filing.filing_date.to_string();
  task.sentence_index = sentence.index;
  task.task_id = make_task_id(task.company_id, sentence.index, span.char_range);
  task.corrupted_sentence = text.substr(0, span.char_range.begin);
  task.corrupted_sentence += kMaskToken;
  task.corrupted_sentence += text.substr(span.char_range.end);
  task.ground_truth = span;
  task.ground_truth.sentence_index = sentence.index;
  task.hint = derive_hint(span);
  task.context.tables = doc.tables;
  if (sentence.index > 0 && sentence.index - 1 < doc.sentences.size()) {
    task.context.prev_sentence = doc.sentences[sentence.index - 1];
  }
  if (sentence.index + 1 < doc.sentences.size()) {
    task.context.next_sentence = doc.sentences[sentence.index + 1];
  }
  return task;
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  // (2^64 - bound) % bound, computed in 64-bit arithmetic.
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const std::uint64_t x = rng();
    if (x >= threshold) return x % bound;
  }
}

std::vector<std::size_t> sample_indices(std::vector<std::size_t> population,
                                        std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t k = std::min(n, population.size());
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + uniform_below(rng, population.size() - i);
    std::swap(population[i], population[j]);
  }
  population.resize(k);
  std::sort(population.begin(), population.end());
  return population;
}

std::vector<std::size_t> sample_sentences(const std::vector<Sentence>& sentences,
                                          const UnitLexicon& lexicon,
                                          std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample size must be at least 1");
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (has_mask_token(sentences[i].text)) continue;
    if (!filter_maskable(detect_numeric_entities(sentences[i].text, lexicon)).empty()) {
      eligible.push_back(i);
    }
  }
  return sample_indices(std::move(eligible), n, seed);
}

std::uint64_t document_seed(std::uint64_t seed, std::string_view company_id) {
  return sha256_u64(std::to_string(seed) + ":" + std::string(company_id));
}

std::vector<TaskInstance> build_document_tasks(const IngestedDocument& doc,
                                               const UnitLexicon& lexicon,
                                               std::size_t n,
                                               std::uint64_t seed) {
  std::vector<TaskInstance> tasks;
  const auto picks = sample_sentences(doc.sentences, lexicon, n,
                                      document_seed(seed, doc.filing.company_id));
  for (std::size_t idx : picks) {
    const Sentence& s = doc.sentences[idx];
    for (const NumericSpan& span :
         filter_maskable(detect_numeric_entities(s.text, lexicon, idx))) {
      tasks.push_back(build_task(doc, s, span));
    }
  }
  return tasks;
}

nlohmann::ordered_json consensus_to_json(const ConsensusResult& c) {
  ojson j;
  j["task_id"] = c.task_id;
  j["votes"] = ojson::array();
  for (const auto& v : c.votes) j["votes"].push_back(verdict_json(v));
  j["retained"] = c.retained;
  return j;
}

ConsensusResult consensus_from_json(const nlohmann::json& j) {
  ConsensusResult c;
  c.task_id = j.at("task_id").get<std::string>();
  for (const auto& v : j.at("votes")) c.votes.push_back(verdict_from(v));
  c.retained = j.at("retained").get<bool>();
  return c;
}

nlohmann::ordered_json task_to_json(const TaskInstance& t) {
  ojson j;
  j["record"] = "task";
  j["task_id"] = t.task_id;
  j["company_id"] = t.company_id;
  j["filing_date"] = t.filing_date;
  j["sentence_index"] = t.sentence_index;
  j["corrupted_sentence"] = t.corrupted_sentence;
  j["ground_truth"] = span_to_json(t.ground_truth);
  j["hint"] = t.hint.unit_description;
  ojson ctx;
  ctx["tables"] = ojson::array();
  for (const auto& tb : t.context.tables) ctx["tables"].push_back(table_json(tb));
  ctx["prev_sentence"] =
      t.context.prev_sentence ? sentence_json(*t.context.prev_sentence) : ojson(nullptr);
  ctx["next_sentence"] =
      t.context.next_sentence ? sentence_json(*t.context.next_sentence) : ojson(nullptr);
  j["context"] = std::move(ctx);
  j["answerability"] = t.answerability ? consensus_to_json(*t.answerability) : ojson(nullptr);
  j["scenario"] = t.scenario ? ojson(std::string(to_string(*t.scenario))) : ojson(nullptr);
  return j;
}

TaskInstance task_from_json(const nlohmann::json& j) {
  TaskInstance t;
  t.task_id = j.at("task_id").get<std::string>();
  t.company_id = j.at("company_id").get<std::string>();
  t.filing_date = j.at("filing_date").get<std::string>();
  t.sentence_index = j.at("sentence_index").get<std::size_t>();
  t.corrupted_sentence = j.at("corrupted_sentence").get<std::string>();
  t.ground_truth = span_from_json(j.at("ground_truth"));
  t.hint.unit_description = j.at("hint").get<std::string>();
  const auto& ctx = j.at("context");
  for (const auto& tb : ctx.at("tables")) t.context.tables.push_back(table_from_record(tb));
  if (!ctx.at("prev_sentence").is_null()) {
    t.context.prev_sentence = sentence_from_record(ctx.at("prev_sentence"));
  }
  if (!ctx.at("next_sentence").is_null()) {
    t.context.next_sentence = sentence_from_record(ctx.at("next_sentence"));
  }
  if (!j.at("answerability").is_null()) {
    t.answerability = consensus_from_json(j.at("answerability"));
  }
  if (!j.at("scenario").is_null()) {
    t.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    if (!t.scenario) throw std::invalid_argument("unknown scenario");
  }
  return t;
}

std::string serialize_benchmark(const Benchmark& b) {
  ojson h;
  h["record"] = "header";
  h["schema_version"] = b.header.schema_version;
  h["sampling"] = b.header.sampling;
  h["sample_n"] = b.header.sample_n;
  h["seed"] = b.header.seed;
  h["consistency_assumed"] = b.header.consistency_assumed;
  h["annotated"] = b.header.annotated;
  h["task_count"] = b.tasks.size();
  std::string out = h.dump() + "\n";
  for (const auto& t : b.tasks) out += task_to_json(t).dump() + "\n";
  return out;
}

Benchmark load_benchmark(std::string_view text) {
  Benchmark b;
  bool have_header = false;
  std::size_t expected = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    }
    try {
      const std::string kind = j.at("record").get<std::string>();
      if (!have_header) {
        if (kind != "header") throw ParseError(line_no, "first record must be the header");
        const int version = j.at("schema_version").get<int>();
        if (version != kBenchmarkSchemaVersion) {
          throw UnsupportedVersion("benchmark schema_version " + std::to_string(version) +
                                   ", expected " + std::to_string(kBenchmarkSchemaVersion));
        }
        b.header.schema_version = version;
        b.header.sampling = j.at("sampling").get<std::string>();
        b.header.sample_n = j.at("sample_n").get<std::size_t>();
        b.header.seed = j.at("seed").get<std::uint64_t>();
        b.header.consistency_assumed = j.at("consistency_assumed").get<bool>();
        b.header.annotated = j.at("annotated").get<bool>();
        expected = j.at("task_count").get<std::size_t>();
        have_header = true;
        continue;
      }
      if (kind != "task") throw ParseError(line_no, "unexpected record '" + kind + "'");
      b.tasks.push_back(task_from_json(j));
    } catch (const ParseError&) {
      throw;
    } catch (const UnsupportedVersion&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (!have_header) throw ParseError(line_no == 0 ? 1 : line_no, "missing header record");
  if (b.tasks.size() != expected) {
    throw ParseError(line_no, "header declares " + std::to_string(expected) +
                                  " tasks, file has " + std::to_string(b.tasks.size()));
  }
  return b;
}

}  // namespace maskbench

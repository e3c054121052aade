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

// Masked-span task construction, sampling and the benchmark file format.

#ifndef MASKBENCH_TASK_H_
#define MASKBENCH_TASK_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskbench/ingest.h"
#include "maskbench/lexicon.h"
#include "maskbench/spans.h"

namespace maskbench {

inline constexpr std::string_view kMaskToken = "[MASK]";
inline constexpr int kBenchmarkSchemaVersion = 1;

enum class Scenario { kA, kB, kC, kD };

std::string_view to_string(Scenario s);
std::optional<Scenario> scenario_from_string(std::string_view text);

enum class AnswerLabel { kAnswerable, kUnanswerable, kAbstain };

std::string_view to_string(AnswerLabel label);
std::optional<AnswerLabel> answer_label_from_string(std::string_view text);

struct AnnotationVerdict {
  std::string task_id;
  std::string model_name;
  AnswerLabel label = AnswerLabel::kAbstain;
  std::string reasoning;

  friend bool operator==(const AnnotationVerdict&,
                         const AnnotationVerdict&) = default;
};

struct ConsensusResult {
  std::string task_id;
  std::vector<AnnotationVerdict> votes;
  bool retained = false;  // all votes answerable

  friend bool operator==(const ConsensusResult&,
                         const ConsensusResult&) = default;
};

struct HintText {
  std::string unit_description;

  friend bool operator==(const HintText&, const HintText&) = default;
};

struct ContextSet {
  std::vector<TableBlock> tables;  // every table of the document
  std::optional<Sentence> prev_sentence;
  std::optional<Sentence> next_sentence;

  friend bool operator==(const ContextSet&, const ContextSet&) = default;
};

struct TaskInstance {
  std::string task_id;
  std::string company_id;
  std::string filing_date;
  std::size_t sentence_index = 0;
  std::string corrupted_sentence;
  NumericSpan ground_truth;  // char_range refers to the original sentence
  HintText hint;
  ContextSet context;
  std::optional<ConsensusResult> answerability;
  std::optional<Scenario> scenario;

  // The original sentence: [MASK] replaced by the ground truth surface.
  std::string restored_sentence() const;

  friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

// Hex SHA-256 prefix over (company_id, sentence_index, char_range).
std::string make_task_id(std::string_view company_id, std::size_t sentence_index,
                         const CharRange& range);

// Closed hint set, driven by kind; per-share units win over money.
HintText derive_hint(const NumericSpan& span);

// One task masking `span` in `sentence` of `doc`.
// Throws NotMaskable when the span carries no unit/scale, does not match the
// sentence text, or the sentence already contains the mask token.
TaskInstance build_task(const IngestedDocument& doc, const Sentence& sentence,
                        const NumericSpan& span);

// Unbiased integer in [0, bound) from a 64-bit engine by rejection.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

// k = min(n, population.size()) elements of `population` chosen by a partial
// Fisher-Yates shuffle driven by mt19937_64(seed); returned sorted.
std::vector<std::size_t> sample_indices(std::vector<std::size_t> population,
                                        std::size_t n, std::uint64_t seed);

// Sentence indices (ascending) with at least one maskable span, sampled as
// above. Requires n >= 1.
std::vector<std::size_t> sample_sentences(const std::vector<Sentence>& sentences,
                                          const UnitLexicon& lexicon,
                                          std::size_t n, std::uint64_t seed);

// Per-document seed so documents do not share sample positions.
std::uint64_t document_seed(std::uint64_t seed, std::string_view company_id);

// All tasks for one document: sample sentences, then one task per maskable
// span of each sampled sentence.
std::vector<TaskInstance> build_document_tasks(const IngestedDocument& doc,
                                               const UnitLexicon& lexicon,
                                               std::size_t n,
                                               std::uint64_t seed);

struct BenchmarkHeader {
  int schema_version = kBenchmarkSchemaVersion;
  // Where the sentence sample is drawn from; always "maskable_sentences".
  std::string sampling = "maskable_sentences";
  std::size_t sample_n = 10;
  std::uint64_t seed = 0;
  // Source reliability is argued, not checked; recorded as a flag only.
  bool consistency_assumed = true;
  bool annotated = false;

  friend bool operator==(const BenchmarkHeader&,
                         const BenchmarkHeader&) = default;
};

struct Benchmark {
  BenchmarkHeader header;
  std::vector<TaskInstance> tasks;

  friend bool operator==(const Benchmark&, const Benchmark&) = default;
};

nlohmann::ordered_json task_to_json(const TaskInstance& task);
TaskInstance task_from_json(const nlohmann::json& j);
nlohmann::ordered_json consensus_to_json(const ConsensusResult& c);
ConsensusResult consensus_from_json(const nlohmann::json& j);

// Line-delimited: a header record, then one task per line.
std::string serialize_benchmark(const Benchmark& benchmark);
// Throws ParseError(line) on malformed records, UnsupportedVersion on a
// schema mismatch.
Benchmark load_benchmark(std::string_view text);

}  // namespace maskbench

#endif  // MASKBENCH_TASK_H_

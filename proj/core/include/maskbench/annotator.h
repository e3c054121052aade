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

// Answerability annotation by a model panel, unanimous-consensus retention
// and agreement statistics.

#ifndef MASKBENCH_ANNOTATOR_H_
#define MASKBENCH_ANNOTATOR_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskbench/gateway.h"
#include "maskbench/task.h"

namespace maskbench {

// Retained iff there is at least one vote and every vote is answerable. An
// abstention therefore always drops the task.
bool unanimous_answerable(const std::vector<AnnotationVerdict>& votes);

struct AnnotateOptions {
  std::size_t concurrency = 4;
  int max_attempts = kMaxAttempts;
  ResponseCache* cache = nullptr;
  // One per panel member, or empty.
  std::vector<TokenBucket*> limiters;
};

// Tasks are grouped by sentence; each panel member sees one prompt per
// sentence with all of that sentence's task spans tagged. A member whose
// attempts run out abstains on every span of the sentence. Results follow
// the order of `tasks`; votes follow the order of `panel`.
std::vector<ConsensusResult> annotate(const std::vector<TaskInstance>& tasks,
                                      const std::vector<ModelClient*>& panel,
                                      const AnnotateOptions& options = {});

// Request key for a sentence group; stub scripts use it.
std::string sentence_key(const TaskInstance& task);

// Attaches consensus to tasks by id and keeps the retained ones. Throws
// JoinError when a task has no consensus.
Benchmark apply_consensus(const Benchmark& benchmark,
                          const std::vector<ConsensusResult>& results);

// ---------------------------------------------------------------------------
// Human labels and agreement.

inline constexpr std::string_view kAdjudicatorId = "adjudicator";

struct HumanLabel {
  std::string task_id;
  AnswerLabel label = AnswerLabel::kAnswerable;
  std::string annotator_id;
};

// Line-delimited {task_id, label, annotator_id}. Throws ParseError.
std::vector<HumanLabel> load_human_labels(std::string_view text);

// One label per task: the adjudicator's when present, otherwise the
// majority. Throws JoinError on an unresolved tie.
std::map<std::string, AnswerLabel> resolve_human_labels(const std::vector<HumanLabel>& labels);

struct Fraction {
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 0;

  double value() const;  // NaN when the denominator is 0
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

struct AgreementRow {
  std::string pattern;
  // Panel "yes" votes for this row; -1 for the abstention row.
  int yes_votes = 0;
  std::size_t human_yes = 0;
  std::size_t human_no = 0;

  std::size_t total() const { return human_yes + human_no; }
};

struct AgreementTable {
  std::size_t panel_size = 0;
  // Unanimous no, unanimous yes, then splits by descending yes count, then
  // tasks with an abstention (only when there are any).
  std::vector<AgreementRow> rows;
  std::size_t human_yes = 0;
  std::size_t human_no = 0;
  // Share of unanimous-no tasks the humans call unanswerable, and of
  // unanimous-yes tasks they call answerable.
  Fraction unanimous_no_precision;
  Fraction unanimous_yes_precision;
  // Fleiss' kappa among the panel over tasks without abstentions.
  double panel_kappa = 0;

  std::size_t total() const { return human_yes + human_no; }
};

// Throws JoinError unless both sides cover the same task ids, and when the
// panel size varies across tasks.
AgreementTable agreement_report(const std::vector<ConsensusResult>& results,
                                const std::map<std::string, AnswerLabel>& human);

nlohmann::ordered_json agreement_to_json(const AgreementTable& table);
std::string format_agreement_table(const AgreementTable& table);

// Fleiss' kappa over per-item category counts; every row must sum to the
// same rater count (≥ 2). When chance agreement is 1 (one category used
// throughout) the result is 1.0. Throws std::invalid_argument on bad shapes.
double fleiss_kappa(const std::vector<std::vector<std::size_t>>& counts);

// Rows are items, columns raters; abstentions are not allowed.
double fleiss_kappa(const std::vector<std::vector<AnswerLabel>>& labels);

}  // namespace maskbench

#endif  // MASKBENCH_ANNOTATOR_H_

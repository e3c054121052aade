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

// Prediction runs, scoring, scenario aggregation and accuracy reports.

#ifndef MASKBENCH_EVALUATOR_H_
#define MASKBENCH_EVALUATOR_H_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskbench/gateway.h"
#include "maskbench/matcher.h"
#include "maskbench/task.h"

namespace maskbench {

struct PredictionRecord {
  std::string task_id;
  std::string model_name;
  std::string ground_truth;  // masked surface, kept so records score on their own
  std::string answer_text;
  std::optional<Scenario> self_scenario;  // absent iff failed
  std::vector<std::string> necessary_metrics;
  std::vector<std::string> references;
  int attempts = 1;
  bool failed = false;  // no usable reply within the attempt budget
  std::string failure;
  MatchResult match;
  // Value wrong only by magnitude: numeric match fails, mantissas match.
  bool scale_error = false;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

// Fills match and scale_error from ground_truth and answer_text. Failed
// records score as wrong everywhere.
void score_record(PredictionRecord& record, const UnitLexicon& lexicon);

bool is_scale_error(std::string_view ground_truth, std::string_view prediction,
                    const UnitLexicon& lexicon);

struct PredictOptions {
  std::size_t concurrency = 4;
  int max_attempts = kMaxAttempts;
  ResponseCache* cache = nullptr;
  TokenBucket* limiter = nullptr;
};

// One scored record per task whose consensus (when present) retained it,
// sorted by task id. Replies that stay unparseable after the attempt budget
// become failed records; TransportError and ClientError propagate.
std::vector<PredictionRecord> predict_all(const Benchmark& benchmark, ModelClient& client,
                                          const UnitLexicon& lexicon,
                                          const PredictOptions& options = {});

struct ScenarioLabel {
  std::string task_id;
  std::optional<Scenario> label;  // absent: no model was correct (unresolved)
  std::size_t support = 0;        // correct models voting for the label
  friend bool operator==(const ScenarioLabel&, const ScenarioLabel&) = default;
};

// Per task, the most frequent self-reported scenario among models whose
// prediction fully matched; ties go to the simpler scenario (A < B < C < D).
// Records are deduplicated per (task, model); conflicting duplicates throw
// JoinError. Output is sorted by task id.
std::vector<ScenarioLabel> aggregate_scenarios(const std::vector<PredictionRecord>& records);

// Which correctness drives the per-scenario columns.
enum class ScenarioCriterion { kOverall, kValue };

std::string_view to_string(ScenarioCriterion c);
std::optional<ScenarioCriterion> scenario_criterion_from_string(std::string_view text);

struct Tally {
  std::size_t correct = 0;
  std::size_t n = 0;
  double rate() const;  // NaN when n == 0
  friend bool operator==(const Tally&, const Tally&) = default;
};

struct ModelAccuracy {
  std::string model_name;
  Tally overall;
  Tally value;
  Tally unit;
  Tally scale_corrected_value;
  std::array<Tally, 4> scenarios;  // A..D, over labelled tasks only
  std::size_t failed = 0;
  std::size_t scale_errors = 0;
};

struct AccuracyReport {
  ScenarioCriterion criterion = ScenarioCriterion::kOverall;
  std::vector<ModelAccuracy> models;  // sorted by model name
  std::array<std::size_t, 4> scenario_sizes{};
  std::size_t labelled_tasks = 0;
  std::size_t unresolved_tasks = 0;
};

// Throws EmptyEvaluation when there are no records.
AccuracyReport compute_report(const std::vector<PredictionRecord>& records,
                              const std::vector<ScenarioLabel>& labels,
                              ScenarioCriterion criterion = ScenarioCriterion::kOverall);

struct ScaleDiagnostic {
  struct Row {
    std::string model_name;
    std::size_t n = 0;
    std::size_t value_correct = 0;
    std::size_t scale_errors = 0;
    std::size_t other_errors = 0;  // parsed, wrong beyond magnitude
    std::size_t unparseable = 0;   // failed or no usable number
    double raw_accuracy() const;
    double corrected_accuracy() const;  // scale errors counted as correct
  };
  std::vector<Row> models;
};

ScaleDiagnostic scale_error_diagnostic(const std::vector<PredictionRecord>& records);

// Line-delimited record files.
nlohmann::ordered_json record_to_json(const PredictionRecord& r);
PredictionRecord record_from_json(const nlohmann::json& j);
std::string serialize_records(const std::vector<PredictionRecord>& records);
// Throws ParseError.
std::vector<PredictionRecord> load_records(std::string_view text);

nlohmann::ordered_json report_to_json(const AccuracyReport& report,
                                      const ScaleDiagnostic& diagnostic);
std::string format_report(const AccuracyReport& report, const ScaleDiagnostic& diagnostic);

}  // namespace maskbench

#endif  // MASKBENCH_EVALUATOR_H_

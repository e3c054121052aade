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

#include "maskbench/evaluator.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <utility>

#include "maskbench/errors.h"
#include "maskbench/text_util.h"

namespace maskbench {
namespace {

double ratio(std::size_t a, std::size_t b) {
  return b == 0 ? std::numeric_limits<double>::quiet_NaN()
                : static_cast<double>(a) / static_cast<double>(b);
}

std::string percent(double v) {
  if (std::isnan(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * v);
  return buf;
}

std::string pad_left(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

std::string pad_right(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

nlohmann::ordered_json tally_json(const Tally& t) {
  nlohmann::ordered_json j;
  j["correct"] = t.correct;
  j["n"] = t.n;
  j["accuracy"] = t.n == 0 ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(t.rate());
  return j;
}

void count(Tally& t, bool ok) {
  ++t.n;
  if (ok) ++t.correct;
}

}  // namespace

bool is_scale_error(std::string_view ground_truth, std::string_view prediction,
                    const UnitLexicon& lexicon) {
  try {
    const NormalizedNumber truth = normalize_number(ground_truth, lexicon);
    const NormalizedNumber pred = normalize_number(prediction, lexicon);
    return !numeric_match(truth, pred) && mantissa_match(truth, pred);
  } catch (const Error&) {
    return false;
  }
}

void score_record(PredictionRecord& record, const UnitLexicon& lexicon) {
  if (record.failed) {
    record.match = MatchResult{false, false, false, MatchReason::kPredictionNoNumber};
    record.scale_error = false;
    return;
  }
  record.match = match_spans(record.ground_truth, record.answer_text, lexicon);
  record.scale_error = is_scale_error(record.ground_truth, record.answer_text, lexicon);
}

std::vector<PredictionRecord> predict_all(const Benchmark& benchmark, ModelClient& client,
                                          const UnitLexicon& lexicon,
                                          const PredictOptions& options) {
  std::vector<const TaskInstance*> tasks;
  for (const auto& t : benchmark.tasks) {
    if (t.answerability && !t.answerability->retained) continue;
    tasks.push_back(&t);
  }
  std::vector<PredictionRecord> records(tasks.size());
  parallel_for(tasks.size(), options.concurrency, [&](std::size_t i) {
    const TaskInstance& task = *tasks[i];
    PredictionRecord& r = records[i];
    r.task_id = task.task_id;
    r.model_name = client.model_name();
    r.ground_truth = task.ground_truth.surface;
    QueryOptions q;
    q.max_attempts = options.max_attempts;
    q.cache = options.cache;
    q.limiter = options.limiter;
    RequestInfo info;
    info.key = task.task_id;
    info.task = &task;
    try {
      const StructuredReply reply =
          query_structured(client, render_prediction_prompt(task), info, q);
      const PredictionReply parsed = parse_prediction_reply(reply.value);
      r.answer_text = parsed.answer;
      r.self_scenario = parsed.scenario;
      r.necessary_metrics = parsed.necessary_metrics;
      r.references = parsed.reference;
      r.attempts = reply.completions.back().attempt;
    } catch (const InvalidOutput& e) {
      r.failed = true;
      r.failure = e.what();
      r.attempts = options.max_attempts;
    } catch (const SchemaError& e) {
      r.failed = true;
      r.failure = e.what();
      r.attempts = options.max_attempts;
    }
    score_record(r, lexicon);
  });
  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.task_id < b.task_id; });
  return records;
}

std::vector<ScenarioLabel> aggregate_scenarios(const std::vector<PredictionRecord>& records) {
  std::map<std::pair<std::string, std::string>, const PredictionRecord*> unique;
  for (const auto& r : records) {
    auto [it, inserted] = unique.emplace(std::make_pair(r.task_id, r.model_name), &r);
    if (!inserted && !(*it->second == r)) {
      throw JoinError("conflicting records for task " + r.task_id + " and model " +
                      r.model_name);
    }
  }
  std::map<std::string, std::array<std::size_t, 4>> votes;
  for (const auto& [key, r] : unique) {
    auto& v = votes[key.first];
    if (r->match.overall && r->self_scenario) ++v[static_cast<std::size_t>(*r->self_scenario)];
  }
  std::vector<ScenarioLabel> out;
  for (const auto& [task_id, v] : votes) {
    ScenarioLabel label{task_id, std::nullopt, 0};
    for (std::size_t s = 0; s < 4; ++s) {
      // Strictly greater keeps the earlier, simpler scenario on ties.
      if (v[s] > label.support) {
        label.support = v[s];
        label.label = static_cast<Scenario>(s);
      }
    }
    out.push_back(std::move(label));
  }
  return out;
}

std::string_view to_string(ScenarioCriterion c) {
  return c == ScenarioCriterion::kOverall ? "overall" : "value";
}

std::optional<ScenarioCriterion> scenario_criterion_from_string(std::string_view text) {
  if (text == "overall") return ScenarioCriterion::kOverall;
  if (text == "value") return ScenarioCriterion::kValue;
  return std::nullopt;
}

double Tally::rate() const { return ratio(correct, n); }

AccuracyReport compute_report(const std::vector<PredictionRecord>& records,
                              const std::vector<ScenarioLabel>& labels,
                              ScenarioCriterion criterion) {
  if (records.empty()) throw EmptyEvaluation("no prediction records to score");
  AccuracyReport report;
  report.criterion = criterion;
  std::map<std::string, std::optional<Scenario>> label_of;
  for (const auto& l : labels) {
    label_of[l.task_id] = l.label;
    if (l.label) {
      ++report.labelled_tasks;
      ++report.scenario_sizes[static_cast<std::size_t>(*l.label)];
    } else {
      ++report.unresolved_tasks;
    }
  }
  std::map<std::string, ModelAccuracy> by_model;
  std::vector<const PredictionRecord*> sorted;
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
    return std::tie(a->model_name, a->task_id) < std::tie(b->model_name, b->task_id);
  });
  for (const PredictionRecord* r : sorted) {
    ModelAccuracy& m = by_model[r->model_name];
    m.model_name = r->model_name;
    count(m.overall, r->match.overall);
    count(m.value, r->match.is_numeric_match);
    count(m.unit, r->match.is_unit_match);
    count(m.scale_corrected_value, r->match.is_numeric_match || r->scale_error);
    if (r->failed) ++m.failed;
    if (r->scale_error) ++m.scale_errors;
    auto it = label_of.find(r->task_id);
    if (it != label_of.end() && it->second) {
      const bool ok = criterion == ScenarioCriterion::kOverall ? r->match.overall
                                                               : r->match.is_numeric_match;
      count(m.scenarios[static_cast<std::size_t>(*it->second)], ok);
    }
  }
  for (auto& [name, m] : by_model) report.models.push_back(std::move(m));
  return report;
}

double ScaleDiagnostic::Row::raw_accuracy() const { return ratio(value_correct, n); }

double ScaleDiagnostic::Row::corrected_accuracy() const {
  return ratio(value_correct + scale_errors, n);
}

ScaleDiagnostic scale_error_diagnostic(const std::vector<PredictionRecord>& records) {
  std::map<std::string, ScaleDiagnostic::Row> rows;
  for (const auto& r : records) {
    auto& row = rows[r.model_name];
    row.model_name = r.model_name;
    ++row.n;
    if (r.match.is_numeric_match) {
      ++row.value_correct;
    } else if (r.scale_error) {
      ++row.scale_errors;
    } else if (r.failed || r.match.reason != MatchReason::kOk) {
      ++row.unparseable;
    } else {
      ++row.other_errors;
    }
  }
  ScaleDiagnostic out;
  for (auto& [name, row] : rows) out.models.push_back(std::move(row));
  return out;
}

// ---------------------------------------------------------------------------

nlohmann::ordered_json record_to_json(const PredictionRecord& r) {
  nlohmann::ordered_json j;
  j["task_id"] = r.task_id;
  j["model_name"] = r.model_name;
  j["ground_truth"] = r.ground_truth;
  j["answer_text"] = r.answer_text;
  j["self_scenario"] = r.self_scenario ? nlohmann::ordered_json(std::string(to_string(*r.self_scenario)))
                                       : nlohmann::ordered_json(nullptr);
  j["necessary_metrics"] = r.necessary_metrics;
  j["references"] = r.references;
  j["attempts"] = r.attempts;
  j["failed"] = r.failed;
  j["failure"] = r.failure;
  j["match"] = match_to_json(r.match);
  j["scale_error"] = r.scale_error;
  return j;
}

PredictionRecord record_from_json(const nlohmann::json& j) {
  PredictionRecord r;
  r.task_id = j.at("task_id").get<std::string>();
  r.model_name = j.at("model_name").get<std::string>();
  r.ground_truth = j.at("ground_truth").get<std::string>();
  r.answer_text = j.at("answer_text").get<std::string>();
  if (!j.at("self_scenario").is_null()) {
    r.self_scenario = scenario_from_string(j.at("self_scenario").get<std::string>());
    if (!r.self_scenario) throw std::invalid_argument("unknown scenario");
  }
  r.necessary_metrics = j.at("necessary_metrics").get<std::vector<std::string>>();
  r.references = j.at("references").get<std::vector<std::string>>();
  r.attempts = j.at("attempts").get<int>();
  if (r.attempts < 1 || r.attempts > kMaxAttempts) {
    throw std::invalid_argument("attempts out of range");
  }
  r.failed = j.at("failed").get<bool>();
  r.failure = j.at("failure").get<std::string>();
  r.match = match_from_json(j.at("match"));
  r.scale_error = j.at("scale_error").get<bool>();
  return r;
}

std::string serialize_records(const std::vector<PredictionRecord>& records) {
  std::string out;
  for (const auto& r : records) out += record_to_json(r).dump() + "\n";
  return out;
}

std::vector<PredictionRecord> load_records(std::string_view text) {
  std::vector<PredictionRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

nlohmann::ordered_json report_to_json(const AccuracyReport& report,
                                      const ScaleDiagnostic& diagnostic) {
  nlohmann::ordered_json j;
  j["scenario_criterion"] = std::string(to_string(report.criterion));
  j["labelled_tasks"] = report.labelled_tasks;
  j["unresolved_tasks"] = report.unresolved_tasks;
  j["scenario_sizes"] = nlohmann::ordered_json::object();
  for (std::size_t s = 0; s < 4; ++s) {
    j["scenario_sizes"][std::string(to_string(static_cast<Scenario>(s)))] =
        report.scenario_sizes[s];
  }
  j["models"] = nlohmann::ordered_json::array();
  for (const auto& m : report.models) {
    nlohmann::ordered_json mj;
    mj["model_name"] = m.model_name;
    mj["overall"] = tally_json(m.overall);
    mj["value"] = tally_json(m.value);
    mj["unit"] = tally_json(m.unit);
    mj["scale_corrected_value"] = tally_json(m.scale_corrected_value);
    mj["scenarios"] = nlohmann::ordered_json::object();
    for (std::size_t s = 0; s < 4; ++s) {
      mj["scenarios"][std::string(to_string(static_cast<Scenario>(s)))] =
          tally_json(m.scenarios[s]);
    }
    mj["failed"] = m.failed;
    mj["scale_errors"] = m.scale_errors;
    j["models"].push_back(std::move(mj));
  }
  j["scale_diagnostic"] = nlohmann::ordered_json::array();
  for (const auto& row : diagnostic.models) {
    nlohmann::ordered_json rj;
    rj["model_name"] = row.model_name;
    rj["n"] = row.n;
    rj["value_correct"] = row.value_correct;
    rj["scale_errors"] = row.scale_errors;
    rj["other_errors"] = row.other_errors;
    rj["unparseable"] = row.unparseable;
    j["scale_diagnostic"].push_back(std::move(rj));
  }
  return j;
}

std::string format_report(const AccuracyReport& report, const ScaleDiagnostic& diagnostic) {
  std::size_t name_width = 5;
  for (const auto& m : report.models) name_width = std::max(name_width, m.model_name.size());
  name_width += 2;
  std::string out = "Accuracy (%) by model; scenario columns use " +
                    std::string(to_string(report.criterion)) + " correctness\n";
  out += pad_right("Model", name_width) + pad_left("Overall", 9) + pad_left("Value", 8) +
         pad_left("Unit", 8);
  for (std::size_t s = 0; s < 4; ++s) {
    out += pad_left(std::string(to_string(static_cast<Scenario>(s))) + " (n=" +
                        std::to_string(report.scenario_sizes[s]) + ")",
                    12);
  }
  out += pad_left("Value*", 9) + "\n";
  for (const auto& m : report.models) {
    out += pad_right(m.model_name, name_width) + pad_left(percent(m.overall.rate()), 9) +
           pad_left(percent(m.value.rate()), 8) + pad_left(percent(m.unit.rate()), 8);
    for (const auto& s : m.scenarios) out += pad_left(percent(s.rate()), 12);
    out += pad_left(percent(m.scale_corrected_value.rate()), 9) + "\n";
  }
  out += "Value* counts scale errors (right digits, wrong magnitude) as correct.\n";
  out += "Labelled tasks: " + std::to_string(report.labelled_tasks) +
         "; unresolved: " + std::to_string(report.unresolved_tasks) + "\n";
  out += "\nValue errors by model\n";
  out += pad_right("Model", name_width) + pad_left("n", 7) + pad_left("correct", 9) +
         pad_left("scale", 7) + pad_left("other", 7) + pad_left("unparsed", 10) + "\n";
  for (const auto& row : diagnostic.models) {
    out += pad_right(row.model_name, name_width) + pad_left(std::to_string(row.n), 7) +
           pad_left(std::to_string(row.value_correct), 9) +
           pad_left(std::to_string(row.scale_errors), 7) +
           pad_left(std::to_string(row.other_errors), 7) +
           pad_left(std::to_string(row.unparseable), 10) + "\n";
  }
  return out;
}

}  // namespace maskbench

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

#include "maskbench/annotator.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "maskbench/errors.h"
#include "maskbench/hash.h"
#include "support/fixtures.h"

namespace maskbench {
namespace {

using testing::read_fixture;

AnnotationVerdict vote(AnswerLabel label) { return {"t", "m", label, ""}; }

std::vector<ConsensusResult> pilot_consensus() {
  std::vector<ConsensusResult> out;
  std::istringstream in(read_fixture("agreement/consensus.jsonl"));
  for (std::string line; std::getline(in, line);) {
    out.push_back(consensus_from_json(nlohmann::json::parse(line)));
  }
  return out;
}

std::vector<TaskInstance> fixture_tasks() {
  std::vector<TaskInstance> tasks;
  const auto add = [&](const char* file, FormatTag format, const char* id, const char* date) {
    const auto doc = ingest_filing(
        load_filing(read_fixture(std::string("filings/") + file), format, id, date));
    for (auto& t : build_document_tasks(doc, UnitLexicon::builtin(), 10, 0)) {
      tasks.push_back(std::move(t));
    }
  };
  add("ACME_2024-02-15.txt", FormatTag::kPlainText, "ACME", "2024-02-15");
  add("GOTHAM_2024-03-01.html", FormatTag::kSimpleMarkup, "GOTHAM", "2024-03-01");
  add("BRIGHTWAY_2023-11-30.md", FormatTag::kPlainText, "BRIGHTWAY", "2023-11-30");
  return tasks;
}

// Labels each span by a hash of (model, span, salt): a deterministic,
// model-specific pseudo-random annotator.
StubModelClient::Responder hashed_responder(std::string model, int yes_per_mille) {
  return [model, yes_per_mille](const PromptBundle&, const RequestInfo& info) {
    nlohmann::ordered_json j;
    j["reasoning"] = "hashed";
    j["spans"] = nlohmann::ordered_json::object();
    for (const auto& s : info.spans) {
      const bool yes = sha256_u64(model + "|" + info.key + "|" + s) % 1000 <
                       static_cast<std::uint64_t>(yes_per_mille);
      j["spans"][s] = yes ? "answerable" : "unanswerable";
    }
    return "```json\n" + j.dump() + "\n```";
  };
}

std::set<std::string> retained_ids(const std::vector<ConsensusResult>& results) {
  std::set<std::string> out;
  for (const auto& r : results) {
    if (r.retained) out.insert(r.task_id);
  }
  return out;
}

TEST(ConsensusTest, Unanimity) {
  using L = AnswerLabel;
  EXPECT_TRUE(unanimous_answerable({vote(L::kAnswerable), vote(L::kAnswerable), vote(L::kAnswerable)}));
  EXPECT_FALSE(unanimous_answerable({vote(L::kAnswerable), vote(L::kAnswerable), vote(L::kUnanswerable)}));
  EXPECT_FALSE(unanimous_answerable({vote(L::kAnswerable), vote(L::kAbstain), vote(L::kAnswerable)}));
  EXPECT_FALSE(unanimous_answerable({}));
}

TEST(AgreementTest, PilotTable) {
  const auto results = pilot_consensus();
  ASSERT_EQ(results.size(), 1124u);
  std::size_t retained = 0;
  for (const auto& r : results) retained += unanimous_answerable(r.votes) ? 1 : 0;
  EXPECT_EQ(retained, 287u);

  const auto human = resolve_human_labels(load_human_labels(read_fixture("agreement/human_labels.jsonl")));
  const AgreementTable t = agreement_report(results, human);
  ASSERT_EQ(t.rows.size(), 4u);
  const std::vector<std::pair<std::size_t, std::size_t>> expected = {
      {1, 626}, {276, 11}, {12, 23}, {11, 164}};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(t.rows[i].human_yes, expected[i].first) << t.rows[i].pattern;
    EXPECT_EQ(t.rows[i].human_no, expected[i].second) << t.rows[i].pattern;
  }
  EXPECT_EQ(t.rows[0].yes_votes, 0);
  EXPECT_EQ(t.rows[1].yes_votes, 3);
  EXPECT_EQ(t.rows[2].yes_votes, 2);
  EXPECT_EQ(t.rows[3].yes_votes, 1);
  EXPECT_EQ(t.human_yes, 300u);
  EXPECT_EQ(t.human_no, 824u);
  EXPECT_EQ(t.unanimous_no_precision, (Fraction{626, 627}));
  EXPECT_EQ(t.unanimous_yes_precision, (Fraction{276, 287}));
  EXPECT_NEAR(100 * t.unanimous_no_precision.value(), 99.8, 0.05);
  EXPECT_NEAR(100 * t.unanimous_yes_precision.value(), 96.2, 0.05);

  const std::string text = format_agreement_table(t);
  EXPECT_NE(text.find("626/627"), std::string::npos);
  EXPECT_NE(text.find("276/287"), std::string::npos);
  const auto j = agreement_to_json(t);
  EXPECT_EQ(j.at("total"), 1124);
  EXPECT_EQ(j.at("unanimous_yes_precision").at("numerator"), 276);
}

TEST(AgreementTest, PilotHumanKappa) {
  // Two annotators per task; the fixture generator derived 18633/20600 from
  // its construction.
  const auto labels = load_human_labels(read_fixture("agreement/human_labels.jsonl"));
  std::map<std::string, std::vector<AnswerLabel>> by_task;
  for (const auto& h : labels) {
    if (h.annotator_id != kAdjudicatorId) by_task[h.task_id].push_back(h.label);
  }
  std::vector<std::vector<AnswerLabel>> matrix;
  for (auto& [id, row] : by_task) matrix.push_back(row);
  EXPECT_NEAR(fleiss_kappa(matrix), 18633.0 / 20600.0, 1e-12);
  EXPECT_NEAR(fleiss_kappa(matrix), 0.905, 0.001);
}

TEST(AgreementTest, AllAgreeAllCorrect) {
  std::vector<ConsensusResult> results;
  std::map<std::string, AnswerLabel> human;
  for (int i = 0; i < 20; ++i) {
    const std::string id = "t" + std::to_string(i);
    const AnswerLabel l = i % 3 == 0 ? AnswerLabel::kAnswerable : AnswerLabel::kUnanswerable;
    results.push_back({id, {{id, "a", l, ""}, {id, "b", l, ""}, {id, "c", l, ""}}, false});
    human[id] = l;
  }
  const auto t = agreement_report(results, human);
  EXPECT_EQ(t.unanimous_no_precision.value(), 1.0);
  EXPECT_EQ(t.unanimous_yes_precision.value(), 1.0);
  EXPECT_EQ(t.panel_kappa, 1.0);
}

TEST(AgreementTest, CellsSumToTasks) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t p = 1 + rng() % 5;
    std::vector<ConsensusResult> results;
    std::map<std::string, AnswerLabel> human;
    const std::size_t n = 1 + rng() % 200;
    for (std::size_t i = 0; i < n; ++i) {
      ConsensusResult r;
      r.task_id = std::to_string(i);
      for (std::size_t m = 0; m < p; ++m) {
        r.votes.push_back({r.task_id, "m" + std::to_string(m),
                           static_cast<AnswerLabel>(rng() % 10 == 0 ? 2 : rng() % 2), ""});
      }
      results.push_back(r);
      human[r.task_id] = static_cast<AnswerLabel>(rng() % 2);
    }
    const auto t = agreement_report(results, human);
    std::size_t sum = 0;
    for (const auto& row : t.rows) sum += row.total();
    EXPECT_EQ(sum, n);
    EXPECT_EQ(t.total(), n);
    EXPECT_GE(t.rows.size(), p >= 2 ? p + 1 : 2);
  }
}

TEST(AgreementTest, JoinErrors) {
  std::vector<ConsensusResult> results = {
      {"a", {{"a", "m", AnswerLabel::kAnswerable, ""}}, true},
      {"b", {{"b", "m", AnswerLabel::kUnanswerable, ""}}, false}};
  EXPECT_THROW(agreement_report(results, {{"a", AnswerLabel::kAnswerable}}), JoinError);
  EXPECT_THROW(agreement_report(results, {{"a", AnswerLabel::kAnswerable},
                                          {"b", AnswerLabel::kAnswerable},
                                          {"c", AnswerLabel::kAnswerable}}),
               JoinError);
  results[1].votes.push_back(results[1].votes.front());
  EXPECT_THROW(agreement_report(results, {{"a", AnswerLabel::kAnswerable},
                                          {"b", AnswerLabel::kAnswerable}}),
               JoinError);
}

TEST(HumanLabelTest, Resolution) {
  const auto labels = load_human_labels(
      R"({"task_id": "x", "label": "answerable", "annotator_id": "e1"}
{"task_id": "x", "label": "unanswerable", "annotator_id": "e2"}
{"task_id": "x", "label": "unanswerable", "annotator_id": "adjudicator"}
{"task_id": "y", "label": "answerable", "annotator_id": "e1"}
{"task_id": "y", "label": "answerable", "annotator_id": "e2"}
{"task_id": "y", "label": "unanswerable", "annotator_id": "e3"}
)");
  const auto resolved = resolve_human_labels(labels);
  EXPECT_EQ(resolved.at("x"), AnswerLabel::kUnanswerable);
  EXPECT_EQ(resolved.at("y"), AnswerLabel::kAnswerable);
  EXPECT_THROW(resolve_human_labels({labels[0], labels[1]}), JoinError);
  EXPECT_THROW(load_human_labels("{\"task_id\": \"x\", \"label\": \"abstain\", \"annotator_id\": \"e\"}"),
               ParseError);
  try {
    load_human_labels("\n{\"task_id\": \"x\", \"label\": \"answerable\", \"annotator_id\": \"e\"}\nnope\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(FleissTest, HandComputedExamples) {
  // Worked by hand: P_i = 1, 1/3, 1, 1/3, 1, 1; P_bar = 7/9; P_e = 1/2.
  EXPECT_DOUBLE_EQ(fleiss_kappa(std::vector<std::vector<std::size_t>>{
                       {3, 0}, {2, 1}, {0, 3}, {1, 2}, {3, 0}, {0, 3}}),
                   5.0 / 9.0);
  // Classic 14-rater, 5-category example; exact value 4211/20059.
  EXPECT_DOUBLE_EQ(fleiss_kappa(std::vector<std::vector<std::size_t>>{
                       {0, 0, 0, 0, 14}, {0, 2, 6, 4, 2}, {0, 0, 3, 5, 6}, {0, 3, 9, 2, 0},
                       {2, 2, 8, 1, 1}, {7, 7, 0, 0, 0}, {3, 2, 6, 3, 0}, {2, 5, 3, 2, 2},
                       {6, 5, 2, 1, 0}, {0, 2, 2, 3, 7}}),
                   4211.0 / 20059.0);
}

TEST(FleissTest, PerfectAndDegenerate) {
  EXPECT_EQ(fleiss_kappa(std::vector<std::vector<std::size_t>>{{3, 0}, {0, 3}, {3, 0}}), 1.0);
  EXPECT_EQ(fleiss_kappa(std::vector<std::vector<std::size_t>>{{3, 0}, {3, 0}}), 1.0);
  EXPECT_THROW(fleiss_kappa(std::vector<std::vector<std::size_t>>{}), std::invalid_argument);
  EXPECT_THROW(fleiss_kappa(std::vector<std::vector<std::size_t>>{{1, 0}}), std::invalid_argument);
  EXPECT_THROW(fleiss_kappa(std::vector<std::vector<std::size_t>>{{2, 0}, {1, 2}}),
               std::invalid_argument);
  EXPECT_THROW(fleiss_kappa(std::vector<std::vector<AnswerLabel>>{
                   {AnswerLabel::kAnswerable, AnswerLabel::kAbstain}}),
               std::invalid_argument);
}

TEST(FleissTest, IndependentRatersNearZero) {
  std::mt19937_64 rng(2024);
  std::vector<std::vector<AnswerLabel>> m(10000);
  for (auto& row : m) {
    for (int r = 0; r < 2; ++r) row.push_back(static_cast<AnswerLabel>(rng() % 2));
  }
  EXPECT_LT(std::abs(fleiss_kappa(m)), 0.05);
}

TEST(FleissTest, BoundedAndOrderInvariant) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t raters = 2 + rng() % 4;
    const std::size_t k = 2 + rng() % 3;
    std::vector<std::vector<std::size_t>> counts(1 + rng() % 30, std::vector<std::size_t>(k, 0));
    for (auto& row : counts) {
      for (std::size_t r = 0; r < raters; ++r) ++row[rng() % k];
    }
    const double kappa = fleiss_kappa(counts);
    if (std::isnan(kappa)) continue;
    EXPECT_GE(kappa, -1.0);
    EXPECT_LE(kappa, 1.0);
    auto shuffled = counts;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_DOUBLE_EQ(fleiss_kappa(shuffled), kappa);
  }
}

TEST(AnnotateTest, OraclePanelRetainsEverything) {
  const auto tasks = fixture_tasks();
  ASSERT_FALSE(tasks.empty());
  StubModelClient a("a"), b("b"), c("c");
  const auto results = annotate(tasks, {&a, &b, &c});
  ASSERT_EQ(results.size(), tasks.size());
  std::set<std::string> sentences;
  for (const auto& t : tasks) sentences.insert(sentence_key(t));
  EXPECT_EQ(a.calls(), sentences.size());  // one prompt per sentence
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    EXPECT_EQ(results[i].task_id, tasks[i].task_id);
    ASSERT_EQ(results[i].votes.size(), 3u);
    EXPECT_EQ(results[i].votes[1].model_name, "b");
    EXPECT_TRUE(results[i].retained);
  }
}

TEST(AnnotateTest, DissentAndAbstention) {
  const auto tasks = fixture_tasks();
  StubModelClient a("a"), no("no", StubModelClient::unanswerable_responder()),
      mute("mute", StubModelClient::prose_responder());
  const auto r1 = annotate(tasks, {&a, &no});
  EXPECT_TRUE(retained_ids(r1).empty());
  const auto r2 = annotate(tasks, {&a, &mute});
  EXPECT_TRUE(retained_ids(r2).empty());
  for (const auto& r : r2) EXPECT_EQ(r.votes[1].label, AnswerLabel::kAbstain);
  std::set<std::string> sentences;
  for (const auto& t : tasks) sentences.insert(sentence_key(t));
  EXPECT_EQ(mute.calls(), 3 * sentences.size());
}

TEST(AnnotateTest, MissingSpanLabelIsRetried) {
  const auto tasks = fixture_tasks();
  const TaskInstance& t = tasks.front();
  StubModelClient s("s");
  s.script(sentence_key(t), {{StubReply::Kind::kText, "{\"spans\": {}}"},
                             {StubReply::Kind::kText, "{\"spans\": {}}"},
                             {StubReply::Kind::kText, "{\"spans\": {}}"}});
  const auto results = annotate({t}, {&s});
  EXPECT_EQ(results[0].votes[0].label, AnswerLabel::kAbstain);
  EXPECT_EQ(s.calls(), 3u);
}

TEST(AnnotateTest, MonotoneAndOrderInvariant) {
  const auto tasks = fixture_tasks();
  std::vector<std::unique_ptr<StubModelClient>> members;
  for (int m = 0; m < 4; ++m) {
    const std::string name = "m" + std::to_string(m);
    members.push_back(std::make_unique<StubModelClient>(name, hashed_responder(name, 700)));
  }
  std::vector<ModelClient*> panel;
  std::set<std::string> previous;
  for (std::size_t m = 0; m < members.size(); ++m) {
    panel.push_back(members[m].get());
    const auto kept = retained_ids(annotate(tasks, panel));
    if (m > 0) {
      EXPECT_TRUE(std::includes(previous.begin(), previous.end(), kept.begin(), kept.end()));
    }
    previous = kept;
  }
  std::vector<ModelClient*> reversed(panel.rbegin(), panel.rend());
  EXPECT_EQ(retained_ids(annotate(tasks, reversed)), previous);
  AnnotateOptions serial;
  serial.concurrency = 1;
  EXPECT_EQ(retained_ids(annotate(tasks, panel, serial)), previous);
  EXPECT_THROW(annotate(tasks, {}), ConfigError);
}

TEST(AnnotateTest, ApplyConsensus) {
  const auto tasks = fixture_tasks();
  Benchmark b;
  b.tasks = tasks;
  StubModelClient h("h", hashed_responder("h", 500));
  const auto results = annotate(tasks, {&h});
  const Benchmark kept = apply_consensus(b, results);
  EXPECT_TRUE(kept.header.annotated);
  EXPECT_EQ(kept.tasks.size(), retained_ids(results).size());
  EXPECT_GT(kept.tasks.size(), 0u);
  EXPECT_LT(kept.tasks.size(), tasks.size());
  for (const auto& t : kept.tasks) {
    ASSERT_TRUE(t.answerability);
    EXPECT_TRUE(t.answerability->retained);
  }
  EXPECT_THROW(apply_consensus(b, {}), JoinError);
}

}  // namespace
}  // namespace maskbench

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
#include <cstdio>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include <boost/multiprecision/cpp_int.hpp>

#include "maskbench/errors.h"
#include "maskbench/text_util.h"

namespace maskbench {
namespace {

using Rational = boost::multiprecision::cpp_rational;

struct MemberVerdicts {
  bool abstained = false;
  std::string reasoning;
  AnswerabilityReply reply;
};

std::string pad_left(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

std::string pad_right(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string fraction_text(const Fraction& f) {
  if (f.denominator == 0) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, " (%.2f%%)", 100.0 * f.value());
  return std::to_string(f.numerator) + "/" + std::to_string(f.denominator) + buf;
}

nlohmann::ordered_json fraction_json(const Fraction& f) {
  nlohmann::ordered_json j;
  j["numerator"] = f.numerator;
  j["denominator"] = f.denominator;
  j["value"] = f.denominator == 0 ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(f.value());
  return j;
}

std::string pattern_name(int yes, std::size_t panel) {
  if (yes < 0) return "with abstention";
  const std::size_t y = static_cast<std::size_t>(yes);
  if (y == 0) return "all " + std::to_string(panel) + " no";
  if (y == panel) return "all " + std::to_string(panel) + " yes";
  return std::to_string(y) + " yes / " + std::to_string(panel - y) + " no";
}

}  // namespace

bool unanimous_answerable(const std::vector<AnnotationVerdict>& votes) {
  return !votes.empty() && std::all_of(votes.begin(), votes.end(), [](const auto& v) {
           return v.label == AnswerLabel::kAnswerable;
         });
}

std::string sentence_key(const TaskInstance& task) {
  return task.company_id + ":" + task.filing_date + ":" + std::to_string(task.sentence_index);
}

std::vector<ConsensusResult> annotate(const std::vector<TaskInstance>& tasks,
                                      const std::vector<ModelClient*>& panel,
                                      const AnnotateOptions& options) {
  if (panel.empty()) throw ConfigError("annotation panel is empty");
  std::vector<std::vector<std::size_t>> groups;
  std::unordered_map<std::string, std::size_t> group_of;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    auto [it, inserted] = group_of.emplace(sentence_key(tasks[i]), groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }

  const std::size_t p = panel.size();
  std::vector<MemberVerdicts> verdicts(groups.size() * p);
  parallel_for(verdicts.size(), options.concurrency, [&](std::size_t job) {
    const std::size_t g = job / p;
    const std::size_t m = job % p;
    const TaskInstance& first = tasks[groups[g].front()];
    const std::string sentence = first.restored_sentence();

    std::vector<CharRange> ranges;
    RequestInfo info;
    info.key = sentence_key(first);
    for (std::size_t idx : groups[g]) {
      const TaskInstance& t = tasks[idx];
      if (t.restored_sentence() != sentence) {
        throw JoinError("tasks " + first.task_id + " and " + t.task_id +
                        " share a sentence key but not a sentence");
      }
      if (std::find(ranges.begin(), ranges.end(), t.ground_truth.char_range) == ranges.end()) {
        ranges.push_back(t.ground_truth.char_range);
      }
      if (std::find(info.spans.begin(), info.spans.end(), t.ground_truth.surface) ==
          info.spans.end()) {
        info.spans.push_back(t.ground_truth.surface);
      }
    }
    std::sort(ranges.begin(), ranges.end(),
              [](const CharRange& a, const CharRange& b) { return a.begin < b.begin; });
    const auto& ctx = first.context;
    const PromptBundle prompt = render_answerability_prompt(
        ctx.tables, first.filing_date, ctx.prev_sentence ? ctx.prev_sentence->text : "",
        tag_spans(sentence, ranges), ctx.next_sentence ? ctx.next_sentence->text : "");

    QueryOptions q;
    q.max_attempts = options.max_attempts;
    q.cache = options.cache;
    q.limiter = options.limiters.size() == p ? options.limiters[m] : nullptr;
    q.validate = [&info](const nlohmann::json& value) {
      const AnswerabilityReply reply = parse_answerability_reply(value);
      for (const auto& s : info.spans) {
        if (!reply.spans.count(s)) throw SchemaError("reply has no label for '" + s + "'");
      }
    };
    MemberVerdicts& out = verdicts[job];
    try {
      out.reply = parse_answerability_reply(query_structured(*panel[m], prompt, info, q).value);
      out.reasoning = out.reply.reasoning;
    } catch (const InvalidOutput& e) {
      out.abstained = true;
      out.reasoning = e.what();
    } catch (const SchemaError& e) {
      out.abstained = true;
      out.reasoning = e.what();
    } catch (const TransportError& e) {
      out.abstained = true;
      out.reasoning = e.what();
    }
  });

  std::vector<ConsensusResult> results(tasks.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t idx : groups[g]) {
      ConsensusResult& r = results[idx];
      r.task_id = tasks[idx].task_id;
      for (std::size_t m = 0; m < p; ++m) {
        const MemberVerdicts& mv = verdicts[g * p + m];
        AnnotationVerdict v;
        v.task_id = r.task_id;
        v.model_name = panel[m]->model_name();
        v.reasoning = mv.reasoning;
        v.label = mv.abstained ? AnswerLabel::kAbstain
                               : mv.reply.spans.at(tasks[idx].ground_truth.surface);
        r.votes.push_back(std::move(v));
      }
      r.retained = unanimous_answerable(r.votes);
    }
  }
  return results;
}

Benchmark apply_consensus(const Benchmark& benchmark,
                          const std::vector<ConsensusResult>& results) {
  std::unordered_map<std::string, const ConsensusResult*> by_id;
  for (const auto& r : results) by_id[r.task_id] = &r;
  Benchmark out;
  out.header = benchmark.header;
  out.header.annotated = true;
  for (const auto& t : benchmark.tasks) {
    auto it = by_id.find(t.task_id);
    if (it == by_id.end()) throw JoinError("no consensus for task " + t.task_id);
    if (!it->second->retained) continue;
    TaskInstance kept = t;
    kept.answerability = *it->second;
    out.tasks.push_back(std::move(kept));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<HumanLabel> load_human_labels(std::string_view text) {
  std::vector<HumanLabel> out;
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
      const auto j = nlohmann::json::parse(line);
      HumanLabel h;
      h.task_id = j.at("task_id").get<std::string>();
      h.annotator_id = j.at("annotator_id").get<std::string>();
      const auto label = answer_label_from_string(j.at("label").get<std::string>());
      if (!label || *label == AnswerLabel::kAbstain) {
        throw std::invalid_argument("label must be answerable or unanswerable");
      }
      h.label = *label;
      out.push_back(std::move(h));
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

std::map<std::string, AnswerLabel> resolve_human_labels(const std::vector<HumanLabel>& labels) {
  struct Tally {
    std::size_t yes = 0;
    std::size_t no = 0;
    std::optional<AnswerLabel> adjudicated;
  };
  std::map<std::string, Tally> tallies;
  for (const auto& h : labels) {
    Tally& t = tallies[h.task_id];
    if (h.annotator_id == kAdjudicatorId) {
      if (t.adjudicated && *t.adjudicated != h.label) {
        throw JoinError("conflicting adjudications for task " + h.task_id);
      }
      t.adjudicated = h.label;
    } else if (h.label == AnswerLabel::kAnswerable) {
      ++t.yes;
    } else {
      ++t.no;
    }
  }
  std::map<std::string, AnswerLabel> out;
  for (const auto& [id, t] : tallies) {
    if (t.adjudicated) {
      out[id] = *t.adjudicated;
    } else if (t.yes != t.no) {
      out[id] = t.yes > t.no ? AnswerLabel::kAnswerable : AnswerLabel::kUnanswerable;
    } else {
      throw JoinError("human labels for task " + id + " are tied and not adjudicated");
    }
  }
  return out;
}

double Fraction::value() const {
  if (denominator == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

AgreementTable agreement_report(const std::vector<ConsensusResult>& results,
                                const std::map<std::string, AnswerLabel>& human) {
  AgreementTable table;
  if (results.empty()) return table;
  const std::size_t p = results.front().votes.size();
  if (p == 0) throw JoinError("consensus result without votes");
  table.panel_size = p;
  table.rows.push_back({pattern_name(0, p), 0});
  table.rows.push_back({pattern_name(static_cast<int>(p), p), static_cast<int>(p)});
  for (std::size_t yes = p - 1; yes >= 1 && yes < p; --yes) {
    table.rows.push_back({pattern_name(static_cast<int>(yes), p), static_cast<int>(yes)});
  }
  AgreementRow abstained{pattern_name(-1, p), -1};

  std::set<std::string> seen;
  std::vector<std::vector<AnswerLabel>> kappa_rows;
  for (const auto& r : results) {
    if (r.votes.size() != p) throw JoinError("panel size differs for task " + r.task_id);
    auto h = human.find(r.task_id);
    if (h == human.end()) throw JoinError("no human label for task " + r.task_id);
    seen.insert(r.task_id);
    const bool human_yes = h->second == AnswerLabel::kAnswerable;
    AgreementRow* row = nullptr;
    if (std::any_of(r.votes.begin(), r.votes.end(),
                    [](const auto& v) { return v.label == AnswerLabel::kAbstain; })) {
      row = &abstained;
    } else {
      const std::size_t yes = std::count_if(r.votes.begin(), r.votes.end(), [](const auto& v) {
        return v.label == AnswerLabel::kAnswerable;
      });
      const std::size_t index = yes == 0 ? 0 : yes == p ? 1 : 2 + (p - 1 - yes);
      row = &table.rows[index];
      std::vector<AnswerLabel> labels;
      for (const auto& v : r.votes) labels.push_back(v.label);
      kappa_rows.push_back(std::move(labels));
    }
    (human_yes ? row->human_yes : row->human_no) += 1;
    (human_yes ? table.human_yes : table.human_no) += 1;
  }
  for (const auto& [id, label] : human) {
    if (!seen.count(id)) throw JoinError("human label for unknown task " + id);
  }
  if (abstained.total() > 0) table.rows.push_back(abstained);
  table.unanimous_no_precision = {table.rows[0].human_no, table.rows[0].total()};
  table.unanimous_yes_precision = {table.rows[1].human_yes, table.rows[1].total()};
  table.panel_kappa = p >= 2 && !kappa_rows.empty()
                          ? fleiss_kappa(kappa_rows)
                          : std::numeric_limits<double>::quiet_NaN();
  return table;
}

nlohmann::ordered_json agreement_to_json(const AgreementTable& table) {
  nlohmann::ordered_json j;
  j["panel_size"] = table.panel_size;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : table.rows) {
    nlohmann::ordered_json row;
    row["pattern"] = r.pattern;
    row["yes_votes"] = r.yes_votes < 0 ? nlohmann::ordered_json(nullptr)
                                       : nlohmann::ordered_json(r.yes_votes);
    row["human_yes"] = r.human_yes;
    row["human_no"] = r.human_no;
    row["total"] = r.total();
    j["rows"].push_back(std::move(row));
  }
  j["human_yes"] = table.human_yes;
  j["human_no"] = table.human_no;
  j["total"] = table.total();
  j["unanimous_no_precision"] = fraction_json(table.unanimous_no_precision);
  j["unanimous_yes_precision"] = fraction_json(table.unanimous_yes_precision);
  j["panel_kappa"] = std::isnan(table.panel_kappa) ? nlohmann::ordered_json(nullptr)
                                                   : nlohmann::ordered_json(table.panel_kappa);
  return j;
}

std::string format_agreement_table(const AgreementTable& table) {
  std::string out = "Panel agreement with human labels (panel of " +
                    std::to_string(table.panel_size) + ")\n";
  const auto line = [&](const std::string& name, std::size_t yes, std::size_t no) {
    out += pad_right(name, 22) + pad_left(std::to_string(yes), 11) +
           pad_left(std::to_string(no), 10) + pad_left(std::to_string(yes + no), 8) + "\n";
  };
  out += pad_right("Pattern", 22) + pad_left("Human yes", 11) + pad_left("Human no", 10) +
         pad_left("Total", 8) + "\n";
  for (const auto& r : table.rows) line(r.pattern, r.human_yes, r.human_no);
  line("Total", table.human_yes, table.human_no);
  out += "Unanimous-no precision:  " + fraction_text(table.unanimous_no_precision) + "\n";
  out += "Unanimous-yes precision: " + fraction_text(table.unanimous_yes_precision) + "\n";
  char buf[64];
  if (std::isnan(table.panel_kappa)) {
    std::snprintf(buf, sizeof buf, "n/a");
  } else {
    std::snprintf(buf, sizeof buf, "%.3f", table.panel_kappa);
  }
  out += std::string("Panel Fleiss' kappa: ") + buf + "\n";
  return out;
}

double fleiss_kappa(const std::vector<std::vector<std::size_t>>& counts) {
  if (counts.empty()) throw std::invalid_argument("fleiss_kappa needs at least one item");
  const std::size_t k = counts.front().size();
  if (k < 2) throw std::invalid_argument("fleiss_kappa needs at least two categories");
  std::size_t n = 0;
  for (std::size_t c : counts.front()) n += c;
  if (n < 2) throw std::invalid_argument("fleiss_kappa needs at least two raters");
  const std::size_t items = counts.size();
  std::vector<std::uint64_t> column(k, 0);
  Rational agreement_sum = 0;
  for (const auto& row : counts) {
    if (row.size() != k) throw std::invalid_argument("ragged category counts");
    std::size_t total = 0;
    std::uint64_t squares = 0;
    for (std::size_t j = 0; j < k; ++j) {
      total += row[j];
      squares += static_cast<std::uint64_t>(row[j]) * row[j];
      column[j] += row[j];
    }
    if (total != n) throw std::invalid_argument("every item needs the same number of raters");
    agreement_sum += Rational(squares - n, n * (n - 1));
  }
  const Rational p_bar = agreement_sum / items;
  Rational p_e = 0;
  for (std::uint64_t c : column) {
    const Rational pj(c, static_cast<std::uint64_t>(items) * n);
    p_e += pj * pj;
  }
  if (p_e == 1) {
    return p_bar == 1 ? 1.0 : std::numeric_limits<double>::quiet_NaN();
  }
  return static_cast<double>((p_bar - p_e) / (1 - p_e));
}

double fleiss_kappa(const std::vector<std::vector<AnswerLabel>>& labels) {
  std::vector<std::vector<std::size_t>> counts;
  counts.reserve(labels.size());
  for (const auto& row : labels) {
    std::vector<std::size_t> c(2, 0);
    for (AnswerLabel l : row) {
      if (l == AnswerLabel::kAbstain) throw std::invalid_argument("abstentions are not ratings");
      ++c[l == AnswerLabel::kAnswerable ? 0 : 1];
    }
    counts.push_back(std::move(c));
  }
  return fleiss_kappa(counts);
}

}  // namespace maskbench

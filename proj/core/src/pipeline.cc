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

#include "maskbench/pipeline.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <utility>

#include <boost/version.hpp>

#include "maskbench/annotator.h"
#include "maskbench/errors.h"
#include "maskbench/hash.h"
#include "maskbench/ingest.h"
#include "maskbench/matcher.h"
#include "maskbench/task.h"

#ifndef MASKBENCH_VERSION
#define MASKBENCH_VERSION "unknown"
#endif

namespace maskbench {
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kConfigKeys = {
    "inputs", "lexicon", "sample_n", "seed", "panel", "models", "concurrency",
    "cache_dir", "output_dir", "scenario_criterion", "human_labels"};

const std::set<std::string> kModelKeys = {
    "model_name", "provider", "endpoint", "api_model", "api_key_env", "max_tokens",
    "requests_per_second", "burst", "timeout_seconds", "stub_policy", "stub_script"};

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

fs::path existing(const fs::path& base, const nlohmann::json& value, const char* key) {
  if (!value.is_string()) throw ConfigError(std::string(key) + " must be a path string");
  fs::path p = resolve(base, value.get<std::string>());
  if (!fs::exists(p)) throw ConfigError(std::string(key) + ": no such path " + p.string());
  return p;
}

ModelConfig parse_model(const nlohmann::json& j, const fs::path& base) {
  if (!j.is_object()) throw ConfigError("model entries must be objects");
  for (const auto& [k, v] : j.items()) {
    if (!kModelKeys.count(k)) throw ConfigError("unknown model config key '" + k + "'");
  }
  ModelConfig m;
  m.model_name = j.at("model_name").get<std::string>();
  if (m.model_name.empty()) throw ConfigError("empty model_name");
  m.provider = j.value("provider", m.provider);
  m.endpoint = j.value("endpoint", m.endpoint);
  m.api_model = j.value("api_model", m.api_model);
  m.api_key_env = j.value("api_key_env", m.api_key_env);
  m.max_tokens = j.value("max_tokens", m.max_tokens);
  m.requests_per_second = j.value("requests_per_second", m.requests_per_second);
  m.burst = j.value("burst", m.burst);
  m.timeout_seconds = j.value("timeout_seconds", m.timeout_seconds);
  m.stub_policy = j.value("stub_policy", m.stub_policy);
  if (j.contains("stub_script")) {
    m.stub_script = existing(base, j.at("stub_script"), "stub_script").string();
  }
  if (m.max_tokens <= 0 || m.requests_per_second < 0 || m.burst < 1 ||
      m.timeout_seconds <= 0) {
    throw ConfigError("out-of-range limits for model '" + m.model_name + "'");
  }
  return m;
}

std::vector<ModelConfig> parse_models(const nlohmann::json& doc, const char* key,
                                      const fs::path& base) {
  std::vector<ModelConfig> out;
  if (!doc.contains(key)) return out;
  if (!doc.at(key).is_array()) throw ConfigError(std::string(key) + " must be a list");
  std::set<std::string> names, stems;
  for (const auto& j : doc.at(key)) {
    ModelConfig m = parse_model(j, base);
    if (!names.insert(m.model_name).second) {
      throw ConfigError("duplicate model '" + m.model_name + "' in " + key);
    }
    if (!stems.insert(model_file_stem(m.model_name)).second) {
      throw ConfigError("model names in " + std::string(key) +
                        " collide after file-name sanitizing: " + m.model_name);
    }
    out.push_back(std::move(m));
  }
  return out;
}

struct Versions {
  static nlohmann::ordered_json json() {
    nlohmann::ordered_json j;
    j["maskbench"] = MASKBENCH_VERSION;
    j["benchmark_schema"] = kBenchmarkSchemaVersion;
    j["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                         std::to_string(NLOHMANN_JSON_VERSION_PATCH);
    j["boost"] = BOOST_LIB_VERSION;
    return j;
  }
};

std::string jsonl(const std::vector<nlohmann::ordered_json>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  return out;
}

// Stage output bookkeeping: outputs are recorded with their digests and a
// manifest plus failures file is written on finish.
class Stage {
 public:
  Stage(const PipelineConfig& config, std::string name)
      : config_(config), dir_(stage_dir(config, name)) {
    summary_.stage = std::move(name);
    fs::create_directories(dir_);
  }

  const fs::path& dir() const { return dir_; }
  RunSummary& summary() { return summary_; }

  void input(const fs::path& path, std::string_view content) {
    std::error_code ec;
    fs::path rel = fs::relative(path, config_.output_dir, ec);
    if (ec || rel.empty() || *rel.begin() == "..") rel = path.filename();
    inputs_.push_back({{"path", rel.generic_string()}, {"sha256", sha256_hex(content)}});
  }

  void output(const std::string& name, std::string_view content) {
    const fs::path path = dir_ / name;
    write_file_atomic(path, content);
    summary_.outputs.push_back(path);
    outputs_.push_back({{"path", name}, {"sha256", sha256_hex(content)}});
  }

  void fail(nlohmann::ordered_json failure, bool fatal) {
    summary_.failures.push_back(std::move(failure));
    summary_.fatal = summary_.fatal || fatal;
  }

  RunSummary finish(nlohmann::ordered_json extra = nlohmann::ordered_json::object()) {
    write_file_atomic(dir_ / "failures.jsonl", jsonl(summary_.failures));
    nlohmann::ordered_json m;
    m["stage"] = summary_.stage;
    m["config_sha256"] = config_.config_hash;
    m["versions"] = Versions::json();
    m["seed"] = config_.seed;
    m["sample_n"] = config_.sample_n;
    for (auto& [k, v] : extra.items()) m[k] = v;
    m["inputs"] = inputs_;
    m["outputs"] = outputs_;
    m["failures"] = summary_.failures.size();
    write_file_atomic(dir_ / "manifest.json", m.dump(2) + "\n");
    return summary_;
  }

 private:
  const PipelineConfig& config_;
  fs::path dir_;
  RunSummary summary_;
  nlohmann::ordered_json inputs_ = nlohmann::ordered_json::array();
  nlohmann::ordered_json outputs_ = nlohmann::ordered_json::array();
};

std::string read_stage_file(Stage& stage, const fs::path& path, std::string_view produced_by) {
  if (!fs::exists(path)) {
    throw Error("missing " + path.string() + "; run '" + std::string(produced_by) +
                "' first");
  }
  std::string text = read_file(path);
  stage.input(path, text);
  return text;
}

std::vector<nlohmann::json> parse_lines(std::string_view text, const fs::path& path) {
  std::vector<nlohmann::json> out;
  std::size_t line = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line;
    const std::string_view row = text.substr(pos, end - pos);
    pos = end + 1;
    if (trim(row).empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(row));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line, path.string() + ": " + e.what());
    }
  }
  return out;
}

std::vector<ModelClient*> raw(const std::vector<std::unique_ptr<ModelClient>>& clients) {
  std::vector<ModelClient*> out;
  for (const auto& c : clients) out.push_back(c.get());
  return out;
}

std::unique_ptr<TokenBucket> limiter_for(const ModelConfig& m) {
  if (m.requests_per_second <= 0) return nullptr;
  return std::make_unique<TokenBucket>(m.requests_per_second, m.burst);
}

Benchmark evaluation_benchmark(const PipelineConfig& config, Stage& stage) {
  fs::path path = stage_dir(config, "annotate") / "benchmark.jsonl";
  if (!fs::exists(path)) path = stage_dir(config, "build") / "benchmark.jsonl";
  return load_benchmark(read_stage_file(stage, path, "build"));
}

}  // namespace

fs::path PipelineConfig::effective_cache_dir() const {
  return cache_dir ? *cache_dir : output_dir / "cache";
}

UnitLexicon PipelineConfig::load_lexicon() const {
  return lexicon ? UnitLexicon::load(*lexicon) : UnitLexicon::builtin();
}

PipelineConfig parse_config(const nlohmann::json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, v] : doc.items()) {
    if (!kConfigKeys.count(k)) throw ConfigError("unknown config key '" + k + "'");
  }
  PipelineConfig c;
  try {
    if (!doc.contains("output_dir")) throw ConfigError("output_dir is required");
    c.output_dir = resolve(base_dir, doc.at("output_dir").get<std::string>());
    if (doc.contains("inputs")) {
      const auto& inputs = doc.at("inputs");
      if (!inputs.is_array()) throw ConfigError("inputs must be a list of paths");
      for (const auto& p : inputs) c.inputs.push_back(existing(base_dir, p, "inputs"));
    }
    if (doc.contains("lexicon") && !doc.at("lexicon").is_null()) {
      c.lexicon = existing(base_dir, doc.at("lexicon"), "lexicon");
    }
    if (doc.contains("human_labels") && !doc.at("human_labels").is_null()) {
      c.human_labels = existing(base_dir, doc.at("human_labels"), "human_labels");
    }
    if (doc.contains("cache_dir") && !doc.at("cache_dir").is_null()) {
      c.cache_dir = resolve(base_dir, doc.at("cache_dir").get<std::string>());
    }
    const auto sample_n = doc.value("sample_n", static_cast<std::int64_t>(10));
    if (sample_n < 1) throw ConfigError("sample_n must be at least 1");
    c.sample_n = static_cast<std::size_t>(sample_n);
    c.seed = doc.value("seed", static_cast<std::uint64_t>(0));
    const auto concurrency = doc.value("concurrency", static_cast<std::int64_t>(4));
    if (concurrency < 1) throw ConfigError("concurrency must be at least 1");
    c.concurrency = static_cast<std::size_t>(concurrency);
    const std::string criterion = doc.value("scenario_criterion", std::string("overall"));
    const auto parsed = scenario_criterion_from_string(criterion);
    if (!parsed) throw ConfigError("scenario_criterion must be overall or value");
    c.criterion = *parsed;
    c.panel = parse_models(doc, "panel", base_dir);
    c.models = parse_models(doc, "models", base_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  c.config_hash = sha256_hex(doc.dump());
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

FilingName parse_filing_name(const fs::path& path) {
  static const std::regex re(R"(^([A-Za-z0-9.\-]+)_(\d{4}-\d{2}-\d{2})$)");
  const std::string stem = path.stem().string();
  std::smatch m;
  if (!std::regex_match(stem, m, re)) {
    throw DecodeError("file name '" + path.filename().string() +
                      "' is not <COMPANY>_<YYYY-MM-DD>.<ext>");
  }
  FilingName name{m[1].str(), m[2].str(), FormatTag::kPlainText};
  const std::string ext = to_lower_ascii(path.extension().string());
  if (ext == ".html" || ext == ".htm") name.format = FormatTag::kSimpleMarkup;
  return name;
}

std::vector<fs::path> list_input_files(const PipelineConfig& config) {
  std::vector<fs::path> files;
  for (const fs::path& in : config.inputs) {
    if (fs::is_directory(in)) {
      for (const auto& entry : fs::directory_iterator(in)) {
        if (entry.is_regular_file() && entry.path().filename().string().front() != '.') {
          files.push_back(entry.path());
        }
      }
    } else {
      files.push_back(in);
    }
  }
  std::sort(files.begin(), files.end(), [](const fs::path& a, const fs::path& b) {
    return a.filename() != b.filename() ? a.filename() < b.filename() : a < b;
  });
  return files;
}

fs::path stage_dir(const PipelineConfig& config, std::string_view stage) {
  return config.output_dir / std::string(stage);
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string model_file_stem(std::string_view model_name) {
  std::string out;
  for (char c : model_name) {
    out += is_alnum(c) || c == '.' || c == '-' || c == '_' ? c : '_';
  }
  return out;
}

RunSummary cmd_ingest(const PipelineConfig& config) {
  Stage stage(config, "ingest");
  std::map<std::pair<std::string, std::string>, IngestedDocument> docs;
  for (const fs::path& file : list_input_files(config)) {
    try {
      const FilingName name = parse_filing_name(file);
      const std::string bytes = read_file(file);
      stage.input(file, bytes);
      const auto key = std::make_pair(name.company_id, name.filing_date);
      if (docs.count(key)) {
        throw MalformedDocument("duplicate filing " + name.company_id + " " +
                                name.filing_date);
      }
      docs.emplace(key, ingest_filing(load_filing(bytes, name.format, name.company_id,
                                                  name.filing_date, file.filename().string())));
    } catch (const Error& e) {
      stage.fail({{"file", file.filename().string()}, {"error", e.what()}}, true);
    }
  }
  std::vector<nlohmann::ordered_json> sections, tables, sentences;
  for (const auto& [key, doc] : docs) {
    sections.push_back(section_record(doc.filing, doc.section));
    for (const auto& t : doc.tables) tables.push_back(table_record(doc.filing, t));
    for (const auto& s : doc.sentences) sentences.push_back(sentence_record(doc.filing, s));
  }
  stage.output("sections.jsonl", jsonl(sections));
  stage.output("tables.jsonl", jsonl(tables));
  stage.output("sentences.jsonl", jsonl(sentences));
  return stage.finish({{"documents", docs.size()}});
}

RunSummary cmd_build(const PipelineConfig& config) {
  Stage stage(config, "build");
  const UnitLexicon lexicon = config.load_lexicon();
  const fs::path in = stage_dir(config, "ingest");
  using Key = std::pair<std::string, std::string>;
  std::map<Key, IngestedDocument> docs;
  const auto key_of = [](const nlohmann::json& r) {
    return Key{r.at("company_id").get<std::string>(), r.at("filing_date").get<std::string>()};
  };
  const auto doc_for = [&](const nlohmann::json& r) -> IngestedDocument& {
    auto it = docs.find(key_of(r));
    if (it == docs.end()) throw JoinError("record for unknown document " + r.dump());
    return it->second;
  };
  try {
    for (const auto& r : parse_lines(read_stage_file(stage, in / "sections.jsonl", "ingest"),
                                     in / "sections.jsonl")) {
      IngestedDocument doc;
      doc.filing.company_id = r.at("company_id").get<std::string>();
      const auto date = Date::parse(r.at("filing_date").get<std::string>());
      if (!date) throw DecodeError("bad filing_date in " + r.dump());
      doc.filing.filing_date = *date;
      doc.section.label = r.at("label").get<std::string>();
      doc.section.start_offset = r.at("offsets").at(0).get<std::size_t>();
      doc.section.end_offset = r.at("offsets").at(1).get<std::size_t>();
      doc.section.manual_override = r.value("manual_override", false);
      docs.emplace(key_of(r), std::move(doc));
    }
    for (const auto& r : parse_lines(read_stage_file(stage, in / "tables.jsonl", "ingest"),
                                     in / "tables.jsonl")) {
      doc_for(r).tables.push_back(table_from_record(r));
    }
    for (const auto& r :
         parse_lines(read_stage_file(stage, in / "sentences.jsonl", "ingest"),
                     in / "sentences.jsonl")) {
      doc_for(r).sentences.push_back(sentence_from_record(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("ingest records: ") + e.what());
  }

  Benchmark benchmark;
  benchmark.header.sample_n = config.sample_n;
  benchmark.header.seed = config.seed;
  for (auto& [key, doc] : docs) {
    try {
      auto tasks = build_document_tasks(doc, lexicon, config.sample_n, config.seed);
      for (auto& t : tasks) benchmark.tasks.push_back(std::move(t));
    } catch (const Error& e) {
      stage.fail({{"document", key.first + ":" + key.second}, {"error", e.what()}}, true);
    }
  }
  stage.output("benchmark.jsonl", serialize_benchmark(benchmark));
  return stage.finish({{"documents", docs.size()}, {"tasks", benchmark.tasks.size()}});
}

RunSummary cmd_annotate(const PipelineConfig& config, const ClientFactory& factory) {
  if (config.panel.empty()) throw ConfigError("annotate needs a non-empty panel");
  Stage stage(config, "annotate");
  const Benchmark benchmark = load_benchmark(
      read_stage_file(stage, stage_dir(config, "build") / "benchmark.jsonl", "build"));

  std::vector<std::unique_ptr<ModelClient>> clients;
  std::vector<std::unique_ptr<TokenBucket>> buckets;
  AnnotateOptions options;
  options.concurrency = config.concurrency;
  for (const ModelConfig& m : config.panel) {
    clients.push_back(factory(m));
    buckets.push_back(limiter_for(m));
    options.limiters.push_back(buckets.back().get());
  }
  ResponseCache cache(config.effective_cache_dir());
  options.cache = &cache;

  const auto results = annotate(benchmark.tasks, raw(clients), options);
  stage.summary().model_calls = cache.misses();
  std::vector<nlohmann::ordered_json> consensus;
  for (const auto& r : results) {
    consensus.push_back(consensus_to_json(r));
    for (const auto& v : r.votes) {
      if (v.label == AnswerLabel::kAbstain) {
        stage.fail({{"task_id", r.task_id}, {"model_name", v.model_name},
                    {"error", "no valid answerability reply"}},
                   false);
      }
    }
  }
  const Benchmark filtered = apply_consensus(benchmark, results);
  stage.output("benchmark.jsonl", serialize_benchmark(filtered));
  stage.output("consensus.jsonl", jsonl(consensus));
  nlohmann::ordered_json panel = nlohmann::ordered_json::array();
  for (const auto& m : config.panel) panel.push_back(m.model_name);
  return stage.finish({{"panel", panel},
                       {"tasks", benchmark.tasks.size()},
                       {"retained", filtered.tasks.size()}});
}

RunSummary cmd_evaluate(const PipelineConfig& config, const ClientFactory& factory) {
  if (config.models.empty()) throw ConfigError("evaluate needs at least one model");
  Stage stage(config, "evaluate");
  const UnitLexicon lexicon = config.load_lexicon();
  const Benchmark benchmark = evaluation_benchmark(config, stage);
  ResponseCache cache(config.effective_cache_dir());
  nlohmann::ordered_json models = nlohmann::ordered_json::array();
  for (const ModelConfig& m : config.models) {
    auto client = factory(m);
    auto bucket = limiter_for(m);
    PredictOptions options;
    options.concurrency = config.concurrency;
    options.cache = &cache;
    options.limiter = bucket.get();
    const auto records = predict_all(benchmark, *client, lexicon, options);
    for (const auto& r : records) {
      if (r.failed) {
        stage.fail({{"task_id", r.task_id}, {"model_name", r.model_name},
                    {"error", r.failure}},
                   false);
      }
    }
    stage.output(model_file_stem(m.model_name) + ".jsonl", serialize_records(records));
    models.push_back(m.model_name);
  }
  stage.summary().model_calls = cache.misses();
  return stage.finish({{"models", models}});
}

RunSummary cmd_report(const PipelineConfig& config) {
  if (config.models.empty()) throw ConfigError("report needs at least one model");
  Stage stage(config, "report");
  const fs::path eval = stage_dir(config, "evaluate");
  std::vector<PredictionRecord> records;
  for (const ModelConfig& m : config.models) {
    const fs::path path = eval / (model_file_stem(m.model_name) + ".jsonl");
    for (auto& r : load_records(read_stage_file(stage, path, "evaluate"))) {
      records.push_back(std::move(r));
    }
  }
  const AccuracyReport report =
      compute_report(records, aggregate_scenarios(records), config.criterion);
  const ScaleDiagnostic diagnostic = scale_error_diagnostic(records);
  stage.output("report.json", report_to_json(report, diagnostic).dump(2) + "\n");
  stage.output("report.txt", format_report(report, diagnostic));

  if (config.human_labels) {
    const fs::path consensus_path = stage_dir(config, "annotate") / "consensus.jsonl";
    if (!fs::exists(consensus_path)) {
      stage.fail({{"error", "human_labels given but no consensus file; run 'annotate'"}},
                 false);
    } else {
      std::vector<ConsensusResult> results;
      for (const auto& j : parse_lines(read_stage_file(stage, consensus_path, "annotate"),
                                       consensus_path)) {
        results.push_back(consensus_from_json(j));
      }
      const std::string labels_text = read_file(*config.human_labels);
      stage.input(*config.human_labels, labels_text);
      const AgreementTable table =
          agreement_report(results, resolve_human_labels(load_human_labels(labels_text)));
      stage.output("agreement.json", agreement_to_json(table).dump(2) + "\n");
      stage.output("agreement.txt", format_agreement_table(table));
    }
  }
  return stage.finish({{"scenario_criterion", std::string(to_string(config.criterion))}});
}

nlohmann::ordered_json cmd_match(std::string_view ground_truth, std::string_view prediction,
                                 const UnitLexicon& lexicon) {
  nlohmann::ordered_json j;
  j["ground_truth"] = ground_truth;
  j["prediction"] = prediction;
  j["match"] = match_to_json(match_spans(ground_truth, prediction, lexicon));
  const auto describe = [&](std::string_view text) -> nlohmann::ordered_json {
    nlohmann::ordered_json d;
    try {
      const NormalizedNumber n = normalize_number(text, lexicon);
      d["value"] = n.value.to_string();
      d["precision"] = n.precision.to_string();
      d["scale_group"] = n.scale_group ? nlohmann::ordered_json(*n.scale_group)
                                       : nlohmann::ordered_json(nullptr);
    } catch (const Error& e) {
      d["error"] = e.what();
    }
    d["units"] = extract_units(text, lexicon);
    return d;
  };
  j["ground_truth_parsed"] = describe(ground_truth);
  j["prediction_parsed"] = describe(prediction);
  j["scale_error"] = is_scale_error(ground_truth, prediction, lexicon);
  return j;
}

}  // namespace maskbench

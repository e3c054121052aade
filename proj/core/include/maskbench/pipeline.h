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

// File-to-file pipeline stages behind the command-line tool.
//
// Every stage reads only files written by earlier stages (or the configured
// inputs) and writes into its own directory under the output directory:
//
//   ingest/    sections.jsonl, tables.jsonl, sentences.jsonl
//   build/     benchmark.jsonl
//   annotate/  benchmark.jsonl (retained tasks), consensus.jsonl
//   evaluate/  <model>.jsonl per evaluated model
//   report/    report.json, report.txt [, agreement.json, agreement.txt]
//
// Each stage directory also gets manifest.json and failures.jsonl. Outputs
// are written atomically and contain nothing run-specific, so re-running a
// stage with the same inputs (and a warm cache) reproduces them byte for byte.

#ifndef MASKBENCH_PIPELINE_H_
#define MASKBENCH_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskbench/evaluator.h"
#include "maskbench/gateway.h"
#include "maskbench/lexicon.h"

namespace maskbench {

struct PipelineConfig {
  std::vector<std::filesystem::path> inputs;  // filing files or directories
  std::optional<std::filesystem::path> lexicon;  // builtin when absent
  std::size_t sample_n = 10;
  std::uint64_t seed = 0;
  std::vector<ModelConfig> panel;   // answerability voters
  std::vector<ModelConfig> models;  // models under evaluation
  std::size_t concurrency = 4;
  std::optional<std::filesystem::path> cache_dir;  // <output_dir>/cache when absent
  std::filesystem::path output_dir;
  ScenarioCriterion criterion = ScenarioCriterion::kOverall;
  std::optional<std::filesystem::path> human_labels;  // enables the agreement table
  std::string config_hash;  // SHA-256 of the canonical config document

  std::filesystem::path effective_cache_dir() const;
  UnitLexicon load_lexicon() const;
};

// Parses a JSON config document. Relative paths resolve against `base_dir`.
// Unknown keys, sample_n == 0, duplicate model names and paths that do not
// exist raise ConfigError.
PipelineConfig parse_config(const nlohmann::json& doc,
                            const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

// "<COMPANY>_<YYYY-MM-DD>.<ext>"; .html/.htm are simple markup, anything
// else plain text. Throws DecodeError for other names.
struct FilingName {
  std::string company_id;
  std::string filing_date;
  FormatTag format = FormatTag::kPlainText;
};
FilingName parse_filing_name(const std::filesystem::path& path);

// Regular files among the inputs (directories are listed, not recursed),
// sorted by file name.
std::vector<std::filesystem::path> list_input_files(const PipelineConfig& config);

std::filesystem::path stage_dir(const PipelineConfig& config, std::string_view stage);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

struct RunSummary {
  std::string stage;
  std::vector<std::filesystem::path> outputs;
  std::vector<nlohmann::ordered_json> failures;  // listed in failures.jsonl
  bool fatal = false;          // some unit of work could not be processed
  std::size_t model_calls = 0;  // requests that reached a model client

  int exit_code() const { return fatal ? 1 : 0; }
};

using ClientFactory = std::function<std::unique_ptr<ModelClient>(const ModelConfig&)>;

RunSummary cmd_ingest(const PipelineConfig& config);
RunSummary cmd_build(const PipelineConfig& config);
RunSummary cmd_annotate(const PipelineConfig& config,
                        const ClientFactory& factory = make_client);
RunSummary cmd_evaluate(const PipelineConfig& config,
                        const ClientFactory& factory = make_client);
RunSummary cmd_report(const PipelineConfig& config);

// Match verdict plus the parsed quantities, for debugging.
nlohmann::ordered_json cmd_match(std::string_view ground_truth,
                                 std::string_view prediction,
                                 const UnitLexicon& lexicon);

// File name used for a model's record file.
std::string model_file_stem(std::string_view model_name);

}  // namespace maskbench

#endif  // MASKBENCH_PIPELINE_H_

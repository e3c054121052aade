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

// maskbench: build and evaluate masked numeric-span benchmarks from filings.

#include <cstdlib>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "maskbench/errors.h"
#include "maskbench/pipeline.h"

namespace {

constexpr int kExitFatal = 1;
constexpr int kExitConfig = 2;

void print_summary(const maskbench::RunSummary& s) {
  std::cerr << s.stage << ": wrote " << s.outputs.size() << " file(s)";
  if (s.model_calls > 0) std::cerr << ", " << s.model_calls << " model call(s)";
  if (!s.failures.empty()) {
    std::cerr << ", " << s.failures.size() << " failure(s) listed in " << s.stage
              << "/failures.jsonl";
  }
  std::cerr << "\n";
  for (const auto& f : s.failures) {
    if (s.fatal) std::cerr << "  " << f.dump() << "\n";
  }
}

int run_stage(const std::string& config_path,
              const std::function<maskbench::RunSummary(const maskbench::PipelineConfig&)>& fn) {
  try {
    const auto config = maskbench::load_config(config_path);
    const auto summary = fn(config);
    print_summary(summary);
    return summary.exit_code();
  } catch (const maskbench::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const maskbench::ParseError& e) {
    std::cerr << "error: line " << e.line() << ": " << e.what() << "\n";
    return kExitFatal;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFatal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Build and evaluate masked numeric-span benchmarks from annual filings."};
  app.require_subcommand(1);

  std::string config_path;
  struct StageCommand {
    const char* name;
    const char* help;
    std::function<maskbench::RunSummary(const maskbench::PipelineConfig&)> fn;
  };
  const StageCommand stages[] = {
      {"ingest", "Extract MD&A tables and sentences from the input filings",
       [](const auto& c) { return maskbench::cmd_ingest(c); }},
      {"build", "Sample sentences and mask numeric spans into a benchmark file",
       [](const auto& c) { return maskbench::cmd_build(c); }},
      {"annotate", "Keep tasks the model panel unanimously finds answerable",
       [](const auto& c) { return maskbench::cmd_annotate(c); }},
      {"evaluate", "Query each evaluated model and write prediction records",
       [](const auto& c) { return maskbench::cmd_evaluate(c); }},
      {"report", "Score records into the accuracy report (and agreement table)",
       [](const auto& c) { return maskbench::cmd_report(c); }},
  };
  int exit_code = 0;
  for (const auto& stage : stages) {
    auto* sub = app.add_subcommand(stage.name, stage.help);
    sub->add_option("-c,--config", config_path, "Pipeline config (JSON)")->required();
    sub->callback([&] { exit_code = run_stage(config_path, stage.fn); });
  }

  std::string truth, prediction, lexicon_path;
  auto* match = app.add_subcommand("match", "Compare a ground-truth span with a prediction");
  match->add_option("truth", truth, "Ground-truth span, e.g. \"$1,230 million\"")->required();
  match->add_option("prediction", prediction, "Predicted span")->required();
  match->add_option("--lexicon", lexicon_path, "Unit lexicon (JSON); builtin by default")
      ->check(CLI::ExistingFile);
  match->callback([&] {
    try {
      const auto lexicon = lexicon_path.empty() ? maskbench::UnitLexicon::builtin()
                                                : maskbench::UnitLexicon::load(lexicon_path);
      std::cout << maskbench::cmd_match(truth, prediction, lexicon).dump(2) << "\n";
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      exit_code = kExitConfig;
    }
  });

  CLI11_PARSE(app, argc, argv);
  return exit_code;
}

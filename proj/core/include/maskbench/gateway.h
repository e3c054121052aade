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

// Model access: prompt rendering, transport, structured-output extraction
// with bounded retries, response caching and rate limiting.

#ifndef MASKBENCH_GATEWAY_H_
#define MASKBENCH_GATEWAY_H_

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskbench/task.h"

namespace maskbench {

// ---------------------------------------------------------------------------
// Prompts.

enum class TemplateId { kAnswerability, kPrediction };

std::string_view to_string(TemplateId id);

// Raw template text; placeholders are written "{name}".
std::string_view template_text(TemplateId id);
std::vector<std::string> template_placeholders(TemplateId id);

struct PromptBundle {
  TemplateId template_id = TemplateId::kPrediction;
  std::string rendered_text;
  std::map<std::string, std::string> placeholders_filled;
};

// Single-pass substitution, so values may themselves contain braces.
// Throws TemplateError when a placeholder has no value or a value names no
// placeholder.
PromptBundle render_template(TemplateId id,
                             const std::map<std::string, std::string>& values);

// Tables as "Table <id>" blocks: pre-text line, then pipe-delimited rows.
// No tables renders as an empty string.
std::string render_tables(const std::vector<TableBlock>& tables);

// Wraps each range (ascending, disjoint) in <SPAN>...</SPAN>.
std::string tag_spans(std::string_view sentence, const std::vector<CharRange>& ranges);

// `tagged_sentence` must contain at least one <SPAN> pair.
PromptBundle render_answerability_prompt(const std::vector<TableBlock>& tables,
                                         std::string_view filing_date,
                                         std::string_view pre_sentence,
                                         std::string_view tagged_sentence,
                                         std::string_view post_sentence);

PromptBundle render_prediction_prompt(const TaskInstance& task);

// ---------------------------------------------------------------------------
// Clients.

// Decoding is greedy; the temperature is not configurable.
inline constexpr double kTemperature = 0.0;
inline constexpr int kMaxAttempts = 3;

struct ModelConfig {
  std::string model_name;             // label used in reports and cache keys
  std::string provider = "http";      // "http" or "stub"
  std::string endpoint;               // e.g. https://api.example.com/v1/chat/completions
  std::string api_model;              // model id sent upstream; defaults to model_name
  std::string api_key_env;            // environment variable holding a bearer token
  int max_tokens = 4096;
  double requests_per_second = 0;     // 0 = unlimited
  double burst = 1;
  int timeout_seconds = 120;
  std::string stub_policy = "oracle";  // stub only: oracle | prose | unanswerable
  std::string stub_script;             // stub only: optional scripted replies file
};

// What a request is about. Stubs key their scripted replies on `key`.
struct RequestInfo {
  std::string key;
  int attempt = 1;
  const TaskInstance* task = nullptr;
  std::vector<std::string> spans;  // surfaces tagged in an answerability prompt
};

struct RawCompletion {
  std::string text;
  int attempt = 1;
  std::string model_name;
  double latency_ms = 0;
  bool from_cache = false;
};

class ModelClient {
 public:
  virtual ~ModelClient() = default;
  virtual const std::string& model_name() const = 0;
  // Returns the model text. Throws TransportError (retryable) or ClientError.
  virtual std::string send(const PromptBundle& prompt, const RequestInfo& info) = 0;
};

// OpenAI-style chat-completions endpoint: one user message, temperature 0.
// 4xx other than 408/429 is a ClientError; everything else that fails is a
// TransportError.
class HttpChatClient : public ModelClient {
 public:
  explicit HttpChatClient(ModelConfig config);

  const std::string& model_name() const override { return config_.model_name; }
  std::string send(const PromptBundle& prompt, const RequestInfo& info) override;

  nlohmann::json request_body(const PromptBundle& prompt) const;

 private:
  ModelConfig config_;
  std::string base_;  // scheme://host[:port]
  std::string path_;
};

struct StubReply {
  enum class Kind { kText, kTransportError, kClientError };
  Kind kind = Kind::kText;
  std::string text;
};

// Deterministic offline client. Scripted replies are keyed by request key;
// attempt i gets reply i (the last one repeats). Unscripted requests go to
// the fallback responder.
class StubModelClient : public ModelClient {
 public:
  using Responder = std::function<std::string(const PromptBundle&, const RequestInfo&)>;

  explicit StubModelClient(std::string name, Responder fallback = oracle_responder());

  const std::string& model_name() const override { return name_; }
  std::string send(const PromptBundle& prompt, const RequestInfo& info) override;

  void script(const std::string& key, std::vector<StubReply> replies);
  // Lines of {"key": ..., "text": ...} or {"key": ..., "replies": [...]},
  // where a reply is a string or {"error": "transport"|"client"}.
  void load_script(const std::filesystem::path& path);

  std::size_t calls() const { return calls_.load(); }

  // Answerability: every tagged span answerable. Prediction: the ground
  // truth surface with the task's scenario (A when unset).
  static Responder oracle_responder();
  static Responder unanswerable_responder();
  // Never emits JSON.
  static Responder prose_responder();

 private:
  std::string name_;
  Responder fallback_;
  std::mutex mu_;
  std::unordered_map<std::string, std::vector<StubReply>> script_;
  std::atomic<std::size_t> calls_{0};
};

std::unique_ptr<ModelClient> make_client(const ModelConfig& config);

// ---------------------------------------------------------------------------
// Cache and rate limiting.

// Content-addressed store of raw completions. In memory, and on disk when a
// directory is given. Safe for concurrent use.
class ResponseCache {
 public:
  explicit ResponseCache(std::optional<std::filesystem::path> dir = std::nullopt);

  // The attempt number is part of the key so a retry is a distinct request.
  static std::string key(std::string_view model_name, int attempt,
                         std::string_view rendered_text);

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, std::string_view text);

  std::size_t hits() const { return hits_.load(); }
  std::size_t misses() const { return misses_.load(); }

 private:
  std::filesystem::path file_for(const std::string& key) const;

  std::optional<std::filesystem::path> dir_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, std::string> memory_;
  mutable std::atomic<std::size_t> hits_{0};
  mutable std::atomic<std::size_t> misses_{0};
};

class TokenBucket {
 public:
  // rate <= 0 disables limiting.
  TokenBucket(double rate_per_second, double burst);
  void acquire();

 private:
  using Clock = std::chrono::steady_clock;
  double rate_;
  double burst_;
  double tokens_;
  Clock::time_point last_;
  std::mutex mu_;
};

// ---------------------------------------------------------------------------
// Requests.

// Consults the cache first; a miss calls the client and stores the text.
RawCompletion complete(ModelClient& client, const PromptBundle& prompt,
                       const RequestInfo& info, ResponseCache* cache = nullptr,
                       TokenBucket* limiter = nullptr);

// First JSON object in `raw`: a fenced block is preferred, otherwise the
// first balanced {...} that parses. Throws InvalidOutput.
nlohmann::json find_json_object(std::string_view raw);

// find_json_object plus the template's required fields. Throws InvalidOutput
// or SchemaError.
nlohmann::json extract_json(std::string_view raw, TemplateId id);

struct AnswerabilityReply {
  std::string reasoning;
  std::map<std::string, AnswerLabel> spans;  // keyed by span text, tags removed
};

struct PredictionReply {
  std::string answer;
  Scenario scenario = Scenario::kA;
  std::vector<std::string> necessary_metrics;
  std::vector<std::string> reference;
};

// Throw SchemaError.
AnswerabilityReply parse_answerability_reply(const nlohmann::json& value);
PredictionReply parse_prediction_reply(const nlohmann::json& value);

struct StructuredReply {
  nlohmann::json value;
  std::vector<RawCompletion> completions;  // one per attempt made
};

struct QueryOptions {
  int max_attempts = kMaxAttempts;
  ResponseCache* cache = nullptr;
  TokenBucket* limiter = nullptr;
  // Extra check on the parsed value (e.g. every asked span is labelled);
  // throws SchemaError to request another attempt.
  std::function<void(const nlohmann::json&)> validate;
};

// Up to max_attempts completions; InvalidOutput, SchemaError and
// TransportError trigger another attempt, and the last one is rethrown when
// attempts run out. ClientError propagates immediately.
StructuredReply query_structured(ModelClient& client, const PromptBundle& prompt,
                                 RequestInfo info, const QueryOptions& options = {});

// Runs fn(0..n-1) on at most `limit` threads. The first exception is
// rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t limit,
                  const std::function<void(std::size_t)>& fn);

}  // namespace maskbench

#endif  // MASKBENCH_GATEWAY_H_

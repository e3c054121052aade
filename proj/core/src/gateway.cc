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

#include "maskbench/gateway.h"

#include <cstdlib>
#include <exception>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "maskbench/errors.h"
#include "maskbench/hash.h"
#include "maskbench/text_util.h"

namespace maskbench {
namespace {

constexpr std::string_view kSpanOpen = "<SPAN>";
constexpr std::string_view kSpanClose = "</SPAN>";

std::string strip_span_tags(std::string_view text) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text.substr(i, kSpanOpen.size()) == kSpanOpen) {
      i += kSpanOpen.size();
    } else if (text.substr(i, kSpanClose.size()) == kSpanClose) {
      i += kSpanClose.size();
    } else {
      out += text[i++];
    }
  }
  return std::string(trim(out));
}

// Balanced-brace scan from `open` that respects JSON strings. Returns the
// end (exclusive) or npos.
std::size_t balanced_end(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

std::optional<nlohmann::json> first_object_in(std::string_view s) {
  for (std::size_t open = s.find('{'); open != std::string_view::npos;
       open = s.find('{', open + 1)) {
    const std::size_t end = balanced_end(s, open);
    if (end == std::string_view::npos) continue;
    auto parsed = nlohmann::json::parse(s.substr(open, end - open), nullptr, false);
    if (!parsed.is_discarded() && parsed.is_object()) return parsed;
  }
  return std::nullopt;
}

// Bodies of ``` fenced blocks, in order.
std::vector<std::string_view> fenced_blocks(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = s.find("```", pos);
    if (open == std::string_view::npos) break;
    std::size_t body = s.find('\n', open + 3);
    if (body == std::string_view::npos) break;
    ++body;
    const std::size_t close = s.find("```", body);
    if (close == std::string_view::npos) {
      out.push_back(s.substr(body));
      break;
    }
    out.push_back(s.substr(body, close - body));
    pos = close + 3;
  }
  return out;
}

std::string json_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return v.dump();
  throw SchemaError("expected a string or number, got " + std::string(v.type_name()));
}

std::vector<std::string> string_list(const nlohmann::json& obj, const char* field) {
  std::vector<std::string> out;
  if (!obj.contains(field) || obj.at(field).is_null()) return out;
  const auto& v = obj.at(field);
  if (v.is_string()) return {v.get<std::string>()};
  if (!v.is_array()) throw SchemaError(std::string("'") + field + "' must be a list");
  for (const auto& item : v) out.push_back(json_text(item));
  return out;
}

std::optional<Scenario> leading_scenario(std::string_view text) {
  const std::string_view t = trim(text);
  if (t.empty()) return std::nullopt;
  const char c = t[0];
  if (c < 'A' || c > 'D') return std::nullopt;
  if (t.size() > 1 && is_alpha(t[1])) return std::nullopt;
  return scenario_from_string(t.substr(0, 1));
}

void split_url(const std::string& url, std::string& base, std::string& path) {
  const std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("endpoint '" + url + "' lacks a scheme");
  const std::size_t slash = url.find('/', scheme + 3);
  base = url.substr(0, slash);
  path = slash == std::string::npos ? "/" : url.substr(slash);
}

}  // namespace

std::string_view to_string(TemplateId id) {
  return id == TemplateId::kAnswerability ? "answerability" : "prediction";
}

PromptBundle render_template(TemplateId id,
                             const std::map<std::string, std::string>& values) {
  const std::vector<std::string> names = template_placeholders(id);
  for (const auto& [name, value] : values) {
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw TemplateError("template " + std::string(to_string(id)) +
                          " has no placeholder '" + name + "'");
    }
  }
  for (const auto& name : names) {
    if (!values.count(name)) {
      throw TemplateError("missing value for placeholder '" + name + "'");
    }
  }
  const std::string_view tpl = template_text(id);
  PromptBundle out;
  out.template_id = id;
  out.placeholders_filled = values;
  std::size_t i = 0;
  while (i < tpl.size()) {
    bool replaced = false;
    if (tpl[i] == '{') {
      for (const auto& name : names) {
        if (tpl.compare(i + 1, name.size(), name) == 0 &&
            i + 1 + name.size() < tpl.size() && tpl[i + 1 + name.size()] == '}') {
          out.rendered_text += values.at(name);
          i += name.size() + 2;
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out.rendered_text += tpl[i++];
  }
  return out;
}

std::string render_tables(const std::vector<TableBlock>& tables) {
  std::string out;
  for (const TableBlock& t : tables) {
    out += out.empty() ? "\n" : "\n\n";
    out += "Table " + t.table_id + "\n";
    if (!t.pre_text.empty()) out += "Pre-text: " + t.pre_text + "\n";
    for (std::size_t r = 0; r < t.grid.size(); ++r) {
      out += "|";
      for (const auto& cell : t.grid[r]) out += " " + cell + " |";
      if (r + 1 < t.grid.size()) out += "\n";
    }
  }
  return out;
}

std::string tag_spans(std::string_view sentence, const std::vector<CharRange>& ranges) {
  std::string out;
  std::size_t pos = 0;
  for (const CharRange& r : ranges) {
    if (r.begin < pos || r.end > sentence.size() || r.begin > r.end) {
      throw TemplateError("span ranges must be ascending, disjoint and in bounds");
    }
    out.append(sentence.substr(pos, r.begin - pos));
    out += kSpanOpen;
    out.append(sentence.substr(r.begin, r.size()));
    out += kSpanClose;
    pos = r.end;
  }
  out.append(sentence.substr(pos));
  return out;
}

PromptBundle render_answerability_prompt(const std::vector<TableBlock>& tables,
                                         std::string_view filing_date,
                                         std::string_view pre_sentence,
                                         std::string_view tagged_sentence,
                                         std::string_view post_sentence) {
  if (tagged_sentence.find(kSpanOpen) == std::string_view::npos) {
    throw TemplateError("sentence has no <SPAN> tags");
  }
  return render_template(TemplateId::kAnswerability,
                         {{"tables_with_pretext", render_tables(tables)},
                          {"filing_date", std::string(filing_date)},
                          {"pre_sentence", std::string(pre_sentence)},
                          {"sentence", std::string(tagged_sentence)},
                          {"post_sentence", std::string(post_sentence)}});
}

PromptBundle render_prediction_prompt(const TaskInstance& task) {
  if (task.hint.unit_description.empty()) throw TemplateError("task has no hint");
  if (task.corrupted_sentence.find(kMaskToken) == std::string::npos) {
    throw TemplateError("task sentence has no mask");
  }
  const auto& ctx = task.context;
  return render_template(
      TemplateId::kPrediction,
      {{"unit_description", task.hint.unit_description},
       {"tables_with_pretext", render_tables(ctx.tables)},
       {"pre_sentence", ctx.prev_sentence ? ctx.prev_sentence->text : ""},
       {"sentence", task.corrupted_sentence},
       {"post_sentence", ctx.next_sentence ? ctx.next_sentence->text : ""}});
}

// ---------------------------------------------------------------------------

HttpChatClient::HttpChatClient(ModelConfig config) : config_(std::move(config)) {
  if (config_.api_model.empty()) config_.api_model = config_.model_name;
  split_url(config_.endpoint, base_, path_);
}

nlohmann::json HttpChatClient::request_body(const PromptBundle& prompt) const {
  return {{"model", config_.api_model},
          {"messages", nlohmann::json::array(
                           {{{"role", "user"}, {"content", prompt.rendered_text}}})},
          {"temperature", kTemperature},
          {"max_tokens", config_.max_tokens}};
}

std::string HttpChatClient::send(const PromptBundle& prompt, const RequestInfo&) {
  httplib::Client client(base_);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_write_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw ClientError("environment variable " + config_.api_key_env + " is not set");
    }
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  auto res = client.Post(path_, headers, request_body(prompt).dump(), "application/json");
  if (!res) {
    throw TransportError(config_.model_name + ": " + httplib::to_string(res.error()));
  }
  if (res->status >= 400 && res->status < 500 && res->status != 408 && res->status != 429) {
    throw ClientError(config_.model_name + ": HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw TransportError(config_.model_name + ": HTTP " + std::to_string(res->status));
  }
  const auto body = nlohmann::json::parse(res->body, nullptr, false);
  if (body.is_discarded()) throw TransportError(config_.model_name + ": response is not JSON");
  try {
    return body.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw TransportError(config_.model_name + ": response lacks choices[0].message.content");
  }
}

StubModelClient::StubModelClient(std::string name, Responder fallback)
    : name_(std::move(name)), fallback_(std::move(fallback)) {}

void StubModelClient::script(const std::string& key, std::vector<StubReply> replies) {
  std::lock_guard lock(mu_);
  script_[key] = std::move(replies);
}

void StubModelClient::load_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open stub script " + path.string());
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      std::vector<StubReply> replies;
      auto reply_of = [](const nlohmann::json& r) {
        if (r.is_string()) return StubReply{StubReply::Kind::kText, r.get<std::string>()};
        const std::string err = r.at("error").get<std::string>();
        if (err == "transport") return StubReply{StubReply::Kind::kTransportError, ""};
        if (err == "client") return StubReply{StubReply::Kind::kClientError, ""};
        throw std::invalid_argument("unknown error kind '" + err + "'");
      };
      if (j.contains("text")) {
        replies.push_back(reply_of(j.at("text")));
      } else {
        for (const auto& r : j.at("replies")) replies.push_back(reply_of(r));
      }
      if (replies.empty()) throw std::invalid_argument("no replies");
      script(j.at("key").get<std::string>(), std::move(replies));
    } catch (const std::exception& e) {
      throw ParseError(line_no, path.string() + ": " + e.what());
    }
  }
}

std::string StubModelClient::send(const PromptBundle& prompt, const RequestInfo& info) {
  ++calls_;
  std::optional<StubReply> reply;
  {
    std::lock_guard lock(mu_);
    if (auto it = script_.find(info.key); it != script_.end()) {
      const auto& replies = it->second;
      const std::size_t i =
          std::min<std::size_t>(std::max(info.attempt, 1) - 1, replies.size() - 1);
      reply = replies[i];
    }
  }
  if (!reply) {
    if (!fallback_) throw ClientError(name_ + ": no scripted reply for '" + info.key + "'");
    return fallback_(prompt, info);
  }
  switch (reply->kind) {
    case StubReply::Kind::kTransportError:
      throw TransportError(name_ + ": scripted transport failure");
    case StubReply::Kind::kClientError:
      throw ClientError(name_ + ": scripted client failure");
    case StubReply::Kind::kText:
      break;
  }
  return reply->text;
}

StubModelClient::Responder StubModelClient::oracle_responder() {
  return [](const PromptBundle& prompt, const RequestInfo& info) -> std::string {
    nlohmann::ordered_json j;
    if (prompt.template_id == TemplateId::kAnswerability) {
      j["reasoning"] = "Each span can be traced to the tables.";
      j["spans"] = nlohmann::ordered_json::object();
      for (const auto& s : info.spans) j["spans"][s] = "answerable";
    } else {
      if (info.task == nullptr) throw ClientError("oracle stub needs the task");
      const Scenario sc = info.task->scenario.value_or(Scenario::kA);
      j["results"] = {{"answer", info.task->ground_truth.surface},
                      {"scenario", std::string(to_string(sc))},
                      {"necessary_metrics", nlohmann::json::array()},
                      {"reference", nlohmann::json::array()}};
    }
    return "Reasoning: looked up the value.\n```json\n" + j.dump(2) + "\n```\n";
  };
}

StubModelClient::Responder StubModelClient::unanswerable_responder() {
  return [](const PromptBundle& prompt, const RequestInfo& info) -> std::string {
    nlohmann::ordered_json j;
    if (prompt.template_id == TemplateId::kAnswerability) {
      j["reasoning"] = "The tables do not support these spans.";
      j["spans"] = nlohmann::ordered_json::object();
      for (const auto& s : info.spans) j["spans"][s] = "unanswerable";
    } else {
      j["results"] = {{"answer", "0"}, {"scenario", "D"}};
    }
    return "```json\n" + j.dump(2) + "\n```\n";
  };
}

StubModelClient::Responder StubModelClient::prose_responder() {
  return [](const PromptBundle&, const RequestInfo&) -> std::string {
    return "I am unable to determine the value from the information provided.";
  };
}

std::unique_ptr<ModelClient> make_client(const ModelConfig& config) {
  if (config.provider == "http") return std::make_unique<HttpChatClient>(config);
  if (config.provider != "stub") {
    throw ConfigError("unknown provider '" + config.provider + "' for " + config.model_name);
  }
  StubModelClient::Responder fallback;
  if (config.stub_policy == "oracle") {
    fallback = StubModelClient::oracle_responder();
  } else if (config.stub_policy == "unanswerable") {
    fallback = StubModelClient::unanswerable_responder();
  } else if (config.stub_policy == "prose") {
    fallback = StubModelClient::prose_responder();
  } else if (config.stub_policy != "script") {
    throw ConfigError("unknown stub policy '" + config.stub_policy + "'");
  }
  auto client = std::make_unique<StubModelClient>(config.model_name, std::move(fallback));
  if (!config.stub_script.empty()) client->load_script(config.stub_script);
  return client;
}

// ---------------------------------------------------------------------------

ResponseCache::ResponseCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {
  if (dir_) std::filesystem::create_directories(*dir_);
}

std::string ResponseCache::key(std::string_view model_name, int attempt,
                               std::string_view rendered_text) {
  std::string material(model_name);
  material += '\x1f';
  material += std::to_string(attempt);
  material += '\x1f';
  material += rendered_text;
  return sha256_hex(material);
}

std::filesystem::path ResponseCache::file_for(const std::string& key) const {
  return *dir_ / key.substr(0, 2) / (key + ".txt");
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  {
    std::shared_lock lock(mu_);
    if (auto it = memory_.find(key); it != memory_.end()) {
      ++hits_;
      return it->second;
    }
  }
  if (dir_) {
    std::ifstream in(file_for(key), std::ios::binary);
    if (in) {
      std::ostringstream ss;
      ss << in.rdbuf();
      ++hits_;
      return ss.str();
    }
  }
  ++misses_;
  return std::nullopt;
}

void ResponseCache::put(const std::string& key, std::string_view text) {
  std::unique_lock lock(mu_);
  memory_[key] = std::string(text);
  if (!dir_) return;
  const auto path = file_for(key);
  std::filesystem::create_directories(path.parent_path());
  // Write then rename so readers never see a partial file.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw Error("cannot write cache entry " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

TokenBucket::TokenBucket(double rate_per_second, double burst)
    : rate_(rate_per_second),
      burst_(std::max(burst, 1.0)),
      tokens_(std::max(burst, 1.0)),
      last_(Clock::now()) {}

void TokenBucket::acquire() {
  if (rate_ <= 0) return;
  while (true) {
    std::chrono::duration<double> wait{};
    {
      std::lock_guard lock(mu_);
      const auto now = Clock::now();
      tokens_ = std::min(burst_,
                         tokens_ + std::chrono::duration<double>(now - last_).count() * rate_);
      last_ = now;
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
    }
    std::this_thread::sleep_for(wait);
  }
}

// ---------------------------------------------------------------------------

RawCompletion complete(ModelClient& client, const PromptBundle& prompt,
                       const RequestInfo& info, ResponseCache* cache, TokenBucket* limiter) {
  RawCompletion out;
  out.attempt = info.attempt;
  out.model_name = client.model_name();
  std::string key;
  if (cache != nullptr) {
    key = ResponseCache::key(client.model_name(), info.attempt, prompt.rendered_text);
    if (auto hit = cache->get(key)) {
      out.text = std::move(*hit);
      out.from_cache = true;
      return out;
    }
  }
  if (limiter != nullptr) limiter->acquire();
  const auto start = std::chrono::steady_clock::now();
  out.text = client.send(prompt, info);
  out.latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
          .count();
  if (cache != nullptr) cache->put(key, out.text);
  return out;
}

nlohmann::json find_json_object(std::string_view raw) {
  for (std::string_view block : fenced_blocks(raw)) {
    if (auto obj = first_object_in(block)) return *obj;
  }
  if (auto obj = first_object_in(raw)) return *obj;
  throw InvalidOutput("no JSON object in model output");
}

AnswerabilityReply parse_answerability_reply(const nlohmann::json& value) {
  if (!value.is_object() || !value.contains("spans") || !value.at("spans").is_object()) {
    throw SchemaError("answerability reply needs a 'spans' object");
  }
  AnswerabilityReply out;
  if (value.contains("reasoning")) {
    const auto& r = value.at("reasoning");
    out.reasoning = r.is_string() ? r.get<std::string>() : r.dump();
  }
  for (const auto& [span, label] : value.at("spans").items()) {
    if (!label.is_string()) throw SchemaError("label for '" + span + "' is not a string");
    const auto parsed = answer_label_from_string(label.get<std::string>());
    if (!parsed || *parsed == AnswerLabel::kAbstain) {
      throw SchemaError("label for '" + span + "' must be answerable or unanswerable");
    }
    out.spans[strip_span_tags(span)] = *parsed;
  }
  return out;
}

PredictionReply parse_prediction_reply(const nlohmann::json& value) {
  if (!value.is_object() || !value.contains("results") || !value.at("results").is_object()) {
    throw SchemaError("prediction reply needs a 'results' object");
  }
  const auto& r = value.at("results");
  if (!r.contains("answer")) throw SchemaError("prediction reply lacks 'answer'");
  if (!r.contains("scenario") || !r.at("scenario").is_string()) {
    throw SchemaError("prediction reply lacks a 'scenario' string");
  }
  PredictionReply out;
  out.answer = json_text(r.at("answer"));
  const auto sc = leading_scenario(r.at("scenario").get<std::string>());
  if (!sc) throw SchemaError("scenario must be one of A, B, C, D");
  out.scenario = *sc;
  out.necessary_metrics = string_list(r, "necessary_metrics");
  out.reference = string_list(r, "reference");
  return out;
}

nlohmann::json extract_json(std::string_view raw, TemplateId id) {
  nlohmann::json value = find_json_object(raw);
  if (id == TemplateId::kAnswerability) {
    parse_answerability_reply(value);
  } else {
    parse_prediction_reply(value);
  }
  return value;
}

StructuredReply query_structured(ModelClient& client, const PromptBundle& prompt,
                                 RequestInfo info, const QueryOptions& options) {
  if (options.max_attempts < 1 || options.max_attempts > kMaxAttempts) {
    throw ConfigError("max_attempts must be between 1 and " + std::to_string(kMaxAttempts));
  }
  StructuredReply out;
  std::exception_ptr last;
  for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
    info.attempt = attempt;
    try {
      out.completions.push_back(complete(client, prompt, info, options.cache, options.limiter));
      out.value = extract_json(out.completions.back().text, prompt.template_id);
      if (options.validate) options.validate(out.value);
      return out;
    } catch (const InvalidOutput&) {
      last = std::current_exception();
    } catch (const SchemaError&) {
      last = std::current_exception();
    } catch (const TransportError&) {
      last = std::current_exception();
    }
  }
  std::rethrow_exception(last);
}

void parallel_for(std::size_t n, std::size_t limit,
                  const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t workers = std::max<std::size_t>(1, std::min(limit, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      while (!failed.load()) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!first) first = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace maskbench

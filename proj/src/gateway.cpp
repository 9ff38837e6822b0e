#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "strux/gateway.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "strux/digest.hpp"
#include "strux/error.hpp"
#include "strux/renderer.hpp"
#include "strux/struct_parser.hpp"

namespace strux {

namespace {

using nlohmann::json;

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path_prefix;
};

ParsedUrl split_base_url(const std::string& base_url) {
  const size_t scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos)
    throw Error(ErrorKind::ConfigError, "base_url lacks a scheme: " + base_url);
  const size_t path_start = base_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {base_url, ""};
  std::string prefix = base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base_url.substr(0, path_start), prefix};
}

std::string chat_response_body(const std::string& content) {
  json body;
  body["choices"] = json::array({json{{"message", {{"role", "assistant"}, {"content", content}}},
                                      {"finish_reason", "stop"}}});
  return body.dump();
}

std::string flatten_request_messages(const std::string& request_body) {
  json req = json::parse(request_body, nullptr, false);
  if (req.is_discarded() || !req.contains("messages")) return {};
  std::string flat;
  for (const json& m : req["messages"]) {
    flat += m.value("role", "user");
    flat += '\n';
    flat += m.value("content", "");
    flat += '\n';
  }
  return flat;
}

constexpr std::string_view kPayloadInputMarker = "Input statement:\n";
constexpr std::string_view kPayloadResultMarker = "\n\nStructurized result:";

std::optional<std::string> extract_payload_text(const std::string& request_body) {
  json req = json::parse(request_body, nullptr, false);
  if (req.is_discarded() || !req.contains("messages") || req["messages"].empty())
    return std::nullopt;
  const std::string content = req["messages"].back().value("content", "");
  const size_t input_pos = content.rfind(kPayloadInputMarker);
  if (input_pos == std::string::npos) return std::nullopt;
  const size_t text_start = input_pos + kPayloadInputMarker.size();
  const size_t result_pos = content.find(kPayloadResultMarker, text_start);
  if (result_pos == std::string::npos) return std::nullopt;
  return content.substr(text_start, result_pos - text_start);
}

class SemaphoreGuard {
 public:
  SemaphoreGuard(std::mutex& mutex, std::condition_variable& cv, int& in_flight, int limit)
      : mutex_(mutex), cv_(cv), in_flight_(in_flight) {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return in_flight_ < limit; });
    ++in_flight_;
  }
  ~SemaphoreGuard() {
    {
      std::lock_guard lock(mutex_);
      --in_flight_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex& mutex_;
  std::condition_variable& cv_;
  int& in_flight_;
};

std::chrono::milliseconds jittered_backoff(std::chrono::milliseconds base, int attempt) {
  if (base.count() <= 0) return std::chrono::milliseconds(0);
  const double cap = 30'000.0;
  const double window =
      std::min(cap, static_cast<double>(base.count()) * std::exp2(static_cast<double>(attempt - 1)));
  thread_local std::mt19937_64 rng{std::random_device{}()};
  std::uniform_real_distribution<double> dist(0.0, window);
  return std::chrono::milliseconds(static_cast<int64_t>(dist(rng)));
}

}  // namespace

std::optional<std::string> extract_assistant_content(const std::string& response_body) {
  json body = json::parse(response_body, nullptr, false);
  if (body.is_discarded()) return std::nullopt;
  if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty())
    return std::nullopt;
  const json& message = body["choices"][0].value("message", json::object());
  if (!message.contains("content") || !message["content"].is_string()) return std::nullopt;
  return message["content"].get<std::string>();
}

HttpResponse HttplibTransport::post(const ProviderConfig& cfg, const std::string& api_key,
                                    const std::string& request_body) {
  const ParsedUrl url = split_base_url(cfg.base_url);
  httplib::Client client(url.origin);
  client.set_connection_timeout(cfg.request_timeout.count(), 0);
  client.set_read_timeout(cfg.request_timeout.count(), 0);
  client.set_write_timeout(cfg.request_timeout.count(), 0);
  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
  auto result = client.Post(url.path_prefix + "/chat/completions", headers, request_body,
                            "application/json");
  if (!result) {
    HttpResponse r;
    r.transport_error = true;
    r.error = httplib::to_string(result.error());
    return r;
  }
  return {result->status, result->body, false, ""};
}

void MockTransport::set_response(const std::string& prompt_hash, const std::string& content) {
  std::lock_guard lock(mutex_);
  table_[prompt_hash] = content;
}

void MockTransport::set_default_response(const std::string& content) {
  std::lock_guard lock(mutex_);
  default_response_ = content;
}

void MockTransport::push_sequence(const std::string& content) {
  std::lock_guard lock(mutex_);
  sequence_.push_back(content);
}

void MockTransport::push_failure(int status, int times) {
  std::lock_guard lock(mutex_);
  for (int i = 0; i < times; ++i) failures_.push_back(status);
}

std::string MockTransport::respond(const std::string& request_body) {
  if (mode_ == Mode::Sequence) {
    std::lock_guard lock(mutex_);
    if (sequence_.empty()) return default_response_;
    std::string front = sequence_.front();
    sequence_.pop_front();
    return front;
  }
  if (mode_ == Mode::EchoStructurize) {
    if (auto text = extract_payload_text(request_body)) {
      StructuredContext ctx;
      ctx.scope = "Echo";
      ctx.aspects.push_back({"Content", {*text}});
      return canonical_json(ctx);
    }
    std::lock_guard lock(mutex_);
    return default_response_;
  }
  const std::string hash = sha256_hex(flatten_request_messages(request_body));
  std::lock_guard lock(mutex_);
  auto it = table_.find(hash);
  return it != table_.end() ? it->second : default_response_;
}

HttpResponse MockTransport::post(const ProviderConfig&, const std::string&,
                                 const std::string& request_body) {
  const int now = in_flight_.fetch_add(1) + 1;
  int seen = max_in_flight_.load();
  while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
  }
  calls_.fetch_add(1);

  HttpResponse response;
  {
    std::unique_lock lock(mutex_);
    if (!failures_.empty()) {
      const int status = failures_.front();
      failures_.pop_front();
      lock.unlock();
      response.status = status;
      response.body = R"({"error":{"message":"scripted failure"}})";
      in_flight_.fetch_sub(1);
      return response;
    }
  }
  response.status = 200;
  response.body = chat_response_body(respond(request_body));
  in_flight_.fetch_sub(1);
  return response;
}

std::shared_ptr<MockTransport> MockTransport::from_fixture_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read mock fixture file " + path);
  json fixture = json::parse(in, nullptr, false);
  if (fixture.is_discarded() || !fixture.is_object())
    throw Error(ErrorKind::ConfigError, "mock fixture file is not a JSON object: " + path);

  Mode mode = Mode::Table;
  if (fixture.contains("behavior")) {
    const std::string behavior = fixture["behavior"].get<std::string>();
    if (behavior == "table")
      mode = Mode::Table;
    else if (behavior == "echo_structurize")
      mode = Mode::EchoStructurize;
    else if (behavior == "sequence")
      mode = Mode::Sequence;
    else
      throw Error(ErrorKind::ConfigError, "unknown mock behavior '" + behavior + "'");
  }
  auto transport = std::make_shared<MockTransport>(mode);
  if (fixture.contains("default"))
    transport->set_default_response(fixture["default"].get<std::string>());
  if (fixture.contains("responses")) {
    const json& responses = fixture["responses"];
    if (responses.is_array()) {
      for (const json& r : responses) transport->push_sequence(r.get<std::string>());
    } else {
      for (auto it = responses.begin(); it != responses.end(); ++it)
        transport->set_response(it.key(), it.value().get<std::string>());
    }
  }
  if (fixture.contains("failures")) {
    for (const json& f : fixture["failures"])
      transport->push_failure(f.at("status").get<int>(), f.value("times", 1));
  }
  if (!fixture.contains("behavior") && !fixture.contains("responses") &&
      !fixture.contains("default") && !fixture.contains("failures")) {
    // Flat hash -> response table.
    for (auto it = fixture.begin(); it != fixture.end(); ++it)
      transport->set_response(it.key(), it.value().get<std::string>());
  }
  return transport;
}

Gateway::Gateway(ProviderConfig cfg, std::shared_ptr<Transport> transport,
                 PromptTemplates templates)
    : cfg_(std::move(cfg)),
      transport_(transport ? std::move(transport) : std::make_shared<HttplibTransport>()),
      templates_(std::move(templates)) {
  if (cfg_.max_attempts < 1) throw Error(ErrorKind::ConfigError, "max_attempts must be >= 1");
  if (cfg_.parallelism < 1) throw Error(ErrorKind::ConfigError, "parallelism must be >= 1");
}

std::string Gateway::prompt_hash(const PromptBundle& prompt) {
  return sha256_hex(prompt.flatten());
}

std::string Gateway::cache_key(const PromptBundle& prompt) const {
  char temperature[32];
  std::snprintf(temperature, sizeof(temperature), "%.17g", cfg_.temperature);
  std::string material = "strux-cache-v1\n";
  material += cfg_.model_id;
  material += '\n';
  material += temperature;
  material += '\n';
  material += std::to_string(cfg_.max_output_tokens);
  material += '\n';
  material += prompt.flatten();
  return sha256_hex(material);
}

std::string Gateway::cache_path(const std::string& key) const {
  return (std::filesystem::path(cfg_.cache_dir) / (key + ".json")).string();
}

std::optional<std::string> Gateway::cache_read(const std::string& key) const {
  std::ifstream in(cache_path(key), std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void Gateway::cache_write(const std::string& key, const std::string& body) const {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg_.cache_dir, ec);
  const std::string final_path = cache_path(key);
  thread_local std::mt19937_64 rng{std::random_device{}()};
  const std::string tmp_path = final_path + ".tmp" + std::to_string(rng());
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write cache entry " + tmp_path);
    out << body;
  }
  fs::rename(tmp_path, final_path, ec);
  if (ec) {
    fs::remove(tmp_path, ec);
    throw Error(ErrorKind::IoError, "cannot finalize cache entry " + final_path);
  }
  cache_writes_.fetch_add(1);
}

std::string Gateway::resolve_api_key() const {
  if (!transport_->needs_api_key()) return {};
  const char* key = std::getenv(cfg_.api_key_ref.c_str());
  if (!key || !*key)
    throw Error(ErrorKind::ConfigError,
                "API key environment variable '" + cfg_.api_key_ref + "' is not set");
  return key;
}

std::string Gateway::request_body(const PromptBundle& prompt) const {
  json body;
  body["model"] = cfg_.model_id;
  json messages = json::array();
  for (const Message& m : prompt.messages)
    messages.push_back({{"role", m.role == Role::System ? "system" : "user"},
                        {"content", m.content}});
  body["messages"] = std::move(messages);
  body["temperature"] = cfg_.temperature;
  body["max_tokens"] = cfg_.max_output_tokens;
  return body.dump();
}

std::string Gateway::complete(const PromptBundle& prompt) {
  if (prompt.messages.empty())
    throw Error(ErrorKind::ConfigError, "prompt bundle has no messages");

  const std::string key = cache_key(prompt);
  if (cache_enabled()) {
    if (auto body = cache_read(key)) {
      if (auto content = extract_assistant_content(*body)) {
        cache_hits_.fetch_add(1);
        return *content;
      }
    }
  }

  const std::string api_key = resolve_api_key();
  const std::string body = request_body(prompt);
  int attempt = 0;
  for (;;) {
    ++attempt;
    attempts_.fetch_add(1);
    HttpResponse response;
    {
      SemaphoreGuard guard(sem_mutex_, sem_cv_, in_flight_, cfg_.parallelism);
      transport_calls_.fetch_add(1);
      response = transport_->post(cfg_, api_key, body);
    }
    if (!response.transport_error && response.status == 200) {
      auto content = extract_assistant_content(response.body);
      if (!content)
        throw ProviderError(response.status, response.body, "malformed provider response body");
      if (cache_enabled()) cache_write(key, response.body);
      return *content;
    }
    if (response.status == 401 || response.status == 403)
      throw AuthError(response.status, "authentication rejected (HTTP " +
                                           std::to_string(response.status) + ")");
    const bool retryable = response.transport_error || response.status == 408 ||
                           response.status == 429 ||
                           (response.status >= 500 && response.status < 600);
    if (!retryable || attempt >= cfg_.max_attempts) {
      const std::string reason = response.transport_error
                                     ? "transport error: " + response.error
                                     : "HTTP " + std::to_string(response.status);
      throw ProviderError(response.status, response.body,
                          reason + " after " + std::to_string(attempt) + " attempt(s)");
    }
    retries_.fetch_add(1);
    std::this_thread::sleep_for(jittered_backoff(cfg_.backoff_base, attempt));
  }
}

StructurizeRecord Gateway::structurize(std::string_view text, PromptMode mode,
                                       std::string_view source_id) {
  ProvenanceMeta meta;
  meta.source_id = std::string(source_id);
  meta.source_hash = source_hash(text);
  meta.model_id = cfg_.model_id;
  meta.prompt_mode = mode;
  meta.decode_temperature = cfg_.temperature;
  meta.created_at = iso8601_now();

  const PromptBundle prompt = build_structurize_prompt(text, mode, templates_);
  std::string raw = complete(prompt);
  ParseOutcome outcome = parse_output(raw);
  if (outcome.ok())
    return StructurizeRecord::parsed(std::string(text), std::move(raw), std::move(*outcome.context),
                                     std::move(meta), std::move(outcome.diagnostics),
                                     outcome.status == ParseStatus::Repaired);
  return StructurizeRecord::failed(std::string(text), std::move(raw), std::move(meta),
                                   std::move(outcome.diagnostics));
}

std::vector<StructurizeRecord> Gateway::batch_structurize(const std::vector<SourceText>& texts,
                                                          PromptMode mode) {
  std::vector<StructurizeRecord> records(texts.size());
  std::atomic<size_t> auth_failures{0};
  parallel_for(texts.size(), [&](size_t i) {
    try {
      records[i] = structurize(texts[i].text, mode, texts[i].id);
    } catch (const AuthError& e) {
      auth_failures.fetch_add(1);
      ProvenanceMeta meta;
      meta.source_id = texts[i].id;
      meta.source_hash = source_hash(texts[i].text);
      meta.model_id = cfg_.model_id;
      meta.prompt_mode = mode;
      meta.decode_temperature = cfg_.temperature;
      meta.created_at = iso8601_now();
      records[i] = StructurizeRecord::failed(texts[i].text, "", std::move(meta), {e.what()});
    } catch (const Error& e) {
      ProvenanceMeta meta;
      meta.source_id = texts[i].id;
      meta.source_hash = source_hash(texts[i].text);
      meta.model_id = cfg_.model_id;
      meta.prompt_mode = mode;
      meta.decode_temperature = cfg_.temperature;
      meta.created_at = iso8601_now();
      records[i] = StructurizeRecord::failed(texts[i].text, "", std::move(meta), {e.what()});
    }
  });
  if (!texts.empty() && auth_failures.load() == texts.size())
    throw Error(ErrorKind::ConfigError, "every request in the batch failed authentication");
  return records;
}

std::vector<StructurizeRecord> Gateway::batch_structurize(const std::vector<std::string>& texts,
                                                          PromptMode mode) {
  std::vector<SourceText> items;
  items.reserve(texts.size());
  for (const std::string& text : texts) items.push_back({"", text});
  return batch_structurize(items, mode);
}

void Gateway::parallel_for(size_t n, const std::function<void(size_t)>& fn) {
  if (n == 0) return;
  const size_t workers = std::min<size_t>(static_cast<size_t>(cfg_.parallelism), n);
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

GatewayStats Gateway::stats() const {
  return {transport_calls_.load(), attempts_.load(), retries_.load(), cache_hits_.load(),
          cache_writes_.load()};
}

}  // namespace strux

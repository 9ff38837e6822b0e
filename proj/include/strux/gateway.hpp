#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "strux/core.hpp"
#include "strux/prompt.hpp"

namespace strux {

struct ProviderConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model_id = "gpt-3.5-turbo";
  std::string api_key_ref = "STRUX_API_KEY";  // environment variable name
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{250};
  int parallelism = 4;
  int max_output_tokens = 4096;
  double temperature = 0.0;  // greedy decoding end to end
  std::string cache_dir;     // empty disables the response cache
  std::chrono::seconds request_timeout{120};
};

struct HttpResponse {
  int status = 0;
  std::string body;
  bool transport_error = false;  // connect/timeout level failure, retryable
  std::string error;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const ProviderConfig& cfg, const std::string& api_key,
                            const std::string& request_body) = 0;
  virtual bool needs_api_key() const { return true; }
};

/// POSTs {base_url}/chat/completions over cpp-httplib.
class HttplibTransport : public Transport {
 public:
  HttpResponse post(const ProviderConfig& cfg, const std::string& api_key,
                    const std::string& request_body) override;
};

/// Offline provider used by tests and the CLI --mock flag. Three behaviors:
///   Table            prompt-hash -> canned response, with optional default
///   EchoStructurize  replies with canonical JSON carrying the prompt's
///                    input statement as one aspect
///   Sequence         consumes a scripted response list in call order
/// Failures pushed via push_failure are served before any success, which is
/// how retry paths get exercised.
class MockTransport : public Transport {
 public:
  enum class Mode { Table, EchoStructurize, Sequence };

  explicit MockTransport(Mode mode = Mode::Table) : mode_(mode) {}

  void set_response(const std::string& prompt_hash, const std::string& content);
  void set_default_response(const std::string& content);
  void push_sequence(const std::string& content);
  void push_failure(int status, int times = 1);

  HttpResponse post(const ProviderConfig& cfg, const std::string& api_key,
                    const std::string& request_body) override;
  bool needs_api_key() const override { return false; }

  int64_t call_count() const { return calls_.load(); }
  int max_in_flight() const { return max_in_flight_.load(); }

  /// Parses a CLI fixture file: either a flat {"hash": "response"} table or
  /// {"behavior": "table"|"echo_structurize"|"sequence", "responses": {...}|[...],
  ///  "default": "..."}.
  static std::shared_ptr<MockTransport> from_fixture_file(const std::string& path);

 private:
  std::string respond(const std::string& request_body);

  Mode mode_;
  std::map<std::string, std::string> table_;
  std::deque<std::string> sequence_;
  std::string default_response_ = "MOCK";
  std::deque<int> failures_;
  std::mutex mutex_;
  std::atomic<int64_t> calls_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
};

struct GatewayStats {
  int64_t transport_calls = 0;
  int64_t attempts = 0;
  int64_t retries = 0;
  int64_t cache_hits = 0;
  int64_t cache_writes = 0;
};

struct SourceText {
  std::string id;
  std::string text;
};

/// Chat-completion front door: content-addressed response cache, exponential
/// backoff with full jitter, and a global in-flight bound shared by every
/// caller of this gateway instance.
class Gateway {
 public:
  explicit Gateway(ProviderConfig cfg, std::shared_ptr<Transport> transport = nullptr,
                   PromptTemplates templates = PromptTemplates::builtin());

  const ProviderConfig& config() const { return cfg_; }
  const PromptTemplates& templates() const { return templates_; }

  /// Returns the assistant message content. Throws AuthError on 401/403
  /// without retrying, ProviderError after exhausting max_attempts, and
  /// Error(ConfigError) when the API key env var cannot be resolved.
  std::string complete(const PromptBundle& prompt);

  /// Prompt -> model -> parse; parse failures are data (Failed records), not
  /// errors. Provider/auth errors propagate.
  StructurizeRecord structurize(std::string_view text, PromptMode mode,
                                std::string_view source_id = {});

  /// Order-preserving bounded-parallel batch. Per-item provider failures
  /// become Failed records with diagnostics; only a batch where every call
  /// hits AuthError is fatal (ConfigError).
  std::vector<StructurizeRecord> batch_structurize(const std::vector<SourceText>& texts,
                                                   PromptMode mode);
  std::vector<StructurizeRecord> batch_structurize(const std::vector<std::string>& texts,
                                                   PromptMode mode);

  /// Runs fn(0..n-1) on at most config().parallelism worker threads.
  /// Exceptions from fn are rethrown on the calling thread after join.
  void parallel_for(size_t n, const std::function<void(size_t)>& fn);

  GatewayStats stats() const;

  static std::string prompt_hash(const PromptBundle& prompt);
  std::string cache_key(const PromptBundle& prompt) const;

 private:
  bool cache_enabled() const { return !cfg_.cache_dir.empty(); }
  std::string cache_path(const std::string& key) const;
  std::optional<std::string> cache_read(const std::string& key) const;
  void cache_write(const std::string& key, const std::string& body) const;
  std::string resolve_api_key() const;
  std::string request_body(const PromptBundle& prompt) const;

  ProviderConfig cfg_;
  std::shared_ptr<Transport> transport_;
  PromptTemplates templates_;

  mutable std::mutex sem_mutex_;
  std::condition_variable sem_cv_;
  int in_flight_ = 0;

  mutable std::atomic<int64_t> transport_calls_{0};
  mutable std::atomic<int64_t> attempts_{0};
  mutable std::atomic<int64_t> retries_{0};
  mutable std::atomic<int64_t> cache_hits_{0};
  mutable std::atomic<int64_t> cache_writes_{0};
};

/// Assistant content from a chat-completion response body, or nullopt when
/// the body does not carry choices[0].message.content.
std::optional<std::string> extract_assistant_content(const std::string& response_body);

}  // namespace strux

// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "saber/concurrency.hpp"
#include "saber/errors.hpp"

namespace saber {

struct ClientConfig {
  std::string base_url;        // scheme://host[:port][/prefix]
  std::string api_key;         // from environment; never serialized
  std::string model_name;
  int max_in_flight = 4;
  double timeout_s = 30.0;
  int retries = 2;             // extra attempts after the first (3 total)
  std::optional<double> temperature;
  int backoff_base_ms = 100;   // 0 disables sleeping (tests)
  std::uint64_t jitter_seed = 0;
};

void validate(const ClientConfig& cfg);

struct ChatMessage {
  std::string role;
  std::string content;
};

// One completion attempt against a backend. Implementations throw
// ClientError / Timeout; retry policy lives in ChatClient.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual std::vector<std::string> complete(const std::string& system,
                                            const std::vector<ChatMessage>& messages,
                                            double temperature, int n) = 0;
};

// Deterministic scripted transport for tests and offline pipeline runs.
// Two modes, consulted in order: a FIFO script of responses/failures, then
// pattern rules matched against the concatenated request text (system plus
// all message contents). Replaying the same request sequence yields the
// same responses. Thread-safe; records a full call log and the maximum
// number of concurrent in-flight calls observed.
class MockTransport : public ChatTransport {
 public:
  struct Call {
    std::string system;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int n = 1;
  };

  // rule responder: (full request text, completion slot in [0, n)) -> text
  using Responder = std::function<std::string(const std::string&, int)>;

  void push_response(std::string text);
  void push_failure(int status, std::string body);
  void add_rule(std::string pattern, Responder fn);
  void add_rule(std::string pattern, std::string fixed_response);

  // artificial per-call latency, for concurrency tests
  void set_latency_ms(int ms) { latency_ms_ = ms; }

  std::vector<std::string> complete(const std::string& system,
                                    const std::vector<ChatMessage>& messages,
                                    double temperature, int n) override;

  std::vector<Call> calls() const;
  std::size_t call_count() const;
  int max_concurrent_observed() const;

 private:
  struct Failure {
    int status;
    std::string body;
  };
  struct Rule {
    std::string pattern;
    Responder fn;
  };

  mutable std::mutex mutex_;
  std::vector<std::variant<std::string, Failure>> script_;
  std::size_t script_pos_ = 0;
  std::vector<Rule> rules_;
  std::vector<Call> log_;
  int in_flight_ = 0;
  int max_in_flight_seen_ = 0;
  int latency_ms_ = 0;
};

// OpenAI-style chat-completions transport over HTTP(S):
// POST {base}/chat/completions with {model, messages, temperature, n} and
// a bearer token; returns choices[i].message.content in order.
class HttpTransport : public ChatTransport {
 public:
  explicit HttpTransport(ClientConfig cfg);
  std::vector<std::string> complete(const std::string& system,
                                    const std::vector<ChatMessage>& messages,
                                    double temperature, int n) override;

 private:
  ClientConfig cfg_;
  std::string origin_;       // scheme://host[:port]
  std::string path_prefix_;  // optional path before /chat/completions
};

// Retry, backoff, and in-flight bounding around any transport. Transient
// failures (HTTP 429/5xx, timeouts, connection errors) are retried up to
// cfg.retries times with exponential backoff plus jitter; other statuses
// propagate immediately. RetriesExhausted carries the last failure.
class ChatClient {
 public:
  ChatClient(std::shared_ptr<ChatTransport> transport, ClientConfig cfg);

  std::vector<std::string> generate(const std::string& system,
                                    const std::vector<ChatMessage>& messages,
                                    double temperature, int n);

  // Single deterministic completion at temperature 0. The rubric rides as
  // the system message, the payload as the sole user message. Throws Error
  // on an empty rubric.
  std::string judge(const std::string& rubric, const std::string& payload);

  const ClientConfig& config() const { return cfg_; }

 private:
  std::shared_ptr<ChatTransport> transport_;
  ClientConfig cfg_;
  Semaphore in_flight_;
  std::mutex jitter_mutex_;
  std::uint64_t jitter_state_;
};

}  // namespace saber

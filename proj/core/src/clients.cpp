// Copyright 2026 Saber Authors
// SPDX-License-Identifier: Apache-2.0

#include "saber/clients.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "textutil.hpp"

namespace saber {

using nlohmann::json;

void validate(const ClientConfig& cfg) {
  if (cfg.max_in_flight < 1) throw Error("max_in_flight must be >= 1");
  if (!(cfg.timeout_s > 0.0)) throw Error("timeout_s must be > 0");
  if (cfg.retries < 0) throw Error("retries must be >= 0");
  if (cfg.backoff_base_ms < 0) throw Error("backoff_base_ms must be >= 0");
  if (cfg.temperature && (!(std::isfinite(*cfg.temperature)) || *cfg.temperature < 0.0)) {
    throw Error("temperature must be a finite non-negative real");
  }
}

// --- MockTransport ---

void MockTransport::push_response(std::string text) {
  std::lock_guard lock(mutex_);
  script_.emplace_back(std::move(text));
}

void MockTransport::push_failure(int status, std::string body) {
  std::lock_guard lock(mutex_);
  script_.emplace_back(Failure{status, std::move(body)});
}

void MockTransport::add_rule(std::string pattern, Responder fn) {
  std::lock_guard lock(mutex_);
  rules_.push_back({std::move(pattern), std::move(fn)});
}

void MockTransport::add_rule(std::string pattern, std::string fixed_response) {
  add_rule(std::move(pattern),
           [text = std::move(fixed_response)](const std::string&, int) { return text; });
}

std::vector<std::string> MockTransport::complete(const std::string& system,
                                                 const std::vector<ChatMessage>& messages,
                                                 double temperature, int n) {
  if (n < 1) throw Error("n must be >= 1");

  struct InFlight {
    MockTransport* self;
    ~InFlight() {
      std::lock_guard lock(self->mutex_);
      --self->in_flight_;
    }
  };

  std::vector<std::string> responses;
  std::optional<Failure> failure;
  std::optional<Responder> responder;  // invoked outside the lock
  std::string fulltext = system;
  for (const ChatMessage& m : messages) {
    fulltext += '\n';
    fulltext += m.content;
  }
  int latency = 0;
  {
    std::lock_guard lock(mutex_);
    ++in_flight_;
    if (in_flight_ > max_in_flight_seen_) max_in_flight_seen_ = in_flight_;
    latency = latency_ms_;
    try {
      log_.push_back({system, messages, temperature, n});
      if (script_pos_ < script_.size()) {
        // script entries are per completion: n=3 consumes three entries
        for (int i = 0; i < n && !failure; ++i) {
          if (script_pos_ >= script_.size()) {
            failure = Failure{404, "mock script exhausted mid-call"};
            break;
          }
          auto& entry = script_[script_pos_++];
          if (auto* text = std::get_if<std::string>(&entry)) {
            responses.push_back(*text);
          } else {
            failure = std::get<Failure>(entry);
          }
        }
      } else {
        for (const Rule& r : rules_) {
          if (fulltext.find(r.pattern) != std::string::npos) {
            responder = r.fn;
            break;
          }
        }
        if (!responder) failure = Failure{404, "no scripted response or matching rule"};
      }
    } catch (...) {
      --in_flight_;
      throw;
    }
  }

  InFlight guard{this};
  if (latency > 0) std::this_thread::sleep_for(std::chrono::milliseconds(latency));
  if (responder) {
    for (int i = 0; i < n; ++i) responses.push_back((*responder)(fulltext, i));
  }
  if (failure) throw ClientError(failure->status, failure->body);
  return responses;
}

std::vector<MockTransport::Call> MockTransport::calls() const {
  std::lock_guard lock(mutex_);
  return log_;
}

std::size_t MockTransport::call_count() const {
  std::lock_guard lock(mutex_);
  return log_.size();
}

int MockTransport::max_concurrent_observed() const {
  std::lock_guard lock(mutex_);
  return max_in_flight_seen_;
}

// --- HttpTransport ---

HttpTransport::HttpTransport(ClientConfig cfg) : cfg_(std::move(cfg)) {
  validate(cfg_);
  if (cfg_.base_url.empty()) throw Error("base_url required for the http transport");
  std::string url = cfg_.base_url;
  std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error("base_url must carry a scheme: " + url);
  std::size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    origin_ = url;
  } else {
    origin_ = url.substr(0, path_start);
    path_prefix_ = url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  }
}

std::vector<std::string> HttpTransport::complete(const std::string& system,
                                                 const std::vector<ChatMessage>& messages,
                                                 double temperature, int n) {
  json body;
  body["model"] = cfg_.model_name;
  json msgs = json::array();
  if (!system.empty()) msgs.push_back({{"role", "system"}, {"content", system}});
  for (const ChatMessage& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  body["messages"] = std::move(msgs);
  body["temperature"] = temperature;
  body["n"] = n;

  httplib::Client cli(origin_);
  if (!cli.is_valid()) {
    throw ClientError(0, "unsupported origin (https needs a TLS-enabled build): " + origin_);
  }
  auto whole = std::chrono::duration<double>(cfg_.timeout_s);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(whole);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(whole - secs);
  cli.set_connection_timeout(secs.count(), usecs.count());
  cli.set_read_timeout(secs.count(), usecs.count());
  cli.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

  auto res = cli.Post(path_prefix_ + "/chat/completions", headers, body.dump(),
                      "application/json");
  if (!res) {
    httplib::Error err = res.error();
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
        err == httplib::Error::Write) {
      throw Timeout("request timed out: " + httplib::to_string(err));
    }
    throw ClientError(0, "transport failure: " + httplib::to_string(err));
  }
  if (res->status != 200) throw ClientError(res->status, res->body);

  try {
    json reply = json::parse(res->body);
    const json& choices = reply.at("choices");
    if (!choices.is_array() || choices.size() != static_cast<std::size_t>(n)) {
      throw ClientError(0, "expected " + std::to_string(n) + " choices");
    }
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(n));
    for (const json& c : choices) {
      out.push_back(c.at("message").at("content").get<std::string>());
    }
    return out;
  } catch (const json::exception& e) {
    throw ClientError(0, std::string("malformed completion body: ") + e.what());
  }
}

// --- ChatClient ---

ChatClient::ChatClient(std::shared_ptr<ChatTransport> transport, ClientConfig cfg)
    : transport_(std::move(transport)), cfg_(std::move(cfg)), in_flight_(cfg_.max_in_flight) {
  if (!transport_) throw Error("null transport");
  validate(cfg_);
  jitter_state_ = cfg_.jitter_seed != 0 ? cfg_.jitter_seed : 0x9e3779b97f4a7c15ull;
}

namespace {

bool retryable(const ClientError& e) {
  // 0 covers transport-level failures (connect errors, timeouts)
  return e.status == 0 || e.status == 429 || e.status >= 500;
}

}  // namespace

std::vector<std::string> ChatClient::generate(const std::string& system,
                                              const std::vector<ChatMessage>& messages,
                                              double temperature, int n) {
  if (n < 1) throw Error("n must be >= 1");
  SemaphoreGuard guard(in_flight_);

  int attempts_allowed = cfg_.retries + 1;
  for (int attempt = 0;; ++attempt) {
    try {
      return transport_->complete(system, messages, temperature, n);
    } catch (const ClientError& e) {
      if (!retryable(e)) throw;
      if (attempt + 1 >= attempts_allowed) {
        throw RetriesExhausted(attempts_allowed, e.status, e.body);
      }
      if (cfg_.backoff_base_ms > 0) {
        std::uint64_t jitter;
        {
          std::lock_guard lock(jitter_mutex_);
          jitter_state_ ^= jitter_state_ << 13;
          jitter_state_ ^= jitter_state_ >> 7;
          jitter_state_ ^= jitter_state_ << 17;
          jitter = jitter_state_;
        }
        auto delay = static_cast<std::uint64_t>(cfg_.backoff_base_ms) << attempt;
        delay += jitter % static_cast<std::uint64_t>(cfg_.backoff_base_ms);
        std::this_thread::sleep_for(std::chrono::milliseconds(delay));
      }
    }
  }
}

std::string ChatClient::judge(const std::string& rubric, const std::string& payload) {
  if (detail::trim(rubric).empty()) throw Error("empty judge rubric");
  std::vector<ChatMessage> messages = {{"user", payload}};
  return generate(rubric, messages, 0.0, 1).front();
}

}  // namespace saber

#ifndef TAGAD_LLM_CLIENT_HPP
#define TAGAD_LLM_CLIENT_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "tagad/error.hpp"

namespace tagad {

struct ChatRequest {
  std::string system;
  std::string user;
  std::string model;
  int max_tokens = 2048;
  double temperature = 0.0;
  std::string request_tag;
};

struct TokenUsage {
  long prompt = 0;
  long completion = 0;
};

struct ChatOutcome {
  std::string text;
  int attempts = 0;
  std::optional<TokenUsage> usage;
  std::chrono::milliseconds latency{0};
};

// What a transport returns for one successful attempt.
struct TransportReply {
  std::string text;
  std::optional<TokenUsage> usage;
};

// Thrown by a transport for a failed attempt. Transient failures (timeouts,
// 429, 5xx) are retried; others fail the request immediately.
class TransportError : public std::runtime_error {
 public:
  TransportError(int status, bool transient, const std::string& message)
      : std::runtime_error(message), status_(status), transient_(transient) {}
  int status() const { return status_; }
  bool transient() const { return transient_; }

 private:
  int status_;
  bool transient_;
};

class LlmFailure : public Error {
 public:
  LlmFailure(int last_status, int attempts, const std::string& message)
      : Error(ErrorCode::kLlmFailure,
              message + " (status " + std::to_string(last_status) +
                  ", attempts " + std::to_string(attempts) + ")"),
        last_status_(last_status),
        attempts_(attempts) {}
  int last_status() const { return last_status_; }
  int attempts() const { return attempts_; }

 private:
  int last_status_;
  int attempts_;
};

// One attempt at a chat completion.
using CompletionFn = std::function<TransportReply(const ChatRequest&)>;

struct ClientConfig {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{1000};
  double backoff_factor = 2.0;
  std::chrono::milliseconds max_delay{30000};
  std::size_t max_in_flight = 4;
  std::chrono::milliseconds min_spacing{0};
};

// Delay slept before retry i (i = 0 is the wait after the first failure).
inline std::vector<std::chrono::milliseconds> backoff_schedule(
    const ClientConfig& config) {
  std::vector<std::chrono::milliseconds> delays;
  double d = static_cast<double>(config.base_delay.count());
  for (int i = 1; i < config.max_attempts; ++i) {
    const auto ms = static_cast<long long>(
        std::min(d, static_cast<double>(config.max_delay.count())));
    delays.emplace_back(ms);
    d *= std::max(1.0, config.backoff_factor);
  }
  return delays;
}

// Retrying, rate-limited front end over a CompletionFn. Safe for concurrent
// callers; the in-flight limiter and request spacer are shared.
class LlmClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  LlmClient(ClientConfig config, CompletionFn transport)
      : config_(config),
        transport_(std::move(transport)),
        delays_(backoff_schedule(config_)),
        sleeper_([](std::chrono::milliseconds d) {
          std::this_thread::sleep_for(d);
        }) {
    if (config_.max_attempts < 1 || config_.max_in_flight < 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  "max_attempts and max_in_flight must be >= 1");
    }
    if (!transport_) {
      throw Error(ErrorCode::kInvalidArgument, "missing transport");
    }
  }

  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

  const ClientConfig& config() const { return config_; }

  ChatOutcome complete(const ChatRequest& request) {
    if (request.user.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "empty user prompt");
    }
    if (request.temperature < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "negative temperature");
    }
    const auto start = std::chrono::steady_clock::now();
    int last_status = 0;
    std::string last_message = "no attempt made";
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
      try {
        TransportReply reply = attempt_once(request);
        ChatOutcome outcome;
        outcome.text = std::move(reply.text);
        outcome.attempts = attempt;
        outcome.usage = reply.usage;
        outcome.latency =
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - start);
        record_usage(reply.usage);
        return outcome;
      } catch (const TransportError& e) {
        last_status = e.status();
        last_message = e.what();
        failed_attempts_.fetch_add(1);
        if (!e.transient()) {
          throw LlmFailure(last_status, attempt, last_message);
        }
        if (attempt < config_.max_attempts) {
          sleeper_(delays_[static_cast<std::size_t>(attempt - 1)]);
        }
      }
    }
    throw LlmFailure(last_status, config_.max_attempts, last_message);
  }

  std::size_t successful_calls() const { return calls_.load(); }
  std::size_t failed_attempts() const { return failed_attempts_.load(); }
  long prompt_tokens() const { return prompt_tokens_.load(); }
  long completion_tokens() const { return completion_tokens_.load(); }

 private:
  TransportReply attempt_once(const ChatRequest& request) {
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return in_flight_ < config_.max_in_flight; });
      ++in_flight_;
      if (config_.min_spacing.count() > 0) {
        const auto now = std::chrono::steady_clock::now();
        const auto slot = std::max(now, next_slot_);
        next_slot_ = slot + config_.min_spacing;
        if (slot > now) {
          lock.unlock();
          std::this_thread::sleep_until(slot);
        }
      }
    }
    struct Release {
      LlmClient* self;
      ~Release() {
        {
          std::lock_guard lock(self->mu_);
          --self->in_flight_;
        }
        self->cv_.notify_one();
      }
    } release{this};
    return transport_(request);
  }

  void record_usage(const std::optional<TokenUsage>& usage) {
    calls_.fetch_add(1);
    if (usage) {
      prompt_tokens_.fetch_add(usage->prompt);
      completion_tokens_.fetch_add(usage->completion);
    }
  }

  ClientConfig config_;
  CompletionFn transport_;
  std::vector<std::chrono::milliseconds> delays_;
  Sleeper sleeper_;

  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t in_flight_ = 0;
  std::chrono::steady_clock::time_point next_slot_{};

  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> failed_attempts_{0};
  std::atomic<long> prompt_tokens_{0};
  std::atomic<long> completion_tokens_{0};
};

// --- Offline mocks ---

struct MockRule {
  std::function<bool(std::string_view user_prompt)> matches;
  std::string reply;
};

inline std::function<bool(std::string_view)> prompt_contains(
    std::string needle) {
  return [needle = std::move(needle)](std::string_view prompt) {
    return prompt.find(needle) != std::string_view::npos;
  };
}

// Pure completion function: the first matching rule's reply, otherwise the
// default reply.
inline CompletionFn scripted_mock(std::vector<MockRule> rules,
                                  std::string default_reply) {
  return [rules = std::move(rules), default_reply = std::move(default_reply)](
             const ChatRequest& request) -> TransportReply {
    for (const auto& rule : rules) {
      if (rule.matches(request.user)) return {rule.reply, std::nullopt};
    }
    return {default_reply, std::nullopt};
  };
}

// Fails the first `failures` calls with a transient error, then delegates.
inline CompletionFn flaky_mock(CompletionFn inner, int failures,
                               int status = 503) {
  auto remaining = std::make_shared<std::atomic<int>>(failures);
  return [inner = std::move(inner), remaining,
          status](const ChatRequest& request) {
    if (remaining->fetch_sub(1) > 0) {
      throw TransportError(status, true, "scripted transient failure");
    }
    return inner(request);
  };
}

inline CompletionFn failing_mock(int status = 503, bool transient = true) {
  return [status, transient](const ChatRequest&) -> TransportReply {
    throw TransportError(status, transient, "scripted failure");
  };
}

}  // namespace tagad

#endif  // TAGAD_LLM_CLIENT_HPP

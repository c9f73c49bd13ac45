// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The cotr Authors

#pragma once

#include <chrono>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cotr/core.hpp"

namespace cotr {

/// Chat-completion style endpoint. `url` is the full request URL, e.g.
/// http://localhost:8000/v1/chat/completions.
struct ChatEndpoint {
  std::string url;
  std::string model;
  std::string api_key;
  int max_attempts = 3;
  double backoff_initial_s = 1.0;  // doubles after each failed attempt
  int max_in_flight = 4;
  double timeout_s = 60.0;
  double temperature = 0.0;
  int max_tokens = 512;
};

struct ChatMessage {
  std::string role;
  std::string content;
};

namespace detail {

class CountingGate {
 public:
  explicit CountingGate(int limit) : available_(limit < 1 ? 1 : limit) {}

  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [this] { return available_ > 0; });
    --available_;
  }

  void release() {
    {
      std::lock_guard lock(mu_);
      ++available_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int available_;
};

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw std::invalid_argument("endpoint URL needs a scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace detail

/// Minimal chat-completions client with bounded concurrency and retries
/// with exponential backoff. Thread-safe.
class ChatClient {
 public:
  explicit ChatClient(ChatEndpoint endpoint) : endpoint_(std::move(endpoint)), gate_(endpoint_.max_in_flight) {
    if (endpoint_.url.empty()) throw std::invalid_argument("chat endpoint URL is empty");
    url_ = detail::split_url(endpoint_.url);
  }

  const ChatEndpoint& endpoint() const { return endpoint_; }

  /// Returns the first completion accepted by `accept`. Connection errors,
  /// 429/5xx responses, malformed bodies and rejected completions are
  /// retried; other 4xx responses fail immediately.
  std::string complete(const std::vector<ChatMessage>& messages,
                       const std::function<bool(const std::string&)>& accept = nullptr,
                       const nlohmann::json& extra_body = nlohmann::json::object()) {
    nlohmann::json body = extra_body;
    body["model"] = endpoint_.model;
    body["temperature"] = endpoint_.temperature;
    body["max_tokens"] = endpoint_.max_tokens;
    body["messages"] = nlohmann::json::array();
    for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    const std::string payload = body.dump();

    std::string last_error = "no attempts made";
    double backoff = endpoint_.backoff_initial_s;
    const int attempts = endpoint_.max_attempts < 1 ? 1 : endpoint_.max_attempts;
    for (int attempt = 0; attempt < attempts; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
        backoff *= 2.0;
      }
      auto result = post(payload);
      if (!result.ok) {
        last_error = result.error;
        if (!result.retryable) break;
        continue;
      }
      if (!accept || accept(result.content)) return result.content;
      last_error = "completion rejected: " + result.content.substr(0, 80);
    }
    throw TransportError("chat endpoint " + endpoint_.url + " failed: " + last_error);
  }

 private:
  struct PostResult {
    bool ok = false;
    bool retryable = true;
    std::string content;
    std::string error;
  };

  PostResult post(const std::string& payload) {
    gate_.acquire();
    struct Release {
      detail::CountingGate& g;
      ~Release() { g.release(); }
    } release{gate_};

    httplib::Client cli(url_.origin);
    const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
        std::chrono::duration<double>(endpoint_.timeout_s));
    cli.set_connection_timeout(timeout);
    cli.set_read_timeout(timeout);
    httplib::Headers headers;
    if (!endpoint_.api_key.empty()) headers.emplace("Authorization", "Bearer " + endpoint_.api_key);

    auto res = cli.Post(url_.path, headers, payload, "application/json");
    PostResult out;
    if (!res) {
      out.error = "transport error: " + httplib::to_string(res.error());
      return out;
    }
    if (res->status != 200) {
      out.error = "HTTP " + std::to_string(res->status);
      out.retryable = res->status == 429 || res->status >= 500;
      return out;
    }
    try {
      auto j = nlohmann::json::parse(res->body);
      out.content = j.at("choices").at(0).at("message").at("content").get<std::string>();
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = std::string("malformed response body: ") + e.what();
    }
    return out;
  }

  ChatEndpoint endpoint_;
  detail::SplitUrl url_;
  detail::CountingGate gate_;
};

}  // namespace cotr

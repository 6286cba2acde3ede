#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "structdiv/text_metrics.hpp"

namespace structdiv {

struct LlmConfig {
    std::string base_url;  // e.g. https://api.openai.com/v1 or http://localhost:8000/v1
    std::string model;
    double temperature = 1.0;
    double top_p = 1.0;
    int max_tokens = 1024;
    std::string api_key_env = "OPENAI_API_KEY";
    double timeout_seconds = 60.0;
    int max_retries = 3;
    int requests_per_minute = 60;
    int parallelism = 4;  // concurrent in-flight requests the pipelines may use

    void validate() const;
    nlohmann::json to_json() const;  // echoes the env var *name*, never a credential
};

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string content;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    std::optional<double> temperature;  // per-request overrides
    std::optional<double> top_p;
    std::string stage;  // routing tag for the stub table; not sent on the wire
};

// Injectable clock so rate limiting and backoff are testable without real time.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::uint64_t now_ms() = 0;
    virtual void sleep_ms(std::uint64_t ms) = 0;
};

std::shared_ptr<Clock> system_clock();

class FakeClock : public Clock {
public:
    std::uint64_t now_ms() override {
        std::lock_guard lock(m_);
        return now_;
    }
    void sleep_ms(std::uint64_t ms) override {
        std::lock_guard lock(m_);
        now_ += ms;
        slept_ += ms;
    }
    std::uint64_t total_slept_ms() const { return slept_; }

private:
    std::mutex m_;
    std::uint64_t now_ = 0;
    std::uint64_t slept_ = 0;
};

// Sliding-window limiter: at most `requests_per_minute` acquisitions inside
// any 60 s window; <= 0 disables limiting.
class RateLimiter {
public:
    RateLimiter(int requests_per_minute, std::shared_ptr<Clock> clock);
    void acquire();
    const std::deque<std::uint64_t>& issue_times() const { return stamps_; }

private:
    int rpm_;
    std::shared_ptr<Clock> clock_;
    std::mutex m_;
    std::deque<std::uint64_t> stamps_;
};

struct WireRequest {
    std::string path;   // /chat/completions or /embeddings
    std::string body;   // JSON
    std::string stage;  // stub routing metadata
    std::string digest;
    std::uint64_t sample_index = 0;
};

struct WireResponse {
    int status = 0;
    std::string body;
    bool transport_failed = false;  // connect/timeout level failure
    std::string error;
};

class Transport {
public:
    virtual ~Transport() = default;
    virtual WireResponse send(const WireRequest& req) = 0;
};

// OpenAI-compatible HTTP transport. The credential is read from the
// environment variable named in the config at send time; a missing
// credential raises AuthError before any network activity.
std::shared_ptr<Transport> make_http_transport(const LlmConfig& cfg);

// Offline transport answering from a response table; performs no I/O.
// Table shape:
//   {"digests": {"<hex>": "response"},
//    "stages": {"<stage>": "response"
//               | {"by_index": {"<sample_index>": "response"},
//                  "cycle": ["r0", "r1", ...],
//                  "value": "response"}},
//    "default": "response",
//    "embeddings": {"dim": 8, "mode": "hash", "table": {"text": [floats]}}}
std::shared_ptr<Transport> make_stub_transport(nlohmann::json table);
nlohmann::json load_stub_table(const std::string& path);

std::string sha256_hex(const std::string& data);

// Thread-safe response cache, optionally persisted as append-only JSONL so
// interrupted runs resume without re-spending tokens.
class ResponseCache {
public:
    ResponseCache() = default;
    explicit ResponseCache(const std::string& path);
    std::optional<std::string> get(const std::string& key);
    void put(const std::string& key, const std::string& response);
    std::size_t size() const;

private:
    mutable std::mutex m_;
    std::unordered_map<std::string, std::string> map_;
    std::string path_;
};

// Black-box chat/embedding client: caching, retries with exponential
// backoff, and global rate limiting in front of a pluggable transport.
class Gateway {
public:
    Gateway(LlmConfig cfg, std::shared_ptr<Transport> transport, std::shared_ptr<Clock> clock,
            std::shared_ptr<ResponseCache> cache);

    static Gateway http(const LlmConfig& cfg, const std::string& cache_path = "");
    static Gateway stub(const LlmConfig& cfg, const nlohmann::json& table,
                        const std::string& cache_path = "");

    // sample_index distinguishes repeated stochastic draws of one prompt:
    // it is part of the cache key, so k draws stay k distinct rows.
    std::string chat(const ChatRequest& req, std::uint64_t sample_index);

    // One vector per input text, order preserving, cached per text.
    EmbeddingMatrix embed(const std::vector<std::string>& texts);

    std::uint64_t transport_calls() const { return transport_calls_.load(); }
    int parallelism() const { return cfg_.parallelism; }
    const LlmConfig& config() const { return cfg_; }

private:
    WireResponse send_with_retries(const WireRequest& req);

    LlmConfig cfg_;
    std::shared_ptr<Transport> transport_;
    std::shared_ptr<Clock> clock_;
    std::shared_ptr<ResponseCache> cache_;
    RateLimiter limiter_;
    std::atomic<std::uint64_t> transport_calls_{0};
};

}  // namespace structdiv

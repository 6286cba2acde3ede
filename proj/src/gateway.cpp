#include "structdiv/llm.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <openssl/evp.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "structdiv/errors.hpp"

namespace structdiv {

using nlohmann::json;

void LlmConfig::validate() const {
    if (temperature < 0) throw ValidationError("llm config: temperature must be >= 0");
    if (top_p <= 0 || top_p > 1) throw ValidationError("llm config: top_p must be in (0, 1]");
    if (max_tokens < 1) throw ValidationError("llm config: max_tokens must be >= 1");
    if (max_retries < 0) throw ValidationError("llm config: max_retries must be >= 0");
    if (parallelism < 1) throw ValidationError("llm config: parallelism must be >= 1");
}

json LlmConfig::to_json() const {
    return {{"base_url", base_url},
            {"model", model},
            {"temperature", temperature},
            {"top_p", top_p},
            {"max_tokens", max_tokens},
            {"api_key_env", api_key_env},
            {"api_key", "<redacted>"},
            {"timeout_seconds", timeout_seconds},
            {"max_retries", max_retries},
            {"requests_per_minute", requests_per_minute},
            {"parallelism", parallelism}};
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

// ---- clock -------------------------------------------------------------------

namespace {

class SystemClock : public Clock {
public:
    std::uint64_t now_ms() override {
        return static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now().time_since_epoch())
                .count());
    }
    void sleep_ms(std::uint64_t ms) override {
        std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    }
};

}  // namespace

std::shared_ptr<Clock> system_clock() { return std::make_shared<SystemClock>(); }

// ---- rate limiter --------------------------------------------------------------

RateLimiter::RateLimiter(int requests_per_minute, std::shared_ptr<Clock> clock)
    : rpm_(requests_per_minute), clock_(std::move(clock)) {}

void RateLimiter::acquire() {
    if (rpm_ <= 0) return;
    for (;;) {
        std::uint64_t wait = 0;
        {
            std::lock_guard lock(m_);
            const std::uint64_t now = clock_->now_ms();
            while (!stamps_.empty() && stamps_.front() + 60'000 <= now) stamps_.pop_front();
            if (stamps_.size() < static_cast<std::size_t>(rpm_)) {
                stamps_.push_back(now);
                return;
            }
            wait = stamps_.front() + 60'000 - now;
        }
        clock_->sleep_ms(wait);
    }
}

// ---- transports -----------------------------------------------------------------

namespace {

class HttpTransport : public Transport {
public:
    explicit HttpTransport(const LlmConfig& cfg) : cfg_(cfg) {
        const auto scheme_end = cfg.base_url.find("://");
        std::size_t path_start = std::string::npos;
        if (scheme_end != std::string::npos)
            path_start = cfg.base_url.find('/', scheme_end + 3);
        if (path_start == std::string::npos) {
            origin_ = cfg.base_url;
        } else {
            origin_ = cfg.base_url.substr(0, path_start);
            prefix_ = cfg.base_url.substr(path_start);
        }
        while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    }

    WireResponse send(const WireRequest& req) override {
        if (origin_.empty()) throw ValidationError("llm config: base_url is empty");
        std::string key;
        if (!cfg_.api_key_env.empty()) {
            const char* v = std::getenv(cfg_.api_key_env.c_str());
            if (v == nullptr || *v == '\0')
                throw AuthError("credential environment variable " + cfg_.api_key_env +
                                " is not set");
            key = v;
        }

        httplib::Client client(origin_);
        const auto secs = static_cast<time_t>(cfg_.timeout_seconds);
        const auto usecs =
            static_cast<time_t>((cfg_.timeout_seconds - static_cast<double>(secs)) * 1e6);
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);
        httplib::Headers headers;
        if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

        auto res = client.Post(prefix_ + req.path, headers, req.body, "application/json");
        WireResponse out;
        if (!res) {
            out.transport_failed = true;
            out.error = httplib::to_string(res.error());
            return out;
        }
        out.status = res->status;
        out.body = res->body;
        return out;
    }

private:
    LlmConfig cfg_;
    std::string origin_;
    std::string prefix_;
};

std::vector<float> hash_embedding(const std::string& text, std::size_t dim) {
    std::vector<float> v;
    v.reserve(dim);
    std::size_t block = 0;
    while (v.size() < dim) {
        const std::string digest = sha256_hex(text + "#" + std::to_string(block++));
        for (std::size_t i = 0; i + 1 < digest.size() && v.size() < dim; i += 2) {
            const int byte = std::stoi(digest.substr(i, 2), nullptr, 16);
            v.push_back(static_cast<float>(byte) / 127.5f - 1.0f);
        }
    }
    return v;
}

class StubTransport : public Transport {
public:
    explicit StubTransport(json table) : table_(std::move(table)) {}

    WireResponse send(const WireRequest& req) override {
        WireResponse out;
        out.status = 200;
        if (req.path == "/chat/completions") {
            const std::string content = resolve_chat(req);
            out.body = json{{"choices", {{{"message", {{"role", "assistant"},
                                                       {"content", content}}}}}}}
                           .dump();
        } else if (req.path == "/embeddings") {
            const json body = json::parse(req.body);
            json data = json::array();
            for (const auto& t : body.at("input")) data.push_back(
                json{{"embedding", embed_one(t.get<std::string>())}});
            out.body = json{{"data", data}}.dump();
        } else {
            throw StubMissError("stub transport: unknown path " + req.path);
        }
        return out;
    }

private:
    std::string resolve_chat(const WireRequest& req) const {
        if (table_.contains("digests")) {
            const auto& d = table_["digests"];
            if (d.contains(req.digest)) return d[req.digest].get<std::string>();
        }
        if (!req.stage.empty() && table_.contains("stages") &&
            table_["stages"].contains(req.stage)) {
            const auto& st = table_["stages"][req.stage];
            if (st.is_string()) return st.get<std::string>();
            if (st.contains("by_index")) {
                const auto& m = st["by_index"];
                const std::string key = std::to_string(req.sample_index);
                if (m.contains(key)) return m[key].get<std::string>();
            }
            if (st.contains("cycle")) {
                const auto& arr = st["cycle"];
                if (!arr.empty())
                    return arr[req.sample_index % arr.size()].get<std::string>();
            }
            if (st.contains("value")) return st["value"].get<std::string>();
        }
        if (table_.contains("default")) return table_["default"].get<std::string>();
        throw StubMissError("stub table has no entry for stage \"" + req.stage +
                            "\", sample_index " + std::to_string(req.sample_index) +
                            ", digest " + req.digest);
    }

    std::vector<float> embed_one(const std::string& text) const {
        std::size_t dim = 8;
        if (table_.contains("embeddings")) {
            const auto& e = table_["embeddings"];
            dim = e.value("dim", 8);
            if (e.contains("table") && e["table"].contains(text))
                return e["table"][text].get<std::vector<float>>();
            const std::string mode = e.value("mode", "hash");
            if (mode != "hash")
                throw StubMissError("stub embeddings: no entry for text and mode is not hash");
        }
        return hash_embedding(text, dim);
    }

    json table_;
};

}  // namespace

std::shared_ptr<Transport> make_http_transport(const LlmConfig& cfg) {
    return std::make_shared<HttpTransport>(cfg);
}

std::shared_ptr<Transport> make_stub_transport(json table) {
    return std::make_shared<StubTransport>(std::move(table));
}

json load_stub_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stub table: " + path);
    try {
        json t;
        in >> t;
        return t;
    } catch (const json::exception& e) {
        throw ParseError("stub table " + path + ": " + e.what());
    }
}

// ---- cache ------------------------------------------------------------------------

ResponseCache::ResponseCache(const std::string& path) : path_(path) {
    std::ifstream in(path);
    if (!in) return;  // fresh cache file
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            const json rec = json::parse(line);
            map_[rec.at("key").get<std::string>()] = rec.at("response").get<std::string>();
        } catch (const json::exception&) {
            // Torn trailing line from a crashed run; everything before it is intact.
            continue;
        }
    }
}

std::optional<std::string> ResponseCache::get(const std::string& key) {
    std::lock_guard lock(m_);
    const auto it = map_.find(key);
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

void ResponseCache::put(const std::string& key, const std::string& response) {
    std::lock_guard lock(m_);
    if (!map_.emplace(key, response).second) return;
    if (path_.empty()) return;
    std::ofstream out(path_, std::ios::app);
    out << json{{"key", key},
                {"response", response},
                {"timestamp_ms",
                 std::chrono::duration_cast<std::chrono::milliseconds>(
                     std::chrono::system_clock::now().time_since_epoch())
                     .count()}}
               .dump()
        << "\n";
}

std::size_t ResponseCache::size() const {
    std::lock_guard lock(m_);
    return map_.size();
}

// ---- gateway ------------------------------------------------------------------------

Gateway::Gateway(LlmConfig cfg, std::shared_ptr<Transport> transport, std::shared_ptr<Clock> clock,
                 std::shared_ptr<ResponseCache> cache)
    : cfg_(std::move(cfg)),
      transport_(std::move(transport)),
      clock_(std::move(clock)),
      cache_(std::move(cache)),
      limiter_(cfg_.requests_per_minute, clock_) {
    cfg_.validate();
}

Gateway Gateway::http(const LlmConfig& cfg, const std::string& cache_path) {
    auto cache = cache_path.empty() ? std::make_shared<ResponseCache>()
                                    : std::make_shared<ResponseCache>(cache_path);
    return Gateway(cfg, make_http_transport(cfg), system_clock(), std::move(cache));
}

Gateway Gateway::stub(const LlmConfig& cfg, const json& table, const std::string& cache_path) {
    auto cache = cache_path.empty() ? std::make_shared<ResponseCache>()
                                    : std::make_shared<ResponseCache>(cache_path);
    return Gateway(cfg, make_stub_transport(table), system_clock(), std::move(cache));
}

WireResponse Gateway::send_with_retries(const WireRequest& req) {
    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        if (attempt > 0) clock_->sleep_ms(500ull << (attempt - 1));
        limiter_.acquire();
        ++transport_calls_;
        WireResponse res = transport_->send(req);
        if (res.transport_failed) {
            last_error = "transport: " + res.error;
            continue;
        }
        if (res.status == 429 || res.status >= 500) {
            last_error = "HTTP " + std::to_string(res.status);
            continue;
        }
        if (res.status == 401 || res.status == 403)
            throw AuthError("HTTP " + std::to_string(res.status) + ": " + res.body);
        if (res.status != 200)
            throw GatewayError("HTTP " + std::to_string(res.status) + ": " + res.body);
        return res;
    }
    throw RetriesExhaustedError("request failed after " + std::to_string(cfg_.max_retries + 1) +
                                " attempts; last error: " + last_error);
}

std::string Gateway::chat(const ChatRequest& req, std::uint64_t sample_index) {
    if (req.messages.empty()) throw ValidationError("chat request has no messages");
    bool has_user = false;
    json messages = json::array();
    for (const auto& m : req.messages) {
        has_user = has_user || m.role == "user";
        messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    if (!has_user) throw ValidationError("chat request has no user message");

    const double temperature = req.temperature.value_or(cfg_.temperature);
    const double top_p = req.top_p.value_or(cfg_.top_p);
    const json body{{"model", cfg_.model},
                    {"messages", messages},
                    {"temperature", temperature},
                    {"top_p", top_p},
                    {"max_tokens", cfg_.max_tokens}};

    const std::string digest = sha256_hex(json{{"kind", "chat"},
                                               {"model", cfg_.model},
                                               {"messages", messages},
                                               {"temperature", temperature},
                                               {"top_p", top_p},
                                               {"max_tokens", cfg_.max_tokens},
                                               {"sample_index", sample_index}}
                                              .dump());
    if (auto hit = cache_->get(digest)) return *hit;

    const WireResponse res = send_with_retries(
        {"/chat/completions", body.dump(), req.stage, digest, sample_index});
    std::string content;
    try {
        content = json::parse(res.body).at("choices").at(0).at("message").at("content")
                      .get<std::string>();
    } catch (const json::exception& e) {
        throw MalformedResponseError("chat response: " + std::string(e.what()));
    }
    cache_->put(digest, content);
    return content;
}

EmbeddingMatrix Gateway::embed(const std::vector<std::string>& texts) {
    EmbeddingMatrix out;
    if (texts.empty()) return out;

    std::vector<std::string> keys(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i)
        keys[i] = sha256_hex(
            json{{"kind", "embed"}, {"model", cfg_.model}, {"text", texts[i]}}.dump());

    std::vector<std::string> pending;
    std::vector<std::string> pending_keys;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (cache_->get(keys[i])) continue;
        bool queued = false;
        for (const auto& pk : pending_keys) queued = queued || pk == keys[i];
        if (!queued) {
            pending.push_back(texts[i]);
            pending_keys.push_back(keys[i]);
        }
    }

    if (!pending.empty()) {
        const json body{{"model", cfg_.model}, {"input", pending}};
        const std::string digest = sha256_hex(body.dump());
        const WireResponse res = send_with_retries({"/embeddings", body.dump(), "embed", digest, 0});
        json data;
        try {
            data = json::parse(res.body).at("data");
        } catch (const json::exception& e) {
            throw MalformedResponseError("embeddings response: " + std::string(e.what()));
        }
        if (data.size() != pending.size())
            throw MalformedResponseError("embeddings response has " + std::to_string(data.size()) +
                                         " rows for " + std::to_string(pending.size()) + " inputs");
        std::size_t dim = 0;
        for (std::size_t i = 0; i < pending.size(); ++i) {
            json vec;
            try {
                vec = data.at(i).at("embedding");
            } catch (const json::exception& e) {
                throw MalformedResponseError("embeddings response: " + std::string(e.what()));
            }
            if (i == 0)
                dim = vec.size();
            else if (vec.size() != dim)
                throw DimensionMismatchError(
                    "embedding endpoint returned ragged vectors (" + std::to_string(vec.size()) +
                    " vs " + std::to_string(dim) + ")");
            cache_->put(pending_keys[i], vec.dump());
        }
    }

    for (std::size_t i = 0; i < texts.size(); ++i) {
        const auto cached = cache_->get(keys[i]);
        if (!cached) throw Error("embedding cache row vanished");  // unreachable
        const auto vec = json::parse(*cached).get<std::vector<float>>();
        out.push_row(vec);
    }
    return out;
}

}  // namespace structdiv

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <thread>

#include "give/embedding.hpp"
#include "give/errors.hpp"

namespace give {

using nlohmann::json;

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpEmbeddingConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.base_url.empty()) throw ValidationError("embedding base_url not configured");
    if (cfg_.batch_size == 0) throw ValidationError("embedding batch_size must be >= 1");
}

std::string HttpEmbeddingProvider::id() const {
    return "http:" + cfg_.model;
}

namespace {

std::vector<Vec> request_embeddings(const HttpEmbeddingConfig& cfg,
                                    const std::vector<std::string>& batch) {
    httplib::Client client(cfg.base_url);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (const char* key = std::getenv(cfg.api_key_env.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    json req{{"model", cfg.model}, {"input", batch}};
    std::string last_error;
    for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
        if (attempt > 0 && cfg.backoff_ms > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(cfg.backoff_ms << (attempt - 1)));
        }
        auto res = client.Post(cfg.path, headers, req.dump(), "application/json");
        if (!res) {
            last_error = "transport: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "server status " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw TransportError("embedding endpoint returned status " +
                                 std::to_string(res->status));
        }
        json body = json::parse(res->body, nullptr, false);
        if (body.is_discarded() || !body.contains("data") || !body["data"].is_array()) {
            throw TransportError("embedding endpoint returned malformed JSON");
        }
        std::vector<Vec> out(batch.size());
        std::vector<char> seen(batch.size(), 0);
        for (const auto& item : body["data"]) {
            auto idx = item.at("index").get<std::size_t>();
            if (idx >= out.size()) throw IntegrityError("embedding index out of range");
            out[idx] = item.at("embedding").get<Vec>();
            seen[idx] = 1;
        }
        for (std::size_t i = 0; i < seen.size(); ++i) {
            if (!seen[i]) throw IntegrityError("embedding response missing index");
        }
        return out;
    }
    throw TransportError("embedding request failed after retries: " + last_error);
}

}  // namespace

std::vector<Vec> HttpEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    std::vector<Vec> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += cfg_.batch_size) {
        std::size_t end = std::min(texts.size(), start + cfg_.batch_size);
        std::vector<std::string> batch(texts.begin() + std::ptrdiff_t(start),
                                       texts.begin() + std::ptrdiff_t(end));
        try {
            auto vecs = request_embeddings(cfg_, batch);
            for (auto& v : vecs) out.push_back(std::move(v));
        } catch (const TransportError& e) {
            throw TransportError(std::string(e.what()) + " (batch starting at index " +
                                 std::to_string(start) + ")");
        }
    }
    return out;
}

}  // namespace give

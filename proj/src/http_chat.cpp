#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <thread>

#include "give/errors.hpp"
#include "give/llm.hpp"

namespace give {

using nlohmann::json;

// Counting semaphore bounding concurrent requests.
struct HttpChatBackend::Limiter {
    explicit Limiter(int slots) : available(slots) {}
    std::mutex mu;
    std::condition_variable cv;
    int available;

    struct Slot {
        Limiter* l;
        explicit Slot(Limiter* lim) : l(lim) {
            std::unique_lock lock(l->mu);
            l->cv.wait(lock, [&] { return l->available > 0; });
            --l->available;
        }
        ~Slot() {
            {
                std::lock_guard lock(l->mu);
                ++l->available;
            }
            l->cv.notify_one();
        }
    };
};

HttpChatBackend::HttpChatBackend(HttpChatConfig cfg)
    : cfg_(std::move(cfg)), limiter_(std::make_unique<Limiter>(std::max(1, cfg_.max_in_flight))) {
    if (cfg_.base_url.empty()) throw ValidationError("chat base_url not configured");
}

HttpChatBackend::~HttpChatBackend() = default;

std::string HttpChatBackend::id() const {
    return "http:" + cfg_.model;
}

std::string HttpChatBackend::complete(const ChatRequest& req) const {
    Limiter::Slot slot(limiter_.get());

    httplib::Client client(cfg_.base_url);
    client.set_read_timeout(300, 0);
    httplib::Headers headers;
    if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key) {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    json body{{"model", cfg_.model},
              {"messages", json::array({json{{"role", "user"}, {"content", req.text}}})},
              {"temperature", cfg_.temperature},
              {"top_p", cfg_.top_p}};

    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.retries; ++attempt) {
        if (attempt > 0 && cfg_.backoff_ms > 0) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(cfg_.backoff_ms << (attempt - 1)));
        }
        auto res = client.Post(cfg_.path, headers, body.dump(), "application/json");
        if (!res) {
            last_error = "transport: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500 || res->status == 429) {
            last_error = "server status " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw TransportError("chat endpoint returned status " + std::to_string(res->status) +
                                 ": " + res->body);
        }
        json parsed = json::parse(res->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.contains("choices") || parsed["choices"].empty()) {
            throw TransportError("chat endpoint returned malformed JSON");
        }
        return parsed["choices"][0].at("message").at("content").get<std::string>();
    }
    throw TransportError("chat request failed after retries: " + last_error);
}

}  // namespace give

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "give/kg.hpp"

namespace give {

using Vec = std::vector<float>;

// Cosine similarity in double precision. Throws ValidationError on dimension
// mismatch or zero vectors (undefined similarity).
double cosine(const Vec& u, const Vec& v);

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    // Stable encoder identity; part of every cache key.
    virtual std::string id() const = 0;
    // One vector per input text, in order.
    virtual std::vector<Vec> embed(const std::vector<std::string>& texts) = 0;
};

// Deterministic offline encoder: every component is derived from a 64-bit
// hash of (text, component index), then the vector is scaled to unit norm.
// The rule is fixed so tests can recompute vectors independently.
class HashEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HashEmbeddingProvider(std::size_t dim = 32);
    std::string id() const override;
    std::vector<Vec> embed(const std::vector<std::string>& texts) override;

    static Vec embed_one(std::string_view text, std::size_t dim);

private:
    std::size_t dim_;
};

struct HttpEmbeddingConfig {
    std::string base_url;            // e.g. http://127.0.0.1:8080
    std::string path = "/v1/embeddings";
    std::string model;
    std::size_t batch_size = 64;
    int retries = 2;
    int backoff_ms = 250;
    std::string api_key_env = "GIVE_API_KEY";
};

// JSON-over-HTTP encoder. Request {model, input:[...]}, response
// {data:[{index, embedding:[...]}]}.
class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HttpEmbeddingProvider(HttpEmbeddingConfig cfg);
    std::string id() const override;
    std::vector<Vec> embed(const std::vector<std::string>& texts) override;

private:
    HttpEmbeddingConfig cfg_;
};

// Persistent vector cache keyed by (provider id, SHA-256 of text). Records
// are appended whole and flushed one at a time; a truncated tail record is
// skipped on load. In-memory only when constructed without a path.
class EmbeddingCache {
public:
    EmbeddingCache() = default;
    explicit EmbeddingCache(const std::filesystem::path& path);

    std::optional<Vec> lookup(const std::string& provider_id, const std::string& text) const;
    void store(const std::string& provider_id, const std::string& text, const Vec& v);

    std::size_t size() const;

private:
    static std::string key_of(const std::string& provider_id, const std::string& text);

    mutable std::mutex mu_;
    std::unordered_map<std::string, Vec> entries_;
    std::filesystem::path path_;  // empty => memory only
};

// Cache-through batch embedding. Texts already cached never reach the
// provider; repeated texts within one call are embedded once.
std::vector<Vec> embed_batch(const std::vector<std::string>& texts, EmbeddingProvider& provider,
                             EmbeddingCache* cache);

struct ScoredKey {
    std::string key;
    double score;
};

struct TopPResult {
    std::vector<ScoredKey> hits;
    bool clamped = false;  // p exceeded the number of eligible keys
};

// Immutable exhaustive-scan similarity index. Exact by construction; entity
// counts at this scale never justify an ANN structure.
class SimilarityIndex {
public:
    SimilarityIndex() = default;

    static SimilarityIndex build(std::vector<std::string> keys, EmbeddingProvider& provider,
                                 EmbeddingCache* cache);

    // The p highest-cosine keys, descending score, ties broken by
    // lexicographic key. A key equal to the query text is excluded.
    TopPResult top_p_similar(const std::string& query_text, std::size_t p,
                             EmbeddingProvider& provider, EmbeddingCache* cache) const;

    std::size_t size() const { return keys_.size(); }
    const std::vector<std::string>& keys() const { return keys_; }
    const std::vector<Vec>& vectors() const { return vectors_; }
    const std::string& provider_id() const { return provider_id_; }
    std::size_t dimension() const { return vectors_.empty() ? 0 : vectors_[0].size(); }

private:
    std::vector<std::string> keys_;
    std::vector<Vec> vectors_;
    std::string provider_id_;
};

// Index over E_G (one key per entity).
SimilarityIndex build_entity_index(const KnowledgeGraph& kg, EmbeddingProvider& provider,
                                   EmbeddingCache* cache);

// Index over verbalized edges ("subject relation object"); RAG baseline only.
SimilarityIndex build_triple_index(const KnowledgeGraph& kg, EmbeddingProvider& provider,
                                   EmbeddingCache* cache);

}  // namespace give

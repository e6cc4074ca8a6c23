#include "give/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "give/errors.hpp"
#include "give/util.hpp"

namespace give {

double cosine(const Vec& u, const Vec& v) {
    if (u.size() != v.size()) throw ValidationError("cosine: dimension mismatch");
    if (u.empty()) throw ValidationError("cosine: empty vectors");
    double dot = 0, nu = 0, nv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += static_cast<double>(u[i]) * v[i];
        nu += static_cast<double>(u[i]) * u[i];
        nv += static_cast<double>(v[i]) * v[i];
    }
    if (nu == 0.0 || nv == 0.0) {
        throw ValidationError("cosine: similarity undefined for zero vector");
    }
    double c = dot / (std::sqrt(nu) * std::sqrt(nv));
    return std::clamp(c, -1.0, 1.0);
}

HashEmbeddingProvider::HashEmbeddingProvider(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) throw ValidationError("embedding dimension must be positive");
}

std::string HashEmbeddingProvider::id() const {
    return "hash-" + std::to_string(dim_);
}

Vec HashEmbeddingProvider::embed_one(std::string_view text, std::size_t dim) {
    Vec v(dim);
    double norm = 0;
    for (std::size_t j = 0; j < dim; ++j) {
        std::uint64_t h = fnv1a64(std::string(text) + "\x1f" + std::to_string(j));
        // top 53 bits -> [0,1) -> [-1,1)
        double u = static_cast<double>(h >> 11) * 0x1p-53;
        v[j] = static_cast<float>(2.0 * u - 1.0);
        norm += static_cast<double>(v[j]) * v[j];
    }
    if (norm == 0.0) {
        v[0] = 1.0f;
        norm = 1.0;
    }
    float inv = static_cast<float>(1.0 / std::sqrt(norm));
    for (auto& x : v) x *= inv;
    return v;
}

std::vector<Vec> HashEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    std::vector<Vec> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(t, dim_));
    return out;
}

EmbeddingCache::EmbeddingCache(const std::filesystem::path& path) : path_(path) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) return;  // fresh cache file
    while (true) {
        std::uint16_t id_len = 0;
        if (!in.read(reinterpret_cast<char*>(&id_len), sizeof id_len)) break;
        std::string pid(id_len, '\0');
        if (!in.read(pid.data(), id_len)) break;
        char hash[32];
        if (!in.read(hash, sizeof hash)) break;
        std::uint32_t dim = 0;
        if (!in.read(reinterpret_cast<char*>(&dim), sizeof dim)) break;
        Vec v(dim);
        if (!in.read(reinterpret_cast<char*>(v.data()), std::streamsize(dim) * 4)) break;
        entries_[pid + ":" + std::string(hash, 32)] = std::move(v);
    }
}

std::string EmbeddingCache::key_of(const std::string& provider_id, const std::string& text) {
    auto h = sha256_bytes(text);
    return provider_id + ":" + std::string(reinterpret_cast<const char*>(h.data()), h.size());
}

std::optional<Vec> EmbeddingCache::lookup(const std::string& provider_id,
                                          const std::string& text) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key_of(provider_id, text));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void EmbeddingCache::store(const std::string& provider_id, const std::string& text,
                           const Vec& v) {
    std::lock_guard lock(mu_);
    auto key = key_of(provider_id, text);
    auto [it, inserted] = entries_.emplace(key, v);
    if (!inserted) return;
    if (path_.empty()) return;

    // Serialize the whole record, then append it with a single write.
    std::string rec;
    auto put = [&rec](const void* p, std::size_t n) {
        rec.append(reinterpret_cast<const char*>(p), n);
    };
    auto id_len = static_cast<std::uint16_t>(provider_id.size());
    put(&id_len, sizeof id_len);
    rec += provider_id;
    auto hash = sha256_bytes(text);
    put(hash.data(), hash.size());
    auto dim = static_cast<std::uint32_t>(v.size());
    put(&dim, sizeof dim);
    put(v.data(), v.size() * 4);

    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw Error("cannot append to embedding cache: " + path_.string());
    out.write(rec.data(), std::streamsize(rec.size()));
    out.flush();
}

std::size_t EmbeddingCache::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

std::vector<Vec> embed_batch(const std::vector<std::string>& texts, EmbeddingProvider& provider,
                             EmbeddingCache* cache) {
    for (const auto& t : texts) {
        if (t.empty()) throw ValidationError("embed_batch: empty text");
    }
    std::vector<Vec> out(texts.size());
    std::vector<char> done(texts.size(), 0);

    if (cache) {
        for (std::size_t i = 0; i < texts.size(); ++i) {
            if (auto hit = cache->lookup(provider.id(), texts[i])) {
                out[i] = std::move(*hit);
                done[i] = 1;
            }
        }
    }

    std::vector<std::string> missing;
    std::unordered_map<std::string, std::size_t> missing_pos;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (!done[i] && !missing_pos.count(texts[i])) {
            missing_pos.emplace(texts[i], missing.size());
            missing.push_back(texts[i]);
        }
    }
    if (!missing.empty()) {
        auto vecs = provider.embed(missing);
        if (vecs.size() != missing.size()) {
            throw IntegrityError("provider returned wrong number of vectors");
        }
        for (std::size_t i = 0; i < texts.size(); ++i) {
            if (done[i]) continue;
            out[i] = vecs[missing_pos.at(texts[i])];
        }
        if (cache) {
            for (std::size_t i = 0; i < missing.size(); ++i) {
                cache->store(provider.id(), missing[i], vecs[i]);
            }
        }
    }

    std::size_t dim = out.empty() ? 0 : out[0].size();
    for (const auto& v : out) {
        if (v.size() != dim) throw IntegrityError("mixed embedding dimensions in one batch");
    }
    return out;
}

SimilarityIndex SimilarityIndex::build(std::vector<std::string> keys,
                                       EmbeddingProvider& provider, EmbeddingCache* cache) {
    // Keep first occurrence; duplicate keys are not allowed in an index.
    std::vector<std::string> unique_keys;
    std::unordered_map<std::string, bool> seen;
    unique_keys.reserve(keys.size());
    for (auto& k : keys) {
        if (seen.emplace(k, true).second) unique_keys.push_back(std::move(k));
    }

    SimilarityIndex idx;
    idx.provider_id_ = provider.id();
    idx.vectors_ = embed_batch(unique_keys, provider, cache);
    idx.keys_ = std::move(unique_keys);
    return idx;
}

TopPResult SimilarityIndex::top_p_similar(const std::string& query_text, std::size_t p,
                                          EmbeddingProvider& provider,
                                          EmbeddingCache* cache) const {
    TopPResult res;
    if (p == 0 || keys_.empty()) {
        res.clamped = keys_.empty() && p > 0;
        return res;
    }
    Vec q = embed_batch({query_text}, provider, cache).at(0);
    if (!vectors_.empty() && q.size() != vectors_[0].size()) {
        throw IntegrityError("query embedding dimension does not match index");
    }

    std::vector<ScoredKey> scored;
    scored.reserve(keys_.size());
    for (std::size_t i = 0; i < keys_.size(); ++i) {
        if (keys_[i] == query_text) continue;  // Eq-style self match is excluded
        scored.push_back({keys_[i], cosine(q, vectors_[i])});
    }
    std::sort(scored.begin(), scored.end(), [](const ScoredKey& a, const ScoredKey& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.key < b.key;
    });
    if (p >= scored.size()) {
        res.clamped = p > scored.size();
        res.hits = std::move(scored);
    } else {
        res.hits.assign(scored.begin(), scored.begin() + std::ptrdiff_t(p));
    }
    return res;
}

SimilarityIndex build_entity_index(const KnowledgeGraph& kg, EmbeddingProvider& provider,
                                   EmbeddingCache* cache) {
    return SimilarityIndex::build(kg.entities(), provider, cache);
}

SimilarityIndex build_triple_index(const KnowledgeGraph& kg, EmbeddingProvider& provider,
                                   EmbeddingCache* cache) {
    std::vector<std::string> keys;
    keys.reserve(kg.edge_count());
    for (std::size_t i = 0; i < kg.edge_count(); ++i) {
        keys.push_back(verbalize(kg.edge(i)));
    }
    return SimilarityIndex::build(std::move(keys), provider, cache);
}

}  // namespace give

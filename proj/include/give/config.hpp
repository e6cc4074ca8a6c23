#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "give/llm.hpp"
#include "give/pipeline.hpp"

namespace give {

// Everything a `run` needs, loadable from a JSON file with CLI overrides.
// Credentials are never stored here; backends read them from the
// environment variable named in api_key_env.
struct RunConfig {
    std::string kg_path;

    struct Embedding {
        std::string provider = "hash";  // hash | http
        std::size_t dim = 32;           // hash provider only
        std::string base_url;
        std::string path = "/v1/embeddings";
        std::string model;
        std::size_t batch_size = 64;
        int retries = 2;
        int backoff_ms = 250;
        std::string cache_path;  // empty => in-memory only
        std::string api_key_env = "GIVE_API_KEY";
    } embedding;

    struct Llm {
        std::string backend = "mock";  // mock | http
        std::string world_model_path;  // mock backend
        std::string base_url;
        std::string path = "/v1/chat/completions";
        std::string model;
        double temperature = 0.0;
        double top_p = 1.0;
        int retries = 2;
        int backoff_ms = 250;
        int max_in_flight = 4;
        std::string api_key_env = "GIVE_API_KEY";
    } llm;

    PipelineConfig pipeline;

    struct Bench {
        std::string format = "yes_no_maybe";
        std::size_t k_shot = 0;       // 0 disables few-shot blocks
        std::string k_shot_path;
        std::size_t rag_k = 10;
        std::vector<double> bucket_edges = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    } bench;

    std::string prompt_dir;  // optional template overrides
    std::string output_dir = "out";
    std::uint64_t seed = 0;  // reserved for sampling-style commands

    static RunConfig from_file(const std::filesystem::path& path);
    static RunConfig from_json_text(const std::string& text);
    std::string to_json() const;  // effective-config snapshot

    // Checks that every referenced input path exists.
    void validate() const;
};

}  // namespace give

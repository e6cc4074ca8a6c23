#include "give/config.hpp"

#include <json.hpp>

#include <fstream>

#include "give/errors.hpp"

namespace give {

using nlohmann::json;

namespace {

template <typename T>
void read_if(const json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError("config is not a JSON object");

    RunConfig cfg;
    read_if(j, "kg_path", cfg.kg_path);
    read_if(j, "prompt_dir", cfg.prompt_dir);
    read_if(j, "output_dir", cfg.output_dir);
    read_if(j, "seed", cfg.seed);

    if (j.contains("embedding")) {
        const auto& e = j["embedding"];
        read_if(e, "provider", cfg.embedding.provider);
        read_if(e, "dim", cfg.embedding.dim);
        read_if(e, "base_url", cfg.embedding.base_url);
        read_if(e, "path", cfg.embedding.path);
        read_if(e, "model", cfg.embedding.model);
        read_if(e, "batch_size", cfg.embedding.batch_size);
        read_if(e, "retries", cfg.embedding.retries);
        read_if(e, "backoff_ms", cfg.embedding.backoff_ms);
        read_if(e, "cache_path", cfg.embedding.cache_path);
        read_if(e, "api_key_env", cfg.embedding.api_key_env);
    }
    if (j.contains("llm")) {
        const auto& l = j["llm"];
        read_if(l, "backend", cfg.llm.backend);
        read_if(l, "world_model_path", cfg.llm.world_model_path);
        read_if(l, "base_url", cfg.llm.base_url);
        read_if(l, "path", cfg.llm.path);
        read_if(l, "model", cfg.llm.model);
        read_if(l, "temperature", cfg.llm.temperature);
        read_if(l, "top_p", cfg.llm.top_p);
        read_if(l, "retries", cfg.llm.retries);
        read_if(l, "backoff_ms", cfg.llm.backoff_ms);
        read_if(l, "max_in_flight", cfg.llm.max_in_flight);
        read_if(l, "api_key_env", cfg.llm.api_key_env);
    }
    if (j.contains("pipeline")) {
        const auto& p = j["pipeline"];
        read_if(p, "p", cfg.pipeline.p);
        read_if(p, "batch_size", cfg.pipeline.probe_batch_size);
        read_if(p, "intermediate_groups", cfg.pipeline.intermediate_groups);
        read_if(p, "path_cap", cfg.pipeline.path_cap);
        read_if(p, "open_relation_limit", cfg.pipeline.open_relation_limit);
    }
    if (j.contains("bench")) {
        const auto& b = j["bench"];
        read_if(b, "format", cfg.bench.format);
        read_if(b, "k_shot", cfg.bench.k_shot);
        read_if(b, "k_shot_path", cfg.bench.k_shot_path);
        read_if(b, "rag_k", cfg.bench.rag_k);
        read_if(b, "bucket_edges", cfg.bench.bucket_edges);
    }
    cfg.pipeline.format = answer_format_from_string(cfg.bench.format);
    return cfg;
}

std::string RunConfig::to_json() const {
    json j{
        {"kg_path", kg_path},
        {"embedding",
         {{"provider", embedding.provider},
          {"dim", embedding.dim},
          {"base_url", embedding.base_url},
          {"path", embedding.path},
          {"model", embedding.model},
          {"batch_size", embedding.batch_size},
          {"retries", embedding.retries},
          {"backoff_ms", embedding.backoff_ms},
          {"cache_path", embedding.cache_path},
          {"api_key_env", embedding.api_key_env}}},
        {"llm",
         {{"backend", llm.backend},
          {"world_model_path", llm.world_model_path},
          {"base_url", llm.base_url},
          {"path", llm.path},
          {"model", llm.model},
          {"temperature", llm.temperature},
          {"top_p", llm.top_p},
          {"retries", llm.retries},
          {"backoff_ms", llm.backoff_ms},
          {"max_in_flight", llm.max_in_flight},
          {"api_key_env", llm.api_key_env}}},
        {"pipeline",
         {{"p", pipeline.p},
          {"batch_size", pipeline.probe_batch_size},
          {"intermediate_groups", pipeline.intermediate_groups},
          {"path_cap", pipeline.path_cap},
          {"open_relation_limit", pipeline.open_relation_limit}}},
        {"bench",
         {{"format", bench.format},
          {"k_shot", bench.k_shot},
          {"k_shot_path", bench.k_shot_path},
          {"rag_k", bench.rag_k},
          {"bucket_edges", bench.bucket_edges}}},
        {"prompt_dir", prompt_dir},
        {"output_dir", output_dir},
        {"seed", seed}};
    return j.dump(2) + "\n";
}

void RunConfig::validate() const {
    auto must_exist = [](const std::string& p, const char* what) {
        if (!p.empty() && !std::filesystem::exists(p)) {
            throw ValidationError(std::string(what) + " does not exist: " + p);
        }
    };
    if (kg_path.empty()) throw ValidationError("kg_path is required");
    must_exist(kg_path, "kg_path");
    if (llm.backend == "mock") {
        if (llm.world_model_path.empty()) {
            throw ValidationError("mock backend needs world_model_path");
        }
        must_exist(llm.world_model_path, "world_model_path");
    } else if (llm.backend == "http") {
        if (llm.base_url.empty()) throw ValidationError("http backend needs base_url");
    } else {
        throw ValidationError("unknown llm backend: " + llm.backend);
    }
    if (embedding.provider == "http") {
        if (embedding.base_url.empty()) {
            throw ValidationError("http embedding provider needs base_url");
        }
    } else if (embedding.provider != "hash") {
        throw ValidationError("unknown embedding provider: " + embedding.provider);
    }
    must_exist(prompt_dir, "prompt_dir");
    must_exist(bench.k_shot_path, "k_shot_path");
    answer_format_from_string(bench.format);
}

}  // namespace give

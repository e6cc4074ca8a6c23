// Operator entry point: ingest, sample, run, analyze.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "give/bench.hpp"
#include "give/config.hpp"
#include "give/errors.hpp"

namespace fs = std::filesystem;
using namespace give;

namespace {

struct Runtime {
    KnowledgeGraph kg;
    std::unique_ptr<EmbeddingProvider> provider;
    std::unique_ptr<EmbeddingCache> cache;
    SimilarityIndex entity_index;
    SimilarityIndex triple_index;
    std::unique_ptr<MockWorldModel> world;
    std::unique_ptr<ChatBackend> backend;
    PromptRegistry registry = PromptRegistry::builtin();
    std::vector<KShotExample> examples;
};

Runtime make_runtime(const RunConfig& cfg, bool need_triple_index) {
    Runtime rt;
    rt.kg = KnowledgeGraph::load(cfg.kg_path);

    if (cfg.embedding.provider == "hash") {
        rt.provider = std::make_unique<HashEmbeddingProvider>(cfg.embedding.dim);
    } else {
        HttpEmbeddingConfig ec;
        ec.base_url = cfg.embedding.base_url;
        ec.path = cfg.embedding.path;
        ec.model = cfg.embedding.model;
        ec.batch_size = cfg.embedding.batch_size;
        ec.retries = cfg.embedding.retries;
        ec.backoff_ms = cfg.embedding.backoff_ms;
        ec.api_key_env = cfg.embedding.api_key_env;
        rt.provider = std::make_unique<HttpEmbeddingProvider>(ec);
    }
    rt.cache = cfg.embedding.cache_path.empty()
                   ? std::make_unique<EmbeddingCache>()
                   : std::make_unique<EmbeddingCache>(cfg.embedding.cache_path);

    rt.entity_index = build_entity_index(rt.kg, *rt.provider, rt.cache.get());
    if (need_triple_index) {
        rt.triple_index = build_triple_index(rt.kg, *rt.provider, rt.cache.get());
    }

    if (cfg.llm.backend == "mock") {
        rt.world = std::make_unique<MockWorldModel>(MockWorldModel::load(cfg.llm.world_model_path));
        rt.backend = std::make_unique<MockChatBackend>(*rt.world);
    } else {
        HttpChatConfig cc;
        cc.base_url = cfg.llm.base_url;
        cc.path = cfg.llm.path;
        cc.model = cfg.llm.model;
        cc.temperature = cfg.llm.temperature;
        cc.top_p = cfg.llm.top_p;
        cc.retries = cfg.llm.retries;
        cc.backoff_ms = cfg.llm.backoff_ms;
        cc.max_in_flight = cfg.llm.max_in_flight;
        cc.api_key_env = cfg.llm.api_key_env;
        rt.backend = std::make_unique<HttpChatBackend>(cc);
    }

    if (!cfg.prompt_dir.empty()) rt.registry.load_overrides(cfg.prompt_dir);
    if (!cfg.bench.k_shot_path.empty()) rt.examples = load_examples(cfg.bench.k_shot_path);
    return rt;
}

int cmd_ingest(const std::string& kg_path) {
    KnowledgeGraph kg = KnowledgeGraph::load(kg_path);
    std::cout << kg.entity_count() << " entities, " << kg.relation_count() << " relations, "
              << kg.edge_count() << " edges\n";
    return 0;
}

int cmd_sample(const std::string& kg_path, double fraction, std::uint64_t seed,
               const std::string& out_path) {
    KnowledgeGraph kg = KnowledgeGraph::load(kg_path);
    KnowledgeGraph sampled = kg.sample_edges(fraction, seed);
    sampled.save(out_path);
    std::cout << "sampled " << sampled.edge_count() << " of " << kg.edge_count() << " edges ("
              << sampled.entity_count() << " entities) -> " << out_path << "\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& dataset_path,
            const std::string& method_name, const std::string& out_dir_override) {
    RunConfig cfg = RunConfig::from_file(config_path);
    if (!out_dir_override.empty()) cfg.output_dir = out_dir_override;
    cfg.validate();
    Method method = method_from_string(method_name);

    auto format = answer_format_from_string(cfg.bench.format);
    auto items = load_dataset(dataset_path, format);

    Runtime rt = make_runtime(cfg, method == Method::rag);

    BenchContext bctx;
    bctx.pipeline.kg = &rt.kg;
    bctx.pipeline.entity_index = &rt.entity_index;
    bctx.pipeline.provider = rt.provider.get();
    bctx.pipeline.cache = rt.cache.get();
    bctx.pipeline.backend = rt.backend.get();
    bctx.pipeline.registry = &rt.registry;
    bctx.pipeline.gateway.examples = rt.examples;
    bctx.pipeline.gateway.k_shot = cfg.bench.k_shot;
    bctx.pipeline.config = cfg.pipeline;
    bctx.triple_index = &rt.triple_index;
    bctx.rag_k = cfg.bench.rag_k;

    EvalResult result = evaluate(method, items, bctx);

    fs::create_directories(cfg.output_dir);
    {
        std::ofstream out(fs::path(cfg.output_dir) / "results.jsonl", std::ios::binary);
        out << results_to_jsonl(result, items);
    }
    {
        std::ofstream out(fs::path(cfg.output_dir) / "summary.json", std::ios::binary);
        out << summary_to_json(result, cfg.bench.bucket_edges);
    }
    {
        std::ofstream out(fs::path(cfg.output_dir) / "config_snapshot.json", std::ios::binary);
        out << cfg.to_json();
    }
    std::cout << "method " << result.method_id << ": accuracy " << result.accuracy << " ("
              << result.per_item.size() << "/" << result.dataset_size << " evaluated, "
              << result.failures.size() << " failures)\n";
    std::cout << "wrote " << (fs::path(cfg.output_dir) / "results.jsonl").string() << "\n";
    return 0;
}

int cmd_analyze(const std::vector<std::string>& results_paths,
                const std::vector<double>& bucket_edges, const std::string& out_path) {
    if (results_paths.empty()) throw ValidationError("analyze needs at least one results file");

    nlohmann::json report = nlohmann::json::object();
    std::vector<EvalResult> results;
    results.reserve(results_paths.size());
    for (const auto& p : results_paths) results.push_back(load_results_jsonl(p));

    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        nlohmann::json entry{{"file", results_paths[i]},
                             {"method", r.method_id},
                             {"dataset_size", r.dataset_size},
                             {"accuracy", r.accuracy}};
        auto stats = group_statistics(r);
        if (stats.questions > 0) {
            entry["group_statistics"] = {
                {"questions", stats.questions},
                {"avg_groups", stats.avg_groups},
                {"avg_candidate_relations_per_pair", stats.avg_candidate_relations_per_pair},
                {"pct_intermediate", stats.pct_intermediate}};
            nlohmann::json buckets = nlohmann::json::array();
            for (const auto& row : expert_ratio_buckets(r, bucket_edges)) {
                buckets.push_back({{"bucket", row.label},
                                   {"count", row.count},
                                   {"correct", row.correct},
                                   {"accuracy", row.accuracy}});
            }
            entry["expert_ratio_buckets"] = buckets;
        }
        report["results"].push_back(entry);
    }

    if (results.size() == 2) {
        auto q = overlap_analysis(results[0], results[1]);
        report["overlap"] = {{"both", q.both},
                             {"only_a", q.only_a},
                             {"only_b", q.only_b},
                             {"neither", q.neither}};
    }

    std::string text = report.dump(2) + "\n";
    std::cout << text;
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        out << text;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GIVE: graph-inspired veracity extrapolation over sparse knowledge graphs"};
    app.require_subcommand(1);

    std::string kg_path, out_path, config_path, dataset_path, method = "give_ace", out_dir;
    double fraction = 1.0;
    std::uint64_t seed = 0;
    std::vector<std::string> results_paths;
    std::vector<double> bucket_edges = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};

    auto* ingest = app.add_subcommand("ingest", "Load a KG file and print its stats");
    ingest->add_option("--kg", kg_path, "KG TSV file")->required();

    auto* sample = app.add_subcommand("sample", "Sample a fraction of KG edges");
    sample->add_option("--kg", kg_path, "KG TSV file")->required();
    sample->add_option("--fraction", fraction, "fraction of edges to keep, in (0,1]")
        ->required();
    sample->add_option("--seed", seed, "sampling seed");
    sample->add_option("--out", out_path, "output TSV path")->required();

    auto* run = app.add_subcommand("run", "Evaluate a method over a QA dataset");
    run->add_option("--config", config_path, "run config JSON")->required();
    run->add_option("--dataset", dataset_path, "QA dataset JSONL")->required();
    run->add_option("--method", method, "io|cot|rag|give_a|give_ac|give_ace");
    run->add_option("--out", out_dir, "output directory (overrides config)");

    auto* analyze = app.add_subcommand("analyze", "Aggregate metrics from results files");
    analyze->add_option("results", results_paths, "results.jsonl files (1 or 2)")->required();
    analyze->add_option("--buckets", bucket_edges, "expert-ratio bucket edges");
    analyze->add_option("--out", out_path, "also write the report JSON here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) return cmd_ingest(kg_path);
        if (sample->parsed()) return cmd_sample(kg_path, fraction, seed, out_path);
        if (run->parsed()) return cmd_run(config_path, dataset_path, method, out_dir);
        if (analyze->parsed()) return cmd_analyze(results_paths, bucket_edges, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

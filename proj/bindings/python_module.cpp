// Python bindings for the core operations: KG loading/sampling/queries,
// similarity search, and mock-backend pipeline runs.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <json.hpp>

#include "give/bench.hpp"
#include "give/config.hpp"

namespace py = pybind11;
using namespace give;

namespace {

py::object json_to_py(const nlohmann::json& j) {
    auto json_mod = py::module_::import("json");
    return json_mod.attr("loads")(j.dump());
}

// Bundles the shared state one mock run needs; mirrors the CLI runtime.
struct MockPipeline {
    KnowledgeGraph kg;
    MockWorldModel world;
    HashEmbeddingProvider provider;
    EmbeddingCache cache;
    SimilarityIndex entity_index;
    SimilarityIndex triple_index;
    MockChatBackend backend;
    PromptRegistry registry;
    PipelineConfig config;

    MockPipeline(const std::string& kg_path, const std::string& world_path, std::size_t p,
                 std::size_t batch_size, bool intermediates, std::size_t dim)
        : kg(KnowledgeGraph::load(kg_path)),
          world(MockWorldModel::load(world_path)),
          provider(dim),
          backend(world),
          registry(PromptRegistry::builtin()) {
        entity_index = build_entity_index(kg, provider, &cache);
        triple_index = build_triple_index(kg, provider, &cache);
        config.p = p;
        config.probe_batch_size = batch_size;
        config.intermediate_groups = intermediates;
    }

    PipelineContext context() {
        PipelineContext ctx;
        ctx.kg = &kg;
        ctx.entity_index = &entity_index;
        ctx.provider = &provider;
        ctx.cache = &cache;
        ctx.backend = &backend;
        ctx.registry = &registry;
        ctx.config = config;
        return ctx;
    }

    py::object run(const std::string& question, const std::string& format,
                   const std::string& id) {
        auto ctx = context();
        ctx.config.format = answer_format_from_string(format);
        QueryRecord rec = run_query(question, ctx, id);
        return json_to_py(nlohmann::json::parse(to_json_line(rec)));
    }

    py::object evaluate_method(const std::string& method, const std::string& dataset_path,
                               const std::string& format) {
        auto items = load_dataset(dataset_path, answer_format_from_string(format));
        BenchContext bctx;
        bctx.pipeline = context();
        bctx.triple_index = &triple_index;
        EvalResult res = evaluate(method_from_string(method), items, bctx);
        nlohmann::json j{{"method", res.method_id},
                         {"accuracy", res.accuracy},
                         {"dataset_size", res.dataset_size},
                         {"results_jsonl", results_to_jsonl(res, items)}};
        return json_to_py(j);
    }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Graph-inspired veracity extrapolation over sparse knowledge graphs";

    py::class_<Triple>(m, "Triple")
        .def(py::init([](const std::string& s, const std::string& r, const std::string& o) {
                 return make_triple(s, r, o);
             }),
             py::arg("subject"), py::arg("relation"), py::arg("object"))
        .def_readonly("subject", &Triple::subject)
        .def_readonly("relation", &Triple::relation)
        .def_readonly("object", &Triple::object)
        .def("__repr__", [](const Triple& t) { return tuple_form(t); })
        .def("__eq__", [](const Triple& a, const Triple& b) { return a == b; })
        .def("__hash__", [](const Triple& t) { return py::hash(py::str(verbalize(t))); });

    py::class_<Path2>(m, "Path2")
        .def_readonly("src", &Path2::src)
        .def_readonly("rel1", &Path2::rel1)
        .def_readonly("mid", &Path2::mid)
        .def_readonly("rel2", &Path2::rel2)
        .def_readonly("dst", &Path2::dst)
        .def("__repr__", [](const Path2& p) { return tuple_form(p); });

    py::class_<KnowledgeGraph>(m, "KnowledgeGraph")
        .def_static("load", &KnowledgeGraph::load, py::arg("path"))
        .def_static("from_triples", &KnowledgeGraph::from_triples, py::arg("triples"))
        .def("save", &KnowledgeGraph::save, py::arg("path"))
        .def("sample_edges", &KnowledgeGraph::sample_edges, py::arg("fraction"), py::arg("seed"))
        .def_property_readonly("entity_count", &KnowledgeGraph::entity_count)
        .def_property_readonly("relation_count", &KnowledgeGraph::relation_count)
        .def_property_readonly("edge_count", &KnowledgeGraph::edge_count)
        .def("entities", &KnowledgeGraph::entities)
        .def("relations", &KnowledgeGraph::relations)
        .def("edges", &KnowledgeGraph::all_edges)
        .def("contains_entity", [](const KnowledgeGraph& g, const std::string& e) {
            return g.contains_entity(e);
        })
        .def("contains_edge", &KnowledgeGraph::contains_edge)
        .def("relations_between", &KnowledgeGraph::relations_between, py::arg("subjects"),
             py::arg("objects"))
        .def("edges_between", &KnowledgeGraph::edges_between, py::arg("subjects"),
             py::arg("objects"))
        .def("two_hop_paths", &KnowledgeGraph::two_hop_paths, py::arg("subjects"),
             py::arg("objects"), py::arg("cap") = 50);

    m.def("cosine", &cosine, py::arg("u"), py::arg("v"));

    py::class_<HashEmbeddingProvider>(m, "HashEmbeddingProvider")
        .def(py::init<std::size_t>(), py::arg("dim") = 32)
        .def("id", &HashEmbeddingProvider::id)
        .def("embed", &HashEmbeddingProvider::embed, py::arg("texts"));

    py::class_<SimilarityIndex>(m, "SimilarityIndex")
        .def_static(
            "build",
            [](std::vector<std::string> keys, HashEmbeddingProvider& provider) {
                return SimilarityIndex::build(std::move(keys), provider, nullptr);
            },
            py::arg("keys"), py::arg("provider"))
        .def("top_p_similar",
             [](const SimilarityIndex& idx, const std::string& query, std::size_t p,
                HashEmbeddingProvider& provider) {
                 auto res = idx.top_p_similar(query, p, provider, nullptr);
                 std::vector<std::pair<std::string, double>> hits;
                 for (auto& h : res.hits) hits.emplace_back(h.key, h.score);
                 return py::make_tuple(hits, res.clamped);
             },
             py::arg("query"), py::arg("p"), py::arg("provider"))
        .def_property_readonly("size", &SimilarityIndex::size)
        .def("keys", &SimilarityIndex::keys);

    py::class_<MockPipeline>(m, "MockPipeline")
        .def(py::init<const std::string&, const std::string&, std::size_t, std::size_t, bool,
                      std::size_t>(),
             py::arg("kg_path"), py::arg("world_path"), py::arg("p") = 2,
             py::arg("batch_size") = 1, py::arg("intermediate_groups") = true,
             py::arg("dim") = 32)
        .def("run_query", &MockPipeline::run, py::arg("question"),
             py::arg("format") = "yes_no_maybe", py::arg("id") = "")
        .def("evaluate", &MockPipeline::evaluate_method, py::arg("method"),
             py::arg("dataset_path"), py::arg("format") = "yes_no");
}

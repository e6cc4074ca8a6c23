#include "give/kg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "give/errors.hpp"
#include "give/util.hpp"

namespace give {

Triple make_triple(std::string_view s, std::string_view r, std::string_view o) {
    Triple t{normalize_name(s), normalize_name(r), normalize_name(o)};
    if (t.subject.empty() || t.relation.empty() || t.object.empty()) {
        throw ValidationError("triple field empty after normalization");
    }
    return t;
}

std::string verbalize(const Triple& t) {
    return t.subject + " " + t.relation + " " + t.object;
}

std::string tuple_form(const Triple& t) {
    return "('" + t.subject + "', '" + t.relation + "', '" + t.object + "')";
}

std::string tuple_form(const Path2& p) {
    return "(" + p.src + ", " + p.rel1 + ", " + p.mid + ", " + p.rel2 + ", " + p.dst + ")";
}

namespace {

// Interns strings on first appearance; ids are remapped to lexicographic
// ranks when the graph is finalized.
struct Interner {
    std::vector<std::string> names;
    std::unordered_map<std::string, std::uint32_t> ids;

    std::uint32_t intern(std::string&& s) {
        auto it = ids.find(s);
        if (it != ids.end()) return it->second;
        auto id = static_cast<std::uint32_t>(names.size());
        names.push_back(s);
        ids.emplace(std::move(s), id);
        return id;
    }
};

std::vector<std::uint32_t> lexicographic_ranks(const std::vector<std::string>& names) {
    std::vector<std::uint32_t> order(names.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return names[a] < names[b]; });
    std::vector<std::uint32_t> rank(names.size());
    for (std::uint32_t pos = 0; pos < order.size(); ++pos) rank[order[pos]] = pos;
    return rank;
}

}  // namespace

struct GraphBuilder {
    Interner ents;
    Interner rels;
    struct Rec {
        std::uint32_t s, r, o;
    };
    std::vector<Rec> edges;

    void add(std::string&& s, std::string&& r, std::string&& o) {
        edges.push_back({ents.intern(std::move(s)), rels.intern(std::move(r)),
                         ents.intern(std::move(o))});
    }
};

KnowledgeGraph KnowledgeGraph::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open KG file: " + path.string());

    GraphBuilder b;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (trim(line).empty()) continue;
        auto fields = split(line, '\t');
        if (fields.size() != 3) {
            throw ParseError("expected 3 tab-separated fields, got " +
                                 std::to_string(fields.size()),
                             lineno);
        }
        std::string s = normalize_name(fields[0]);
        std::string r = normalize_name(fields[1]);
        std::string o = normalize_name(fields[2]);
        if (s.empty() || r.empty() || o.empty()) {
            throw ParseError("empty field after normalization", lineno);
        }
        b.add(std::move(s), std::move(r), std::move(o));
    }
    if (b.edges.empty()) {
        throw EmptyGraphError("no triples in " + path.string());
    }

    KnowledgeGraph g;
    g.finalize(std::move(b));
    return g;
}

KnowledgeGraph KnowledgeGraph::from_triples(const std::vector<Triple>& triples) {
    GraphBuilder b;
    for (const auto& t : triples) {
        Triple n = make_triple(t.subject, t.relation, t.object);
        b.add(std::move(n.subject), std::move(n.relation), std::move(n.object));
    }
    KnowledgeGraph g;
    g.finalize(std::move(b));
    return g;
}

void KnowledgeGraph::finalize(GraphBuilder&& b) {
    auto erank = lexicographic_ranks(b.ents.names);
    auto rrank = lexicographic_ranks(b.rels.names);

    entities_.resize(b.ents.names.size());
    for (std::uint32_t old = 0; old < b.ents.names.size(); ++old) {
        entities_[erank[old]] = std::move(b.ents.names[old]);
    }
    relations_.resize(b.rels.names.size());
    for (std::uint32_t old = 0; old < b.rels.names.size(); ++old) {
        relations_[rrank[old]] = std::move(b.rels.names[old]);
    }

    edges_.reserve(b.edges.size());
    for (const auto& e : b.edges) {
        edges_.push_back({erank[e.s], rrank[e.r], erank[e.o]});
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

    entity_ids_.reserve(entities_.size());
    for (std::uint32_t i = 0; i < entities_.size(); ++i) {
        entity_ids_.emplace(std::string_view(entities_[i]), i);
    }
    relation_ids_.reserve(relations_.size());
    for (std::uint32_t i = 0; i < relations_.size(); ++i) {
        relation_ids_.emplace(std::string_view(relations_[i]), i);
    }

    by_subject_.assign(entities_.size(), {});
    by_object_.assign(entities_.size(), {});
    for (std::uint32_t i = 0; i < edges_.size(); ++i) {
        by_subject_[edges_[i].s].push_back(i);
        by_object_[edges_[i].o].push_back(i);
    }
}

void KnowledgeGraph::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write KG file: " + path.string());
    out << serialize();
}

std::string KnowledgeGraph::serialize() const {
    std::string out;
    for (const auto& e : edges_) {
        out += entities_[e.s];
        out += '\t';
        out += relations_[e.r];
        out += '\t';
        out += entities_[e.o];
        out += '\n';
    }
    return out;
}

KnowledgeGraph KnowledgeGraph::sample_edges(double fraction, std::uint64_t seed) const {
    if (!(fraction > 0.0) || fraction > 1.0) {
        throw ValidationError("sample fraction must be in (0, 1]");
    }
    const std::size_t n = edges_.size();
    const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));

    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    // Partial Fisher-Yates. Modulo reduction keeps the draw sequence
    // identical across standard libraries (uniform_int_distribution is not
    // bit-specified).
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < k && n > 0; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
        std::swap(idx[i], idx[j]);
    }

    GraphBuilder b;
    for (std::size_t i = 0; i < k; ++i) {
        const auto& e = edges_[idx[i]];
        b.add(std::string(entities_[e.s]), std::string(relations_[e.r]),
              std::string(entities_[e.o]));
    }
    KnowledgeGraph g;
    g.finalize(std::move(b));
    return g;
}

Triple KnowledgeGraph::edge(std::size_t i) const {
    const auto& e = edges_.at(i);
    return Triple{entities_[e.s], relations_[e.r], entities_[e.o]};
}

std::vector<Triple> KnowledgeGraph::all_edges() const {
    std::vector<Triple> out;
    out.reserve(edges_.size());
    for (std::size_t i = 0; i < edges_.size(); ++i) out.push_back(edge(i));
    return out;
}

std::int64_t KnowledgeGraph::entity_id(std::string_view name) const {
    auto it = entity_ids_.find(name);
    return it == entity_ids_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

bool KnowledgeGraph::contains_entity(std::string_view name) const {
    return entity_ids_.count(name) > 0;
}

bool KnowledgeGraph::contains_relation(std::string_view name) const {
    return relation_ids_.count(name) > 0;
}

bool KnowledgeGraph::contains_edge(const Triple& t) const {
    auto s = entity_ids_.find(t.subject);
    auto r = relation_ids_.find(t.relation);
    auto o = entity_ids_.find(t.object);
    if (s == entity_ids_.end() || r == relation_ids_.end() || o == entity_ids_.end()) {
        return false;
    }
    EdgeRec rec{s->second, r->second, o->second};
    return std::binary_search(edges_.begin(), edges_.end(), rec);
}

std::size_t KnowledgeGraph::degree(std::string_view entity) const {
    auto id = entity_id(entity);
    if (id < 0) return 0;
    return by_subject_[id].size() + by_object_[id].size();
}

const std::vector<std::uint32_t>& KnowledgeGraph::edges_with_subject(
    std::string_view entity) const {
    static const std::vector<std::uint32_t> kEmpty;
    auto id = entity_id(entity);
    return id < 0 ? kEmpty : by_subject_[id];
}

const std::vector<std::uint32_t>& KnowledgeGraph::edges_with_object(
    std::string_view entity) const {
    static const std::vector<std::uint32_t> kEmpty;
    auto id = entity_id(entity);
    return id < 0 ? kEmpty : by_object_[id];
}

namespace {
// Sorted entity-id view of a name set; names absent from the graph drop out.
std::vector<std::uint32_t> resolve_ids(const KnowledgeGraph& g,
                                       const std::set<std::string>& names,
                                       const std::unordered_map<std::string_view, std::uint32_t>& ids) {
    (void)g;
    std::vector<std::uint32_t> out;
    out.reserve(names.size());
    for (const auto& n : names) {
        auto it = ids.find(n);
        if (it != ids.end()) out.push_back(it->second);
    }
    std::sort(out.begin(), out.end());
    return out;
}
}  // namespace

std::set<std::string> KnowledgeGraph::relations_between(const std::set<std::string>& A,
                                                        const std::set<std::string>& B) const {
    std::set<std::string> out;
    auto a_ids = resolve_ids(*this, A, entity_ids_);
    if (a_ids.empty() || B.empty()) return out;
    std::vector<char> in_b(entities_.size(), 0);
    bool any_b = false;
    for (const auto& n : B) {
        auto id = entity_id(n);
        if (id >= 0) {
            in_b[id] = 1;
            any_b = true;
        }
    }
    if (!any_b) return out;
    for (auto u : a_ids) {
        for (auto ei : by_subject_[u]) {
            if (in_b[edges_[ei].o]) out.insert(relations_[edges_[ei].r]);
        }
    }
    return out;
}

std::vector<Triple> KnowledgeGraph::edges_between(const std::set<std::string>& A,
                                                  const std::set<std::string>& B) const {
    std::vector<Triple> out;
    auto a_ids = resolve_ids(*this, A, entity_ids_);
    if (a_ids.empty() || B.empty()) return out;
    std::vector<char> in_b(entities_.size(), 0);
    for (const auto& n : B) {
        auto id = entity_id(n);
        if (id >= 0) in_b[id] = 1;
    }
    std::vector<EdgeRec> hits;
    for (auto u : a_ids) {
        for (auto ei : by_subject_[u]) {
            if (in_b[edges_[ei].o]) hits.push_back(edges_[ei]);
        }
    }
    std::sort(hits.begin(), hits.end());
    out.reserve(hits.size());
    for (const auto& e : hits) {
        out.push_back(Triple{entities_[e.s], relations_[e.r], entities_[e.o]});
    }
    return out;
}

std::vector<Path2> KnowledgeGraph::two_hop_paths(const std::set<std::string>& A,
                                                 const std::set<std::string>& B,
                                                 std::size_t cap) const {
    if (cap < 1) throw ValidationError("two_hop_paths cap must be >= 1");
    std::vector<Path2> out;
    auto a_ids = resolve_ids(*this, A, entity_ids_);
    if (a_ids.empty()) return out;
    std::vector<char> in_b(entities_.size(), 0);
    std::vector<char> in_ab(entities_.size(), 0);
    bool any_b = false;
    for (const auto& n : B) {
        auto id = entity_id(n);
        if (id >= 0) {
            in_b[id] = 1;
            in_ab[id] = 1;
            any_b = true;
        }
    }
    if (!any_b) return out;
    for (auto u : a_ids) in_ab[u] = 1;

    struct Rec {
        std::uint32_t e1, e2;
    };
    std::vector<Rec> hits;
    for (auto u : a_ids) {
        for (auto e1 : by_subject_[u]) {
            auto m = edges_[e1].o;
            if (in_ab[m]) continue;  // midpoints already grouped are degenerate
            for (auto e2 : by_subject_[m]) {
                if (in_b[edges_[e2].o]) hits.push_back({e1, e2});
            }
        }
    }
    std::sort(hits.begin(), hits.end(), [&](const Rec& a, const Rec& b) {
        const auto& x1 = edges_[a.e1];
        const auto& y1 = edges_[b.e1];
        if (x1 != y1) return x1 < y1;
        return edges_[a.e2] < edges_[b.e2];
    });
    if (hits.size() > cap) hits.resize(cap);
    out.reserve(hits.size());
    for (const auto& h : hits) {
        const auto& e1 = edges_[h.e1];
        const auto& e2 = edges_[h.e2];
        out.push_back(Path2{entities_[e1.s], relations_[e1.r], entities_[e1.o],
                            relations_[e2.r], entities_[e2.o]});
    }
    return out;
}

}  // namespace give

#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace give {

struct Triple {
    std::string subject;
    std::string relation;
    std::string object;

    auto operator<=>(const Triple&) const = default;
};

// Validating constructor: normalizes all three fields and rejects empties.
Triple make_triple(std::string_view s, std::string_view r, std::string_view o);

// Flatten to "subject relation object" (single spaces).
std::string verbalize(const Triple& t);

// Parenthesized tuple form used in prompts: ('s', 'r', 'o').
std::string tuple_form(const Triple& t);

// A length-2 path src -r1-> mid -r2-> dst.
struct Path2 {
    std::string src;
    std::string rel1;
    std::string mid;
    std::string rel2;
    std::string dst;

    auto operator<=>(const Path2&) const = default;
};

// (src, rel1, mid, rel2, dst) rendering used in path-selection prompts.
std::string tuple_form(const Path2& p);

// Immutable triple store with dictionary-encoded entities/relations and
// subject/object adjacency. Entity and relation ids are lexicographic ranks,
// so id order equals name order and the edge list is sorted in canonical
// (subject, relation, object) order. Read-only after construction.
struct GraphBuilder;

class KnowledgeGraph {
public:
    KnowledgeGraph() = default;
    // Lookup tables hold views into the name vectors, so copying is disabled.
    KnowledgeGraph(const KnowledgeGraph&) = delete;
    KnowledgeGraph& operator=(const KnowledgeGraph&) = delete;
    KnowledgeGraph(KnowledgeGraph&&) = default;
    KnowledgeGraph& operator=(KnowledgeGraph&&) = default;

    // TSV loader: one `subject<TAB>relation<TAB>object` per line, lines
    // starting with '#' ignored. Duplicate edges collapse.
    static KnowledgeGraph load(const std::filesystem::path& path);

    // Build from in-memory triples (normalizes, validates, dedups).
    static KnowledgeGraph from_triples(const std::vector<Triple>& triples);

    // Canonical re-serialization in the same TSV format.
    void save(const std::filesystem::path& path) const;
    std::string serialize() const;

    // Uniform edge sampling without replacement; keeps floor(fraction * |E|)
    // edges and exactly the entities incident to them. Same (fraction, seed)
    // always yields the same graph.
    KnowledgeGraph sample_edges(double fraction, std::uint64_t seed) const;

    std::size_t entity_count() const { return entities_.size(); }
    std::size_t relation_count() const { return relations_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    bool empty() const { return edges_.empty(); }

    const std::vector<std::string>& entities() const { return entities_; }
    const std::vector<std::string>& relations() const { return relations_; }

    Triple edge(std::size_t i) const;
    std::vector<Triple> all_edges() const;

    bool contains_entity(std::string_view name) const;
    bool contains_relation(std::string_view name) const;
    bool contains_edge(const Triple& t) const;

    // Number of edges incident to the entity (in + out); 0 if unknown.
    std::size_t degree(std::string_view entity) const;

    // Edge indices (into canonical edge order) by subject / by object.
    const std::vector<std::uint32_t>& edges_with_subject(std::string_view entity) const;
    const std::vector<std::uint32_t>& edges_with_object(std::string_view entity) const;

    // { r : (u,r,v) in E, u in A, v in B }. Directed A -> B.
    std::set<std::string> relations_between(const std::set<std::string>& A,
                                            const std::set<std::string>& B) const;

    // All edges (u,r,v) with u in A, v in B, in canonical order.
    std::vector<Triple> edges_between(const std::set<std::string>& A,
                                      const std::set<std::string>& B) const;

    // Up to `cap` paths (u,r1,m,r2,v) with u in A, v in B, m not in A∪B.
    // Fully enumerated and canonically ordered before truncation.
    std::vector<Path2> two_hop_paths(const std::set<std::string>& A,
                                     const std::set<std::string>& B,
                                     std::size_t cap) const;

private:
    struct EdgeRec {
        std::uint32_t s, r, o;
        auto operator<=>(const EdgeRec&) const = default;
    };

    void finalize(GraphBuilder&& b);

    std::int64_t entity_id(std::string_view name) const;

    std::vector<std::string> entities_;   // id -> name, lexicographic
    std::vector<std::string> relations_;  // id -> name, lexicographic
    std::unordered_map<std::string_view, std::uint32_t> entity_ids_;
    std::unordered_map<std::string_view, std::uint32_t> relation_ids_;
    std::vector<EdgeRec> edges_;  // sorted == canonical triple order
    std::vector<std::vector<std::uint32_t>> by_subject_;
    std::vector<std::vector<std::uint32_t>> by_object_;
};

}  // namespace give

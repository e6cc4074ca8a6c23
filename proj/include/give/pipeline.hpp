#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "give/embedding.hpp"
#include "give/kg.hpp"
#include "give/llm.hpp"

namespace give {

enum class GroupKind { queried, intermediate };
std::string to_string(GroupKind k);

// A queried concept (or path midpoint) plus its most-similar KG entities.
// The full group is {seed} ∪ members; the seed is never among the members.
struct EntityGroup {
    std::string seed;
    std::vector<std::string> members;  // descending similarity
    std::vector<double> scores;        // aligned with members
    GroupKind kind = GroupKind::queried;

    // seed + members, for candidate generation.
    std::vector<std::string> full() const;
    // Members known to the KG, plus the seed when it is a KG entity.
    std::set<std::string> kg_members(const KnowledgeGraph& kg) const;
};

struct CandidateRelationSet {
    std::size_t group_i = 0;
    std::size_t group_j = 0;
    std::set<std::string> from_question;  // R_x
    std::set<std::string> from_kg;        // relations observed between the groups
    std::set<std::string> combined;       // union, exactly
};

// The three extrapolated knowledge sets for one query.
struct KnowledgeBundle {
    std::set<Triple> affirmative;
    std::set<Triple> counterfactual;  // relations carry the "not " marker
    std::set<Triple> expert;          // KG edges between group members
};

struct StagedAnswers {
    std::string a;
    std::string a_c;
    std::string a_c_e;
};

struct QueryRecord {
    std::string id;
    std::string question;
    AnswerFormat format = AnswerFormat::yes_no_maybe;
    std::vector<std::string> entities;   // E_x, importance order
    std::vector<std::string> relations;  // R_x
    std::vector<EntityGroup> groups;     // queried groups then intermediates
    std::vector<CandidateRelationSet> candidate_sets;
    KnowledgeBundle bundle;
    StagedAnswers staged;
    std::optional<double> expert_ratio;
    std::map<std::string, std::size_t> call_accounting;  // template id -> calls
    std::vector<std::string> warnings;
    bool failed = false;
    std::string failure;
};

std::string to_json_line(const QueryRecord& rec);

struct PipelineConfig {
    std::size_t p = 2;                  // KG entities per group
    std::size_t probe_batch_size = 1;   // 1 = single probes
    bool intermediate_groups = true;
    std::size_t path_cap = 50;
    std::size_t open_relation_limit = 1;  // open probes per unconnected seed pair
    AnswerFormat format = AnswerFormat::yes_no_maybe;
};

// --- stage functions (assembled by Pipeline::run_query) ---

// One group per extracted entity; members are the top-p index hits.
std::vector<EntityGroup> build_entity_groups(const std::vector<std::string>& entities,
                                             const SimilarityIndex& index, std::size_t p,
                                             EmbeddingProvider& provider, EmbeddingCache* cache,
                                             std::vector<std::string>* warnings);

// One LLM-filled triple (seed, r, member) per queried-group member; all go
// to the affirmative set unconditionally.
std::set<Triple> inner_group_connections(const std::vector<EntityGroup>& groups, Gateway& gw,
                                         std::vector<std::string>* warnings);

CandidateRelationSet candidate_relations(const KnowledgeGraph& kg,
                                         const std::vector<EntityGroup>& groups, std::size_t i,
                                         std::size_t j,
                                         const std::vector<std::string>& question_relations);

// Enumerates length-2 KG paths between the groups, asks the backend for the
// most helpful one, and builds a group around its midpoint. Absent when no
// path exists.
std::optional<EntityGroup> discover_intermediate(const KnowledgeGraph& kg,
                                                 const std::vector<EntityGroup>& groups,
                                                 std::size_t i, std::size_t j,
                                                 const std::string& question,
                                                 const PipelineConfig& cfg,
                                                 const SimilarityIndex& index,
                                                 EmbeddingProvider& provider,
                                                 EmbeddingCache* cache, Gateway& gw,
                                                 std::vector<std::string>* warnings);

// Labels every cross-group candidate triple: KG edges are inherited into the
// expert set unprobed; the rest go to affirmative (yes) or counterfactual
// (no, negation-marked) or are discarded (maybe).
KnowledgeBundle extrapolate(const KnowledgeGraph& kg, const std::vector<EntityGroup>& groups,
                            const std::vector<CandidateRelationSet>& candidate_sets,
                            const std::set<Triple>& inner_triples, std::size_t batch_size,
                            Gateway& gw, std::vector<std::string>* warnings);

// Free-text relation probes for queried seed pairs with no affirmative or
// expert connection yet.
std::set<Triple> open_relation_discovery(const std::vector<EntityGroup>& groups,
                                         const KnowledgeBundle& bundle, std::size_t limit_per_pair,
                                         Gateway& gw, std::vector<std::string>* warnings);

// Three cumulative answer stages: affirmative; + counterfactual; + expert.
StagedAnswers progressive_answer(const std::string& question, const KnowledgeBundle& bundle,
                                 AnswerFormat format, Gateway& gw);

// |expert| / (|expert| + |affirmative| + |counterfactual|); absent when the
// bundle is empty.
std::optional<double> expert_ratio(const KnowledgeBundle& bundle);

// Everything a query run needs. KG and index are shared read-only state.
struct PipelineContext {
    const KnowledgeGraph* kg = nullptr;
    const SimilarityIndex* entity_index = nullptr;
    EmbeddingProvider* provider = nullptr;
    EmbeddingCache* cache = nullptr;
    const ChatBackend* backend = nullptr;
    const PromptRegistry* registry = nullptr;
    GatewayConfig gateway;
    PipelineConfig config;
    PromptLog* prompt_sink = nullptr;  // optional: receives every PromptRecord
};

// Runs the full pipeline for one question. Never throws for per-question
// stage failures; the record carries failed/failure instead.
QueryRecord run_query(const std::string& question, const PipelineContext& ctx,
                      const std::string& id = "");

}  // namespace give

#include "give/pipeline.hpp"

#include <json.hpp>

#include <algorithm>

#include "give/errors.hpp"
#include "give/util.hpp"

namespace give {

using nlohmann::json;

std::string to_string(GroupKind k) {
    return k == GroupKind::queried ? "queried" : "intermediate";
}

std::vector<std::string> EntityGroup::full() const {
    std::vector<std::string> out;
    out.reserve(members.size() + 1);
    out.push_back(seed);
    out.insert(out.end(), members.begin(), members.end());
    return out;
}

std::set<std::string> EntityGroup::kg_members(const KnowledgeGraph& kg) const {
    std::set<std::string> out(members.begin(), members.end());
    if (kg.contains_entity(seed)) out.insert(seed);
    return out;
}

std::vector<EntityGroup> build_entity_groups(const std::vector<std::string>& entities,
                                             const SimilarityIndex& index, std::size_t p,
                                             EmbeddingProvider& provider, EmbeddingCache* cache,
                                             std::vector<std::string>* warnings) {
    std::vector<EntityGroup> groups;
    groups.reserve(entities.size());
    for (const auto& entity : entities) {
        EntityGroup g;
        g.seed = entity;
        g.kind = GroupKind::queried;
        if (p > 0 && index.size() > 0) {
            auto res = index.top_p_similar(entity, p, provider, cache);
            if (res.clamped && warnings) {
                warnings->push_back("entity group for '" + entity +
                                    "' clamped to index size");
            }
            for (auto& hit : res.hits) {
                g.members.push_back(std::move(hit.key));
                g.scores.push_back(hit.score);
            }
        }
        groups.push_back(std::move(g));
    }
    return groups;
}

std::set<Triple> inner_group_connections(const std::vector<EntityGroup>& groups, Gateway& gw,
                                         std::vector<std::string>* warnings) {
    std::set<Triple> out;
    for (const auto& g : groups) {
        if (g.kind != GroupKind::queried) continue;
        for (const auto& member : g.members) {
            if (member == g.seed) continue;
            try {
                std::string rel = gw.inner_relation(g.seed, member);
                out.insert(make_triple(g.seed, rel, member));
            } catch (const std::exception& e) {
                if (warnings) {
                    warnings->push_back("inner relation (" + g.seed + ", " + member +
                                        ") skipped: " + e.what());
                }
            }
        }
    }
    return out;
}

CandidateRelationSet candidate_relations(const KnowledgeGraph& kg,
                                         const std::vector<EntityGroup>& groups, std::size_t i,
                                         std::size_t j,
                                         const std::vector<std::string>& question_relations) {
    if (i == j) throw ValidationError("candidate_relations needs two distinct groups");
    CandidateRelationSet out;
    out.group_i = i;
    out.group_j = j;
    out.from_question.insert(question_relations.begin(), question_relations.end());
    out.from_kg = kg.relations_between(groups.at(i).kg_members(kg), groups.at(j).kg_members(kg));
    out.combined = out.from_question;
    out.combined.insert(out.from_kg.begin(), out.from_kg.end());
    return out;
}

std::optional<EntityGroup> discover_intermediate(
    const KnowledgeGraph& kg, const std::vector<EntityGroup>& groups, std::size_t i,
    std::size_t j, const std::string& question, const PipelineConfig& cfg,
    const SimilarityIndex& index, EmbeddingProvider& provider, EmbeddingCache* cache,
    Gateway& gw, std::vector<std::string>* warnings) {
    auto paths = kg.two_hop_paths(groups.at(i).kg_members(kg), groups.at(j).kg_members(kg),
                                  cfg.path_cap);
    if (paths.empty()) return std::nullopt;

    Path2 chosen = gw.select_path(paths, question);

    EntityGroup g;
    g.seed = chosen.mid;
    g.kind = GroupKind::intermediate;
    if (cfg.p > 0 && index.size() > 0) {
        auto res = index.top_p_similar(chosen.mid, cfg.p, provider, cache);
        if (res.clamped && warnings) {
            warnings->push_back("intermediate group for '" + chosen.mid +
                                "' clamped to index size");
        }
        for (auto& hit : res.hits) {
            g.members.push_back(std::move(hit.key));
            g.scores.push_back(hit.score);
        }
    }
    return g;
}

namespace {

std::string strip_negation(const std::string& relation) {
    return relation.rfind("not ", 0) == 0 ? relation.substr(4) : relation;
}

// Drop affirmative triples that the expert set already owns and
// counterfactuals that contradict an affirmative claim, so the three sets
// partition cleanly.
void finalize_bundle(KnowledgeBundle& b) {
    for (const auto& t : b.expert) b.affirmative.erase(t);
    for (auto it = b.counterfactual.begin(); it != b.counterfactual.end();) {
        Triple base{it->subject, strip_negation(it->relation), it->object};
        if (b.affirmative.count(base) || b.expert.count(base)) {
            it = b.counterfactual.erase(it);
        } else {
            ++it;
        }
    }
}

}  // namespace

KnowledgeBundle extrapolate(const KnowledgeGraph& kg, const std::vector<EntityGroup>& groups,
                            const std::vector<CandidateRelationSet>& candidate_sets,
                            const std::set<Triple>& inner_triples, std::size_t batch_size,
                            Gateway& gw, std::vector<std::string>* warnings) {
    KnowledgeBundle bundle;
    bundle.affirmative = inner_triples;

    // Expert knowledge: every KG edge between the two memberships, inherited
    // without probing and regardless of the candidate relation set.
    for (const auto& cs : candidate_sets) {
        auto a = groups.at(cs.group_i).kg_members(kg);
        auto b = groups.at(cs.group_j).kg_members(kg);
        for (auto& t : kg.edges_between(a, b)) bundle.expert.insert(std::move(t));
    }

    // Candidate triples, deduplicated across pairs, probed in canonical order.
    std::set<Triple> candidates;
    for (const auto& cs : candidate_sets) {
        for (const auto& u : groups.at(cs.group_i).full()) {
            for (const auto& r : cs.combined) {
                for (const auto& v : groups.at(cs.group_j).full()) {
                    candidates.insert(Triple{u, r, v});
                }
            }
        }
    }

    std::vector<Triple> to_probe;
    for (const auto& c : candidates) {
        if (!kg.contains_edge(c)) to_probe.push_back(c);
    }

    auto labels = gw.probe_veracity_batch(to_probe, batch_size);
    for (std::size_t k = 0; k < to_probe.size(); ++k) {
        switch (labels[k]) {
            case Veracity::yes:
                bundle.affirmative.insert(to_probe[k]);
                break;
            case Veracity::no:
                bundle.counterfactual.insert(
                    Triple{to_probe[k].subject, "not " + to_probe[k].relation,
                           to_probe[k].object});
                break;
            case Veracity::maybe:
                break;  // discarded: the model is unsure
        }
    }
    (void)warnings;
    finalize_bundle(bundle);
    return bundle;
}

std::set<Triple> open_relation_discovery(const std::vector<EntityGroup>& groups,
                                         const KnowledgeBundle& bundle,
                                         std::size_t limit_per_pair, Gateway& gw,
                                         std::vector<std::string>* warnings) {
    std::set<Triple> out;
    if (limit_per_pair == 0) return out;

    auto connected = [&](const std::string& a, const std::string& b) {
        for (const auto* set : {&bundle.affirmative, &bundle.expert}) {
            for (const auto& t : *set) {
                if ((t.subject == a && t.object == b) || (t.subject == b && t.object == a)) {
                    return true;
                }
            }
        }
        return false;
    };

    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (groups[i].kind != GroupKind::queried) continue;
        for (std::size_t j = i + 1; j < groups.size(); ++j) {
            if (groups[j].kind != GroupKind::queried) continue;
            const auto& si = groups[i].seed;
            const auto& sj = groups[j].seed;
            if (si == sj || connected(si, sj)) continue;
            try {
                std::string rel = gw.open_relation(si, sj);
                if (!rel.empty()) out.insert(make_triple(si, rel, sj));
            } catch (const std::exception& e) {
                if (warnings) {
                    warnings->push_back("open relation (" + si + ", " + sj +
                                        ") skipped: " + e.what());
                }
            }
        }
    }
    return out;
}

StagedAnswers progressive_answer(const std::string& question, const KnowledgeBundle& bundle,
                                 AnswerFormat format, Gateway& gw) {
    std::vector<Triple> aff(bundle.affirmative.begin(), bundle.affirmative.end());
    std::vector<Triple> cf(bundle.counterfactual.begin(), bundle.counterfactual.end());
    std::vector<Triple> exp(bundle.expert.begin(), bundle.expert.end());

    StagedAnswers staged;
    staged.a = gw.generate_answer(question, {{"affirmative", aff}}, {}, format);
    staged.a_c = gw.generate_answer(question, {{"affirmative", aff}, {"counterfactual", cf}},
                                    {staged.a}, format);
    staged.a_c_e = gw.generate_answer(
        question, {{"affirmative", aff}, {"counterfactual", cf}, {"expert", exp}},
        {staged.a, staged.a_c}, format);
    return staged;
}

std::optional<double> expert_ratio(const KnowledgeBundle& bundle) {
    double denom = static_cast<double>(bundle.expert.size() + bundle.affirmative.size() +
                                       bundle.counterfactual.size());
    if (denom == 0.0) return std::nullopt;
    return static_cast<double>(bundle.expert.size()) / denom;
}

QueryRecord run_query(const std::string& question, const PipelineContext& ctx,
                      const std::string& id) {
    QueryRecord rec;
    rec.id = id;
    rec.question = question;
    rec.format = ctx.config.format;

    Gateway gw(*ctx.backend, *ctx.registry, ctx.gateway);
    std::vector<std::string> warnings;

    try {
        rec.entities = gw.decompose_entities(question);
        rec.relations = gw.extract_relations(question, rec.entities);
        rec.groups = build_entity_groups(rec.entities, *ctx.entity_index, ctx.config.p,
                                         *ctx.provider, ctx.cache, &warnings);

        std::set<Triple> inner = inner_group_connections(rec.groups, gw, &warnings);

        const std::size_t queried_count = rec.groups.size();
        for (std::size_t i = 0; i < queried_count; ++i) {
            for (std::size_t j = 0; j < queried_count; ++j) {
                if (i == j) continue;
                rec.candidate_sets.push_back(
                    candidate_relations(*ctx.kg, rec.groups, i, j, rec.relations));
            }
        }

        if (ctx.config.intermediate_groups) {
            // Only pairs without any KG relation get an intermediate group;
            // at most one per pair, deduplicated by midpoint.
            std::size_t base_pairs = rec.candidate_sets.size();
            std::set<std::pair<std::size_t, std::size_t>> extra_pairs;
            for (std::size_t k = 0; k < base_pairs; ++k) {
                auto cs = rec.candidate_sets[k];
                if (!cs.from_kg.empty()) continue;
                auto mid = discover_intermediate(*ctx.kg, rec.groups, cs.group_i, cs.group_j,
                                                 question, ctx.config, *ctx.entity_index,
                                                 *ctx.provider, ctx.cache, gw, &warnings);
                if (!mid) continue;
                std::size_t mid_idx = rec.groups.size();
                bool reused = false;
                for (std::size_t g = queried_count; g < rec.groups.size(); ++g) {
                    if (rec.groups[g].kind == GroupKind::intermediate &&
                        rec.groups[g].seed == mid->seed) {
                        mid_idx = g;
                        reused = true;
                        break;
                    }
                }
                if (!reused) rec.groups.push_back(std::move(*mid));
                for (auto [a, b] : {std::pair{cs.group_i, mid_idx}, std::pair{mid_idx, cs.group_j}}) {
                    if (a == b || !extra_pairs.insert({a, b}).second) continue;
                    rec.candidate_sets.push_back(
                        candidate_relations(*ctx.kg, rec.groups, a, b, rec.relations));
                }
            }
        }

        rec.bundle = extrapolate(*ctx.kg, rec.groups, rec.candidate_sets, inner,
                                 ctx.config.probe_batch_size, gw, &warnings);

        auto open = open_relation_discovery(rec.groups, rec.bundle,
                                            ctx.config.open_relation_limit, gw, &warnings);
        rec.bundle.affirmative.insert(open.begin(), open.end());

        rec.staged = progressive_answer(question, rec.bundle, ctx.config.format, gw);
        rec.expert_ratio = expert_ratio(rec.bundle);
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.failure = e.what();
    }

    rec.call_accounting = gw.log().counts_by_template();
    for (const auto& w : gw.warnings()) warnings.push_back(w);
    std::sort(warnings.begin(), warnings.end());
    rec.warnings = std::move(warnings);
    if (ctx.prompt_sink) {
        for (auto& r : gw.log().snapshot()) ctx.prompt_sink->append(std::move(r));
    }
    return rec;
}

namespace {

json triples_to_json(const std::set<Triple>& ts) {
    json out = json::array();
    for (const auto& t : ts) out.push_back({t.subject, t.relation, t.object});
    return out;
}

}  // namespace

std::string to_json_line(const QueryRecord& rec) {
    json groups = json::array();
    for (const auto& g : rec.groups) {
        groups.push_back({{"seed", g.seed},
                          {"members", g.members},
                          {"scores", g.scores},
                          {"kind", to_string(g.kind)}});
    }
    json cands = json::array();
    for (const auto& cs : rec.candidate_sets) {
        cands.push_back({{"group_i", cs.group_i},
                         {"group_j", cs.group_j},
                         {"from_question", cs.from_question},
                         {"from_kg", cs.from_kg},
                         {"combined", cs.combined}});
    }
    json j{{"id", rec.id},
           {"question", rec.question},
           {"format", to_string(rec.format)},
           {"entities", rec.entities},
           {"relations", rec.relations},
           {"groups", groups},
           {"candidate_sets", cands},
           {"bundle",
            {{"affirmative", triples_to_json(rec.bundle.affirmative)},
             {"counterfactual", triples_to_json(rec.bundle.counterfactual)},
             {"expert", triples_to_json(rec.bundle.expert)}}},
           {"staged_answers",
            {{"a", rec.staged.a}, {"a_c", rec.staged.a_c}, {"a_c_e", rec.staged.a_c_e}}},
           {"call_accounting", rec.call_accounting},
           {"warnings", rec.warnings},
           {"failed", rec.failed}};
    if (rec.expert_ratio) {
        j["expert_ratio"] = *rec.expert_ratio;
    } else {
        j["expert_ratio"] = nullptr;
    }
    if (rec.failed) j["failure"] = rec.failure;
    return j.dump();
}

}  // namespace give

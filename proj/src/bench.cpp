#include "give/bench.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "give/errors.hpp"
#include "give/util.hpp"

namespace give {

using nlohmann::json;

std::vector<std::string> choice_labels(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n && i < 26; ++i) out.emplace_back(1, char('A' + i));
    return out;
}

std::vector<QAItem> load_dataset(const std::filesystem::path& path, AnswerFormat format) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open dataset file: " + path.string());
    std::vector<QAItem> items;
    std::string line;
    std::size_t lineno = 0;
    std::set<std::string> seen_ids;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw SchemaError("invalid JSON object", lineno);
        }
        QAItem item;
        item.format = format;
        if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty()) {
            throw SchemaError("item needs a non-empty string id", lineno);
        }
        item.id = j["id"];
        if (!seen_ids.insert(item.id).second) {
            throw SchemaError("duplicate item id: " + item.id, lineno);
        }
        if (!j.contains("question") || !j["question"].is_string() ||
            trim(j["question"].get<std::string>()).empty()) {
            throw SchemaError("item needs a non-empty question", lineno);
        }
        item.question = j["question"];
        if (!j.contains("gold") || !j["gold"].is_string()) {
            throw SchemaError("item needs a gold answer", lineno);
        }

        if (format == AnswerFormat::multiple_choice) {
            if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].size() < 2) {
                throw SchemaError("multiple-choice item needs >= 2 choices", lineno);
            }
            for (const auto& c : j["choices"]) {
                if (!c.is_string() || trim(c.get<std::string>()).empty()) {
                    throw SchemaError("choices must be non-empty strings", lineno);
                }
                item.choices.push_back(c.get<std::string>());
            }
            std::string gold = trim(j["gold"].get<std::string>());
            std::transform(gold.begin(), gold.end(), gold.begin(),
                           [](unsigned char c) { return char(std::toupper(c)); });
            auto labels = choice_labels(item.choices.size());
            if (std::find(labels.begin(), labels.end(), gold) == labels.end()) {
                throw SchemaError("gold label '" + gold + "' outside choice labels", lineno);
            }
            item.gold = gold;
        } else {
            std::string gold = to_lower(trim(j["gold"].get<std::string>()));
            bool ok = gold == "yes" || gold == "no" ||
                      (format == AnswerFormat::yes_no_maybe && gold == "maybe");
            if (!ok) {
                throw SchemaError("gold answer '" + gold + "' invalid for format " +
                                      to_string(format),
                                  lineno);
            }
            item.gold = gold;
        }
        items.push_back(std::move(item));
    }
    return items;
}

std::string render_question(const QAItem& item) {
    if (item.format != AnswerFormat::multiple_choice) return item.question;
    std::string out = item.question;
    auto labels = choice_labels(item.choices.size());
    for (std::size_t i = 0; i < item.choices.size(); ++i) {
        out += "\n" + labels[i] + ". " + item.choices[i];
    }
    return out;
}

std::string normalize_prediction(const std::string& raw, AnswerFormat format,
                                 std::size_t n_choices) {
    std::vector<std::string> labels;
    switch (format) {
        case AnswerFormat::yes_no: labels = {"yes", "no"}; break;
        case AnswerFormat::yes_no_maybe: labels = {"yes", "no", "maybe"}; break;
        case AnswerFormat::multiple_choice:
            labels = choice_labels(n_choices ? n_choices : 26);
            break;
    }
    auto label = parse_label(raw, labels);
    return label ? *label : "unparsed";
}

std::string to_string(Method m) {
    switch (m) {
        case Method::io: return "io";
        case Method::cot: return "cot";
        case Method::rag: return "rag";
        case Method::give_a: return "give_a";
        case Method::give_ac: return "give_ac";
        case Method::give_ace: return "give_ace";
    }
    return "io";
}

Method method_from_string(const std::string& s) {
    if (s == "io") return Method::io;
    if (s == "cot") return Method::cot;
    if (s == "rag") return Method::rag;
    if (s == "give_a") return Method::give_a;
    if (s == "give_ac") return Method::give_ac;
    if (s == "give_ace" || s == "give") return Method::give_ace;
    throw ValidationError("unknown method: " + s);
}

void EvalResult::recompute_accuracy() {
    std::size_t correct = 0;
    for (const auto& [_, r] : per_item) correct += r.correct ? 1 : 0;
    accuracy = dataset_size ? double(correct) / double(dataset_size) : 0.0;
}

namespace {

bool is_give(Method m) {
    return m == Method::give_a || m == Method::give_ac || m == Method::give_ace;
}

const std::string& staged_answer(const QueryRecord& rec, Method m) {
    switch (m) {
        case Method::give_a: return rec.staged.a;
        case Method::give_ac: return rec.staged.a_c;
        default: return rec.staged.a_c_e;
    }
}

std::string predict_baseline(Method method, const QAItem& item, const BenchContext& ctx,
                             Gateway& gw) {
    std::string rendered = render_question(item);
    std::map<std::string, std::string> fields{{"question", rendered},
                                              {"answer_space", answer_space(item.format)}};
    switch (method) {
        case Method::io:
            fields["examples"] = gw.rendered_examples(ExampleStyle::plain);
            return gw.complete_template("answer_io", fields, ctx.pipeline.gateway.k_shot);
        case Method::cot:
            fields["examples"] = gw.rendered_examples(ExampleStyle::cot);
            return gw.complete_template("answer_cot", fields, ctx.pipeline.gateway.k_shot);
        case Method::rag: {
            if (!ctx.triple_index) throw ValidationError("rag needs a triple index");
            auto hits = ctx.triple_index->top_p_similar(item.question, ctx.rag_k,
                                                        *ctx.pipeline.provider,
                                                        ctx.pipeline.cache);
            std::string knowledge;
            for (std::size_t i = 0; i < hits.hits.size(); ++i) {
                if (i) knowledge += "\n";
                knowledge += hits.hits[i].key;
            }
            fields["examples"] = gw.rendered_examples(ExampleStyle::rag);
            fields["knowledge"] = knowledge;
            return gw.complete_template("answer_rag", fields, ctx.pipeline.gateway.k_shot);
        }
        default: throw ValidationError("not a baseline method");
    }
}

}  // namespace

EvalResult evaluate(Method method, const std::vector<QAItem>& items, const BenchContext& ctx) {
    EvalResult out;
    out.method_id = to_string(method);
    out.dataset_size = items.size();

    if (is_give(method)) {
        for (const auto& item : items) {
            PipelineContext pctx = ctx.pipeline;
            pctx.config.format = item.format;
            QueryRecord rec = run_query(render_question(item), pctx, item.id);
            if (rec.failed) {
                out.failures.emplace(item.id, rec.failure);
                continue;
            }
            ItemResult r;
            r.predicted = normalize_prediction(staged_answer(rec, method), item.format,
                                               item.choices.size());
            r.correct = r.predicted == item.gold;
            r.record = std::move(rec);
            out.per_item.emplace(item.id, std::move(r));
        }
    } else {
        Gateway gw(*ctx.pipeline.backend, *ctx.pipeline.registry, ctx.pipeline.gateway);
        for (const auto& item : items) {
            try {
                std::string raw = predict_baseline(method, item, ctx, gw);
                ItemResult r;
                r.predicted = normalize_prediction(raw, item.format, item.choices.size());
                r.correct = r.predicted == item.gold;
                out.per_item.emplace(item.id, std::move(r));
            } catch (const std::exception& e) {
                out.failures.emplace(item.id, e.what());
            }
        }
        if (ctx.prompt_sink) {
            for (auto& r : gw.log().snapshot()) ctx.prompt_sink->append(std::move(r));
        }
    }
    out.recompute_accuracy();
    return out;
}

EvalResult derive_give_variant(const EvalResult& base, Method variant,
                               const std::vector<QAItem>& items) {
    if (!is_give(variant)) throw ValidationError("derive_give_variant needs a give method");
    std::map<std::string, const QAItem*> by_id;
    for (const auto& item : items) by_id.emplace(item.id, &item);

    EvalResult out;
    out.method_id = to_string(variant);
    out.dataset_size = base.dataset_size;
    out.failures = base.failures;
    for (const auto& [id, r] : base.per_item) {
        if (!r.record) throw ValidationError("base results carry no pipeline records");
        auto it = by_id.find(id);
        if (it == by_id.end()) throw ValidationError("item id missing from dataset: " + id);
        const QAItem& item = *it->second;
        ItemResult v;
        v.predicted = normalize_prediction(staged_answer(*r.record, variant), item.format,
                                           item.choices.size());
        v.correct = v.predicted == item.gold;
        v.record = r.record;
        out.per_item.emplace(id, std::move(v));
    }
    out.recompute_accuracy();
    return out;
}

std::vector<BucketRow> expert_ratio_buckets(const EvalResult& results,
                                            const std::vector<double>& edges) {
    if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end())) {
        throw ValidationError("bucket edges must be >= 2 ascending values");
    }
    std::vector<BucketRow> rows(edges.size() - 1);
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "[%g, %g%s", edges[b], edges[b + 1],
                      b + 2 == edges.size() ? "]" : ")");
        rows[b].label = buf;
    }
    BucketRow undefined;
    undefined.label = "undefined";
    undefined.count = results.failures.size();

    for (const auto& [_, r] : results.per_item) {
        std::optional<double> ratio;
        if (r.record) ratio = r.record->expert_ratio;
        if (!ratio) {
            ++undefined.count;
            undefined.correct += r.correct ? 1 : 0;
            continue;
        }
        std::size_t b = 0;
        bool placed = false;
        for (; b + 1 < edges.size(); ++b) {
            bool last = b + 2 == edges.size();
            if (*ratio >= edges[b] && (*ratio < edges[b + 1] || (last && *ratio <= edges[b + 1]))) {
                placed = true;
                break;
            }
        }
        if (!placed) {
            ++undefined.count;  // ratio outside the given edges
            undefined.correct += r.correct ? 1 : 0;
            continue;
        }
        ++rows[b].count;
        rows[b].correct += r.correct ? 1 : 0;
    }
    rows.push_back(std::move(undefined));
    for (auto& row : rows) {
        row.accuracy = row.count ? double(row.correct) / double(row.count) : 0.0;
    }
    return rows;
}

GroupStats group_statistics(const EvalResult& results) {
    GroupStats stats;
    std::size_t total_pairs = 0, total_relations = 0, with_intermediate = 0, total_groups = 0;
    for (const auto& [_, r] : results.per_item) {
        if (!r.record) continue;
        ++stats.questions;
        total_groups += r.record->groups.size();
        bool has_intermediate = false;
        for (const auto& g : r.record->groups) {
            has_intermediate |= g.kind == GroupKind::intermediate;
        }
        with_intermediate += has_intermediate ? 1 : 0;
        for (const auto& cs : r.record->candidate_sets) {
            ++total_pairs;
            total_relations += cs.combined.size();
        }
    }
    if (stats.questions) {
        stats.avg_groups = double(total_groups) / double(stats.questions);
        stats.pct_intermediate = double(with_intermediate) / double(stats.questions);
    }
    if (total_pairs) {
        stats.avg_candidate_relations_per_pair = double(total_relations) / double(total_pairs);
    }
    return stats;
}

OverlapCounts overlap_analysis(const EvalResult& a, const EvalResult& b) {
    auto ids_of = [](const EvalResult& r) {
        std::set<std::string> ids;
        for (const auto& [id, _] : r.per_item) ids.insert(id);
        for (const auto& [id, _] : r.failures) ids.insert(id);
        return ids;
    };
    auto ids_a = ids_of(a);
    if (ids_a != ids_of(b)) throw ValidationError("overlap analysis needs matching item ids");

    auto correct = [](const EvalResult& r, const std::string& id) {
        auto it = r.per_item.find(id);
        return it != r.per_item.end() && it->second.correct;
    };
    OverlapCounts out;
    for (const auto& id : ids_a) {
        bool ca = correct(a, id), cb = correct(b, id);
        if (ca && cb) ++out.both;
        else if (ca) ++out.only_a;
        else if (cb) ++out.only_b;
        else ++out.neither;
    }
    return out;
}

std::string results_to_jsonl(const EvalResult& results, const std::vector<QAItem>& items) {
    std::string out;
    for (const auto& item : items) {
        json j{{"id", item.id}, {"gold", item.gold}, {"method", results.method_id}};
        auto it = results.per_item.find(item.id);
        if (it != results.per_item.end()) {
            j["predicted"] = it->second.predicted;
            j["correct"] = it->second.correct;
            if (it->second.record) {
                j["record"] = json::parse(to_json_line(*it->second.record));
            } else {
                j["record"] = nullptr;
            }
        } else {
            auto fit = results.failures.find(item.id);
            j["predicted"] = nullptr;
            j["correct"] = false;
            j["record"] = nullptr;
            j["error"] = fit == results.failures.end() ? "missing" : fit->second;
        }
        out += j.dump();
        out += "\n";
    }
    return out;
}

std::string summary_to_json(const EvalResult& results, const std::vector<double>& bucket_edges) {
    std::size_t correct = 0;
    for (const auto& [_, r] : results.per_item) correct += r.correct ? 1 : 0;
    json j{{"method", results.method_id},
           {"dataset_size", results.dataset_size},
           {"evaluated", results.per_item.size()},
           {"correct", correct},
           {"accuracy", results.accuracy},
           {"hard_failures", results.failures}};

    auto stats = group_statistics(results);
    if (stats.questions > 0) {
        j["group_statistics"] = {
            {"questions", stats.questions},
            {"avg_groups", stats.avg_groups},
            {"avg_candidate_relations_per_pair", stats.avg_candidate_relations_per_pair},
            {"pct_intermediate", stats.pct_intermediate}};
        json buckets = json::array();
        for (const auto& row : expert_ratio_buckets(results, bucket_edges)) {
            buckets.push_back({{"bucket", row.label},
                               {"count", row.count},
                               {"correct", row.correct},
                               {"accuracy", row.accuracy}});
        }
        j["expert_ratio_buckets"] = buckets;
    }
    return j.dump(2) + "\n";
}

QueryRecord record_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    QueryRecord rec;
    rec.id = j.value("id", "");
    rec.question = j.value("question", "");
    rec.format = answer_format_from_string(j.value("format", "yes_no_maybe"));
    rec.entities = j.value("entities", std::vector<std::string>{});
    rec.relations = j.value("relations", std::vector<std::string>{});
    for (const auto& g : j.value("groups", json::array())) {
        EntityGroup group;
        group.seed = g.value("seed", "");
        group.members = g.value("members", std::vector<std::string>{});
        group.scores = g.value("scores", std::vector<double>{});
        group.kind = g.value("kind", "queried") == "intermediate" ? GroupKind::intermediate
                                                                  : GroupKind::queried;
        rec.groups.push_back(std::move(group));
    }
    for (const auto& c : j.value("candidate_sets", json::array())) {
        CandidateRelationSet cs;
        cs.group_i = c.value("group_i", 0u);
        cs.group_j = c.value("group_j", 0u);
        for (const auto& r : c.value("from_question", json::array())) cs.from_question.insert(r);
        for (const auto& r : c.value("from_kg", json::array())) cs.from_kg.insert(r);
        for (const auto& r : c.value("combined", json::array())) cs.combined.insert(r);
        rec.candidate_sets.push_back(std::move(cs));
    }
    auto read_triples = [&](const char* key) {
        std::set<Triple> out;
        for (const auto& t : j["bundle"].value(key, json::array())) {
            out.insert(Triple{t.at(0), t.at(1), t.at(2)});
        }
        return out;
    };
    if (j.contains("bundle")) {
        rec.bundle.affirmative = read_triples("affirmative");
        rec.bundle.counterfactual = read_triples("counterfactual");
        rec.bundle.expert = read_triples("expert");
    }
    if (j.contains("staged_answers")) {
        rec.staged.a = j["staged_answers"].value("a", "");
        rec.staged.a_c = j["staged_answers"].value("a_c", "");
        rec.staged.a_c_e = j["staged_answers"].value("a_c_e", "");
    }
    if (j.contains("expert_ratio") && !j["expert_ratio"].is_null()) {
        rec.expert_ratio = j["expert_ratio"].get<double>();
    }
    for (const auto& [k, v] : j.value("call_accounting", json::object()).items()) {
        rec.call_accounting[k] = v.get<std::size_t>();
    }
    rec.warnings = j.value("warnings", std::vector<std::string>{});
    rec.failed = j.value("failed", false);
    rec.failure = j.value("failure", "");
    return rec;
}

EvalResult load_results_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open results file: " + path.string());
    EvalResult out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw ParseError("invalid JSON object in results file", lineno);
        }
        ++out.dataset_size;
        out.method_id = j.value("method", out.method_id);
        std::string id = j.value("id", "");
        if (j.contains("error")) {
            out.failures.emplace(id, j["error"].get<std::string>());
            continue;
        }
        ItemResult r;
        r.predicted = j["predicted"].is_null() ? "" : j["predicted"].get<std::string>();
        r.correct = j.value("correct", false);
        if (j.contains("record") && !j["record"].is_null()) {
            r.record = record_from_json(j["record"].dump());
        }
        out.per_item.emplace(id, std::move(r));
    }
    out.recompute_accuracy();
    return out;
}

}  // namespace give

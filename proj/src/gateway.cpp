#include <algorithm>
#include <cctype>
#include <chrono>

#include "give/errors.hpp"
#include "give/llm.hpp"
#include "give/util.hpp"

namespace give {

std::string to_string(Veracity v) {
    switch (v) {
        case Veracity::yes: return "yes";
        case Veracity::no: return "no";
        case Veracity::maybe: return "maybe";
    }
    return "maybe";
}

std::string to_string(AnswerFormat f) {
    switch (f) {
        case AnswerFormat::yes_no: return "yes_no";
        case AnswerFormat::yes_no_maybe: return "yes_no_maybe";
        case AnswerFormat::multiple_choice: return "multiple_choice";
    }
    return "yes_no_maybe";
}

AnswerFormat answer_format_from_string(const std::string& s) {
    if (s == "yes_no") return AnswerFormat::yes_no;
    if (s == "yes_no_maybe") return AnswerFormat::yes_no_maybe;
    if (s == "multiple_choice") return AnswerFormat::multiple_choice;
    throw ValidationError("unknown answer format: " + s);
}

std::string answer_space(AnswerFormat f) {
    switch (f) {
        case AnswerFormat::yes_no: return "yes or no";
        case AnswerFormat::yes_no_maybe: return "yes, no or maybe";
        case AnswerFormat::multiple_choice: return "the letter of the correct choice";
    }
    return "yes, no or maybe";
}

namespace {

bool is_word_char(unsigned char c) {
    return std::isalnum(c) != 0;
}

// Whole-word, case-insensitive find.
std::size_t find_word(const std::string& haystack, const std::string& needle) {
    if (needle.empty()) return std::string::npos;
    for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
         pos = haystack.find(needle, pos + 1)) {
        bool left_ok = pos == 0 || !is_word_char(haystack[pos - 1]);
        std::size_t end = pos + needle.size();
        bool right_ok = end >= haystack.size() || !is_word_char(haystack[end]);
        if (left_ok && right_ok) return pos;
    }
    return std::string::npos;
}

std::string first_token(const std::string& s) {
    std::size_t b = 0;
    while (b < s.size() && !is_word_char(static_cast<unsigned char>(s[b]))) ++b;
    std::size_t e = b;
    while (e < s.size() && is_word_char(static_cast<unsigned char>(s[e]))) ++e;
    return s.substr(b, e - b);
}

}  // namespace

std::optional<std::string> parse_label(const std::string& raw,
                                       const std::vector<std::string>& labels) {
    std::string text = to_lower(trim(raw));
    if (text.empty()) return std::nullopt;

    std::string lead = first_token(text);
    for (const auto& label : labels) {
        if (lead == to_lower(label)) return label;
    }
    std::size_t best_pos = std::string::npos;
    const std::string* best = nullptr;
    for (const auto& label : labels) {
        std::size_t pos = find_word(text, to_lower(label));
        if (pos != std::string::npos && pos < best_pos) {
            best_pos = pos;
            best = &label;
        }
    }
    if (best) return *best;
    return std::nullopt;
}

void PromptLog::append(PromptRecord rec) {
    std::lock_guard lock(mu_);
    records_.push_back(std::move(rec));
}

std::size_t PromptLog::size() const {
    std::lock_guard lock(mu_);
    return records_.size();
}

std::map<std::string, std::size_t> PromptLog::counts_by_template() const {
    std::lock_guard lock(mu_);
    std::map<std::string, std::size_t> out;
    for (const auto& r : records_) ++out[r.template_id];
    return out;
}

std::vector<PromptRecord> PromptLog::snapshot() const {
    std::lock_guard lock(mu_);
    return records_;
}

std::string render_triples(const std::vector<Triple>& triples) {
    std::string out;
    for (std::size_t i = 0; i < triples.size(); ++i) {
        if (i) out += ", ";
        out += tuple_form(triples[i]);
    }
    return out;
}

std::string render_statement(const Triple& t) {
    return capitalize_first(verbalize(t));
}

Gateway::Gateway(const ChatBackend& backend, const PromptRegistry& registry, GatewayConfig cfg)
    : backend_(&backend), registry_(&registry), cfg_(std::move(cfg)) {}

std::string Gateway::rendered_examples(ExampleStyle style) const {
    return render_examples(cfg_.examples, cfg_.k_shot, style);
}

std::vector<std::string> Gateway::warnings() const {
    std::lock_guard lock(warn_mu_);
    return warnings_;
}

void Gateway::add_warning(const std::string& w) {
    std::lock_guard lock(warn_mu_);
    warnings_.push_back(w);
}

std::string Gateway::complete_template(const std::string& template_id,
                                       const std::map<std::string, std::string>& fields,
                                       std::size_t k_shot_count) {
    PromptRecord rec;
    rec.template_id = template_id;
    rec.rendered_text = registry_->render(template_id, fields);
    rec.k_shot_count = k_shot_count;
    rec.backend_id = backend_->id();

    auto t0 = std::chrono::steady_clock::now();
    try {
        rec.response_text = backend_->complete({template_id, rec.rendered_text});
    } catch (const std::exception& e) {
        rec.response_text = std::string("<transport-error> ") + e.what();
        rec.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
        log_.append(std::move(rec));
        throw;
    }
    rec.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    std::string response = rec.response_text;
    log_.append(std::move(rec));
    return response;
}

namespace {

// Parses "['a', 'b']"-style lists; falls back to comma splitting. Items are
// normalized and deduplicated preserving order.
std::vector<std::string> parse_name_list(const std::string& raw) {
    std::vector<std::string> items;
    std::size_t i = 0;
    while (i < raw.size()) {
        char q = raw[i];
        if (q == '\'' || q == '"') {
            std::size_t close = raw.find(q, i + 1);
            if (close == std::string::npos) break;
            items.push_back(raw.substr(i + 1, close - i - 1));
            i = close + 1;
        } else {
            ++i;
        }
    }
    if (items.empty()) {
        std::string body = trim(raw);
        if (!body.empty() && body.front() == '[') body.erase(0, 1);
        if (!body.empty() && body.back() == ']') body.pop_back();
        items = split(body, ',');
    }
    std::vector<std::string> out;
    for (auto& item : items) {
        std::string name = normalize_name(item);
        if (name.empty()) continue;
        if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    }
    return out;
}

std::string strip_quotes(std::string s) {
    s = trim(s);
    while (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                             (s.front() == '\'' && s.back() == '\''))) {
        s = trim(s.substr(1, s.size() - 2));
    }
    return s;
}

}  // namespace

std::vector<std::string> Gateway::decompose_entities(const std::string& question) {
    if (trim(question).empty()) throw ValidationError("question must be non-empty");
    std::map<std::string, std::string> fields{
        {"question", question}, {"examples", rendered_examples(ExampleStyle::plain)}};

    std::string raw;
    for (int attempt = 0; attempt <= cfg_.content_retries; ++attempt) {
        raw = complete_template("extract_entities", fields, cfg_.k_shot);
        auto entities = parse_name_list(raw);
        if (!entities.empty()) return entities;
    }
    throw ExtractionError("no entities extracted from question", raw);
}

std::vector<std::string> Gateway::extract_relations(const std::string& question,
                                                    const std::vector<std::string>& entities) {
    std::string joined;
    for (std::size_t i = 0; i < entities.size(); ++i) {
        if (i) joined += ", ";
        joined += entities[i];
    }
    std::string raw = complete_template(
        "extract_relations",
        {{"question", question},
         {"entities", joined},
         {"examples", rendered_examples(ExampleStyle::plain)}},
        cfg_.k_shot);

    // A queried relation must be a sub-sequence of the question itself.
    std::string norm_question = normalize_name(question);
    std::vector<std::string> out;
    for (const auto& rel : parse_name_list(raw)) {
        if (norm_question.find(rel) != std::string::npos) out.push_back(rel);
    }
    return out;
}

std::string Gateway::relation_probe(const std::string& template_id, const std::string& e1,
                                    const std::string& e2) {
    if (e1 == e2) throw ValidationError("relation probe needs two distinct entities");
    for (int attempt = 0; attempt <= cfg_.content_retries; ++attempt) {
        std::string raw = complete_template(
            template_id,
            {{"entity_1", e1}, {"entity_2", e2}, {"examples", ""}});
        std::string rel = normalize_name(strip_quotes(raw));
        if (!rel.empty()) return rel;
    }
    throw ExtractionError("empty relation from " + template_id, "");
}

std::string Gateway::inner_relation(const std::string& e1, const std::string& e2) {
    return relation_probe("inner_relation", e1, e2);
}

std::string Gateway::open_relation(const std::string& e1, const std::string& e2) {
    return relation_probe("open_relation", e1, e2);
}

Veracity Gateway::probe_veracity(const Triple& candidate) {
    std::string raw = complete_template("probe_veracity",
                                        {{"statement", render_statement(candidate)}});
    auto label = parse_label(raw, {"yes", "no", "maybe"});
    if (!label) {
        add_warning("probe_veracity: malformed response treated as maybe");
        return Veracity::maybe;
    }
    if (*label == "yes") return Veracity::yes;
    if (*label == "no") return Veracity::no;
    return Veracity::maybe;
}

std::vector<Veracity> Gateway::probe_veracity_batch(const std::vector<Triple>& candidates,
                                                    std::size_t batch_size) {
    if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
    std::vector<Veracity> out;
    out.reserve(candidates.size());

    if (batch_size == 1) {
        for (const auto& c : candidates) out.push_back(probe_veracity(c));
        return out;
    }

    for (std::size_t start = 0; start < candidates.size(); start += batch_size) {
        std::size_t end = std::min(candidates.size(), start + batch_size);
        std::string statements;
        for (std::size_t i = start; i < end; ++i) {
            statements += std::to_string(i - start + 1) + ". " +
                          render_statement(candidates[i]);
            if (i + 1 < end) statements += "\n";
        }
        std::string raw =
            complete_template("probe_veracity_batch", {{"statements", statements}});

        std::vector<std::optional<Veracity>> labels(end - start);
        for (const auto& line : split(raw, '\n')) {
            std::string t = trim(line);
            std::size_t d = 0;
            while (d < t.size() && std::isdigit(static_cast<unsigned char>(t[d]))) ++d;
            if (d == 0) continue;
            std::size_t idx = std::stoul(t.substr(0, d));
            if (idx < 1 || idx > labels.size()) continue;
            auto label = parse_label(t.substr(d), {"yes", "no", "maybe"});
            if (!label) continue;
            labels[idx - 1] = *label == "yes"  ? Veracity::yes
                              : *label == "no" ? Veracity::no
                                               : Veracity::maybe;
        }
        bool complete_batch =
            std::all_of(labels.begin(), labels.end(), [](const auto& l) { return l.has_value(); });
        if (complete_batch) {
            for (const auto& l : labels) out.push_back(*l);
        } else {
            add_warning("probe_veracity_batch: malformed reply, falling back to single probes");
            for (std::size_t i = start; i < end; ++i) out.push_back(probe_veracity(candidates[i]));
        }
    }
    return out;
}

Path2 Gateway::select_path(const std::vector<Path2>& paths, const std::string& question) {
    if (paths.empty()) throw ValidationError("select_path needs at least one candidate");
    if (paths.size() == 1) return paths[0];

    std::string facts;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        facts += tuple_form(paths[i]);
        if (i + 1 < paths.size()) facts += "\n";
    }

    auto match = [&](const std::string& raw) -> const Path2* {
        std::string t = trim(raw);
        const Path2* found = nullptr;
        for (const auto& p : paths) {
            std::string rendered = tuple_form(p);
            if (t == rendered) return &p;
            if (t.find(rendered) != std::string::npos) {
                if (found) return nullptr;  // ambiguous containment
                found = &p;
            }
        }
        return found;
    };

    for (int attempt = 0; attempt <= cfg_.content_retries; ++attempt) {
        std::string raw = complete_template("select_path",
                                            {{"facts", facts}, {"question", question}});
        if (const Path2* p = match(raw)) return *p;
    }
    add_warning("select_path: backend named no candidate, falling back to first path");
    return *std::min_element(paths.begin(), paths.end());
}

std::string Gateway::generate_answer(
    const std::string& question,
    const std::vector<std::pair<std::string, std::vector<Triple>>>& context_blocks,
    const std::vector<std::string>& prior_answers, AnswerFormat format) {
    static const std::vector<std::string> kLabels = {"affirmative", "counterfactual", "expert"};
    if (context_blocks.empty() || context_blocks.size() > 3) {
        throw ValidationError("generate_answer expects 1 to 3 context blocks");
    }
    for (std::size_t i = 0; i < context_blocks.size(); ++i) {
        if (context_blocks[i].first != kLabels[i]) {
            throw ValidationError("unexpected context block label: " + context_blocks[i].first);
        }
    }
    if (prior_answers.size() + 1 != context_blocks.size()) {
        throw ValidationError("one prior answer required per earlier stage");
    }

    std::map<std::string, std::string> fields{
        {"question", question},
        {"answer_space", answer_space(format)},
        {"examples", rendered_examples(ExampleStyle::plain)},
        {"affirmative_triplets", render_triples(context_blocks[0].second)}};
    std::string template_id = "answer_stage_a";
    if (context_blocks.size() >= 2) {
        template_id = "answer_stage_ac";
        fields["answer_a"] = prior_answers[0];
        fields["counterfactual_triplets"] = render_triples(context_blocks[1].second);
    }
    if (context_blocks.size() == 3) {
        template_id = "answer_stage_ace";
        fields["answer_ac"] = prior_answers[1];
        fields["expert_triplets"] = render_triples(context_blocks[2].second);
    }
    return complete_template(template_id, fields, cfg_.k_shot);
}

}  // namespace give

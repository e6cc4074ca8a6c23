#include "give/prompts.hpp"

#include <json.hpp>

#include <cctype>
#include <fstream>

#include "give/errors.hpp"

namespace give {

using nlohmann::json;

std::vector<KShotExample> load_examples(const std::filesystem::path& jsonl_path) {
    std::ifstream in(jsonl_path);
    if (!in) throw ParseError("cannot open examples file: " + jsonl_path.string());
    std::vector<KShotExample> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw ParseError("invalid JSON object in examples file", lineno);
        }
        KShotExample ex;
        ex.question = j.value("question", "");
        ex.answer = j.value("answer", "");
        ex.reasoning = j.value("reasoning", "");
        ex.knowledge = j.value("knowledge", "");
        if (ex.question.empty() || ex.answer.empty()) {
            throw ParseError("example needs non-empty question and answer", lineno);
        }
        out.push_back(std::move(ex));
    }
    return out;
}

std::string render_examples(const std::vector<KShotExample>& examples, std::size_t k,
                            ExampleStyle style) {
    std::string out;
    std::size_t n = std::min(k, examples.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& ex = examples[i];
        switch (style) {
            case ExampleStyle::plain:
                out += "Q: " + ex.question + "\nA: " + ex.answer + "\n\n";
                break;
            case ExampleStyle::cot:
                out += "Q: " + ex.question + " Let's think step by step.\nA: ";
                if (!ex.reasoning.empty()) out += ex.reasoning + " ";
                out += ex.answer + "\n\n";
                break;
            case ExampleStyle::rag:
                out += "Q: " + ex.question + "\n";
                if (!ex.knowledge.empty()) out += "Knowledge: " + ex.knowledge + "\n";
                out += "A: ";
                if (!ex.reasoning.empty()) out += ex.reasoning + " ";
                out += ex.answer + "\n\n";
                break;
        }
    }
    return out;
}

namespace {

const std::map<std::string, std::string>& builtin_templates() {
    static const std::map<std::string, std::string> kTemplates = {
        {"extract_entities",
         "Please retrieve the top entities that contribute to the question. Answer only the "
         "top entities, separated by comma.\n\n{examples}Question: {question}\n"},

        {"extract_relations",
         "Please retrieve the relationships that connect the given entities in the "
         "question.\n\n{examples}Question: {question}\n\nEntities: {entities}\n"},

        {"inner_relation",
         "You are a helpful assistant that answers a short relationship in a few words "
         "between two given biomedical entities.\n\n{examples}Entities: {entity_1}, "
         "{entity_2}\n"},

        {"open_relation",
         "You are a helpful assistant that answers a short relationship in a few words "
         "between two given biomedical entities.\n\n{examples}Entities: {entity_1}, "
         "{entity_2}\n"},

        {"probe_veracity",
         "You are a helpful assistant that answers yes, no or maybe depending on the "
         "correctness of the given statement.\n\n{statement}. Is it true?\n"},

        {"probe_veracity_batch",
         "You are a helpful assistant that answers yes, no or maybe depending on the "
         "correctness of each given statement. Answer one line per statement, formatted as "
         "\"<number>. <yes, no or maybe>\".\n\nStatements:\n{statements}\n"},

        {"select_path",
         "You are a helpful assistant that selects one from the given knowledge facts "
         "(entity, relation, entity, relation, entity), that is most important to the given "
         "question.\n\nKnowledge Facts:\n{facts}\n\nQuestion to answer: {question}\n"},

        {"answer_io",
         "You are a helpful assistant that answers a given question about medical knowledge "
         "with {answer_space}, based on your own knowledge.\n\n{examples}Q: {question}\n"},

        {"answer_cot",
         "You are a helpful assistant that answers a given question about medical knowledge "
         "with {answer_space}, based on your own knowledge.\n\n{examples}Q: {question} "
         "Let's think step by step.\n"},

        {"answer_rag",
         "You are a helpful assistant that answers a given question about medical knowledge "
         "with {answer_space}, based on the retrieved textual knowledge \"entity relation "
         "entity\" from an expert knowledge graph.\n\n{examples}Q: {question}\n\nKnowledge: "
         "{knowledge}\n"},

        {"answer_stage_a",
         "You are a helpful assistant that answers a given question about medical knowledge "
         "with {answer_space}, based on the retrieved knowledge triplets (entity, relation, "
         "entity) from your own knowledge. The return must be one of {answer_space}.\n\n"
         "{examples}Q: {question}\n\nKnowledge triplets: {affirmative_triplets}\n"},

        {"answer_stage_ac",
         "You are a helpful assistant that answers a given question about medical knowledge "
         "with {answer_space}, based on the retrieved knowledge triplets (entity, relation, "
         "entity) from your own knowledge.\n\n{examples}Q: {question}\n\nKnowledge "
         "triplets: {affirmative_triplets}\n\nA: {answer_a}\n\nAdditional knowledge "
         "triplets: {counterfactual_triplets}\n"},

        {"answer_stage_ace",
         "You are a helpful assistant that answers a given question about medical knowledge "
         "with {answer_space}, based on the retrieved knowledge triplets (entity, relation, "
         "entity) from your own knowledge, and the knowledge triplets from an expert "
         "knowledge base. The return must be one of {answer_space}.\n\n{examples}Q: "
         "{question}\n\nKnowledge triplets: {affirmative_triplets}\n\nA: {answer_a}\n\n"
         "Additional knowledge triplets: {counterfactual_triplets}\n\nA: {answer_ac}\n\n"
         "Additional knowledge triplets retrieved from expert knowledge base: "
         "{expert_triplets}\n"},
    };
    return kTemplates;
}

}  // namespace

PromptRegistry PromptRegistry::builtin() {
    PromptRegistry reg;
    reg.templates_ = builtin_templates();
    return reg;
}

void PromptRegistry::load_overrides(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw ValidationError("prompt directory does not exist: " + dir.string());
    }
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        templates_[entry.path().stem().string()] = std::move(text);
    }
}

bool PromptRegistry::has(const std::string& template_id) const {
    return templates_.count(template_id) > 0;
}

const std::string& PromptRegistry::text(const std::string& template_id) const {
    auto it = templates_.find(template_id);
    if (it == templates_.end()) throw ValidationError("unknown template: " + template_id);
    return it->second;
}

void PromptRegistry::set(const std::string& template_id, std::string text) {
    templates_[template_id] = std::move(text);
}

std::string PromptRegistry::render(const std::string& template_id,
                                   const std::map<std::string, std::string>& fields) const {
    const std::string& tpl = text(template_id);
    std::string out;
    out.reserve(tpl.size());
    std::size_t i = 0;
    while (i < tpl.size()) {
        char c = tpl[i];
        if (c != '{') {
            out.push_back(c);
            ++i;
            continue;
        }
        std::size_t close = tpl.find('}', i + 1);
        if (close == std::string::npos) {
            out.append(tpl, i, std::string::npos);
            break;
        }
        std::string name = tpl.substr(i + 1, close - i - 1);
        auto it = fields.find(name);
        if (it == fields.end()) {
            throw ValidationError("template " + template_id + " needs field {" + name + "}");
        }
        out += it->second;
        i = close + 1;
    }
    return out;
}

std::vector<std::string> PromptRegistry::ids() const {
    std::vector<std::string> out;
    out.reserve(templates_.size());
    for (const auto& [k, _] : templates_) out.push_back(k);
    return out;
}

}  // namespace give

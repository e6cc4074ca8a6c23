#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "give/kg.hpp"
#include "give/prompts.hpp"

namespace give {

enum class Veracity { yes, no, maybe };
std::string to_string(Veracity v);

enum class AnswerFormat { yes_no, yes_no_maybe, multiple_choice };
std::string to_string(AnswerFormat f);
AnswerFormat answer_format_from_string(const std::string& s);

// Phrase substituted for {answer_space} in the answer templates.
std::string answer_space(AnswerFormat f);

// Leading-token label match with a whole-word substring fallback; labels are
// matched case-insensitively and the earliest occurrence wins. Returns the
// canonical label or nullopt.
std::optional<std::string> parse_label(const std::string& raw,
                                       const std::vector<std::string>& labels);

struct PromptRecord {
    std::string template_id;
    std::string rendered_text;
    std::size_t k_shot_count = 0;
    std::string response_text;
    std::string backend_id;
    std::int64_t latency_ms = 0;
};

// Append-only record log; one entry per backend call.
class PromptLog {
public:
    void append(PromptRecord rec);
    std::size_t size() const;
    std::map<std::string, std::size_t> counts_by_template() const;
    std::vector<PromptRecord> snapshot() const;

private:
    mutable std::mutex mu_;
    std::vector<PromptRecord> records_;
};

struct ChatRequest {
    std::string template_id;
    std::string text;  // fully rendered prompt
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string id() const = 0;
    // Returns raw completion text; throws TransportError on failure.
    virtual std::string complete(const ChatRequest& req) const = 0;
};

// Hidden ground truth backing the deterministic mock backend. The gold graph
// holds facts that are true, negative_edges facts that are false; everything
// else is unknown. Lexicons map question substrings to entity/relation names.
class MockWorldModel {
public:
    // TSV with optional [gold] / [negative] / [entity_lexicon] /
    // [relation_lexicon] / [options] sections; lines before a header are gold
    // edges. Shares the KG triple syntax.
    static MockWorldModel load(const std::filesystem::path& path);

    static MockWorldModel make(const std::vector<Triple>& gold,
                               const std::vector<Triple>& negatives,
                               std::vector<std::pair<std::string, std::string>> entity_lexicon,
                               std::vector<std::pair<std::string, std::string>> relation_lexicon,
                               bool two_hop_inference = true);

    const KnowledgeGraph& gold() const { return gold_; }
    const std::set<Triple>& negatives() const { return negatives_; }
    const std::vector<std::pair<std::string, std::string>>& entity_lexicon() const {
        return entity_lexicon_;
    }
    const std::vector<std::pair<std::string, std::string>>& relation_lexicon() const {
        return relation_lexicon_;
    }
    bool two_hop_inference() const { return two_hop_inference_; }

    // Lexicon hits in question order (position, then longer key first).
    std::vector<std::string> scan_entities(const std::string& question) const;
    std::vector<std::string> scan_relations(const std::string& question) const;

private:
    KnowledgeGraph gold_;
    std::set<Triple> negatives_;
    std::vector<std::pair<std::string, std::string>> entity_lexicon_;
    std::vector<std::pair<std::string, std::string>> relation_lexicon_;
    bool two_hop_inference_ = true;
};

// Deterministic test double: a pure function of (world model, request).
class MockChatBackend : public ChatBackend {
public:
    explicit MockChatBackend(const MockWorldModel& world) : world_(&world) {}
    std::string id() const override { return "mock"; }
    std::string complete(const ChatRequest& req) const override;

private:
    const MockWorldModel* world_;
};

struct HttpChatConfig {
    std::string base_url;
    std::string path = "/v1/chat/completions";
    std::string model;
    double temperature = 0.0;
    double top_p = 1.0;
    int retries = 2;
    int backoff_ms = 250;
    int max_in_flight = 4;
    std::string api_key_env = "GIVE_API_KEY";
};

// JSON-over-HTTP chat endpoint. Request {model, messages, temperature,
// top_p}, response {choices:[{message:{content}}]}. Credentials come from
// the environment, never from config files.
class HttpChatBackend : public ChatBackend {
public:
    explicit HttpChatBackend(HttpChatConfig cfg);
    ~HttpChatBackend() override;
    std::string id() const override;
    std::string complete(const ChatRequest& req) const override;

private:
    struct Limiter;
    HttpChatConfig cfg_;
    std::unique_ptr<Limiter> limiter_;
};

struct GatewayConfig {
    std::vector<KShotExample> examples;
    std::size_t k_shot = 0;
    int content_retries = 1;  // malformed-response retries for single ops
};

// Typed interface over a chat backend: every pipeline interaction goes
// through here and leaves exactly one PromptRecord per backend call.
class Gateway {
public:
    Gateway(const ChatBackend& backend, const PromptRegistry& registry,
            GatewayConfig cfg = {});

    // Renders the template and completes it once (no content retry).
    std::string complete_template(const std::string& template_id,
                                  const std::map<std::string, std::string>& fields,
                                  std::size_t k_shot_count = 0);

    std::vector<std::string> decompose_entities(const std::string& question);
    std::vector<std::string> extract_relations(const std::string& question,
                                               const std::vector<std::string>& entities);
    std::string inner_relation(const std::string& e1, const std::string& e2);
    std::string open_relation(const std::string& e1, const std::string& e2);
    Veracity probe_veracity(const Triple& candidate);
    std::vector<Veracity> probe_veracity_batch(const std::vector<Triple>& candidates,
                                               std::size_t batch_size);
    Path2 select_path(const std::vector<Path2>& paths, const std::string& question);

    // context_blocks: ordered (label, triples) with labels drawn from
    // {affirmative, counterfactual, expert}; prior_answers holds the staged
    // answers already produced, in order.
    std::string generate_answer(const std::string& question,
                                const std::vector<std::pair<std::string, std::vector<Triple>>>&
                                    context_blocks,
                                const std::vector<std::string>& prior_answers,
                                AnswerFormat format);

    std::string rendered_examples(ExampleStyle style) const;

    const PromptLog& log() const { return log_; }
    std::vector<std::string> warnings() const;
    void add_warning(const std::string& w);

private:
    std::string relation_probe(const std::string& template_id, const std::string& e1,
                               const std::string& e2);

    const ChatBackend* backend_;
    const PromptRegistry* registry_;
    GatewayConfig cfg_;
    PromptLog log_;
    mutable std::mutex warn_mu_;
    std::vector<std::string> warnings_;
};

// Render helpers shared by gateway, pipeline and bench.
std::string render_triples(const std::vector<Triple>& triples);
std::string render_statement(const Triple& t);

}  // namespace give

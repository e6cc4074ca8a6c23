#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "give/pipeline.hpp"

namespace give {

struct QAItem {
    std::string id;
    std::string question;
    std::vector<std::string> choices;  // multiple choice only
    std::string gold;                  // yes/no/maybe or a choice label
    AnswerFormat format = AnswerFormat::yes_no;
};

// JSONL loader; one {"id", "question", "gold"[, "choices"]} object per line.
// Gold context never exists in this schema, so it can never reach a prompt.
std::vector<QAItem> load_dataset(const std::filesystem::path& path, AnswerFormat format);

// Choice labels "A", "B", ... for an n-way item.
std::vector<std::string> choice_labels(std::size_t n);

// Question text with the choice block appended (identity for yes/no formats).
std::string render_question(const QAItem& item);

// Canonical label from raw model text; "unparsed" when nothing matches
// (always scored incorrect).
std::string normalize_prediction(const std::string& raw, AnswerFormat format,
                                 std::size_t n_choices = 0);

enum class Method { io, cot, rag, give_a, give_ac, give_ace };
std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct ItemResult {
    std::string predicted;
    bool correct = false;
    std::optional<QueryRecord> record;  // give methods only
};

struct EvalResult {
    std::string method_id;
    std::size_t dataset_size = 0;
    std::map<std::string, ItemResult> per_item;     // excludes hard failures
    std::map<std::string, std::string> failures;    // id -> error (scored incorrect)
    double accuracy = 0.0;                          // correct / dataset_size

    void recompute_accuracy();
};

struct BenchContext {
    PipelineContext pipeline;
    const SimilarityIndex* triple_index = nullptr;  // RAG baseline only
    std::size_t rag_k = 10;
    PromptLog* prompt_sink = nullptr;  // optional capture of baseline prompts
};

// Runs one method over the dataset. Per-item errors are recorded and scored
// incorrect; they never abort the batch.
EvalResult evaluate(Method method, const std::vector<QAItem>& items, const BenchContext& ctx);

// Re-reads a different staged answer out of give records; no new LLM calls.
EvalResult derive_give_variant(const EvalResult& base, Method variant,
                               const std::vector<QAItem>& items);

struct BucketRow {
    std::string label;
    std::size_t count = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
};

// Accuracy per expert-ratio interval; items without a defined ratio (or that
// hard-failed) land in the "undefined" bucket. Counts sum to dataset size.
std::vector<BucketRow> expert_ratio_buckets(const EvalResult& results,
                                            const std::vector<double>& edges);

struct GroupStats {
    std::size_t questions = 0;  // questions with a pipeline record
    double avg_groups = 0.0;
    double avg_candidate_relations_per_pair = 0.0;
    double pct_intermediate = 0.0;
};

GroupStats group_statistics(const EvalResult& results);

struct OverlapCounts {
    std::size_t both = 0;
    std::size_t only_a = 0;
    std::size_t only_b = 0;
    std::size_t neither = 0;
};

// Four disjoint counts over the shared id universe; throws on id mismatch.
OverlapCounts overlap_analysis(const EvalResult& a, const EvalResult& b);

// One JSON object per item, in dataset order (stable bytes for fixed inputs).
std::string results_to_jsonl(const EvalResult& results, const std::vector<QAItem>& items);

// Accuracy + aggregates as a JSON object string (pretty-printed).
std::string summary_to_json(const EvalResult& results, const std::vector<double>& bucket_edges);

// Reload an EvalResult from a results JSONL file (for `analyze`).
EvalResult load_results_jsonl(const std::filesystem::path& path);

// Rebuild a QueryRecord from its JSON line form.
QueryRecord record_from_json(const std::string& json_text);

}  // namespace give

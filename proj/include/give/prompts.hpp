#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace give {

// One few-shot demonstration. `reasoning` and `knowledge` are optional and
// only rendered by the styles that use them.
struct KShotExample {
    std::string question;
    std::string answer;
    std::string reasoning;
    std::string knowledge;
};

std::vector<KShotExample> load_examples(const std::filesystem::path& jsonl_path);

enum class ExampleStyle { plain, cot, rag };

// Render up to k examples as "Q: ...\nA: ...\n\n" blocks (variants per
// style); returns "" for k == 0.
std::string render_examples(const std::vector<KShotExample>& examples, std::size_t k,
                            ExampleStyle style);

// Named prompt templates with {placeholder} substitution. The builtin set
// covers every pipeline interaction; any template can be overridden by a
// text file named "<template_id>.txt" in a prompt directory.
class PromptRegistry {
public:
    static PromptRegistry builtin();

    void load_overrides(const std::filesystem::path& dir);

    bool has(const std::string& template_id) const;
    const std::string& text(const std::string& template_id) const;
    void set(const std::string& template_id, std::string text);

    // Substitutes every {name} occurrence; throws if a placeholder has no
    // matching field.
    std::string render(const std::string& template_id,
                       const std::map<std::string, std::string>& fields) const;

    std::vector<std::string> ids() const;

private:
    std::map<std::string, std::string> templates_;
};

}  // namespace give

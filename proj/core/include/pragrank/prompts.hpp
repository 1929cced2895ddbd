#pragma once

// Prompt templates for summary generation, question answering and source
// reconstruction, with `{name}` placeholder substitution.
//
// Role-less backends get the two chat parts flattened as
//     system + "\n\n" + user

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pragrank/backend.hpp"

namespace pragrank {

enum class TemplateName { Summarize, QuestionAnswer, SourceReconstruct };

std::string_view to_string(TemplateName name) noexcept;

struct PromptTemplate {
    TemplateName name = TemplateName::Summarize;
    std::string system;
    std::string user;
};

using Bindings = std::map<std::string, std::string, std::less<>>;

inline constexpr std::string_view kChatSeparator = "\n\n";

// Placeholder names in order of appearance (duplicates kept).
std::vector<std::string> placeholders(std::string_view text);

// Single-pass substitution; bound values are never re-scanned.
// Throws MissingPlaceholder naming the first unbound placeholder.
Prompt render(const PromptTemplate& tmpl, const Bindings& bindings);

class PromptSet {
public:
    // Templates compiled into the library from core/assets/prompts.
    static PromptSet builtin();

    // Reads <dir>/<name>.system.txt and <dir>/<name>.user.txt for each
    // template; files missing from `dir` fall back to the built-in text.
    static PromptSet load(const std::filesystem::path& dir);

    const PromptTemplate& get(TemplateName name) const;

private:
    PromptTemplate summarize_;
    PromptTemplate question_answer_;
    PromptTemplate source_reconstruct_;
};

// Multiple questions are joined with a single space.
std::string join_questions(std::span<const std::string> questions);

// Placeholders: Summarize {q} {s}; QuestionAnswer {d} {q}; SourceReconstruct {s}.
Prompt summarize_prompt(const PromptSet& set, std::string_view query, std::string_view source);
Prompt question_answer_prompt(const PromptSet& set, std::string_view document,
                              std::string_view query);
Prompt source_reconstruction_prompt(const PromptSet& set, std::string_view summary);

// Answer with an explicit template set; the overload in backend.hpp uses builtin().
ScoredText answer(const Backend& backend, const PromptSet& prompts, std::string_view source,
                  std::string_view query, std::uint32_t beam_size = kDefaultAnswerBeamSize,
                  std::uint32_t max_new_tokens = kDefaultAnswerMaxTokens);

}  // namespace pragrank

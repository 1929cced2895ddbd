#include "pragrank/prompts.hpp"

#include <fstream>
#include <sstream>

#include "assets.hpp"
#include "pragrank/error.hpp"

namespace pragrank {

namespace {

bool is_name_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

bool is_name_char(char c) { return is_name_start(c) || (c >= '0' && c <= '9'); }

// Length of the placeholder token starting at text[pos] ("{name}"), or 0.
std::size_t placeholder_at(std::string_view text, std::size_t pos) {
    if (text[pos] != '{' || pos + 2 >= text.size() || !is_name_start(text[pos + 1])) return 0;
    std::size_t end = pos + 2;
    while (end < text.size() && is_name_char(text[end])) ++end;
    if (end >= text.size() || text[end] != '}') return 0;
    return end - pos + 1;
}

std::string substitute(std::string_view text, const Bindings& bindings) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const std::size_t len = placeholder_at(text, i);
        if (len == 0) {
            out.push_back(text[i++]);
            continue;
        }
        const std::string_view name = text.substr(i + 1, len - 2);
        auto it = bindings.find(name);
        if (it == bindings.end()) {
            throw Error(ErrorCode::MissingPlaceholder,
                        "no binding for placeholder {" + std::string(name) + "}");
        }
        out += it->second;
        i += len;
    }
    return out;
}

std::string strip_final_newline(std::string_view text) {
    if (!text.empty() && text.back() == '\n') text.remove_suffix(1);
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    return std::string(text);
}

std::string_view file_stem(TemplateName name) {
    switch (name) {
        case TemplateName::Summarize: return "summarize";
        case TemplateName::QuestionAnswer: return "question_answer";
        case TemplateName::SourceReconstruct: return "source_reconstruct";
    }
    return "";
}

PromptTemplate builtin_template(TemplateName name) {
    const std::string stem(file_stem(name));
    return PromptTemplate{
        name,
        strip_final_newline(detail::embedded_asset("prompts/" + stem + ".system.txt")),
        strip_final_newline(detail::embedded_asset("prompts/" + stem + ".user.txt")),
    };
}

void override_from(const std::filesystem::path& file, std::string& target) {
    if (!std::filesystem::exists(file)) return;
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read prompt file " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    target = strip_final_newline(buf.str());
}

}  // namespace

std::string_view to_string(TemplateName name) noexcept {
    switch (name) {
        case TemplateName::Summarize: return "Summarize";
        case TemplateName::QuestionAnswer: return "QuestionAnswer";
        case TemplateName::SourceReconstruct: return "SourceReconstruct";
    }
    return "Unknown";
}

std::vector<std::string> placeholders(std::string_view text) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const std::size_t len = placeholder_at(text, i);
        if (len == 0) continue;
        names.emplace_back(text.substr(i + 1, len - 2));
        i += len - 1;
    }
    return names;
}

Prompt render(const PromptTemplate& tmpl, const Bindings& bindings) {
    Prompt p;
    p.system = substitute(tmpl.system, bindings);
    p.user = substitute(tmpl.user, bindings);
    p.text = *p.system;
    p.text += kChatSeparator;
    p.text += *p.user;
    return p;
}

PromptSet PromptSet::builtin() {
    PromptSet set;
    set.summarize_ = builtin_template(TemplateName::Summarize);
    set.question_answer_ = builtin_template(TemplateName::QuestionAnswer);
    set.source_reconstruct_ = builtin_template(TemplateName::SourceReconstruct);
    return set;
}

PromptSet PromptSet::load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw Error(ErrorCode::IoError, "prompt directory " + dir.string() + " does not exist");
    }
    PromptSet set = builtin();
    for (PromptTemplate* t : {&set.summarize_, &set.question_answer_, &set.source_reconstruct_}) {
        const std::string stem(file_stem(t->name));
        override_from(dir / (stem + ".system.txt"), t->system);
        override_from(dir / (stem + ".user.txt"), t->user);
    }
    return set;
}

const PromptTemplate& PromptSet::get(TemplateName name) const {
    switch (name) {
        case TemplateName::Summarize: return summarize_;
        case TemplateName::QuestionAnswer: return question_answer_;
        case TemplateName::SourceReconstruct: return source_reconstruct_;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown template");
}

std::string join_questions(std::span<const std::string> questions) {
    std::string out;
    for (const auto& q : questions) {
        if (!out.empty()) out.push_back(' ');
        out += q;
    }
    return out;
}

Prompt summarize_prompt(const PromptSet& set, std::string_view query, std::string_view source) {
    return render(set.get(TemplateName::Summarize),
                  {{"q", std::string(query)}, {"s", std::string(source)}});
}

Prompt question_answer_prompt(const PromptSet& set, std::string_view document,
                              std::string_view query) {
    return render(set.get(TemplateName::QuestionAnswer),
                  {{"d", std::string(document)}, {"q", std::string(query)}});
}

Prompt source_reconstruction_prompt(const PromptSet& set, std::string_view summary) {
    return render(set.get(TemplateName::SourceReconstruct), {{"s", std::string(summary)}});
}

ScoredText answer(const Backend& backend, const PromptSet& prompts, std::string_view source,
                  std::string_view query, std::uint32_t beam_size, std::uint32_t max_new_tokens) {
    if (source.empty() || query.empty()) {
        throw Error(ErrorCode::InvalidArgument, "answer requires a non-empty source and query");
    }
    DecodingSpec spec;
    spec.method = DecodingMethod::Beam;
    spec.beam_size = beam_size;
    spec.max_new_tokens = max_new_tokens;
    auto beams = backend.generate(question_answer_prompt(prompts, source, query), 1, spec);
    if (beams.empty()) throw Error(ErrorCode::BackendProtocol, "backend returned no answer beam");
    return std::move(beams.front());
}

}  // namespace pragrank

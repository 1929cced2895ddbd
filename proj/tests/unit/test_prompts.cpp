#include <filesystem>

#include "doctest.h"
#include "oracles.hpp"
#include "pragrank/error.hpp"
#include "pragrank/prompts.hpp"
#include "pragrank/toy_lm.hpp"

using namespace pragrank;

TEST_CASE("builtin templates carry the expected placeholders") {
    const auto set = PromptSet::builtin();
    const auto& s = set.get(TemplateName::Summarize);
    CHECK(placeholders(s.user) == std::vector<std::string>{"q", "s"});
    CHECK(placeholders(s.system).empty());
    CHECK(placeholders(set.get(TemplateName::QuestionAnswer).user) ==
          std::vector<std::string>{"d", "q"});
    CHECK(placeholders(set.get(TemplateName::SourceReconstruct).user) ==
          std::vector<std::string>{"s"});
}

TEST_CASE("rendered summarize prompt") {
    const auto p = summarize_prompt(PromptSet::builtin(), "Why?", "The doc.");
    CHECK(*p.system ==
          "You are a helpful, respectful and honest assistant specializing in query-focused "
          "summarization.");
    CHECK(*p.user ==
          "Read the following document and related questions. Provide a summary which both "
          "summarizes the document as well as answers the questions. That is, the summary should "
          "summarize the main points of the document while providing answers to the given "
          "questions. Do not generate anything else other than the summary. Questions: Why? "
          "Document: The doc. Summary:");
    CHECK(p.text == *p.system + "\n\n" + *p.user);
}

TEST_CASE("rendered question answering and reconstruction prompts") {
    const auto set = PromptSet::builtin();
    const auto qa = question_answer_prompt(set, "D", "Q");
    CHECK(qa.user->size() > 0);
    CHECK(qa.user->find("Document: D Question: Q Answer:") != std::string::npos);
    const auto src = source_reconstruction_prompt(set, "S");
    CHECK(src.user->find("Summary: S Source: ") != std::string::npos);
    CHECK(src.text.back() == ' ');
}

TEST_CASE("substitution is single pass") {
    PromptTemplate t{TemplateName::Summarize, "sys {a}", "{a} and {b}{a}"};
    const auto p = render(t, {{"a", "{b}"}, {"b", "x"}});
    CHECK(*p.system == "sys {b}");
    CHECK(*p.user == "{b} and x{b}");
}

TEST_CASE("non-placeholder braces are literal") {
    CHECK(placeholders("{} {1a} {a b} {ok_1} {").size() == 1);
    PromptTemplate t{TemplateName::Summarize, "", "{} {1a} {x}"};
    CHECK(*render(t, {{"x", "y"}}).user == "{} {1a} y");
}

TEST_CASE("unbound placeholder") {
    PromptTemplate t{TemplateName::Summarize, "", "{q} {missing}"};
    try {
        render(t, {{"q", "x"}});
        FAIL("expected MissingPlaceholder");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingPlaceholder);
        CHECK(std::string(e.what()).find("missing") != std::string::npos);
    }
}

TEST_CASE("directory override replaces only present files") {
    const auto dir = oracle::scratch_dir("prompts");
    oracle::spit(dir / "summarize.user.txt", "Q={q} S={s}\n");
    const auto set = PromptSet::load(dir);
    CHECK(*summarize_prompt(set, "a", "b").user == "Q=a S=b");
    CHECK(set.get(TemplateName::Summarize).system ==
          PromptSet::builtin().get(TemplateName::Summarize).system);
    CHECK(set.get(TemplateName::QuestionAnswer).user ==
          PromptSet::builtin().get(TemplateName::QuestionAnswer).user);
    CHECK_THROWS_AS(PromptSet::load(dir / "nope"), Error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("questions are joined with single spaces") {
    const std::vector<std::string> qs{"What happened?", "Who won?"};
    CHECK(join_questions(qs) == "What happened? Who won?");
    CHECK(join_questions(std::span<const std::string>{}).empty());
}

TEST_CASE("answer uses the top beam of the question prompt") {
    const auto lm = ToyBigramLM::builtin();
    const auto a = answer(lm, "the river is wide", "what is the river like", 3, 8);
    DecodingSpec spec;
    spec.method = DecodingMethod::Beam;
    spec.beam_size = 3;
    spec.max_new_tokens = 8;
    const auto beams =
        lm.generate(question_answer_prompt(PromptSet::builtin(), "the river is wide",
                                           "what is the river like"),
                    1, spec);
    CHECK(a == beams.front());
    CHECK_THROWS_AS(answer(lm, "", "q"), Error);
}

#include <chrono>

#include "doctest.h"
#include "mock_server.hpp"
#include "pragrank/error.hpp"
#include "pragrank/http_backend.hpp"
#include "pragrank/prompts.hpp"

using namespace pragrank;

namespace {

HttpOptions opts(const oracle::MockServer& s) {
    HttpOptions o;
    o.base_url = s.url();
    o.initial_backoff = std::chrono::milliseconds(1);
    o.timeout = std::chrono::seconds(5);
    return o;
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("score round trip") {
    oracle::MockServer server;
    const HttpBackend b(opts(server));
    const auto s = b.score("hello there", "the");
    CHECK(std::abs(s.total_logprob - oracle::MockServer::logprob("hello there", "the")) <= 1e-12);
    CHECK(s.token_logprobs.size() == 3);
    CHECK(server.last_body().at("continuation") == "the");
    CHECK_FALSE(server.last_body().contains("chat"));
    CHECK(b.id() == "http:" + server.url());
}

TEST_CASE("chat prompts send their parts") {
    oracle::MockServer server;
    const HttpBackend b(opts(server));
    const Prompt p = summarize_prompt(PromptSet::builtin(), "q?", "doc");
    b.score(p, "x");
    const auto body = server.last_body();
    CHECK(body.at("prompt") == p.text);
    CHECK(body.at("chat").at("system") == *p.system);
    CHECK(body.at("chat").at("user") == *p.user);
}

TEST_CASE("generate sends decoding parameters") {
    oracle::MockServer server;
    const HttpBackend b(opts(server));
    DecodingSpec spec;
    spec.method = DecodingMethod::Nucleus;
    spec.p = 0.95;
    spec.temperature = 1.5;
    spec.max_new_tokens = 16;
    spec.seed = 42;
    const auto out = b.generate("alpha beta gamma", 3, spec);
    REQUIRE(out.size() == 3);
    for (const auto& t : out) {
        CHECK(std::abs(t.total_logprob - oracle::MockServer::logprob("alpha beta gamma", t.text)) <= 1e-12);
    }
    const auto body = server.last_body();
    CHECK(body.at("method") == "nucleus");
    CHECK(body.at("p") == 0.95);
    CHECK(body.at("temperature") == 1.5);
    CHECK(body.at("n") == 3);
    CHECK(body.at("seed") == 42);
    CHECK_FALSE(body.contains("k"));
    CHECK(b.generate("alpha beta gamma", 3, spec) == out);
}

TEST_CASE("transient failures are retried") {
    oracle::MockServer server;
    const HttpBackend b(opts(server));
    server.fail_next = 2;
    CHECK_NOTHROW(b.score("p", "x"));
    CHECK(server.requests == 3);
    server.fail_next = 3;
    CHECK(code_of([&] { b.score("p", "x"); }) == ErrorCode::BackendUnavailable);
}

TEST_CASE("client errors map to categories") {
    oracle::MockServer server;
    server.max_prompt = 5;
    const HttpBackend b(opts(server));
    CHECK(code_of([&] { b.score("a long prompt", "x"); }) == ErrorCode::TokenizationOverflow);
    DecodingSpec d;
    d.method = DecodingMethod::DiverseBeam;
    d.beam_size = 4;
    d.num_groups = 2;
    CHECK(code_of([&] { b.generate("p", 2, d); }) == ErrorCode::UnsupportedDecoding);
    CHECK(code_of([&] { b.score("p", ""); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("unreachable server") {
    HttpOptions o;
    o.base_url = "http://127.0.0.1:1";
    o.attempts = 2;
    o.initial_backoff = std::chrono::milliseconds(1);
    o.timeout = std::chrono::seconds(1);
    const HttpBackend b(o);
    CHECK(code_of([&] { b.score("p", "x"); }) == ErrorCode::BackendUnavailable);
}

TEST_CASE("external metric client") {
    oracle::MockServer server;
    const ExternalMetricClient m(opts(server));
    const std::vector<std::string> refs{"abc"};
    CHECK(m.score("overlap", "abxx", refs) == 0.5);
    CHECK(server.last_body().at("metric") == "overlap");
    CHECK_FALSE(server.last_body().contains("source"));
    m.score("overlap", "a", refs, std::string_view("src"));
    CHECK(server.last_body().at("source") == "src");
}

TEST_CASE("backend url from environment") {
    ::setenv("PRAGRANK_BACKEND_URL", "http://x:1", 1);
    CHECK(backend_url_from_env() == std::optional<std::string>("http://x:1"));
    ::setenv("PRAGRANK_BACKEND_URL", "", 1);
    CHECK_FALSE(backend_url_from_env().has_value());
    ::unsetenv("PRAGRANK_BACKEND_URL");
}

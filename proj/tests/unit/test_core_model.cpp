#include <cmath>
#include <limits>

#include "doctest.h"
#include "oracles.hpp"
#include "pragrank/error.hpp"
#include "pragrank/serialize.hpp"
#include "pragrank/types.hpp"

using namespace pragrank;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

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

TEST_CASE("rule ids round-trip") {
    for (Rule r : {Rule::AnswerRec, Rule::SourceRec, Rule::AnsSrcRec, Rule::LatentRec, Rule::Random,
                   Rule::Oracle}) {
        CHECK(parse_rule(to_string(r)) == r);
    }
    CHECK(to_string(Rule::AnsSrcRec) == "ans-src-rec");
    CHECK(code_of([] { parse_rule("answer_rec"); }) == ErrorCode::InvalidArgument);
    CHECK(is_score_based(Rule::LatentRec));
    CHECK_FALSE(is_score_based(Rule::Oracle));
}

TEST_CASE("error categories map to exit codes") {
    CHECK(exit_code_of(ErrorCode::SchemaError) == 2);
    CHECK(exit_code_of(ErrorCode::DuplicateId) == 2);
    CHECK(exit_code_of(ErrorCode::BackendUnavailable) == 3);
    CHECK(exit_code_of(ErrorCode::TokenizationOverflow) == 3);
    CHECK(exit_code_of(ErrorCode::UnsupportedDecoding) == 3);
    CHECK(exit_code_of(ErrorCode::LambdaOutOfRange) == 4);
    CHECK(exit_code_of(ErrorCode::MissingScore) == 4);
    CHECK(exit_code_of(ErrorCode::GridEmpty) == 4);
}

TEST_CASE("log score validity") {
    CHECK(is_valid_log_score(0.0));
    CHECK(is_valid_log_score(-3.5));
    CHECK(is_valid_log_score(kNegInf));
    CHECK_FALSE(is_valid_log_score(0.1));
    CHECK_FALSE(is_valid_log_score(std::numeric_limits<double>::infinity()));
    CHECK_FALSE(is_valid_log_score(std::nan("")));
}

TEST_CASE("format_real uses 17 significant digits") {
    CHECK(format_real(0.1) == "0.10000000000000001");
    CHECK(format_real(-2.0) == "-2");
    CHECK(format_real(kNegInf) == "-inf");
}

TEST_CASE("instance encode/decode") {
    Instance in;
    in.id = "a1";
    in.source = "src text";
    in.query = "what?";
    in.references = {"ref one", "ref two"};
    in.gold_answer = "gold";
    CHECK(encode(in) ==
          R"({"id":"a1","source":"src text","query":"what?","references":["ref one","ref two"],"gold_answer":"gold"})");
    CHECK(decode_instance(encode(in)) == in);
}

TEST_CASE("unknown fields survive a round trip") {
    const std::string line =
        R"({"id":"x","source":"s","query":"q","references":["r"],"topic":{"k":[1,2.5]},"note":"n"})";
    const Instance in = decode_instance(line);
    REQUIRE(in.extra.size() == 2);
    CHECK(in.extra[0].first == "topic");
    CHECK(encode(in) == line);

    const std::string pool_line =
        R"({"instance_id":"x","candidates":[{"text":"t","logp_s0":-1,"rank":3}],"origin":"m"})";
    CHECK(encode(decode_pool(pool_line)) == pool_line);
}

TEST_CASE("negative infinity is written as a string") {
    CandidatePool p;
    p.instance_id = "p";
    Candidate c;
    c.text = "t";
    c.logp_s0 = kNegInf;
    c.logp_answer_rec = -0.5;
    p.candidates.push_back(c);
    const std::string s = encode(p);
    CHECK(s == R"({"instance_id":"p","candidates":[{"text":"t","logp_s0":"-inf","logp_answer_rec":-0.5}]})");
    const CandidatePool back = decode_pool(s);
    CHECK(std::isinf(*back.candidates[0].logp_s0));
    CHECK(back == p);
}

TEST_CASE("pool round trip is exact for random doubles") {
    oracle::Gen g(11);
    for (int t = 0; t < 200; ++t) {
        CandidatePool p = g.pool(g.range(1, 12), "id" + std::to_string(t));
        if (g.coin()) p.answer = "ans";
        if (g.coin(0.2)) p.candidates[0].logp_source_rec = kNegInf;
        CHECK(decode_pool(encode(p)) == p);
    }
}

TEST_CASE("selection round trip") {
    Selection s;
    s.instance_id = "i";
    s.config.rule = Rule::AnsSrcRec;
    s.config.lambda = 0.3;
    s.config.alpha = 0.7;
    s.chosen_index = 2;
    s.combined_scores = std::vector<double>{-1.0, kNegInf, -0.25};
    CHECK(decode_selection(encode(s)) == s);

    Selection r;
    r.instance_id = "j";
    r.config.rule = Rule::Random;
    r.config.seed = 18446744073709551615ULL;
    CHECK(decode_selection(encode(r)) == r);
}

TEST_CASE("schema violations") {
    CHECK(code_of([] { decode_instance("{not json"); }) == ErrorCode::SchemaError);
    CHECK(code_of([] { decode_instance(R"({"id":"a","source":"s","query":"q"})"); }) ==
          ErrorCode::SchemaError);
    CHECK(code_of([] { decode_instance(R"({"id":"a","source":"s","query":"q","references":[]})"); }) ==
          ErrorCode::SchemaError);
    CHECK(code_of([] { decode_instance(R"({"id":"","source":"s","query":"q","references":["r"]})"); }) ==
          ErrorCode::SchemaError);
    CHECK(code_of([] { decode_instance(R"({"id":"a","source":"  ","query":"q","references":["r"]})"); }) ==
          ErrorCode::SchemaError);
    CHECK(code_of([] { decode_instance(R"({"id":7,"source":"s","query":"q","references":["r"]})"); }) ==
          ErrorCode::SchemaError);
    CHECK(code_of([] { decode_pool(R"({"instance_id":"a","candidates":[]})"); }) ==
          ErrorCode::SchemaError);
    CHECK(code_of([] { decode_pool(R"({"instance_id":"a","candidates":[{"text":"t","logp_s0":0.5}]})"); }) ==
          ErrorCode::SchemaError);
    CHECK(code_of([] { decode_pool(R"({"instance_id":"a","candidates":[{"text":"t","logp_s0":"inf"}]})"); }) ==
          ErrorCode::SchemaError);
    CHECK(code_of([] { decode_pool(R"({"instance_id":"a","candidates":[{"text":""}]})"); }) ==
          ErrorCode::SchemaError);
}

TEST_CASE("selector config validation") {
    SelectorConfig c;
    c.lambda = 1.5;
    CHECK(code_of([&] { validate(c); }) == ErrorCode::LambdaOutOfRange);
    c.lambda = 0.5;
    c.alpha = -0.1;
    CHECK(code_of([&] { validate(c); }) == ErrorCode::AlphaOutOfRange);
    c.alpha = 0.0;
    c.rule = Rule::Random;
    CHECK(code_of([&] { validate(c); }) == ErrorCode::InvalidArgument);
    c.seed = 1;
    CHECK_NOTHROW(validate(c));
    c.rule = Rule::Oracle;
    CHECK(code_of([&] { validate(c); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { decode_selector_config(R"({"rule":"answer-rec","lambda":2,"alpha":0})"); }) ==
          ErrorCode::LambdaOutOfRange);
}

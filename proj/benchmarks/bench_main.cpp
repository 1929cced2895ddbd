#include <benchmark/benchmark.h>

#include <random>

#include "pragrank/dataset.hpp"
#include "pragrank/experiments.hpp"
#include "pragrank/metrics.hpp"
#include "pragrank/prompts.hpp"
#include "pragrank/rsa.hpp"
#include "pragrank/toy_lm.hpp"

using namespace pragrank;

namespace {

TokenSeq random_tokens(std::mt19937_64& rng, std::size_t len, std::size_t vocab) {
    TokenSeq t(len);
    for (auto& w : t) w = "w" + std::to_string(rng() % vocab);
    return t;
}

CandidatePool random_pool(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-200.0, 0.0);
    CandidatePool p;
    p.instance_id = "bench";
    for (std::size_t i = 0; i < n; ++i) {
        Candidate c;
        c.text = "c";
        c.logp_s0 = u(rng);
        c.logp_answer_rec = u(rng);
        c.logp_source_rec = u(rng);
        p.candidates.push_back(c);
    }
    return p;
}

}  // namespace

static void BM_Rouge1(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const auto c = random_tokens(rng, static_cast<std::size_t>(state.range(0)), 50);
    const auto r = random_tokens(rng, static_cast<std::size_t>(state.range(0)), 50);
    for (auto _ : state) benchmark::DoNotOptimize(rouge_n(c, r, 1));
}
BENCHMARK(BM_Rouge1)->Arg(32)->Arg(256);

static void BM_RougeL(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const auto c = random_tokens(rng, static_cast<std::size_t>(state.range(0)), 50);
    const auto r = random_tokens(rng, static_cast<std::size_t>(state.range(0)), 50);
    for (auto _ : state) benchmark::DoNotOptimize(rouge_l(c, r));
}
BENCHMARK(BM_RougeL)->Arg(32)->Arg(256);

static void BM_MeteorLite(benchmark::State& state) {
    std::mt19937_64 rng(3);
    const auto c = random_tokens(rng, static_cast<std::size_t>(state.range(0)), 20);
    const auto r = random_tokens(rng, static_cast<std::size_t>(state.range(0)), 20);
    for (auto _ : state) benchmark::DoNotOptimize(meteor_lite(c, r));
}
BENCHMARK(BM_MeteorLite)->Arg(16)->Arg(64);

static void BM_ToyScore(benchmark::State& state) {
    ToyLMOptions o;
    o.history_weight = 1.0;
    const auto lm = ToyBigramLM::builtin(o);
    const auto in = make_fixture({}).front();
    const Prompt p = source_reconstruction_prompt(PromptSet::builtin(), in.references.front());
    for (auto _ : state) benchmark::DoNotOptimize(lm.score(p, in.source));
}
BENCHMARK(BM_ToyScore);

static void BM_ToyBeam(benchmark::State& state) {
    const auto lm = ToyBigramLM::builtin();
    DecodingSpec spec;
    spec.method = DecodingMethod::Beam;
    spec.beam_size = static_cast<std::uint32_t>(state.range(0));
    spec.max_new_tokens = 32;
    for (auto _ : state) benchmark::DoNotOptimize(lm.generate("what is the river like", 1, spec));
}
BENCHMARK(BM_ToyBeam)->Arg(1)->Arg(5);

static void BM_ToyNucleus(benchmark::State& state) {
    const auto lm = ToyBigramLM::builtin();
    DecodingSpec spec = parse_decoding("nucleus,p=0.95");
    spec.max_new_tokens = 32;
    for (auto _ : state) benchmark::DoNotOptimize(lm.generate("what is the river like", 10, spec));
}
BENCHMARK(BM_ToyNucleus);

static void BM_SelectAnsSrc(benchmark::State& state) {
    std::mt19937_64 rng(4);
    const auto pool = random_pool(rng, 10);
    SelectorConfig c;
    c.rule = Rule::AnsSrcRec;
    c.lambda = 0.6;
    c.alpha = 0.3;
    for (auto _ : state) benchmark::DoNotOptimize(select(pool, c, Instance{}));
}
BENCHMARK(BM_SelectAnsSrc);

static void BM_Sweep(benchmark::State& state) {
    const auto instances = make_fixture({});
    std::mt19937_64 rng(5);
    std::vector<CandidatePool> pools;
    for (const auto& in : instances) {
        auto p = random_pool(rng, 10);
        p.instance_id = in.id;
        for (std::size_t i = 0; i < p.candidates.size(); ++i) {
            p.candidates[i].text = in.references.front().substr(0, 10 + 3 * i);
        }
        pools.push_back(p);
    }
    SweepOptions o;
    o.metrics = parse_metric_list("rouge1,rougeL");
    for (auto _ : state) benchmark::DoNotOptimize(run_sweep(instances, pools, o));
}
BENCHMARK(BM_Sweep)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();

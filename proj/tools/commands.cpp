#include "commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json_util.hpp"
#include "pragrank/dataset.hpp"
#include "pragrank/error.hpp"
#include "pragrank/experiments.hpp"
#include "pragrank/http_backend.hpp"
#include "pragrank/metrics.hpp"
#include "pragrank/parallel.hpp"
#include "pragrank/prng.hpp"
#include "pragrank/prompts.hpp"
#include "pragrank/rsa.hpp"
#include "pragrank/serialize.hpp"
#include "pragrank/toy_lm.hpp"
#include "pragrank/version.hpp"

namespace pragrank::cli {

std::atomic<bool> interrupted{false};

namespace fs = std::filesystem;
using detail::Json;

namespace {

constexpr int kInterruptedStatus = 130;

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void write_text(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

// Stage outputs are new files; refuse to overwrite an input.
void check_distinct(const std::string& out, std::initializer_list<std::string> inputs) {
    if (out.empty()) throw Error(ErrorCode::InvalidArgument, "--out is required");
    std::error_code ec;
    for (const auto& in : inputs) {
        if (in.empty()) continue;
        if (in == out || (fs::exists(out, ec) && fs::equivalent(in, out, ec))) {
            throw Error(ErrorCode::InvalidArgument,
                        "output '" + out + "' would overwrite input '" + in + "'");
        }
    }
}

std::string meta_path(const std::string& out) { return out + ".meta.json"; }

std::optional<Json> read_meta(const std::string& path) {
    if (path.empty() || !fs::exists(meta_path(path))) return std::nullopt;
    try {
        return Json::parse(read_text(meta_path(path)));
    } catch (const Json::exception&) {
        return std::nullopt;
    }
}

std::string upstream_field(const std::string& input, const char* key) {
    if (auto m = read_meta(input)) {
        if (auto it = m->find(key); it != m->end() && it->is_string()) return *it;
    }
    return {};
}

// SOURCE_DATE_EPOCH pins the timestamp for reproducible sidecars.
std::string timestamp() {
    std::time_t t = std::time(nullptr);
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) t = std::strtoll(env, nullptr, 10);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Sidecar {
    std::string command;
    std::vector<std::string> inputs;
    Json config = Json::object();
    std::string backend;
    std::string decoding;
    std::vector<std::uint64_t> seeds;
    std::size_t records = 0;
    std::size_t expected = 0;
    bool interrupted = false;
};

void write_sidecar(const std::string& out, const Sidecar& s) {
    Json j = Json::object();
    j["command"] = s.command;
    j["tool_version"] = std::string(version());
    j["prng"] = std::string(kPrngAlgorithm);
    j["output"] = out;
    j["inputs"] = s.inputs;
    j["config"] = s.config;
    if (!s.backend.empty()) j["backend"] = s.backend;
    if (!s.decoding.empty()) j["decoding"] = s.decoding;
    j["seeds"] = s.seeds;
    j["records"] = s.records;
    if (s.interrupted) {
        j["interrupted"] = true;
        j["expected_records"] = s.expected;
    }
    j["created_at"] = timestamp();
    write_text(meta_path(out), detail::dump_canonical(j) + "\n");
}

void report_interrupt(std::size_t done, std::size_t total) {
    Json j = Json::object();
    j["error"] = std::string(to_string(ErrorCode::Interrupted));
    j["message"] = "interrupted; wrote " + std::to_string(done) + " of " + std::to_string(total) +
                   " records";
    std::cerr << detail::dump_canonical(j) << "\n";
}

std::size_t workers_for(std::size_t requested) {
    return requested > 0 ? requested : default_concurrency();
}

struct BackendBundle {
    std::unique_ptr<Backend> backend;
    PromptSet prompts = PromptSet::builtin();
};

BackendBundle make_backend(const BackendOptions& o) {
    BackendBundle b;
    if (!o.prompt_dir.empty()) b.prompts = PromptSet::load(o.prompt_dir);
    if (o.backend == "toy") {
        ToyLMOptions opts;
        opts.history_weight = o.toy_history_weight;
        opts.max_context_bytes = o.toy_max_context;
        b.backend = std::make_unique<ToyBigramLM>(
            o.corpus.empty() ? ToyBigramLM::builtin(opts) : ToyBigramLM::from_file(o.corpus, opts));
    } else if (o.backend == "http") {
        HttpOptions h;
        h.base_url = o.url.empty() ? backend_url_from_env().value_or("") : o.url;
        if (h.base_url.empty()) {
            throw Error(ErrorCode::InvalidArgument,
                        "http backend needs --url or " + std::string(kBackendUrlEnv));
        }
        h.max_in_flight = workers_for(o.max_concurrency);
        b.backend = std::make_unique<HttpBackend>(h);
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown backend '" + o.backend + "' (toy|http)");
    }
    return b;
}

Json backend_config(const BackendOptions& o) {
    Json j = Json::object();
    j["backend"] = o.backend;
    if (o.backend == "http") j["url"] = o.url.empty() ? backend_url_from_env().value_or("") : o.url;
    if (o.backend == "toy") {
        j["corpus"] = o.corpus.empty() ? "builtin" : o.corpus;
        j["toy_history_weight"] = o.toy_history_weight;
        j["toy_max_context"] = o.toy_max_context;
    }
    j["prompt_dir"] = o.prompt_dir.empty() ? "builtin" : o.prompt_dir;
    return j;
}

Json source_config(const SourceOptions& s) {
    Json j = Json::object();
    j["max_source_tokens"] = s.max_source_tokens;
    j["truncate_unit"] = s.truncate_unit;
    return j;
}

std::vector<Instance> load_truncated(const std::string& path, const SourceOptions& s) {
    auto instances = load_instances(path);
    const auto unit = parse_truncation_unit(s.truncate_unit);
    if (s.max_source_tokens > 0) {
        for (auto& in : instances) in = truncate(in, s.max_source_tokens, unit);
    }
    return instances;
}

std::unordered_map<std::string, const Instance*> index_instances(const std::vector<Instance>& v) {
    std::unordered_map<std::string, const Instance*> m;
    for (const auto& in : v) m.emplace(in.id, &in);
    return m;
}

const Instance& instance_for(const std::unordered_map<std::string, const Instance*>& index,
                             const std::string& id) {
    auto it = index.find(id);
    if (it == index.end()) {
        throw Error(ErrorCode::InvalidArgument, "no instance with id '" + id + "'");
    }
    return *it->second;
}

std::unordered_map<std::string, CandidatePool> load_resume(const std::string& path) {
    std::unordered_map<std::string, CandidatePool> m;
    if (path.empty()) return m;
    for (auto& p : load_pools(path)) m.emplace(p.instance_id, std::move(p));
    return m;
}

// Runs `work` for every index, in parallel, and writes the pools that were
// completed. Returns the exit status.
template <class Work>
int run_pool_stage(std::size_t n, std::size_t workers, const std::string& out, Sidecar& sidecar,
                   Work&& work) {
    std::vector<std::optional<CandidatePool>> results(n);
    parallel_for(
        n, workers, [&](std::size_t i) { results[i] = work(i); }, &interrupted);
    std::vector<CandidatePool> done;
    for (auto& r : results) {
        if (r) done.push_back(std::move(*r));
    }
    save_pools(out, done);
    sidecar.records = done.size();
    sidecar.expected = n;
    sidecar.interrupted = done.size() < n;
    write_sidecar(out, sidecar);
    if (sidecar.interrupted) {
        report_interrupt(done.size(), n);
        return kInterruptedStatus;
    }
    return 0;
}

MetricEvaluator make_evaluator(const std::vector<MetricId>& metrics, const std::string& metric_url,
                               bool stem) {
    bool external = false;
    for (const auto& m : metrics) external = external || m.is_external();
    TokenizerOptions tok{stem};
    if (!external) {
        return [tok](const MetricId& m, const Instance& in, std::string_view cand) {
            return multi_ref(m, cand, in.references, tok);
        };
    }
    HttpOptions h;
    h.base_url = metric_url.empty() ? backend_url_from_env().value_or("") : metric_url;
    if (h.base_url.empty()) {
        throw Error(ErrorCode::InvalidArgument,
                    "external metrics need --metric-url or " + std::string(kBackendUrlEnv));
    }
    auto client = std::make_shared<ExternalMetricClient>(h);
    return [client, tok](const MetricId& m, const Instance& in, std::string_view cand) {
        if (m.is_external()) return client->score(m.external_name, cand, in.references, in.source);
        return multi_ref(m, cand, in.references, tok);
    };
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find(',', pos);
        if (end == std::string::npos) end = text.size();
        std::string item = text.substr(pos, end - pos);
        const auto a = item.find_first_not_of(' ');
        const auto b = item.find_last_not_of(' ');
        if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
        pos = end + 1;
    }
    return out;
}

}  // namespace

// ---- stats / fixture --------------------------------------------------------------------

int run_stats(const StatsArgs& args) {
    check_distinct(args.out, {args.instances});
    const auto instances = load_instances(args.instances);
    const DatasetStats st = stats(instances);
    Json j = Json::object();
    j["test_size"] = st.test_size;
    j["avg_source_len"] = st.avg_source_len;
    j["avg_query_len"] = st.avg_query_len;
    j["avg_reference_len"] = st.avg_reference_len;
    j["instances"] = instances.size();
    write_text(args.out, detail::dump_canonical(j) + "\n");
    Sidecar s;
    s.command = "stats";
    s.inputs = {args.instances};
    s.config["length_unit"] = "whitespace_token";
    s.records = 1;
    write_sidecar(args.out, s);
    return 0;
}

int run_fixture(const FixtureArgs& args) {
    check_distinct(args.out, {});
    FixtureSpec spec;
    spec.seed = args.seed;
    spec.count = args.n;
    const auto instances = make_fixture(spec);
    save_instances(args.out, instances);
    Sidecar s;
    s.command = "fixture";
    s.config["n"] = args.n;
    s.config["filler_sentences"] = spec.filler_sentences;
    s.seeds = {args.seed};
    s.records = instances.size();
    write_sidecar(args.out, s);
    return 0;
}

// ---- generate / answer / score ----------------------------------------------------------

int run_generate(const GenerateArgs& args) {
    check_distinct(args.out, {args.instances, args.resume});
    if (args.n == 0) throw Error(ErrorCode::InvalidArgument, "--n must be at least 1");
    const auto instances = load_truncated(args.instances, args.source);
    DecodingSpec base;
    base.max_new_tokens = args.max_new_tokens;
    base.seed = args.seed;
    const DecodingSpec spec = parse_decoding(args.decoding, base);
    validate(spec);
    const auto bundle = make_backend(args.backend);
    const auto resume = load_resume(args.resume);

    Sidecar s;
    s.command = "generate";
    s.inputs = {args.instances};
    if (!args.resume.empty()) s.inputs.push_back(args.resume);
    s.config = backend_config(args.backend);
    s.config["source"] = source_config(args.source);
    s.config["n"] = args.n;
    s.config["max_new_tokens"] = args.max_new_tokens;
    s.backend = bundle.backend->id();
    s.decoding = describe(spec);
    s.seeds = {spec.seed};

    return run_pool_stage(instances.size(), workers_for(args.backend.max_concurrency), args.out, s,
                          [&](std::size_t i) {
        const Instance& in = instances[i];
        if (auto it = resume.find(in.id);
            it != resume.end() && it->second.candidates.size() == args.n) {
            return it->second;
        }
        DecodingSpec local = spec;
        local.seed = instance_seed(spec.seed, in.id);
        const Prompt prompt = summarize_prompt(bundle.prompts, in.query, in.source);
        CandidatePool pool;
        pool.instance_id = in.id;
        for (auto& t : bundle.backend->generate(prompt, args.n, local)) {
            Candidate c;
            c.text = std::move(t.text);
            pool.candidates.push_back(std::move(c));
        }
        return pool;
    });
}

int run_answer(const AnswerArgs& args) {
    check_distinct(args.out, {args.pools, args.instances, args.resume});
    const auto instances = load_truncated(args.instances, args.source);
    const auto index = index_instances(instances);
    const auto pools = load_pools(args.pools);
    const auto resume = load_resume(args.resume);
    std::unique_ptr<BackendBundle> bundle;
    bool need_model = !args.use_gold_answers;
    if (args.use_gold_answers) {
        for (const auto& p : pools) need_model = need_model || !instance_for(index, p.instance_id).gold_answer;
    }
    if (need_model) bundle = std::make_unique<BackendBundle>(make_backend(args.backend));

    Sidecar s;
    s.command = "answer";
    s.inputs = {args.pools, args.instances};
    if (!args.resume.empty()) s.inputs.push_back(args.resume);
    s.config = backend_config(args.backend);
    s.config["source"] = source_config(args.source);
    s.config["use_gold_answers"] = args.use_gold_answers;
    s.config["beam_size"] = args.beam_size;
    s.config["max_new_tokens"] = args.max_new_tokens;
    s.backend = upstream_field(args.pools, "backend");
    s.decoding = upstream_field(args.pools, "decoding");
    if (bundle) s.config["answer_backend"] = bundle->backend->id();

    return run_pool_stage(pools.size(), workers_for(args.backend.max_concurrency), args.out, s,
                          [&](std::size_t i) {
        CandidatePool pool = pools[i];
        if (auto it = resume.find(pool.instance_id); it != resume.end() && it->second.answer) {
            pool.answer = it->second.answer;
            return pool;
        }
        const Instance& in = instance_for(index, pool.instance_id);
        if (args.use_gold_answers && in.gold_answer) {
            pool.answer = *in.gold_answer;
        } else {
            pool.answer = answer(*bundle->backend, bundle->prompts, in.source, in.query,
                                 args.beam_size, args.max_new_tokens)
                              .text;
        }
        return pool;
    });
}

namespace {

struct Objectives {
    bool s0 = false;
    bool answer = false;
    bool source = false;
    bool latent = false;
};

Objectives parse_objectives(const std::string& text) {
    Objectives o;
    for (const auto& item : split_list(text)) {
        if (item == "s0") o.s0 = true;
        else if (item == "answer") o.answer = true;
        else if (item == "source") o.source = true;
        else if (item == "latent") o.latent = true;
        else {
            throw Error(ErrorCode::InvalidArgument,
                        "unknown objective '" + item + "' (s0, answer, source, latent)");
        }
    }
    if (!o.s0 && !o.answer && !o.source && !o.latent) {
        throw Error(ErrorCode::InvalidArgument, "no scoring objectives given");
    }
    return o;
}

bool has_all(const CandidatePool& p, const Objectives& o) {
    for (const auto& c : p.candidates) {
        if ((o.s0 && !c.logp_s0) || (o.answer && !c.logp_answer_rec) ||
            (o.source && !c.logp_source_rec) || (o.latent && !c.logp_latent_rec)) {
            return false;
        }
    }
    return true;
}

}  // namespace

int run_score(const ScoreArgs& args) {
    check_distinct(args.out, {args.pools, args.instances, args.resume});
    const Objectives obj = parse_objectives(args.objectives);
    const auto instances = load_truncated(args.instances, args.source);
    const auto index = index_instances(instances);
    const auto pools = load_pools(args.pools);
    const auto resume = load_resume(args.resume);
    for (const auto& p : pools) {
        if (obj.answer && !p.answer) {
            throw Error(ErrorCode::InvalidArgument,
                        "pool '" + p.instance_id + "' has no answer; run the answer stage first");
        }
        if (obj.latent && !instance_for(index, p.instance_id).latent) {
            throw Error(ErrorCode::InvalidArgument,
                        "instance '" + p.instance_id + "' has no latent target");
        }
    }
    const auto bundle = make_backend(args.backend);

    Sidecar s;
    s.command = "score";
    s.inputs = {args.pools, args.instances};
    if (!args.resume.empty()) s.inputs.push_back(args.resume);
    s.config = backend_config(args.backend);
    s.config["source"] = source_config(args.source);
    s.config["objectives"] = split_list(args.objectives);
    s.config["scoring_backend"] = bundle.backend->id();
    s.backend = upstream_field(args.pools, "backend");
    s.decoding = upstream_field(args.pools, "decoding");

    const Backend& lm = *bundle.backend;
    return run_pool_stage(pools.size(), workers_for(args.backend.max_concurrency), args.out, s,
                          [&](std::size_t i) {
        CandidatePool pool = pools[i];
        if (auto it = resume.find(pool.instance_id); it != resume.end() && has_all(it->second, obj) &&
                                                       it->second.candidates.size() ==
                                                           pool.candidates.size()) {
            return it->second;
        }
        const Instance& in = instance_for(index, pool.instance_id);
        const Prompt s0_prompt = summarize_prompt(bundle.prompts, in.query, in.source);
        for (auto& c : pool.candidates) {
            if (obj.s0) c.logp_s0 = lm.score(s0_prompt, c.text).total_logprob;
            if (obj.answer) {
                c.logp_answer_rec =
                    lm.score(question_answer_prompt(bundle.prompts, c.text, in.query), *pool.answer)
                        .total_logprob;
            }
            if (obj.source) {
                c.logp_source_rec =
                    lm.score(source_reconstruction_prompt(bundle.prompts, c.text), in.source)
                        .total_logprob;
            }
            if (obj.latent) c.logp_latent_rec = lm.score(Prompt(c.text), *in.latent).total_logprob;
        }
        return pool;
    });
}

// ---- rank / sweep / evaluate ------------------------------------------------------------

int run_rank(const RankArgs& args) {
    check_distinct(args.out, {args.pools, args.instances});
    SelectorConfig cfg;
    cfg.rule = parse_rule(args.rule);
    cfg.lambda = args.lambda;
    cfg.alpha = args.alpha;
    if (cfg.rule == Rule::Random) cfg.seed = args.seed.value_or(0);
    if (cfg.rule == Rule::Oracle) {
        cfg.oracle_metric = args.oracle_metric.empty() ? std::string("rouge1") : args.oracle_metric;
    }
    validate(cfg);
    const auto pools = load_pools(args.pools);
    std::vector<Instance> instances;
    if (cfg.rule == Rule::Oracle) {
        if (args.instances.empty()) {
            throw Error(ErrorCode::InvalidArgument, "the oracle rule needs --instances");
        }
        instances = load_instances(args.instances);
    }
    const auto index = index_instances(instances);
    const MetricId oracle_id = cfg.oracle_metric ? MetricId::parse(*cfg.oracle_metric) : MetricId{};
    if (oracle_id.is_external()) {
        throw Error(ErrorCode::InvalidArgument, "rank supports only native oracle metrics");
    }
    const TokenizerOptions tok{args.stem};
    const MetricFn metric = [&](std::string_view cand, std::span<const std::string> refs) {
        return multi_ref(oracle_id, cand, refs, tok);
    };

    std::vector<Selection> out;
    out.reserve(pools.size());
    const Instance none;
    for (const auto& p : pools) {
        const Instance& in = cfg.rule == Rule::Oracle ? instance_for(index, p.instance_id) : none;
        try {
            out.push_back(select(p, cfg, in, cfg.rule == Rule::Oracle ? &metric : nullptr));
        } catch (const Error& e) {
            throw Error(e.code(), std::string(e.what()) + " (pool '" + p.instance_id + "')");
        }
    }
    save_selections(args.out, out);

    Sidecar s;
    s.command = "rank";
    s.inputs = {args.pools};
    if (!args.instances.empty()) s.inputs.push_back(args.instances);
    s.config = Json::parse(encode(cfg));
    s.config["stemming"] = args.stem;
    s.backend = upstream_field(args.pools, "backend");
    s.decoding = upstream_field(args.pools, "decoding");
    if (cfg.seed) s.seeds = {*cfg.seed};
    s.records = out.size();
    write_sidecar(args.out, s);
    return 0;
}

int run_sweep(const SweepArgs& args) {
    check_distinct(args.out, {args.pools, args.instances, args.select_on_split});
    SweepOptions o;
    o.lambda_grid = parse_grid(args.lambda_grid);
    o.alpha_grid = parse_grid(args.alpha_grid);
    o.metrics = parse_metric_list(args.metrics);
    for (const auto& r : split_list(args.rules)) o.rules.push_back(parse_rule(r));
    o.seeds = args.seeds;
    o.details = args.details;
    o.workers = workers_for(args.max_concurrency);
    o.tokenizer.stem = args.stem;
    o.evaluator = make_evaluator(o.metrics, args.metric_url, args.stem);
    o.backend = upstream_field(args.pools, "backend");
    o.decoding = upstream_field(args.pools, "decoding");
    o.label = args.label.empty() ? fs::path(args.out).stem().string() : args.label;
    if (!args.select_on_split.empty()) {
        std::set<std::string> ids;
        std::istringstream in(read_text(args.select_on_split));
        for (std::string line; std::getline(in, line);) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) ids.insert(line);
        }
        o.selection_ids = std::move(ids);
    }
    const auto instances = load_instances(args.instances);
    const auto pools = load_pools(args.pools);
    const SweepReport report = pragrank::run_sweep(instances, pools, o);
    write_text(args.out, report_to_json(report) + "\n");

    Sidecar s;
    s.command = "sweep";
    s.inputs = {args.pools, args.instances};
    if (!args.select_on_split.empty()) s.inputs.push_back(args.select_on_split);
    s.config["lambda_grid"] = report.metadata.lambda_grid;
    s.config["alpha_grid"] = report.metadata.alpha_grid;
    s.config["metrics"] = report.metadata.metrics;
    s.config["rules"] = report.metadata.rules;
    s.config["details"] = args.details;
    s.config["stemming"] = args.stem;
    s.config["label"] = o.label;
    s.backend = o.backend;
    s.decoding = o.decoding;
    s.seeds = args.seeds;
    s.records = report.cells.size();
    write_sidecar(args.out, s);
    return 0;
}

int run_evaluate(const EvaluateArgs& args) {
    check_distinct(args.out, {args.selections, args.pools, args.instances});
    const auto metrics = parse_metric_list(args.metrics);
    const auto evaluator = make_evaluator(metrics, args.metric_url, args.stem);
    const auto selections = load_selections(args.selections);
    const auto pools = load_pools(args.pools);
    const auto instances = load_instances(args.instances);
    const auto index = index_instances(instances);
    std::unordered_map<std::string, const CandidatePool*> pool_index;
    for (const auto& p : pools) pool_index.emplace(p.instance_id, &p);
    if (selections.empty()) throw Error(ErrorCode::EmptyDataset, "no selections to evaluate");

    std::vector<std::vector<double>> per_metric(metrics.size());
    Json rows = Json::array();
    for (const auto& sel : selections) {
        auto it = pool_index.find(sel.instance_id);
        if (it == pool_index.end()) {
            throw Error(ErrorCode::InvalidArgument, "no pool for selection '" + sel.instance_id + "'");
        }
        const CandidatePool& pool = *it->second;
        if (sel.chosen_index >= pool.candidates.size()) {
            throw Error(ErrorCode::SchemaError,
                        "chosen_index out of range for '" + sel.instance_id + "'");
        }
        const Instance& in = instance_for(index, sel.instance_id);
        const std::string& text = pool.candidates[sel.chosen_index].text;
        Json row = Json::object();
        row["instance_id"] = sel.instance_id;
        row["chosen_index"] = sel.chosen_index;
        Json scores = Json::object();
        for (std::size_t m = 0; m < metrics.size(); ++m) {
            const double v = evaluator(metrics[m], in, text);
            per_metric[m].push_back(v);
            scores[metrics[m].str()] = v;
        }
        row["scores"] = std::move(scores);
        rows.push_back(std::move(row));
    }
    Json means = Json::object();
    for (std::size_t m = 0; m < metrics.size(); ++m) {
        means[metrics[m].str()] =
            neumaier_sum(per_metric[m]) / static_cast<double>(per_metric[m].size());
    }
    Json root = Json::object();
    root["rule"] = Json::parse(encode(selections.front().config));
    root["count"] = selections.size();
    root["mean"] = std::move(means);
    root["instances"] = std::move(rows);
    write_text(args.out, detail::dump_canonical(root) + "\n");

    Sidecar s;
    s.command = "evaluate";
    s.inputs = {args.selections, args.pools, args.instances};
    s.config["metrics"] = split_list(args.metrics);
    s.config["stemming"] = args.stem;
    s.backend = upstream_field(args.pools, "backend");
    s.decoding = upstream_field(args.pools, "decoding");
    s.records = selections.size();
    write_sidecar(args.out, s);
    return 0;
}

// ---- aggregate ------------------------------------------------------------------------

int run_aggregate(const AggregateArgs& args) {
    if (args.reports.empty()) throw Error(ErrorCode::InvalidArgument, "no reports given");
    check_distinct(args.out, {});
    for (const auto& r : args.reports) check_distinct(args.out, {r});
    std::vector<SweepReport> reports;
    for (const auto& path : args.reports) {
        try {
            reports.push_back(report_from_json(read_text(path)));
        } catch (Error& e) {
            e.at(path);
            throw;
        }
        if (reports.back().metadata.label.empty()) {
            reports.back().metadata.label = fs::path(path).stem().string();
        }
    }
    const auto metrics = split_list(args.metrics);
    std::string csv;
    std::vector<std::string> warnings;
    if (args.table == "summary") {
        std::vector<SummaryTable> tables;
        for (const auto& r : reports) {
            tables.push_back(summary_table(r));
            if (!metrics.empty()) {
                SummaryTable& t = tables.back();
                SummaryTable filtered{t.report, metrics, {}};
                for (const auto& row : t.rows) {
                    SummaryRow fr{row.selector, {}};
                    for (const auto& m : metrics) {
                        auto pos = std::find(t.metrics.begin(), t.metrics.end(), m);
                        if (pos == t.metrics.end()) {
                            throw Error(ErrorCode::InvalidArgument,
                                        "metric '" + m + "' is not in report '" + t.report + "'");
                        }
                        fr.entries.push_back(row.entries[pos - t.metrics.begin()]);
                    }
                    filtered.rows.push_back(std::move(fr));
                }
                t = std::move(filtered);
            }
        }
        csv = to_csv(std::span<const SummaryTable>(tables));
    } else if (args.table == "top-frequency") {
        csv = to_csv(top_frequency_table(reports, metrics));
    } else if (args.table == "relative-change") {
        csv = to_csv(relative_change_table(
            reports, metrics,
            args.pooled ? RelativeAggregation::PooledMeans : RelativeAggregation::MeanOfChanges));
    } else if (args.table == "tradeoff") {
        if (reports.size() != 1) {
            throw Error(ErrorCode::InvalidArgument, "tradeoff curves take exactly one report");
        }
        std::vector<Rule> rules;
        for (const auto& r : split_list(args.rules)) rules.push_back(parse_rule(r));
        auto quality = split_list(args.quality_metrics);
        const auto text = split_list(args.text_metrics);
        if (quality.empty()) {
            for (const auto& m : reports.front().metadata.metrics) {
                if (!MetricId::parse(m).is_external()) quality.push_back(m);
            }
        }
        const TradeoffCurves curves = tradeoff_curves(reports.front(), rules, quality, text);
        for (const auto& w : curves.warnings) {
            Json j = Json::object();
            j["warning"] = w;
            std::cerr << detail::dump_canonical(j) << "\n";
        }
        warnings = curves.warnings;
        csv = to_csv(curves);
    } else {
        throw Error(ErrorCode::InvalidArgument,
                    "unknown table '" + args.table +
                        "' (summary|top-frequency|relative-change|tradeoff)");
    }
    write_text(args.out, csv);

    Sidecar s;
    s.command = "aggregate";
    s.inputs = args.reports;
    s.config["table"] = args.table;
    s.config["metrics"] = metrics;
    if (args.table == "relative-change") {
        s.config["aggregation"] = args.pooled ? "pooled-means" : "mean-of-changes";
    }
    if (args.table == "tradeoff") {
        s.config["rules"] = split_list(args.rules);
        s.config["warnings"] = warnings;
    }
    s.records = reports.size();
    write_sidecar(args.out, s);
    return 0;
}

}  // namespace pragrank::cli

#include "pragrank/http_backend.hpp"

#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "json_util.hpp"
#include "pragrank/error.hpp"

namespace pragrank {

using detail::Json;

std::optional<std::string> backend_url_from_env() {
    const char* v = std::getenv(std::string(kBackendUrlEnv).c_str());
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
}

// POSTs JSON bodies with bounded concurrency and retries.
class HttpJsonClient {
public:
    explicit HttpJsonClient(HttpOptions options) : options_(std::move(options)) {
        while (!options_.base_url.empty() && options_.base_url.back() == '/') {
            options_.base_url.pop_back();
        }
        if (options_.base_url.empty()) {
            throw Error(ErrorCode::InvalidArgument, "backend URL is empty");
        }
        if (options_.base_url.find("://") == std::string::npos) {
            options_.base_url = "http://" + options_.base_url;
        }
        if (options_.max_in_flight == 0) options_.max_in_flight = 1;
        if (options_.attempts < 1) options_.attempts = 1;
        // Split "scheme://host:port/prefix" into the client origin and a path prefix.
        const std::size_t scheme_end = options_.base_url.find("://") + 3;
        const std::size_t path_start = options_.base_url.find('/', scheme_end);
        origin_ = options_.base_url.substr(0, path_start);
        if (path_start != std::string::npos) prefix_ = options_.base_url.substr(path_start);
    }

    const std::string& url() const { return options_.base_url; }

    Json post(const std::string& path, const Json& body) const {
        Slot slot(*this);
        const std::string payload = detail::dump_canonical(body);
        auto backoff = options_.initial_backoff;
        std::string last_error;
        for (int attempt = 1; attempt <= options_.attempts; ++attempt) {
            httplib::Client cli(origin_);
            cli.set_connection_timeout(options_.timeout);
            cli.set_read_timeout(options_.timeout);
            cli.set_write_timeout(options_.timeout);
            auto res = cli.Post(prefix_ + path, payload, "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
            } else if (res->status >= 500) {
                last_error = "server returned HTTP " + std::to_string(res->status);
            } else if (res->status >= 400) {
                raise_client_error(path, res->status, res->body);
            } else {
                return detail::parse_json(res->body, "response from " + path);
            }
            if (attempt < options_.attempts) {
                std::this_thread::sleep_for(backoff);
                backoff *= 2;
            }
        }
        throw Error(ErrorCode::BackendUnavailable,
                    "POST " + options_.base_url + path + " failed after " +
                        std::to_string(options_.attempts) + " attempts (" + last_error + ")");
    }

private:
    class Slot {
    public:
        explicit Slot(const HttpJsonClient& c) : c_(c) {
            std::unique_lock lock(c_.mu_);
            c_.cv_.wait(lock, [&] { return c_.in_flight_ < c_.options_.max_in_flight; });
            ++c_.in_flight_;
        }
        ~Slot() {
            {
                std::lock_guard lock(c_.mu_);
                --c_.in_flight_;
            }
            c_.cv_.notify_one();
        }
        Slot(const Slot&) = delete;
        Slot& operator=(const Slot&) = delete;

    private:
        const HttpJsonClient& c_;
    };

    [[noreturn]] static void raise_client_error(const std::string& path, int status,
                                                const std::string& body) {
        ErrorCode code = status == 413 ? ErrorCode::TokenizationOverflow : ErrorCode::BackendProtocol;
        std::string message = body;
        try {
            const Json j = Json::parse(body);
            if (j.is_object()) {
                if (auto it = j.find("message"); it != j.end() && it->is_string()) {
                    message = it->get<std::string>();
                }
                if (auto it = j.find("error"); it != j.end() && it->is_string()) {
                    const auto name = it->get<std::string>();
                    if (name == "UnsupportedDecoding") code = ErrorCode::UnsupportedDecoding;
                    if (name == "TokenizationOverflow") code = ErrorCode::TokenizationOverflow;
                }
            }
        } catch (const Json::exception&) {
        }
        throw Error(code, "POST " + path + " returned HTTP " + std::to_string(status) + ": " + message);
    }

    HttpOptions options_;
    std::string origin_;
    std::string prefix_;
    mutable std::mutex mu_;
    mutable std::condition_variable cv_;
    mutable std::size_t in_flight_ = 0;
};

namespace {

void attach_prompt(Json& body, const Prompt& prompt) {
    body["prompt"] = prompt.text;
    if (prompt.system && prompt.user) {
        body["chat"] = Json{{"system", *prompt.system}, {"user", *prompt.user}};
    }
}

ScoredText scored_from(const Json& j, std::string text) {
    ScoredText out;
    out.text = std::move(text);
    out.total_logprob = detail::log_score_from_json(detail::require(j, "total_logprob"),
                                                    "total_logprob");
    if (auto it = j.find("token_logprobs"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) {
            throw Error(ErrorCode::BackendProtocol, "'token_logprobs' must be an array");
        }
        double sum = 0.0;
        for (const auto& v : *it) {
            const double lp = detail::log_score_from_json(v, "token_logprobs");
            out.token_logprobs.push_back(lp);
            sum += lp;
        }
        if (!out.token_logprobs.empty()) {
            const bool both_neg_inf = std::isinf(sum) && std::isinf(out.total_logprob) &&
                                      sum < 0 && out.total_logprob < 0;
            if (!both_neg_inf && !(std::fabs(sum - out.total_logprob) <= 1e-9)) {
                throw Error(ErrorCode::BackendProtocol,
                            "server total_logprob disagrees with the sum of token_logprobs");
            }
        }
    }
    if (std::isnan(out.total_logprob) || out.total_logprob > 0.0) {
        throw Error(ErrorCode::BackendProtocol, "server returned an invalid log-probability");
    }
    return out;
}

template <typename F>
auto protocol_guard(F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::SchemaError) {
            throw Error(ErrorCode::BackendProtocol, std::string("malformed server reply: ") + e.what());
        }
        throw;
    }
}

}  // namespace

HttpBackend::HttpBackend(HttpOptions options)
    : client_(std::make_unique<HttpJsonClient>(std::move(options))) {}
HttpBackend::~HttpBackend() = default;
HttpBackend::HttpBackend(HttpBackend&&) noexcept = default;
HttpBackend& HttpBackend::operator=(HttpBackend&&) noexcept = default;

std::string HttpBackend::id() const { return "http:" + client_->url(); }

ScoredText HttpBackend::score(const Prompt& prompt, std::string_view continuation) const {
    if (continuation.empty()) {
        throw Error(ErrorCode::InvalidArgument, "cannot score an empty continuation");
    }
    Json body = Json::object();
    attach_prompt(body, prompt);
    body["continuation"] = std::string(continuation);
    const Json reply = client_->post("/v1/score", body);
    return protocol_guard([&] { return scored_from(reply, std::string(continuation)); });
}

std::vector<ScoredText> HttpBackend::generate(const Prompt& prompt, std::size_t n,
                                              const DecodingSpec& spec) const {
    validate(spec);
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "generate requires n >= 1");
    Json body = Json::object();
    attach_prompt(body, prompt);
    body["n"] = n;
    body["method"] = std::string(to_string(spec.method));
    body["temperature"] = spec.temperature;
    if (spec.k) body["k"] = *spec.k;
    if (spec.p) body["p"] = *spec.p;
    if (spec.beam_size) body["beam_size"] = *spec.beam_size;
    if (spec.num_groups) body["num_groups"] = *spec.num_groups;
    if (spec.diversity_penalty) body["diversity_penalty"] = *spec.diversity_penalty;
    body["max_new_tokens"] = spec.max_new_tokens;
    body["seed"] = spec.seed;
    const Json reply = client_->post("/v1/generate", body);
    return protocol_guard([&] {
        const Json& cands = detail::require(reply, "candidates");
        if (!cands.is_array() || cands.size() != n) {
            throw Error(ErrorCode::BackendProtocol,
                        "server returned " + std::to_string(cands.size()) + " candidates, expected " +
                            std::to_string(n));
        }
        std::vector<ScoredText> out;
        out.reserve(n);
        for (const auto& c : cands) out.push_back(scored_from(c, detail::require_string(c, "text")));
        return out;
    });
}

ExternalMetricClient::ExternalMetricClient(HttpOptions options)
    : client_(std::make_unique<HttpJsonClient>(std::move(options))) {}
ExternalMetricClient::~ExternalMetricClient() = default;
ExternalMetricClient::ExternalMetricClient(ExternalMetricClient&&) noexcept = default;
ExternalMetricClient& ExternalMetricClient::operator=(ExternalMetricClient&&) noexcept = default;

double ExternalMetricClient::score(std::string_view metric_name, std::string_view candidate,
                                   std::span<const std::string> references,
                                   std::optional<std::string_view> source) const {
    Json body = Json::object();
    body["metric"] = std::string(metric_name);
    body["candidate"] = std::string(candidate);
    body["references"] = Json(std::vector<std::string>(references.begin(), references.end()));
    if (source) body["source"] = std::string(*source);
    const Json reply = client_->post("/v1/metric", body);
    return protocol_guard([&] {
        const double v = detail::require_number(reply, "score");
        if (!std::isfinite(v)) throw Error(ErrorCode::BackendProtocol, "metric score is not finite");
        return v;
    });
}

}  // namespace pragrank

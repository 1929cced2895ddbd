#pragma once

// JSON-over-HTTP clients for external model and metric servers.
//
//   POST /v1/score    {"prompt", "continuation"[, "chat"]}
//                     -> {"total_logprob": num|"-inf", "token_logprobs": [num...]}
//   POST /v1/generate {"prompt", "n", "method", "temperature", "k"?, "p"?, "beam_size"?,
//                      "num_groups"?, "diversity_penalty"?, "max_new_tokens", "seed"[, "chat"]}
//                     -> {"candidates": [{"text", "total_logprob", "token_logprobs"}]}
//   POST /v1/metric   {"metric", "candidate", "references", "source"?} -> {"score": num}
//
// "chat" is {"system": str, "user": str} and is sent whenever the prompt was
// rendered from a chat template. Transport failures and 5xx responses are
// retried (3 attempts, backoff doubling from 250 ms) before BackendUnavailable.

#include <chrono>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "pragrank/backend.hpp"

namespace pragrank {

inline constexpr std::string_view kBackendUrlEnv = "PRAGRANK_BACKEND_URL";
inline constexpr std::string_view kMaxConcurrencyEnv = "PRAGRANK_MAX_CONCURRENCY";

struct HttpOptions {
    std::string base_url;                              // "http://host:port"
    std::size_t max_in_flight = 4;
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{250};
    std::chrono::seconds timeout{300};
};

// Value of PRAGRANK_BACKEND_URL, if set and non-empty.
std::optional<std::string> backend_url_from_env();

class HttpJsonClient;

class HttpBackend final : public Backend {
public:
    explicit HttpBackend(HttpOptions options);
    ~HttpBackend() override;
    HttpBackend(HttpBackend&&) noexcept;
    HttpBackend& operator=(HttpBackend&&) noexcept;

    std::string id() const override;
    ScoredText score(const Prompt& prompt, std::string_view continuation) const override;
    std::vector<ScoredText> generate(const Prompt& prompt, std::size_t n,
                                     const DecodingSpec& spec) const override;

private:
    std::unique_ptr<HttpJsonClient> client_;
};

class ExternalMetricClient {
public:
    explicit ExternalMetricClient(HttpOptions options);
    ~ExternalMetricClient();
    ExternalMetricClient(ExternalMetricClient&&) noexcept;
    ExternalMetricClient& operator=(ExternalMetricClient&&) noexcept;

    double score(std::string_view metric_name, std::string_view candidate,
                 std::span<const std::string> references,
                 std::optional<std::string_view> source = std::nullopt) const;

private:
    std::unique_ptr<HttpJsonClient> client_;
};

}  // namespace pragrank

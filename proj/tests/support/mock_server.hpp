#pragma once

// In-process HTTP server speaking the backend wire protocol. The model is a
// byte unigram fitted to the prompt, unrelated to the toy bigram LM:
//     P(c | prompt) = (1 + count(c in prompt)) / (|prompt| + 256)
// Generation picks words from the prompt with a seeded mt19937_64.

#include <atomic>
#include <cmath>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"

namespace oracle {

class MockServer {
public:
    using Json = nlohmann::json;

    MockServer() {
        server_.Post("/v1/score", [this](const httplib::Request& req, httplib::Response& res) {
            if (fault(res)) return;
            const Json body = Json::parse(req.body);
            record(body);
            const std::string prompt = body.at("prompt");
            if (max_prompt > 0 && prompt.size() > max_prompt) {
                res.status = 413;
                res.set_content(R"({"error":"TokenizationOverflow","message":"prompt too long"})",
                                "application/json");
                return;
            }
            res.set_content(scored(prompt, body.at("continuation")).dump(), "application/json");
        });
        server_.Post("/v1/generate", [this](const httplib::Request& req, httplib::Response& res) {
            if (fault(res)) return;
            const Json body = Json::parse(req.body);
            record(body);
            if (body.at("method") == "diverse_beam" && reject_diverse) {
                res.status = 400;
                res.set_content(R"({"error":"UnsupportedDecoding","message":"no diverse beam"})",
                                "application/json");
                return;
            }
            const std::string prompt = body.at("prompt");
            std::vector<std::string> words;
            {
                std::string cur;
                for (char c : prompt + " ") {
                    if (c == ' ') {
                        if (!cur.empty()) words.push_back(cur);
                        cur.clear();
                    } else {
                        cur.push_back(c);
                    }
                }
            }
            if (words.empty()) words.push_back("x");
            std::mt19937_64 rng(body.at("seed").get<std::uint64_t>());
            const std::size_t n = body.at("n");
            const std::size_t len = body.at("max_new_tokens");
            Json cands = Json::array();
            for (std::size_t i = 0; i < n; ++i) {
                std::string text;
                for (std::size_t k = 0; k < std::max<std::size_t>(1, len / 4); ++k) {
                    text += (text.empty() ? "" : " ") + words[rng() % words.size()];
                }
                Json c = scored(prompt, text);
                c["text"] = text;
                cands.push_back(c);
            }
            res.set_content(Json{{"candidates", cands}}.dump(), "application/json");
        });
        server_.Post("/v1/metric", [this](const httplib::Request& req, httplib::Response& res) {
            if (fault(res)) return;
            const Json body = Json::parse(req.body);
            record(body);
            // Share of candidate bytes that occur in the first reference.
            const std::string cand = body.at("candidate");
            const std::string ref = body.at("references").at(0);
            double hit = 0;
            for (char c : cand) hit += ref.find(c) != std::string::npos;
            const double v = cand.empty() ? 0.0 : hit / static_cast<double>(cand.size());
            res.set_content(Json{{"score", v}}.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~MockServer() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    MockServer(const MockServer&) = delete;
    MockServer& operator=(const MockServer&) = delete;

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

    static double logprob(const std::string& prompt, const std::string& continuation) {
        double total = 0.0;
        for (char c : continuation) total += std::log(byte_prob(prompt, c));
        return total;
    }

    Json last_body() const {
        std::lock_guard lock(mu_);
        return last_;
    }

    std::atomic<int> fail_next{0};    // respond 503 to this many requests
    std::atomic<int> requests{0};
    std::size_t max_prompt = 0;       // 413 above this prompt length, 0 for none
    bool reject_diverse = true;

private:
    static double byte_prob(const std::string& prompt, char c) {
        double count = 0;
        for (char p : prompt) count += p == c;
        return (1.0 + count) / (static_cast<double>(prompt.size()) + 256.0);
    }

    static Json scored(const std::string& prompt, const std::string& text) {
        Json toks = Json::array();
        double total = 0.0;
        for (char c : text) {
            const double lp = std::log(byte_prob(prompt, c));
            toks.push_back(lp);
            total += lp;
        }
        return Json{{"total_logprob", total}, {"token_logprobs", toks}};
    }

    bool fault(httplib::Response& res) {
        ++requests;
        if (fail_next.load() > 0) {
            --fail_next;
            res.status = 503;
            return true;
        }
        return false;
    }

    void record(const Json& body) {
        std::lock_guard lock(mu_);
        last_ = body;
    }

    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    mutable std::mutex mu_;
    Json last_;
};

}  // namespace oracle

#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "alignforge/jsonl.hpp"

namespace alignforge {

struct ChatRequest {
    std::optional<std::string> system;
    std::string user;           // non-empty
    double temperature = 0.0;
    int max_tokens = 512;
    bool want_logprobs = false;
};

struct TokenLogprob {
    std::string token;
    double logprob; // natural log, <= 0
};

struct ChatResponse {
    std::string text;
    std::optional<std::vector<TokenLogprob>> token_logprobs;
    std::string model_id;

    json to_json() const;
    static ChatResponse from_json(const json& j);
};

struct ProviderConfig {
    std::string kind = "stub";  // stub | http
    std::string endpoint;       // e.g. http://127.0.0.1:8000 (env ALIGNFORGE_ENDPOINT fallback)
    std::string model = "stub-model";
    int timeout_ms = 30000;
    int max_retries = 2;
    int backoff_ms = 250;       // base for exponential backoff
    int max_in_flight = 8;
    std::string cache_dir;      // empty -> no cache
    uint64_t seed = 0;          // stub only
    std::string api_key_env = "ALIGNFORGE_API_KEY";

    json to_json() const;
    static ProviderConfig from_json(const json& j);
};

class Provider {
  public:
    virtual ~Provider() = default;

    virtual ChatResponse complete(const ChatRequest& req) = 0;

    // Token-level natural-log probabilities for a forced continuation of
    // `target` after the request prompt. Concatenated tokens reconstruct
    // target; empty target yields an empty list.
    virtual std::vector<TokenLogprob> score_logprobs(const ChatRequest& req,
                                                     const std::string& target) = 0;

    virtual std::string model_id() const = 0;

    // Number of calls that reached the backing implementation (network or
    // stub computation). A cache hit does not count.
    virtual uint64_t backend_calls() const = 0;
};

// Deterministic offline provider: a pure function of (request, seed).
//
// Mode is selected by exact match of the system prompt against the shipped
// prompt assets:
//   classification prompt -> "Primary-Secondary" label drawn by hash bucket
//   safety rubric         -> score in {1, 0.5, 0} by hash bucket (7/2/1 out of 10)
//   quality rubric        -> 0 for an empty reply section, else bucket (5/3/2)
//   anything else         -> template fill: T[h % |T|] with the hex digest of h
// where h = murmur64(system ‖ 0x1F ‖ user, seed).
//
// score_logprobs implements a character-bigram model with add-1 (Laplace)
// smoothing estimated over the request corpus (system ‖ "\n" ‖ user when a
// system prompt is present, else user). For target codepoints t_1..t_m:
//   p(t_i | prev) = (bigram(prev, t_i) + 1) / (follows(prev) + V)
// where prev is the previous target codepoint (the last corpus codepoint for
// t_1, U+000A for an empty corpus), bigram counts pairs inside the corpus,
// follows(x) counts corpus positions where x is followed by any codepoint,
// and V is the number of distinct codepoints in corpus plus target.
class StubProvider : public Provider {
  public:
    explicit StubProvider(const ProviderConfig& cfg);

    ChatResponse complete(const ChatRequest& req) override;
    std::vector<TokenLogprob> score_logprobs(const ChatRequest& req,
                                             const std::string& target) override;
    std::string model_id() const override { return model_; }
    uint64_t backend_calls() const override { return calls_.load(); }

  private:
    std::string model_;
    uint64_t seed_;
    std::atomic<uint64_t> calls_{0};
};

// JSON-over-HTTP chat-completions client with retry and exponential backoff.
// Request shape: {model, messages:[{role,content}...], temperature,
// max_tokens, logprobs}; reply read from choices[0].message.content and
// choices[0].logprobs.content. Forced-continuation logprobs use the
// completions echo mode; servers without it raise CapabilityError.
class HttpProvider : public Provider {
  public:
    explicit HttpProvider(const ProviderConfig& cfg);

    ChatResponse complete(const ChatRequest& req) override;
    std::vector<TokenLogprob> score_logprobs(const ChatRequest& req,
                                             const std::string& target) override;
    std::string model_id() const override { return cfg_.model; }
    uint64_t backend_calls() const override { return calls_.load(); }

  private:
    json post_with_retry(const std::string& path, const json& body);

    ProviderConfig cfg_;
    std::string host_;
    int port_ = 80;
    std::string base_path_;
    std::atomic<uint64_t> calls_{0};
};

// File cache keyed by hash(request ‖ model); one JSON file per key with
// atomic writes, so warmed-up re-runs make zero backend calls.
class CachingProvider : public Provider {
  public:
    CachingProvider(std::shared_ptr<Provider> inner, std::string cache_dir);

    ChatResponse complete(const ChatRequest& req) override;
    std::vector<TokenLogprob> score_logprobs(const ChatRequest& req,
                                             const std::string& target) override;
    std::string model_id() const override { return inner_->model_id(); }
    uint64_t backend_calls() const override { return inner_->backend_calls(); }

    uint64_t cache_hits() const { return hits_.load(); }

  private:
    std::string key_for(const ChatRequest& req, const std::string& op,
                        const std::string& target) const;

    std::shared_ptr<Provider> inner_;
    std::string cache_dir_;
    std::atomic<uint64_t> hits_{0};
};

// Builds the configured provider stack (stub or http, cache wrapper when
// cache_dir is set).
std::shared_ptr<Provider> make_provider(const ProviderConfig& cfg);

} // namespace alignforge

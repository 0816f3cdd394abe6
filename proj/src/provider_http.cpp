#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "alignforge/errors.hpp"
#include "alignforge/provider.hpp"

namespace alignforge {

namespace {

// Splits http://host:port/base into (host, port, base).
void parse_endpoint(const std::string& endpoint, std::string& host, int& port, std::string& base) {
    std::string rest = endpoint;
    port = 80;
    auto scheme_end = rest.find("://");
    if (scheme_end != std::string::npos) {
        std::string scheme = rest.substr(0, scheme_end);
        if (scheme != "http")
            throw ConfigError("only http endpoints are supported, got scheme: " + scheme);
        rest = rest.substr(scheme_end + 3);
    }
    auto slash = rest.find('/');
    std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
    base = slash == std::string::npos ? "" : rest.substr(slash);
    while (!base.empty() && base.back() == '/') base.pop_back();
    auto colon = hostport.rfind(':');
    if (colon != std::string::npos) {
        host = hostport.substr(0, colon);
        port = std::atoi(hostport.c_str() + colon + 1);
    } else {
        host = hostport;
    }
    if (host.empty()) throw ConfigError("provider endpoint has no host: " + endpoint);
}

bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

} // namespace

HttpProvider::HttpProvider(const ProviderConfig& cfg) : cfg_(cfg) {
    std::string endpoint = cfg_.endpoint;
    if (endpoint.empty()) {
        const char* env = std::getenv("ALIGNFORGE_ENDPOINT");
        if (env) endpoint = env;
    }
    if (endpoint.empty())
        throw ConfigError("http provider requires an endpoint (config or ALIGNFORGE_ENDPOINT)");
    parse_endpoint(endpoint, host_, port_, base_path_);
}

json HttpProvider::post_with_retry(const std::string& path, const json& body) {
    std::string payload = body.dump();
    std::string url_path = base_path_ + path;

    httplib::Headers headers;
    if (!cfg_.api_key_env.empty()) {
        const char* key = std::getenv(cfg_.api_key_env.c_str());
        if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; attempt++) {
        if (attempt > 0) {
            auto delay = std::chrono::milliseconds(int64_t(cfg_.backoff_ms) << (attempt - 1));
            std::this_thread::sleep_for(delay);
        }
        calls_.fetch_add(1);

        httplib::Client client(host_, port_);
        client.set_connection_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);
        client.set_read_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);

        auto res = client.Post(url_path, headers, payload, "application/json");
        if (!res) {
            last_error = "connection failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) {
            json parsed = json::parse(res->body, nullptr, false);
            if (parsed.is_discarded())
                throw ProviderError("provider returned invalid JSON from " + url_path);
            return parsed;
        }
        last_error = "HTTP " + std::to_string(res->status) + " from " + url_path;
        if (!retryable_status(res->status)) throw ProviderError(last_error);
    }
    throw ProviderError("provider failed after " + std::to_string(cfg_.max_retries + 1) +
                        " attempts: " + last_error);
}

ChatResponse HttpProvider::complete(const ChatRequest& req) {
    if (req.user.empty()) throw ProviderError("empty user message");

    json body;
    body["model"] = cfg_.model;
    json messages = json::array();
    if (req.system) messages.push_back({{"role", "system"}, {"content", *req.system}});
    messages.push_back({{"role", "user"}, {"content", req.user}});
    body["messages"] = messages;
    body["temperature"] = req.temperature;
    body["max_tokens"] = req.max_tokens;
    if (req.want_logprobs) body["logprobs"] = true;

    json resp = post_with_retry("/v1/chat/completions", body);

    ChatResponse out;
    out.model_id = resp.value("model", cfg_.model);
    try {
        const auto& choice = resp.at("choices").at(0);
        out.text = choice.at("message").at("content").get<std::string>();
        if (req.want_logprobs && choice.contains("logprobs") && !choice.at("logprobs").is_null()) {
            std::vector<TokenLogprob> lps;
            for (const auto& e : choice.at("logprobs").at("content")) {
                double lp = e.at("logprob").get<double>();
                // some servers emit tiny positive values; logprobs must stay <= 0
                lps.push_back({e.at("token").get<std::string>(), std::min(lp, 0.0)});
            }
            out.token_logprobs = std::move(lps);
        }
    } catch (const json::exception& e) {
        throw ProviderError(std::string("malformed chat completion response: ") + e.what());
    }
    return out;
}

std::vector<TokenLogprob> HttpProvider::score_logprobs(const ChatRequest& req,
                                                       const std::string& target) {
    if (target.empty()) return {};

    std::string prompt = (req.system ? *req.system + "\n\n" : std::string()) + req.user;

    json body;
    body["model"] = cfg_.model;
    body["prompt"] = prompt + target;
    body["max_tokens"] = 0;
    body["echo"] = true;
    body["logprobs"] = 0;
    body["temperature"] = 0.0;

    json resp = post_with_retry("/v1/completions", body);

    try {
        const auto& choice = resp.at("choices").at(0);
        if (!choice.contains("logprobs") || choice.at("logprobs").is_null())
            throw CapabilityError("provider does not support echo logprobs");
        const auto& lp = choice.at("logprobs");
        const auto& tokens = lp.at("tokens");
        const auto& token_lps = lp.at("token_logprobs");
        const auto& offsets = lp.at("text_offset");

        std::vector<TokenLogprob> out;
        std::string reassembled;
        const auto prompt_len = int64_t(prompt.size());
        for (size_t i = 0; i < tokens.size(); i++) {
            if (offsets.at(i).get<int64_t>() < prompt_len) continue; // prompt token
            if (token_lps.at(i).is_null())
                throw CapabilityError("provider returned null logprob for a target token");
            double v = token_lps.at(i).get<double>();
            out.push_back({tokens.at(i).get<std::string>(), std::min(v, 0.0)});
            reassembled += tokens.at(i).get<std::string>();
        }
        if (reassembled != target)
            throw CapabilityError("echo logprobs do not reconstruct the target continuation");
        return out;
    } catch (const json::exception& e) {
        throw CapabilityError(std::string("malformed completions logprob response: ") + e.what());
    }
}

} // namespace alignforge

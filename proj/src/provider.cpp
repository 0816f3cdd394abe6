#include "alignforge/provider.hpp"

#include <cstdlib>
#include <filesystem>

#include "alignforge/errors.hpp"
#include "alignforge/hash.hpp"

namespace fs = std::filesystem;

namespace alignforge {

json ChatResponse::to_json() const {
    json j;
    j["text"] = text;
    if (token_logprobs) {
        json arr = json::array();
        for (const auto& t : *token_logprobs) arr.push_back({{"token", t.token}, {"logprob", t.logprob}});
        j["token_logprobs"] = arr;
    }
    j["model_id"] = model_id;
    return j;
}

ChatResponse ChatResponse::from_json(const json& j) {
    ChatResponse r;
    r.text = j.at("text").get<std::string>();
    if (j.contains("token_logprobs")) {
        std::vector<TokenLogprob> lps;
        for (const auto& e : j.at("token_logprobs"))
            lps.push_back({e.at("token").get<std::string>(), e.at("logprob").get<double>()});
        r.token_logprobs = std::move(lps);
    }
    r.model_id = j.at("model_id").get<std::string>();
    return r;
}

json ProviderConfig::to_json() const {
    json j;
    j["kind"] = kind;
    j["endpoint"] = endpoint;
    j["model"] = model;
    j["timeout_ms"] = timeout_ms;
    j["max_retries"] = max_retries;
    j["backoff_ms"] = backoff_ms;
    j["max_in_flight"] = max_in_flight;
    j["cache_dir"] = cache_dir;
    j["seed"] = seed;
    j["api_key_env"] = api_key_env;
    return j;
}

ProviderConfig ProviderConfig::from_json(const json& j) {
    ProviderConfig c;
    if (j.contains("kind")) c.kind = j.at("kind").get<std::string>();
    if (j.contains("endpoint")) c.endpoint = j.at("endpoint").get<std::string>();
    if (j.contains("model")) c.model = j.at("model").get<std::string>();
    if (j.contains("timeout_ms")) c.timeout_ms = j.at("timeout_ms").get<int>();
    if (j.contains("max_retries")) c.max_retries = j.at("max_retries").get<int>();
    if (j.contains("backoff_ms")) c.backoff_ms = j.at("backoff_ms").get<int>();
    if (j.contains("max_in_flight")) c.max_in_flight = j.at("max_in_flight").get<int>();
    if (j.contains("cache_dir")) c.cache_dir = j.at("cache_dir").get<std::string>();
    if (j.contains("seed")) c.seed = j.at("seed").get<uint64_t>();
    if (j.contains("api_key_env")) c.api_key_env = j.at("api_key_env").get<std::string>();
    if (c.kind != "stub" && c.kind != "http")
        throw ConfigError("provider kind must be stub or http, got: " + c.kind);
    if (c.max_in_flight < 1) throw ConfigError("max_in_flight must be >= 1");
    return c;
}

CachingProvider::CachingProvider(std::shared_ptr<Provider> inner, std::string cache_dir)
    : inner_(std::move(inner)), cache_dir_(std::move(cache_dir)) {
    fs::create_directories(cache_dir_);
}

std::string CachingProvider::key_for(const ChatRequest& req, const std::string& op,
                                     const std::string& target) const {
    json j;
    j["op"] = op;
    j["model"] = inner_->model_id();
    j["system"] = req.system ? json(*req.system) : json(nullptr);
    j["user"] = req.user;
    j["temperature"] = req.temperature;
    j["max_tokens"] = req.max_tokens;
    j["want_logprobs"] = req.want_logprobs;
    if (op == "logprobs") j["target"] = target;
    return hash128_hex(j.dump());
}

ChatResponse CachingProvider::complete(const ChatRequest& req) {
    std::string path = cache_dir_ + "/" + key_for(req, "complete", "") + ".json";
    if (fs::exists(path)) {
        hits_.fetch_add(1);
        return ChatResponse::from_json(read_json_file(path));
    }
    ChatResponse resp = inner_->complete(req);
    write_file_atomic(path, resp.to_json().dump() + "\n");
    return resp;
}

std::vector<TokenLogprob> CachingProvider::score_logprobs(const ChatRequest& req,
                                                          const std::string& target) {
    std::string path = cache_dir_ + "/" + key_for(req, "logprobs", target) + ".json";
    if (fs::exists(path)) {
        hits_.fetch_add(1);
        auto j = read_json_file(path);
        std::vector<TokenLogprob> out;
        for (const auto& e : j.at("logprobs"))
            out.push_back({e.at("token").get<std::string>(), e.at("logprob").get<double>()});
        return out;
    }
    auto lps = inner_->score_logprobs(req, target);
    json j;
    json arr = json::array();
    for (const auto& t : lps) arr.push_back({{"token", t.token}, {"logprob", t.logprob}});
    j["logprobs"] = arr;
    write_file_atomic(path, j.dump() + "\n");
    return lps;
}

std::shared_ptr<Provider> make_provider(const ProviderConfig& cfg) {
    std::shared_ptr<Provider> base;
    if (cfg.kind == "stub")
        base = std::make_shared<StubProvider>(cfg);
    else
        base = std::make_shared<HttpProvider>(cfg);
    if (!cfg.cache_dir.empty())
        return std::make_shared<CachingProvider>(base, cfg.cache_dir);
    return base;
}

} // namespace alignforge

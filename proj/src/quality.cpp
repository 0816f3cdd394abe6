#include "alignforge/quality.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "alignforge/errors.hpp"
#include "alignforge/parallel.hpp"
#include "alignforge/prompts.hpp"
#include "alignforge/text.hpp"

namespace alignforge {

double perplexity(const std::vector<TokenLogprob>& logprobs) {
    if (logprobs.empty())
        throw std::invalid_argument("perplexity is undefined for an empty logprob list");
    double sum = 0.0;
    for (const auto& t : logprobs) {
        if (t.logprob > 0.0)
            throw std::invalid_argument("invalid probability: ln p > 0 for token " + t.token);
        sum += t.logprob;
    }
    return std::exp(-sum / double(logprobs.size()));
}

std::optional<double> parse_score(const std::string& reply) {
    std::string t(trim(reply));
    if (t.empty()) return std::nullopt;
    char* end = nullptr;
    double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) return std::nullopt;
    if (v == 1.0 || v == 0.5 || v == 0.0) return v;
    return std::nullopt;
}

namespace {

double rubric_score(const char* rubric, const char* unparsed_flag, const std::string& instruction,
                    const std::string& reply, Provider& judge, std::vector<std::string>* flags) {
    ChatRequest req;
    req.system = std::string(rubric);
    req.user = prompts::format_pair(instruction, reply);
    req.temperature = 0.0;
    req.max_tokens = 8;

    ChatResponse resp = judge.complete(req);
    if (auto score = parse_score(resp.text)) return *score;
    if (flags) flags->push_back(unparsed_flag);
    return 0.5;
}

} // namespace

double safety_score(const std::string& instruction, const std::string& reply, Provider& judge,
                    std::vector<std::string>* flags) {
    return rubric_score(prompts::kSafetyRubric, "judge_unparsed", instruction, reply, judge, flags);
}

double quality_score(const std::string& instruction, const std::string& reply, Provider& judge,
                     std::vector<std::string>* flags) {
    return rubric_score(prompts::kQualityRubric, "judge_unparsed", instruction, reply, judge, flags);
}

EnrichedSample featurize(EnrichedSample e, Provider& judge, Provider& scorer) {
    const std::string& instruction = e.labeled.sample.instruction;
    for (auto& cand : e.replies) {
        if (!cand.usable()) continue;
        QualityFeatures f = cand.features.value_or(QualityFeatures{});

        try {
            ChatRequest req;
            req.user = instruction;
            req.want_logprobs = true;
            auto lps = scorer.score_logprobs(req, cand.text);
            f.perplexity = perplexity(lps);
        } catch (const ProviderError&) {
            f.flags.push_back("ppl_provider_failed");
        } catch (const std::invalid_argument&) {
            f.flags.push_back("ppl_undefined");
        }

        try {
            f.safety = safety_score(instruction, cand.text, judge, &f.flags);
        } catch (const ProviderError&) {
            f.flags.push_back("safety_provider_failed");
        }

        try {
            f.quality = quality_score(instruction, cand.text, judge, &f.flags);
        } catch (const ProviderError&) {
            f.flags.push_back("quality_provider_failed");
        }

        cand.features = std::move(f);
    }
    return e;
}

std::vector<EnrichedSample> featurize_all(std::vector<EnrichedSample> in, Provider& judge,
                                          Provider& scorer, int max_in_flight) {
    return parallel_map(in, max_in_flight, [&](const EnrichedSample& e, size_t) {
        return featurize(e, judge, scorer);
    });
}

} // namespace alignforge

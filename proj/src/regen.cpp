#include "alignforge/regen.hpp"

#include "alignforge/errors.hpp"
#include "alignforge/parallel.hpp"
#include "alignforge/text.hpp"

namespace alignforge {

namespace {

ReplyCandidate generate_candidate(ReplySource source, const std::string& instruction,
                                  Provider& provider, const RegenConfig& cfg) {
    ReplyCandidate c;
    c.source = source;
    ChatRequest req;
    req.user = instruction;
    req.temperature = cfg.temperature;
    req.max_tokens = cfg.max_tokens;
    try {
        c.text = provider.complete(req).text;
    } catch (const ProviderError&) {
        c.text = kGenerationFailed;
        c.flags.push_back("generation_failed");
    }
    return c;
}

} // namespace

EnrichedSample regenerate(const LabeledSample& s, Provider& large, Provider& small,
                          const RegenConfig& cfg) {
    EnrichedSample e;
    e.labeled = s;

    ReplyCandidate original;
    original.source = ReplySource::original;
    original.text = s.sample.original_reply;
    if (trim(original.text).empty()) original.flags.push_back("empty_original");
    e.replies.push_back(std::move(original));

    e.replies.push_back(generate_candidate(ReplySource::large_model, s.sample.instruction, large, cfg));
    e.replies.push_back(generate_candidate(ReplySource::small_model, s.sample.instruction, small, cfg));
    return e;
}

std::vector<EnrichedSample> regenerate_all(const std::vector<LabeledSample>& samples,
                                           Provider& large, Provider& small,
                                           const RegenConfig& cfg, int max_in_flight) {
    return parallel_map(samples, max_in_flight, [&](const LabeledSample& s, size_t) {
        return regenerate(s, large, small, cfg);
    });
}

} // namespace alignforge

#include "alignforge/sample.hpp"

#include "alignforge/errors.hpp"
#include "alignforge/hash.hpp"
#include "alignforge/text.hpp"

namespace alignforge {

std::string sample_id(const std::string& source, const std::string& instruction,
                      const std::string& original_reply) {
    std::string payload;
    payload.reserve(source.size() + instruction.size() + original_reply.size() + 2);
    payload += source;
    payload += '\x1F';
    payload += instruction;
    payload += '\x1F';
    payload += original_reply;
    return hash128_hex(payload);
}

json Sample::to_json() const {
    json j;
    j["id"] = id;
    j["instruction"] = instruction;
    j["original_reply"] = original_reply;
    j["source"] = source;
    j["lang"] = lang;
    j["rule_category"] = rule_category;
    j["meta"] = meta;
    return j;
}

Sample Sample::from_json(const json& j) {
    Sample s;
    s.id = j.at("id").get<std::string>();
    s.instruction = j.at("instruction").get<std::string>();
    s.original_reply = j.at("original_reply").get<std::string>();
    s.source = j.at("source").get<std::string>();
    s.lang = j.at("lang").get<std::string>();
    s.rule_category = j.at("rule_category").get<std::string>();
    if (j.contains("meta")) s.meta = j.at("meta").get<std::map<std::string, std::string>>();
    return s;
}

json LabeledSample::to_json() const {
    json j = sample.to_json();
    j["label"] = label;
    j["label_ok"] = label_ok;
    return j;
}

LabeledSample LabeledSample::from_json(const json& j) {
    LabeledSample ls;
    ls.sample = Sample::from_json(j);
    ls.label = j.at("label").get<std::string>();
    ls.label_ok = j.at("label_ok").get<bool>();
    return ls;
}

json QualityFeatures::to_json() const {
    json j = json::object();
    if (perplexity) j["perplexity"] = *perplexity;
    if (safety) j["safety"] = *safety;
    if (quality) j["quality"] = *quality;
    if (!flags.empty()) j["flags"] = flags;
    return j;
}

QualityFeatures QualityFeatures::from_json(const json& j) {
    QualityFeatures f;
    if (j.contains("perplexity")) f.perplexity = j.at("perplexity").get<double>();
    if (j.contains("safety")) f.safety = j.at("safety").get<double>();
    if (j.contains("quality")) f.quality = j.at("quality").get<double>();
    if (j.contains("flags")) f.flags = j.at("flags").get<std::vector<std::string>>();
    return f;
}

std::string to_string(ReplySource s) {
    switch (s) {
        case ReplySource::original: return "original";
        case ReplySource::large_model: return "large_model";
        case ReplySource::small_model: return "small_model";
    }
    return "original";
}

ReplySource reply_source_from_string(const std::string& s) {
    if (s == "original") return ReplySource::original;
    if (s == "large_model") return ReplySource::large_model;
    if (s == "small_model") return ReplySource::small_model;
    throw ParseError("unknown reply source: " + s);
}

bool ReplyCandidate::usable() const {
    for (const auto& f : flags)
        if (f == "generation_failed" || f == "empty_original") return false;
    return !trim(text).empty();
}

json ReplyCandidate::to_json() const {
    json j;
    j["source"] = to_string(source);
    j["text"] = text;
    if (!flags.empty()) j["flags"] = flags;
    if (features) j["features"] = features->to_json();
    return j;
}

ReplyCandidate ReplyCandidate::from_json(const json& j) {
    ReplyCandidate c;
    c.source = reply_source_from_string(j.at("source").get<std::string>());
    c.text = j.at("text").get<std::string>();
    if (j.contains("flags")) c.flags = j.at("flags").get<std::vector<std::string>>();
    if (j.contains("features")) c.features = QualityFeatures::from_json(j.at("features"));
    return c;
}

const ReplyCandidate* EnrichedSample::find(ReplySource s) const {
    for (const auto& r : replies)
        if (r.source == s) return &r;
    return nullptr;
}

json EnrichedSample::to_json() const {
    json j = labeled.to_json();
    json reps = json::array();
    for (const auto& r : replies) reps.push_back(r.to_json());
    j["replies"] = reps;
    return j;
}

EnrichedSample EnrichedSample::from_json(const json& j) {
    EnrichedSample e;
    e.labeled = LabeledSample::from_json(j);
    for (const auto& rj : j.at("replies")) e.replies.push_back(ReplyCandidate::from_json(rj));
    return e;
}

} // namespace alignforge

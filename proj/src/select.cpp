#include "alignforge/select.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <set>

#include "alignforge/errors.hpp"
#include "alignforge/hash.hpp"

namespace alignforge {

void SelectionConfig::validate() const {
    if (ratio_pos < 1 || ratio_neg < 1)
        throw ConfigError("ratio parts must be >= 1");
}

void parse_ratio(const std::string& text, SelectionConfig& cfg) {
    auto colon = text.find(':');
    if (colon == std::string::npos)
        throw ConfigError("ratio must look like P:N, got: " + text);
    try {
        cfg.ratio_pos = std::stoi(text.substr(0, colon));
        cfg.ratio_neg = std::stoi(text.substr(colon + 1));
    } catch (const std::exception&) {
        throw ConfigError("ratio must look like P:N, got: " + text);
    }
    cfg.validate();
}

json SelectionReport::to_json() const {
    json j;
    j["input_samples"] = input_samples;
    j["sft_emitted"] = sft_emitted;
    j["kto_desirable"] = kto_desirable;
    j["kto_undesirable"] = kto_undesirable;
    j["excluded"] = excluded;
    return j;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ppl_or_inf(const ReplyCandidate& c) {
    return c.features && c.features->perplexity ? *c.features->perplexity : kInf;
}

// lower = preferred for the positive side
int positive_source_rank(ReplySource s) {
    switch (s) {
        case ReplySource::large_model: return 0;
        case ReplySource::original: return 1;
        case ReplySource::small_model: return 2;
    }
    return 2;
}

bool positive_better(const ReplyCandidate* a, const ReplyCandidate* b) {
    double qa = *a->features->quality, qb = *b->features->quality;
    if (qa != qb) return qa > qb;
    double pa = ppl_or_inf(*a), pb = ppl_or_inf(*b);
    if (pa != pb) return pa < pb;
    return positive_source_rank(a->source) < positive_source_rank(b->source);
}

// lower = worse, i.e. selected first for the negative side
int negative_source_rank(ReplySource s) {
    switch (s) {
        case ReplySource::small_model: return 0;
        case ReplySource::original: return 1;
        case ReplySource::large_model: return 2;
    }
    return 2;
}

bool negative_worse(const ReplyCandidate* a, const ReplyCandidate* b) {
    double qa = *a->features->quality, qb = *b->features->quality;
    if (qa != qb) return qa < qb;
    double pa = ppl_or_inf(*a), pb = ppl_or_inf(*b);
    if (pa != pb) return pa > pb;
    return negative_source_rank(a->source) < negative_source_rank(b->source);
}

bool positive_eligible(const ReplyCandidate& c, const SelectionConfig& cfg) {
    if (!c.usable() || !c.features) return false;
    const auto& f = *c.features;
    if (!f.safety || *f.safety != 1.0) return false;
    if (!f.quality) return false;
    if (cfg.max_ppl) {
        if (!f.perplexity || *f.perplexity > *cfg.max_ppl) return false;
    }
    return true;
}

bool negative_eligible(const ReplyCandidate& c, double best_quality, const SelectionConfig& cfg) {
    if (!c.usable() || !c.features) return false;
    const auto& f = *c.features;
    if (!f.quality || *f.quality >= best_quality) return false; // strict dominance
    if (!cfg.allow_unsafe_negatives && (!f.safety || *f.safety != 1.0)) return false;
    return true;
}

// Seeded subset of size n, preserving relative order.
template <typename T>
void downsample(std::vector<T>& items, uint64_t n, uint64_t rng_seed) {
    if (items.size() <= n) return;
    std::vector<size_t> idx(items.size());
    for (size_t i = 0; i < idx.size(); i++) idx[i] = i;
    std::mt19937_64 rng(rng_seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(size_t(n));
    std::sort(idx.begin(), idx.end());
    std::vector<T> out;
    out.reserve(idx.size());
    for (size_t i : idx) out.push_back(std::move(items[i]));
    items = std::move(out);
}

} // namespace

std::vector<const ReplyCandidate*> rank_candidates(const EnrichedSample& e,
                                                   const SelectionConfig& cfg) {
    std::vector<const ReplyCandidate*> eligible;
    for (const auto& c : e.replies)
        if (positive_eligible(c, cfg)) eligible.push_back(&c);
    std::sort(eligible.begin(), eligible.end(), positive_better);
    return eligible;
}

const ReplyCandidate* pick_negative(const EnrichedSample& e, double best_quality,
                                    const SelectionConfig& cfg) {
    const ReplyCandidate* worst = nullptr;
    for (const auto& c : e.replies) {
        if (!negative_eligible(c, best_quality, cfg)) continue;
        if (!worst || negative_worse(&c, worst)) worst = &c;
    }
    return worst;
}

SelectionResult build_selection(const std::vector<EnrichedSample>& in,
                                const SelectionConfig& cfg) {
    cfg.validate();

    SelectionResult result;
    result.report.input_samples = in.size();

    struct Pick {
        size_t sample = 0;
        const ReplyCandidate* best = nullptr;
        const ReplyCandidate* worst = nullptr;
    };
    std::vector<Pick> picks;
    std::set<std::string> seen_ids;

    for (size_t i = 0; i < in.size(); i++) {
        auto ranked = rank_candidates(in[i], cfg);
        if (ranked.empty()) {
            result.report.excluded["no_eligible_candidate"]++;
            continue;
        }
        if (!seen_ids.insert(in[i].labeled.sample.id).second) {
            result.report.excluded["duplicate_instruction"]++;
            continue;
        }
        Pick p;
        p.sample = i;
        p.best = ranked.front();
        if (*p.best->features->safety != 1.0)
            throw Error("selection invariant violated: best candidate with safety != 1");
        p.worst = pick_negative(in[i], *p.best->features->quality, cfg);
        picks.push_back(p);
    }

    auto make_sft = [&](const Pick& p) {
        const auto& s = in[p.sample].labeled;
        SftRecord r;
        r.id = s.sample.id;
        r.instruction = s.sample.instruction;
        r.reply = p.best->text;
        r.source = p.best->source;
        r.label = s.label;
        r.features = *p.best->features;
        return r;
    };

    // SFT: best per sample, optional seeded downsample to target
    {
        std::vector<Pick> sft_picks = picks;
        if (cfg.sft_target)
            downsample(sft_picks, *cfg.sft_target, murmur64("sft_downsample", cfg.seed));
        for (const auto& p : sft_picks) result.sft.push_back(make_sft(p));
        result.report.sft_emitted = result.sft.size();
    }

    // KTO: desirable duplicates the SFT choice; undesirable is the strictly
    // worse pick; then the ratio is enforced by downsampling the
    // overrepresented side.
    {
        std::vector<size_t> pos;
        std::vector<size_t> neg; // indices into picks with a negative
        for (size_t i = 0; i < picks.size(); i++) {
            pos.push_back(i);
            if (picks[i].worst) neg.push_back(i);
        }

        const uint64_t num = uint64_t(cfg.ratio_pos);
        const uint64_t den = uint64_t(cfg.ratio_neg);
        uint64_t p_keep = pos.size();
        uint64_t n_keep = p_keep * den / num;
        if (n_keep > neg.size()) {
            // too few negatives: shrink the positive side to restore the ratio
            uint64_t p_max = ((uint64_t(neg.size()) + 1) * num - 1) / den;
            p_keep = std::min<uint64_t>(pos.size(), p_max);
            n_keep = p_keep * den / num;
        }

        if (cfg.kto_target && p_keep + n_keep > *cfg.kto_target) {
            uint64_t p_t = *cfg.kto_target * num / (num + den);
            p_keep = std::min(p_keep, p_t);
            n_keep = std::min(n_keep, p_keep * den / num);
        }

        downsample(pos, p_keep, murmur64("kto_pos", cfg.seed));
        downsample(neg, n_keep, murmur64("kto_neg", cfg.seed));

        std::set<size_t> pos_set(pos.begin(), pos.end());
        std::set<size_t> neg_set(neg.begin(), neg.end());

        for (size_t i = 0; i < picks.size(); i++) {
            const auto& p = picks[i];
            const auto& s = in[p.sample].labeled;
            if (pos_set.count(i)) {
                KtoRecord r;
                r.id = s.sample.id;
                r.instruction = s.sample.instruction;
                r.reply = p.best->text;
                r.tag = "desirable";
                r.features = *p.best->features;
                result.kto.push_back(std::move(r));
            }
            if (neg_set.count(i)) {
                KtoRecord r;
                r.id = s.sample.id;
                r.instruction = s.sample.instruction;
                r.reply = p.worst->text;
                r.tag = "undesirable";
                r.features = *p.worst->features;
                result.kto.push_back(std::move(r));
            }
        }
        result.report.kto_desirable = pos.size();
        result.report.kto_undesirable = neg.size();
    }

    return result;
}

std::vector<SftRecord> build_sft(const std::vector<EnrichedSample>& in,
                                 const SelectionConfig& cfg, SelectionReport* report) {
    auto res = build_selection(in, cfg);
    if (report) *report = res.report;
    return std::move(res.sft);
}

std::vector<KtoRecord> build_kto(const std::vector<EnrichedSample>& in,
                                 const SelectionConfig& cfg, SelectionReport* report) {
    auto res = build_selection(in, cfg);
    if (report) *report = res.report;
    return std::move(res.kto);
}

} // namespace alignforge

#include "alignforge/classify.hpp"

#include <fstream>

#include "alignforge/errors.hpp"
#include "alignforge/parallel.hpp"
#include "alignforge/prompts.hpp"
#include "alignforge/text.hpp"

namespace alignforge {

json LabelStats::to_json() const {
    json j;
    j["total"] = total;
    j["counts"] = counts;
    j["kept_labels"] = std::vector<std::string>(kept_labels.begin(), kept_labels.end());
    return j;
}

std::pair<std::string, bool> parse_label(const std::string& reply) {
    std::string t(trim(reply));
    // normalize the full-width separator U+FF0D (utf-8 ef bc 8d)
    std::string norm;
    norm.reserve(t.size());
    for (size_t i = 0; i < t.size();) {
        if (i + 2 < t.size() && (unsigned char)t[i] == 0xEF && (unsigned char)t[i + 1] == 0xBC &&
            (unsigned char)t[i + 2] == 0x8D) {
            norm += '-';
            i += 3;
        } else {
            norm += t[i];
            i++;
        }
    }
    size_t separators = 0;
    size_t sep_pos = 0;
    for (size_t i = 0; i < norm.size(); i++) {
        if (norm[i] == '-') {
            separators++;
            sep_pos = i;
        }
    }
    if (separators != 1) return {norm, false};
    std::string primary(trim(std::string_view(norm).substr(0, sep_pos)));
    std::string secondary(trim(std::string_view(norm).substr(sep_pos + 1)));
    if (primary.empty() || secondary.empty()) return {norm, false};
    return {primary + "-" + secondary, true};
}

LabeledSample classify_sample(const Sample& s, Provider& judge) {
    LabeledSample out;
    out.sample = s;

    ChatRequest req;
    req.system = std::string(prompts::kClassify);
    req.user = s.instruction;
    req.temperature = 0.0;
    req.max_tokens = 32;

    try {
        ChatResponse resp = judge.complete(req);
        auto [label, ok] = parse_label(resp.text);
        out.label = ok ? label : "unparsed";
        out.label_ok = ok;
    } catch (const ProviderError&) {
        out.label = "provider_failed";
        out.label_ok = false;
    }
    return out;
}

std::vector<LabeledSample> classify_all(const std::vector<Sample>& samples, Provider& judge,
                                        int max_in_flight) {
    return parallel_map(samples, max_in_flight,
                        [&judge](const Sample& s, size_t) { return classify_sample(s, judge); });
}

std::vector<LabeledSample> prune_labels(const std::vector<LabeledSample>& in, uint64_t min_freq,
                                        const std::set<std::string>& denylist, LabelStats* stats) {
    LabelStats st;
    st.total = in.size();
    for (const auto& ls : in) st.counts[ls.label]++;

    for (const auto& ls : in) {
        if (!ls.label_ok) continue;
        if (denylist.count(ls.label)) continue;
        if (st.counts[ls.label] < min_freq) continue;
        st.kept_labels.insert(ls.label);
    }

    std::vector<LabeledSample> kept;
    kept.reserve(in.size());
    for (const auto& ls : in)
        if (ls.label_ok && st.kept_labels.count(ls.label)) kept.push_back(ls);

    if (stats) *stats = std::move(st);
    return kept;
}

std::set<std::string> load_denylist(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open denylist: " + path);
    std::set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        std::string t(trim(line));
        if (!t.empty()) out.insert(t);
    }
    return out;
}

} // namespace alignforge

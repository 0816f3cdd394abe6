#include <array>
#include <cmath>
#include <unordered_map>

#include "alignforge/errors.hpp"
#include "alignforge/hash.hpp"
#include "alignforge/prompts.hpp"
#include "alignforge/provider.hpp"
#include "alignforge/text.hpp"

namespace alignforge {

namespace {

const std::array<const char*, 6> kTemplates = {
    "Here is a concise answer: ref {}.",
    "Let me explain step by step. Key: {}.",
    "The short answer is {}.",
    "根据问题，答案要点是 {}。",
    "简要回答：{}。",
    "As requested, the result is {}.",
};

const std::array<const char*, 12> kPrimaries = {
    "数学", "代码", "写作", "翻译", "问答", "推理",
    "提取", "分类", "头脑风暴", "角色扮演", "总结", "其他",
};

const std::array<const char*, 10> kSecondaries = {
    "基础", "进阶", "应用", "理论", "综合",
    "审查", "生成", "解释", "转换", "评估",
};

std::string fill_template(const std::string& tmpl, const std::string& value) {
    std::string out = tmpl;
    auto pos = out.find("{}");
    if (pos != std::string::npos) out.replace(pos, 2, value);
    return out;
}

// Add-1 smoothed character-bigram model over a fixed corpus.
struct BigramModel {
    std::unordered_map<uint64_t, uint64_t> bigrams; // (prev<<32 | cur) -> count
    std::unordered_map<char32_t, uint64_t> follows; // prev -> #bigrams starting at prev
    size_t vocab = 0;
    char32_t last_corpus_cp = U'\n';

    BigramModel(std::string_view corpus, std::string_view target) {
        auto cps = utf8_codepoints(corpus);
        auto tps = utf8_codepoints(target);
        std::unordered_map<char32_t, bool> alphabet;
        for (char32_t c : cps) alphabet[c] = true;
        for (char32_t c : tps) alphabet[c] = true;
        vocab = alphabet.size();
        for (size_t i = 0; i + 1 < cps.size(); i++) {
            bigrams[(uint64_t(cps[i]) << 32) | uint64_t(cps[i + 1])]++;
            follows[cps[i]]++;
        }
        if (!cps.empty()) last_corpus_cp = cps.back();
    }

    double prob(char32_t prev, char32_t cur) const {
        uint64_t bg = 0;
        auto it = bigrams.find((uint64_t(prev) << 32) | uint64_t(cur));
        if (it != bigrams.end()) bg = it->second;
        uint64_t fl = 0;
        auto it2 = follows.find(prev);
        if (it2 != follows.end()) fl = it2->second;
        return double(bg + 1) / (double(fl) + double(vocab));
    }
};

} // namespace

StubProvider::StubProvider(const ProviderConfig& cfg)
    : model_(cfg.model.empty() ? "stub-model" : cfg.model), seed_(cfg.seed) {}

ChatResponse StubProvider::complete(const ChatRequest& req) {
    if (req.user.empty()) throw ProviderError("empty user message");
    calls_.fetch_add(1);

    std::string canon = (req.system ? *req.system : std::string()) + '\x1F' + req.user;
    uint64_t h = murmur64(canon, seed_);

    ChatResponse resp;
    resp.model_id = model_;

    const std::string sys = req.system ? *req.system : std::string();
    if (sys == prompts::kClassify) {
        resp.text = std::string(kPrimaries[h % kPrimaries.size()]) + "-" +
                    kSecondaries[(h / kPrimaries.size()) % kSecondaries.size()];
    } else if (sys == prompts::kSafetyRubric) {
        uint64_t b = h % 10;
        resp.text = b < 7 ? "1" : (b < 9 ? "0.5" : "0");
    } else if (sys == prompts::kQualityRubric) {
        auto pos = req.user.find(prompts::kReplyMarker);
        std::string reply_part =
            pos == std::string::npos ? std::string()
                                     : req.user.substr(pos + std::string(prompts::kReplyMarker).size());
        if (trim(reply_part).empty()) {
            resp.text = "0";
        } else {
            uint64_t b = h % 10;
            resp.text = b < 5 ? "1" : (b < 8 ? "0.5" : "0");
        }
    } else {
        resp.text = fill_template(kTemplates[h % kTemplates.size()], to_hex(h));
    }

    if (req.want_logprobs) {
        std::string corpus = req.system ? *req.system + "\n" + req.user : req.user;
        BigramModel lm(corpus, resp.text);
        std::vector<TokenLogprob> lps;
        char32_t prev = lm.last_corpus_cp;
        for (char32_t cp : utf8_codepoints(resp.text)) {
            lps.push_back({utf8_encode(cp), std::log(lm.prob(prev, cp))});
            prev = cp;
        }
        resp.token_logprobs = std::move(lps);
    }
    return resp;
}

std::vector<TokenLogprob> StubProvider::score_logprobs(const ChatRequest& req,
                                                       const std::string& target) {
    if (target.empty()) return {};
    calls_.fetch_add(1);

    std::string corpus = req.system ? *req.system + "\n" + req.user : req.user;
    BigramModel lm(corpus, target);
    std::vector<TokenLogprob> out;
    char32_t prev = lm.last_corpus_cp;
    for (char32_t cp : utf8_codepoints(target)) {
        out.push_back({utf8_encode(cp), std::log(lm.prob(prev, cp))});
        prev = cp;
    }
    return out;
}

} // namespace alignforge

// Regenerates data/synthetic_1k.jsonl: a deterministic 1,000-record
// instruction corpus with mixed zh/en prompts, planted near-duplicate
// clusters and a handful of empty replies.
//
// usage: gen_corpus <output-path>

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "alignforge/jsonl.hpp"

using alignforge::json;

namespace {

const std::vector<std::string> kZhTopics = {
    "二次方程", "光合作用", "冒泡排序", "相对论", "唐诗", "机器学习", "操作系统",
    "数据库索引", "微积分", "概率论", "化学反应", "世界历史", "经济学原理", "网络协议",
};

const std::vector<std::string> kEnTopics = {
    "binary search", "photosynthesis", "the French Revolution", "gradient descent",
    "TCP handshakes", "compound interest", "haiku poetry", "unit testing",
    "the water cycle", "prime numbers",
};

const std::vector<std::string> kZhTemplates = {
    "请解释一下{}的基本原理。",
    "写一段关于{}的简短介绍。",
    "用通俗的语言说明{}是什么。",
    "请给出一个关于{}的例子并解释。",
    "总结{}的三个要点。",
    "为初学者设计一个学习{}的计划。",
    "比较{}和相关概念的区别。",
    "写一段Python代码来演示{}。",
};

const std::vector<std::string> kEnTemplates = {
    "Explain {} in simple terms.",
    "Write a short introduction to {}.",
    "Give an example of {} and explain it.",
    "Summarize the key ideas behind {}.",
    "Design a beginner study plan for {}.",
    "Write a Python snippet that demonstrates {}.",
};

const std::vector<std::string> kReplies = {
    "这是一个常见的问题，下面给出详细解释。",
    "简单来说，它的核心思想可以分为三点。",
    "Here is a short explanation with an example.",
    "The key idea is straightforward once you see a worked example.",
    "下面给出一个可运行的示例，并附有注释。",
    "Let's break this into steps and work through each one.",
};

std::string fill(const std::string& tmpl, const std::string& topic) {
    std::string out = tmpl;
    auto pos = out.find("{}");
    if (pos != std::string::npos) out.replace(pos, 2, topic);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: %s <output-path>\n", argv[0]);
        return 1;
    }

    std::mt19937_64 rng(20240817);
    auto pick = [&rng](size_t n) { return size_t(rng() % n); };

    std::vector<json> records;
    while (records.size() < 1000) {
        bool zh = pick(100) < 60;
        std::string instruction, topic;
        if (zh) {
            topic = kZhTopics[pick(kZhTopics.size())];
            instruction = fill(kZhTemplates[pick(kZhTemplates.size())], topic);
        } else {
            topic = kEnTopics[pick(kEnTopics.size())];
            instruction = fill(kEnTemplates[pick(kEnTemplates.size())], topic);
        }
        std::string reply = kReplies[pick(kReplies.size())] + " (" + topic + " #" +
                            std::to_string(records.size()) + ")";
        if (pick(200) < 1) reply = ""; // a few empty originals

        records.push_back({{"instruction", instruction}, {"output", reply}});

        // plant duplicate clusters: exact repeats and light punctuation tweaks
        if (records.size() < 1000 && pick(100) < 8)
            records.push_back({{"instruction", instruction}, {"output", reply + "!"}});
        if (records.size() < 1000 && pick(100) < 6)
            records.push_back({{"instruction", instruction + " "}, {"output", reply}});
    }

    alignforge::JsonlWriter w(argv[1]);
    for (const auto& r : records) w.write(r);
    w.close();
    std::printf("wrote %zu records to %s\n", records.size(), argv[1]);
    return 0;
}

#include "alignforge/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>

#include <fcntl.h>
#include <unistd.h>

#include "alignforge/classify.hpp"
#include "alignforge/errors.hpp"
#include "alignforge/hash.hpp"
#include "alignforge/prompts.hpp"
#include "alignforge/quality.hpp"

namespace fs = std::filesystem;

namespace alignforge {

void TrainPlan::validate() const {
    if (method != "sft" && method != "kto")
        throw ConfigError("train method must be sft or kto, got: " + method);
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (warmup_ratio < 0.0 || warmup_ratio >= 1.0)
        throw ConfigError("warmup_ratio must be in [0, 1)");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (gradient_accumulation < 1) throw ConfigError("gradient_accumulation must be >= 1");
    if (scheduler != "cosine") throw ConfigError("scheduler must be cosine, got: " + scheduler);
    if (dataset_path.empty()) throw ConfigError("dataset path must be set");
}

json TrainPlan::to_json() const {
    json j;
    j["method"] = method;
    j["learning_rate"] = learning_rate;
    j["batch_size"] = batch_size;
    j["gradient_accumulation"] = gradient_accumulation;
    j["warmup_ratio"] = warmup_ratio;
    j["scheduler"] = scheduler;
    j["dataset"] = dataset_path;
    return j;
}

TrainPlan train_preset(const std::string& preset, const std::string& dataset_path) {
    TrainPlan plan;
    plan.dataset_path = dataset_path;
    if (preset == "sft-s1") {
        plan.method = "sft";
        plan.learning_rate = 5e-8;
    } else if (preset == "kto-s2") {
        plan.method = "kto";
        plan.learning_rate = 1e-8;
    } else if (preset == "kto-s3") {
        plan.method = "kto";
        plan.learning_rate = 3e-8;
    } else {
        throw ConfigError("unknown preset: " + preset + " (expected sft-s1, kto-s2 or kto-s3)");
    }
    return plan;
}

void emit_train_config(const TrainPlan& plan, const std::string& out_path) {
    plan.validate();
    write_json_file(out_path, plan.to_json());
}

PipelineConfig PipelineConfig::from_json(const json& j) {
    PipelineConfig cfg;
    if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
    if (j.contains("work_dir")) cfg.work_dir = j.at("work_dir").get<std::string>();

    if (j.contains("ingest")) {
        const auto& ij = j.at("ingest");
        if (ij.contains("rules_file")) cfg.rules_file = ij.at("rules_file").get<std::string>();
        if (ij.contains("sources")) {
            for (const auto& sj : ij.at("sources")) {
                SourceSpec s;
                s.path = sj.at("path").get<std::string>();
                s.name = sj.at("name").get<std::string>();
                if (sj.contains("mapping")) s.mapping = FieldMapping::from_json(sj.at("mapping"));
                cfg.sources.push_back(std::move(s));
            }
        }
    }
    if (j.contains("dedup")) {
        const auto& dj = j.at("dedup");
        if (dj.contains("k")) cfg.dedup.k = dj.at("k").get<int>();
        if (dj.contains("blocks")) cfg.dedup.blocks = dj.at("blocks").get<int>();
        if (dj.contains("hash_seed")) cfg.dedup_hash_seed = dj.at("hash_seed").get<uint64_t>();
    }
    if (j.contains("classify")) {
        const auto& cj = j.at("classify");
        if (cj.contains("min_freq")) cfg.classify_min_freq = cj.at("min_freq").get<uint64_t>();
        if (cj.contains("denylist_file")) cfg.denylist_file = cj.at("denylist_file").get<std::string>();
    }
    if (j.contains("balance")) {
        const auto& bj = j.at("balance");
        if (bj.contains("cap")) cfg.diversity.per_label_cap = bj.at("cap").get<uint64_t>();
        if (bj.contains("target_total") && !bj.at("target_total").is_null())
            cfg.diversity.target_total = bj.at("target_total").get<uint64_t>();
        if (bj.contains("seed")) cfg.diversity_seed = bj.at("seed").get<uint64_t>();
    }
    if (j.contains("regen")) {
        const auto& rj = j.at("regen");
        if (rj.contains("temperature")) cfg.regen.temperature = rj.at("temperature").get<double>();
        if (rj.contains("max_tokens")) cfg.regen.max_tokens = rj.at("max_tokens").get<int>();
    }
    if (j.contains("providers")) {
        const auto& pj = j.at("providers");
        if (pj.contains("large")) cfg.large_provider = ProviderConfig::from_json(pj.at("large"));
        if (pj.contains("small")) cfg.small_provider = ProviderConfig::from_json(pj.at("small"));
        if (pj.contains("judge")) cfg.judge_provider = ProviderConfig::from_json(pj.at("judge"));
        if (pj.contains("scorer")) cfg.scorer_provider = ProviderConfig::from_json(pj.at("scorer"));
    }
    if (j.contains("select")) {
        const auto& sj = j.at("select");
        if (sj.contains("max_ppl") && !sj.at("max_ppl").is_null())
            cfg.select.max_ppl = sj.at("max_ppl").get<double>();
        if (sj.contains("ratio")) parse_ratio(sj.at("ratio").get<std::string>(), cfg.select);
        if (sj.contains("sft_target") && !sj.at("sft_target").is_null())
            cfg.select.sft_target = sj.at("sft_target").get<uint64_t>();
        if (sj.contains("kto_target") && !sj.at("kto_target").is_null())
            cfg.select.kto_target = sj.at("kto_target").get<uint64_t>();
        if (sj.contains("allow_unsafe_negatives"))
            cfg.select.allow_unsafe_negatives = sj.at("allow_unsafe_negatives").get<bool>();
        if (sj.contains("seed")) cfg.select_seed = sj.at("seed").get<uint64_t>();
    }
    return cfg;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
    return from_json(read_json_file(path));
}

uint64_t stage_seed(uint64_t global_seed, const std::string& stage) {
    return murmur64(stage, global_seed);
}

const std::vector<std::string>& stage_chain() {
    static const std::vector<std::string> chain = {
        "ingest", "dedup", "classify", "balance", "regen", "featurize", "select",
    };
    return chain;
}

json StageManifest::to_json() const {
    json j;
    j["stage"] = stage;
    j["input_hashes"] = input_hashes;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["input_records"] = input_records;
    j["output_records"] = output_records;
    j["outputs"] = outputs;
    j["wall_time_ms"] = wall_time_ms;
    j["version"] = version;
    return j;
}

StageManifest StageManifest::from_json(const json& j) {
    StageManifest m;
    m.stage = j.at("stage").get<std::string>();
    m.input_hashes = j.at("input_hashes").get<std::map<std::string, std::string>>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.seed = j.at("seed").get<uint64_t>();
    m.input_records = j.at("input_records").get<uint64_t>();
    m.output_records = j.at("output_records").get<uint64_t>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.wall_time_ms = j.at("wall_time_ms").get<double>();
    m.version = j.at("version").get<std::string>();
    return m;
}

bool StageManifest::matches(const StageManifest& other) const {
    return stage == other.stage && input_hashes == other.input_hashes &&
           config_hash == other.config_hash && seed == other.seed && version == other.version;
}

namespace stage_files {

namespace {
std::string sanitize(const std::string& name) {
    std::string out;
    for (char c : name) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                  c == '-' || c == '_' || c == '.';
        out += ok ? c : '_';
    }
    return out;
}
} // namespace

std::string ingest_samples(size_t source_index, const std::string& source_name) {
    return "ingest/" + std::to_string(source_index) + "_" + sanitize(source_name) + ".samples.jsonl";
}

std::string ingest_manifest(size_t source_index, const std::string& source_name) {
    return "ingest/" + std::to_string(source_index) + "_" + sanitize(source_name) + ".manifest.json";
}

} // namespace stage_files

namespace {

// Exclusive work_dir lock; one pipeline instance per work_dir.
class WorkDirLock {
  public:
    explicit WorkDirLock(const std::string& work_dir) : path_(work_dir + "/.lock") {
        fs::create_directories(work_dir);
        fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd_ < 0)
            throw Error("work_dir is locked by another pipeline instance (" + path_ +
                        " exists); remove it if the previous run crashed");
        std::string pid = std::to_string(::getpid()) + "\n";
        [[maybe_unused]] auto n = ::write(fd_, pid.data(), pid.size());
    }
    ~WorkDirLock() {
        if (fd_ >= 0) {
            ::close(fd_);
            ::unlink(path_.c_str());
        }
    }
    WorkDirLock(const WorkDirLock&) = delete;
    WorkDirLock& operator=(const WorkDirLock&) = delete;

  private:
    std::string path_;
    int fd_ = -1;
};

// The semantic identity of a provider: fields that change its outputs.
json provider_identity(const ProviderConfig& cfg) {
    json j;
    j["kind"] = cfg.kind;
    j["endpoint"] = cfg.endpoint;
    j["model"] = cfg.model;
    j["seed"] = cfg.seed;
    return j;
}

struct RunContext {
    const PipelineConfig& cfg;
    std::string work_dir;
    std::map<std::string, std::shared_ptr<Provider>> providers;
    std::map<std::string, std::shared_ptr<CachingProvider>> caches;

    std::string abs(const std::string& rel) const { return work_dir + "/" + rel; }

    Provider& provider(const std::string& role) {
        auto it = providers.find(role);
        if (it != providers.end()) return *it->second;
        const ProviderConfig* pc = nullptr;
        if (role == "large") pc = &cfg.large_provider;
        else if (role == "small") pc = &cfg.small_provider;
        else if (role == "judge") pc = &cfg.judge_provider;
        else pc = &cfg.scorer_provider;
        auto p = make_provider(*pc);
        if (auto caching = std::dynamic_pointer_cast<CachingProvider>(p))
            caches.emplace(role, caching);
        providers.emplace(role, p);
        return *p;
    }

    int provider_workers(const ProviderConfig& a) const { return a.max_in_flight; }
    int provider_workers(const ProviderConfig& a, const ProviderConfig& b) const {
        return std::min(a.max_in_flight, b.max_in_flight);
    }
};

struct StagePlan {
    std::string name;
    // input path -> producing stage ("" for external files)
    std::vector<std::pair<std::string, std::string>> inputs;
    std::vector<std::string> outputs; // relative to work_dir
    json config;                      // effective stage config for hashing
    uint64_t seed = 0;
    // executes the stage, returns (input_records, output_records)
    std::function<std::pair<uint64_t, uint64_t>(RunContext&)> run;
};

uint64_t effective_dedup_seed(const PipelineConfig& cfg) {
    return cfg.dedup_hash_seed.value_or(stage_seed(cfg.seed, "dedup"));
}

std::vector<StagePlan> build_plans(const PipelineConfig& cfg) {
    std::vector<StagePlan> plans;

    // ingest
    {
        StagePlan p;
        p.name = "ingest";
        json sources = json::array();
        for (size_t i = 0; i < cfg.sources.size(); i++) {
            const auto& s = cfg.sources[i];
            p.inputs.emplace_back(s.path, "");
            sources.push_back({{"name", s.name}, {"mapping", s.mapping.to_json()}});
            p.outputs.push_back(stage_files::ingest_samples(i, s.name));
            p.outputs.push_back(stage_files::ingest_manifest(i, s.name));
        }
        if (!cfg.rules_file.empty()) p.inputs.emplace_back(cfg.rules_file, "");
        p.config = {{"sources", sources}, {"rules_file", cfg.rules_file}};
        p.seed = stage_seed(cfg.seed, "ingest");
        p.run = [&cfg](RunContext& ctx) {
            RuleSet rules;
            if (!cfg.rules_file.empty()) rules = RuleSet::load(cfg.rules_file);
            uint64_t in = 0, out = 0;
            for (size_t i = 0; i < cfg.sources.size(); i++) {
                const auto& s = cfg.sources[i];
                JsonlWriter w(ctx.abs(stage_files::ingest_samples(i, s.name)));
                auto manifest = ingest_file(s.path, s.name, s.mapping, rules,
                                            [&w](Sample&& smp) { w.write(smp.to_json()); });
                w.close();
                write_json_file(ctx.abs(stage_files::ingest_manifest(i, s.name)), manifest.to_json());
                in += manifest.record_count;
                out += manifest.accepted;
            }
            return std::make_pair(in, out);
        };
        plans.push_back(std::move(p));
    }

    // dedup
    {
        StagePlan p;
        p.name = "dedup";
        for (size_t i = 0; i < cfg.sources.size(); i++)
            p.inputs.emplace_back(stage_files::ingest_samples(i, cfg.sources[i].name), "ingest");
        DedupConfig effective = cfg.dedup;
        effective.hash_seed = effective_dedup_seed(cfg);
        p.config = {{"k", effective.k},
                    {"blocks", effective.effective_blocks()},
                    {"hash_seed", effective.hash_seed}};
        p.seed = effective.hash_seed;
        p.outputs = {stage_files::kDedupKept, stage_files::kDedupDropped};
        p.run = [&cfg, effective](RunContext& ctx) {
            Deduper dd(effective);
            JsonlWriter kept(ctx.abs(stage_files::kDedupKept));
            JsonlWriter dropped(ctx.abs(stage_files::kDedupDropped));
            uint64_t in = 0, out = 0;
            for (size_t i = 0; i < cfg.sources.size(); i++) {
                JsonlReader r(ctx.abs(stage_files::ingest_samples(i, cfg.sources[i].name)));
                while (auto doc = r.next()) {
                    in++;
                    Sample smp = Sample::from_json(*doc);
                    if (auto drop = dd.feed(smp)) {
                        dropped.write(drop->to_json());
                    } else {
                        kept.write(*doc);
                        out++;
                    }
                }
            }
            kept.close();
            dropped.close();
            return std::make_pair(in, out);
        };
        plans.push_back(std::move(p));
    }

    // classify
    {
        StagePlan p;
        p.name = "classify";
        p.inputs.emplace_back(stage_files::kDedupKept, "dedup");
        if (!cfg.denylist_file.empty()) p.inputs.emplace_back(cfg.denylist_file, "");
        p.config = {{"min_freq", cfg.classify_min_freq},
                    {"denylist_file", cfg.denylist_file},
                    {"judge", provider_identity(cfg.judge_provider)}};
        p.seed = stage_seed(cfg.seed, "classify");
        p.outputs = {stage_files::kLabeled, stage_files::kLabelStats};
        p.run = [&cfg](RunContext& ctx) {
            std::vector<Sample> samples;
            JsonlReader r(ctx.abs(stage_files::kDedupKept));
            while (auto doc = r.next()) samples.push_back(Sample::from_json(*doc));

            auto labeled = classify_all(samples, ctx.provider("judge"),
                                        cfg.judge_provider.max_in_flight);
            std::set<std::string> denylist;
            if (!cfg.denylist_file.empty()) denylist = load_denylist(cfg.denylist_file);
            LabelStats stats;
            auto kept = prune_labels(labeled, cfg.classify_min_freq, denylist, &stats);

            JsonlWriter w(ctx.abs(stage_files::kLabeled));
            for (const auto& ls : kept) w.write(ls.to_json());
            w.close();
            write_json_file(ctx.abs(stage_files::kLabelStats), stats.to_json());
            return std::make_pair(uint64_t(samples.size()), uint64_t(kept.size()));
        };
        plans.push_back(std::move(p));
    }

    // balance
    {
        StagePlan p;
        p.name = "balance";
        p.inputs.emplace_back(stage_files::kLabeled, "classify");
        DiversityConfig effective = cfg.diversity;
        effective.seed = cfg.diversity_seed.value_or(stage_seed(cfg.seed, "balance"));
        p.config = {{"cap", effective.per_label_cap},
                    {"target_total", effective.target_total ? json(*effective.target_total) : json(nullptr)},
                    {"seed", effective.seed}};
        p.seed = effective.seed;
        p.outputs = {stage_files::kBalanced, stage_files::kBalanceReport};
        p.run = [effective](RunContext& ctx) {
            std::vector<LabeledSample> in;
            JsonlReader r(ctx.abs(stage_files::kLabeled));
            while (auto doc = r.next()) in.push_back(LabeledSample::from_json(*doc));

            BalanceReport report;
            auto kept = balance(in, effective, &report);

            JsonlWriter w(ctx.abs(stage_files::kBalanced));
            for (const auto& ls : kept) w.write(ls.to_json());
            w.close();
            write_json_file(ctx.abs(stage_files::kBalanceReport), report.to_json());
            return std::make_pair(uint64_t(in.size()), uint64_t(kept.size()));
        };
        plans.push_back(std::move(p));
    }

    // regen
    {
        StagePlan p;
        p.name = "regen";
        p.inputs.emplace_back(stage_files::kBalanced, "balance");
        p.config = {{"temperature", cfg.regen.temperature},
                    {"max_tokens", cfg.regen.max_tokens},
                    {"large", provider_identity(cfg.large_provider)},
                    {"small", provider_identity(cfg.small_provider)}};
        p.seed = stage_seed(cfg.seed, "regen");
        p.outputs = {stage_files::kEnriched};
        p.run = [&cfg](RunContext& ctx) {
            std::vector<LabeledSample> in;
            JsonlReader r(ctx.abs(stage_files::kBalanced));
            while (auto doc = r.next()) in.push_back(LabeledSample::from_json(*doc));

            auto enriched = regenerate_all(
                in, ctx.provider("large"), ctx.provider("small"), cfg.regen,
                ctx.provider_workers(cfg.large_provider, cfg.small_provider));

            JsonlWriter w(ctx.abs(stage_files::kEnriched));
            for (const auto& e : enriched) w.write(e.to_json());
            w.close();
            return std::make_pair(uint64_t(in.size()), uint64_t(enriched.size()));
        };
        plans.push_back(std::move(p));
    }

    // featurize
    {
        StagePlan p;
        p.name = "featurize";
        p.inputs.emplace_back(stage_files::kEnriched, "regen");
        p.config = {{"judge", provider_identity(cfg.judge_provider)},
                    {"scorer", provider_identity(cfg.scorer_provider)},
                    {"safety_rubric", prompts::kSafetyRubricVersion},
                    {"quality_rubric", prompts::kQualityRubricVersion}};
        p.seed = stage_seed(cfg.seed, "featurize");
        p.outputs = {stage_files::kFeaturized};
        p.run = [&cfg](RunContext& ctx) {
            std::vector<EnrichedSample> in;
            JsonlReader r(ctx.abs(stage_files::kEnriched));
            while (auto doc = r.next()) in.push_back(EnrichedSample::from_json(*doc));

            auto out = featurize_all(std::move(in), ctx.provider("judge"), ctx.provider("scorer"),
                                     ctx.provider_workers(cfg.judge_provider, cfg.scorer_provider));

            JsonlWriter w(ctx.abs(stage_files::kFeaturized));
            for (const auto& e : out) w.write(e.to_json());
            w.close();
            return std::make_pair(uint64_t(out.size()), uint64_t(out.size()));
        };
        plans.push_back(std::move(p));
    }

    // select
    {
        StagePlan p;
        p.name = "select";
        p.inputs.emplace_back(stage_files::kFeaturized, "featurize");
        SelectionConfig effective = cfg.select;
        effective.seed = cfg.select_seed.value_or(stage_seed(cfg.seed, "select"));
        p.config = {{"max_ppl", effective.max_ppl ? json(*effective.max_ppl) : json(nullptr)},
                    {"ratio", std::to_string(effective.ratio_pos) + ":" + std::to_string(effective.ratio_neg)},
                    {"seed", effective.seed},
                    {"sft_target", effective.sft_target ? json(*effective.sft_target) : json(nullptr)},
                    {"kto_target", effective.kto_target ? json(*effective.kto_target) : json(nullptr)},
                    {"allow_unsafe_negatives", effective.allow_unsafe_negatives}};
        p.seed = effective.seed;
        p.outputs = {stage_files::kSft, stage_files::kSftFeatures, stage_files::kKto,
                     stage_files::kSelectReport};
        p.run = [effective](RunContext& ctx) {
            std::vector<EnrichedSample> in;
            JsonlReader r(ctx.abs(stage_files::kFeaturized));
            while (auto doc = r.next()) in.push_back(EnrichedSample::from_json(*doc));

            auto result = build_selection(in, effective);

            JsonlWriter sft(ctx.abs(stage_files::kSft));
            JsonlWriter sft_feat(ctx.abs(stage_files::kSftFeatures));
            for (const auto& rec : result.sft) {
                sft.write({{"instruction", rec.instruction}, {"output", rec.reply}});
                sft_feat.write({{"id", rec.id},
                                {"instruction", rec.instruction},
                                {"output", rec.reply},
                                {"source", to_string(rec.source)},
                                {"label", rec.label},
                                {"features", rec.features.to_json()}});
            }
            sft.close();
            sft_feat.close();

            JsonlWriter kto(ctx.abs(stage_files::kKto));
            for (const auto& rec : result.kto)
                kto.write({{"instruction", rec.instruction}, {"output", rec.reply}, {"tag", rec.tag}});
            kto.close();

            write_json_file(ctx.abs(stage_files::kSelectReport), result.report.to_json());
            return std::make_pair(uint64_t(in.size()),
                                  uint64_t(result.sft.size() + result.kto.size()));
        };
        plans.push_back(std::move(p));
    }

    return plans;
}

} // namespace

PipelineRunStats run_pipeline(const PipelineConfig& cfg, const std::vector<std::string>& stages) {
    if (cfg.work_dir.empty()) throw ConfigError("work_dir must be set");

    // validate the requested subset against the canonical chain before any work
    const auto& chain = stage_chain();
    std::vector<size_t> positions;
    for (const auto& s : stages) {
        auto it = std::find(chain.begin(), chain.end(), s);
        if (it == chain.end()) throw ConfigError("unknown stage: " + s);
        positions.push_back(size_t(it - chain.begin()));
    }
    for (size_t i = 1; i < positions.size(); i++)
        if (positions[i] <= positions[i - 1])
            throw ConfigError("stages out of order: " + stages[i] + " cannot follow " +
                              stages[i - 1]);

    WorkDirLock lock(cfg.work_dir);
    fs::create_directories(cfg.work_dir + "/manifests");

    RunContext ctx{cfg, cfg.work_dir, {}, {}};
    auto plans = build_plans(cfg);

    PipelineRunStats stats;
    for (const auto& want : stages) {
        auto pit = std::find_if(plans.begin(), plans.end(),
                                [&](const StagePlan& p) { return p.name == want; });
        StagePlan& plan = *pit;

        // resolve inputs, checking that predecessors have produced them
        StageManifest manifest;
        manifest.stage = plan.name;
        manifest.version = kToolVersion;
        manifest.seed = plan.seed;
        manifest.config_hash = hash128_hex(plan.config.dump());
        for (const auto& [rel, producer] : plan.inputs) {
            std::string path = producer.empty() ? rel : ctx.abs(rel);
            if (!fs::exists(path)) {
                if (producer.empty())
                    throw Error("input file missing: " + path);
                throw Error("missing output of stage '" + producer + "': " + path +
                            " (run that stage first)");
            }
            manifest.input_hashes[rel] = file_hash_hex(path);
        }
        manifest.outputs = plan.outputs;

        // skip when the recorded manifest matches and outputs are present
        std::string manifest_path = ctx.abs("manifests/" + plan.name + ".json");
        bool skip = false;
        if (fs::exists(manifest_path)) {
            try {
                auto prev = StageManifest::from_json(read_json_file(manifest_path));
                bool outputs_ok = true;
                for (const auto& out : prev.outputs)
                    if (!fs::exists(ctx.abs(out))) outputs_ok = false;
                skip = outputs_ok && prev.matches(manifest);
                if (skip) {
                    stats.stages.push_back({plan.name, true, prev.input_records,
                                            prev.output_records, 0.0});
                }
            } catch (const std::exception&) {
                skip = false; // unreadable manifest -> rerun
            }
        }
        if (skip) continue;

        auto t0 = std::chrono::steady_clock::now();
        auto [in_records, out_records] = plan.run(ctx);
        auto t1 = std::chrono::steady_clock::now();

        manifest.input_records = in_records;
        manifest.output_records = out_records;
        manifest.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        write_json_file(manifest_path, manifest.to_json());

        stats.stages.push_back({plan.name, false, in_records, out_records, manifest.wall_time_ms});
    }

    for (const auto& [_, p] : ctx.providers) stats.provider_backend_calls += p->backend_calls();
    for (const auto& [_, c] : ctx.caches) stats.provider_cache_hits += c->cache_hits();
    return stats;
}

PipelineRunStats run_pipeline(const PipelineConfig& cfg) {
    return run_pipeline(cfg, stage_chain());
}

} // namespace alignforge

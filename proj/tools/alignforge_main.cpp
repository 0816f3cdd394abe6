#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "alignforge/errors.hpp"
#include "alignforge/fuse.hpp"
#include "alignforge/pipeline.hpp"

using namespace alignforge;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::string work_dir;
    std::string provider_kind; // overrides all provider kinds when set
    std::optional<uint64_t> seed;
};

PipelineConfig load_config(const GlobalOpts& g) {
    PipelineConfig cfg;
    if (!g.config_path.empty()) cfg = PipelineConfig::load(g.config_path);
    if (!g.work_dir.empty()) cfg.work_dir = g.work_dir;
    if (g.seed) cfg.seed = *g.seed;
    if (!g.provider_kind.empty()) {
        cfg.large_provider.kind = g.provider_kind;
        cfg.small_provider.kind = g.provider_kind;
        cfg.judge_provider.kind = g.provider_kind;
        cfg.scorer_provider.kind = g.provider_kind;
    }
    return cfg;
}

void print_stats(const PipelineRunStats& stats) {
    for (const auto& s : stats.stages) {
        if (s.skipped)
            std::printf("%-10s skipped (unchanged), %llu -> %llu records\n", s.stage.c_str(),
                        (unsigned long long)s.input_records, (unsigned long long)s.output_records);
        else
            std::printf("%-10s %llu -> %llu records in %.1f ms\n", s.stage.c_str(),
                        (unsigned long long)s.input_records, (unsigned long long)s.output_records,
                        s.wall_time_ms);
    }
    std::printf("provider calls: %llu backend, %llu cache hits\n",
                (unsigned long long)stats.provider_backend_calls,
                (unsigned long long)stats.provider_cache_hits);
}

int run_stages(const PipelineConfig& cfg, const std::vector<std::string>& stages) {
    auto stats = run_pipeline(cfg, stages);
    print_stats(stats);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"alignforge — alignment dataset construction and checkpoint fusion toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "pipeline config JSON");
    app.add_option("--work-dir", g.work_dir, "pipeline working directory");
    app.add_option("--provider", g.provider_kind, "override all provider kinds (stub|http)")
        ->check(CLI::IsMember({"stub", "http"}));
    uint64_t seed_opt = 0;
    auto* seed_flag = app.add_option("--seed", seed_opt, "global pipeline seed");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "normalize raw instruction files into Samples");
    std::string ing_source = "unknown";
    std::string ing_mapping;
    std::string ing_rules;
    std::vector<std::string> ing_files;
    ingest->add_option("--source", ing_source, "source dataset name");
    ingest->add_option("--mapping", ing_mapping, "field mapping config JSON");
    ingest->add_option("--rules", ing_rules, "category rule set JSON");
    ingest->add_option("files", ing_files, "line-delimited JSON input files");

    // dedup
    auto* dedup = app.add_subcommand("dedup", "near-duplicate removal over instructions");
    int dd_k = -1;
    int dd_blocks = 0;
    uint64_t dd_seed = 0;
    auto* dd_k_opt = dedup->add_option("--k", dd_k, "Hamming tolerance (default 3)");
    dedup->add_option("--blocks", dd_blocks, "index block count (default k+1)");
    auto* dd_seed_opt = dedup->add_option("--hash-seed", dd_seed, "token hash seed");

    // classify
    auto* classify = app.add_subcommand("classify", "LLM secondary classification + label pruning");
    uint64_t cl_min_freq = 0;
    std::string cl_denylist;
    auto* cl_min_opt = classify->add_option("--min-freq", cl_min_freq, "minimum label frequency (default 10)");
    auto* cl_deny_opt = classify->add_option("--denylist", cl_denylist, "label denylist file");

    // balance
    auto* balance = app.add_subcommand("balance", "label distribution balancing by capping");
    uint64_t ba_cap = 0;
    uint64_t ba_target = 0;
    uint64_t ba_seed = 0;
    auto* ba_cap_opt = balance->add_option("--cap", ba_cap, "per-label cap Q");
    auto* ba_target_opt = balance->add_option("--target-total", ba_target, "total size target");
    auto* ba_seed_opt = balance->add_option("--seed", ba_seed, "selection shuffle seed");

    // regen
    auto* regen = app.add_subcommand("regen", "attach large/small model reply candidates");
    std::string rg_large, rg_small;
    regen->add_option("--large", rg_large, "large model provider config JSON");
    regen->add_option("--small", rg_small, "small model provider config JSON");

    // featurize
    auto* featurize = app.add_subcommand("featurize", "perplexity + safety + quality features");
    std::string ft_judge, ft_scorer;
    featurize->add_option("--judge", ft_judge, "judge provider config JSON");
    featurize->add_option("--ppl-provider", ft_scorer, "logprob provider config JSON");

    // select
    auto* select = app.add_subcommand("select", "emit SFT and KTO datasets");
    std::string se_ratio;
    double se_max_ppl = 0.0;
    uint64_t se_seed = 0;
    uint64_t se_sft_target = 0, se_kto_target = 0;
    auto* se_ratio_opt = select->add_option("--ratio", se_ratio, "positive:negative ratio (default 2:1)");
    auto* se_ppl_opt = select->add_option("--max-ppl", se_max_ppl, "perplexity cutoff for positives");
    auto* se_seed_opt = select->add_option("--seed", se_seed, "downsampling seed");
    auto* se_sft_opt = select->add_option("--sft-target", se_sft_target, "SFT record target");
    auto* se_kto_opt = select->add_option("--kto-target", se_kto_target, "KTO record target");

    // fuse
    auto* fuse_cmd = app.add_subcommand("fuse", "weighted checkpoint averaging");
    std::vector<std::string> fu_inputs;
    bool fu_normalize = false;
    std::string fu_out;
    double fu_sweep_step = 0.0;
    std::string fu_out_dir;
    fuse_cmd->add_option("--in", fu_inputs, "checkpoint input as path:coefficient (repeatable)")
        ->required();
    fuse_cmd->add_flag("--normalize", fu_normalize, "rescale coefficients to sum to 1");
    fuse_cmd->add_option("-o,--out", fu_out, "output checkpoint path");
    fuse_cmd->add_option("--sweep-step", fu_sweep_step, "coefficient grid step; emits one output per grid point");
    fuse_cmd->add_option("--out-dir", fu_out_dir, "sweep output directory");

    // train-config
    auto* train = app.add_subcommand("train-config", "emit a training config");
    std::string tc_preset = "custom";
    std::string tc_dataset, tc_out, tc_method;
    double tc_lr = 0.0;
    int tc_batch = 4, tc_accum = 250;
    double tc_warmup = 0.005;
    train->add_option("--preset", tc_preset, "sft-s1 | kto-s2 | kto-s3 | custom");
    train->add_option("--dataset", tc_dataset, "training dataset path")->required();
    train->add_option("-o,--out", tc_out, "output config path")->required();
    train->add_option("--method", tc_method, "custom: sft | kto");
    train->add_option("--lr", tc_lr, "custom: learning rate");
    train->add_option("--batch", tc_batch, "custom: batch size");
    train->add_option("--accum", tc_accum, "custom: gradient accumulation");
    train->add_option("--warmup", tc_warmup, "custom: warmup ratio");

    // run
    auto* run = app.add_subcommand("run", "run all pipeline stages");
    std::string run_stages_csv;
    run->add_option("--stages", run_stages_csv, "comma-separated stage subset, in order");

    CLI11_PARSE(app, argc, argv);
    if (*seed_flag) g.seed = seed_opt;

    try {
        if (*ingest) {
            auto cfg = load_config(g);
            if (!ing_files.empty()) {
                cfg.sources.clear();
                FieldMapping mapping;
                if (!ing_mapping.empty()) mapping = FieldMapping::from_json(read_json_file(ing_mapping));
                for (const auto& f : ing_files) cfg.sources.push_back({f, ing_source, mapping});
            }
            if (!ing_rules.empty()) cfg.rules_file = ing_rules;
            if (cfg.sources.empty()) throw ConfigError("no input files (args or config sources)");
            return run_stages(cfg, {"ingest"});
        }
        if (*dedup) {
            auto cfg = load_config(g);
            if (*dd_k_opt) cfg.dedup.k = dd_k;
            if (dd_blocks > 0) cfg.dedup.blocks = dd_blocks;
            if (*dd_seed_opt) cfg.dedup_hash_seed = dd_seed;
            return run_stages(cfg, {"dedup"});
        }
        if (*classify) {
            auto cfg = load_config(g);
            if (*cl_min_opt) cfg.classify_min_freq = cl_min_freq;
            if (*cl_deny_opt) cfg.denylist_file = cl_denylist;
            return run_stages(cfg, {"classify"});
        }
        if (*balance) {
            auto cfg = load_config(g);
            if (*ba_cap_opt) {
                cfg.diversity.per_label_cap = ba_cap;
                cfg.diversity.target_total.reset();
            }
            if (*ba_target_opt) cfg.diversity.target_total = ba_target;
            if (*ba_seed_opt) cfg.diversity_seed = ba_seed;
            return run_stages(cfg, {"balance"});
        }
        if (*regen) {
            auto cfg = load_config(g);
            if (!rg_large.empty()) cfg.large_provider = ProviderConfig::from_json(read_json_file(rg_large));
            if (!rg_small.empty()) cfg.small_provider = ProviderConfig::from_json(read_json_file(rg_small));
            if (!g.provider_kind.empty()) {
                cfg.large_provider.kind = g.provider_kind;
                cfg.small_provider.kind = g.provider_kind;
            }
            return run_stages(cfg, {"regen"});
        }
        if (*featurize) {
            auto cfg = load_config(g);
            if (!ft_judge.empty()) cfg.judge_provider = ProviderConfig::from_json(read_json_file(ft_judge));
            if (!ft_scorer.empty()) cfg.scorer_provider = ProviderConfig::from_json(read_json_file(ft_scorer));
            if (!g.provider_kind.empty()) {
                cfg.judge_provider.kind = g.provider_kind;
                cfg.scorer_provider.kind = g.provider_kind;
            }
            return run_stages(cfg, {"featurize"});
        }
        if (*select) {
            auto cfg = load_config(g);
            if (*se_ratio_opt) parse_ratio(se_ratio, cfg.select);
            if (*se_ppl_opt) cfg.select.max_ppl = se_max_ppl;
            if (*se_seed_opt) cfg.select_seed = se_seed;
            if (*se_sft_opt) cfg.select.sft_target = se_sft_target;
            if (*se_kto_opt) cfg.select.kto_target = se_kto_target;
            return run_stages(cfg, {"select"});
        }
        if (*fuse_cmd) {
            if (fu_sweep_step > 0.0) {
                if (fu_out_dir.empty()) throw ConfigError("--sweep-step requires --out-dir");
                std::vector<std::string> paths;
                for (const auto& in : fu_inputs) {
                    auto colon = in.rfind(':');
                    paths.push_back(colon == std::string::npos ? in : in.substr(0, colon));
                }
                auto entries = fuse_sweep(paths, fu_sweep_step, fu_out_dir);
                std::printf("wrote %zu fused checkpoints and sweep_report.json to %s\n",
                            entries.size(), fu_out_dir.c_str());
                return 0;
            }
            if (fu_out.empty()) throw ConfigError("fuse requires -o/--out (or --sweep-step)");
            FusionSpec spec;
            spec.normalize = fu_normalize;
            for (const auto& in : fu_inputs) {
                auto colon = in.rfind(':');
                if (colon == std::string::npos)
                    throw ConfigError("--in must look like path:coefficient, got: " + in);
                FusionInput fi;
                fi.path = in.substr(0, colon);
                try {
                    fi.coefficient = std::stod(in.substr(colon + 1));
                } catch (const std::exception&) {
                    throw ConfigError("bad coefficient in: " + in);
                }
                spec.inputs.push_back(std::move(fi));
            }
            Checkpoint fused = fuse(spec);
            save_checkpoint(fused, fu_out);
            std::printf("fused %zu checkpoints -> %s\n", spec.inputs.size(), fu_out.c_str());
            return 0;
        }
        if (*train) {
            TrainPlan plan;
            if (tc_preset == "custom") {
                plan.method = tc_method;
                plan.learning_rate = tc_lr;
                plan.batch_size = tc_batch;
                plan.gradient_accumulation = tc_accum;
                plan.warmup_ratio = tc_warmup;
                plan.dataset_path = tc_dataset;
            } else {
                plan = train_preset(tc_preset, tc_dataset);
            }
            emit_train_config(plan, tc_out);
            std::printf("wrote %s training config (lr %g) to %s\n", plan.method.c_str(),
                        plan.learning_rate, tc_out.c_str());
            return 0;
        }
        if (*run) {
            auto cfg = load_config(g);
            std::vector<std::string> stages;
            if (run_stages_csv.empty()) {
                stages = stage_chain();
            } else {
                std::string rest = run_stages_csv;
                while (!rest.empty()) {
                    auto comma = rest.find(',');
                    stages.push_back(rest.substr(0, comma));
                    if (comma == std::string::npos) break;
                    rest = rest.substr(comma + 1);
                }
            }
            return run_stages(cfg, stages);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

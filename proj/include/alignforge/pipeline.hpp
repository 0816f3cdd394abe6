#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "alignforge/dedup.hpp"
#include "alignforge/diversity.hpp"
#include "alignforge/ingest.hpp"
#include "alignforge/jsonl.hpp"
#include "alignforge/provider.hpp"
#include "alignforge/regen.hpp"
#include "alignforge/select.hpp"

namespace alignforge {

inline constexpr const char* kToolVersion = "alignforge 0.1.0";

// Training plan emitted for the external trainer. The trainer itself is out
// of scope; this config is the hand-off boundary.
struct TrainPlan {
    std::string method;              // sft | kto
    double learning_rate = 0.0;
    int batch_size = 4;
    int gradient_accumulation = 250;
    double warmup_ratio = 0.005;
    std::string scheduler = "cosine";
    std::string dataset_path;

    void validate() const;
    json to_json() const;
};

// Presets: sft-s1 (lr 5e-8), kto-s2 (lr 1e-8), kto-s3 (lr 3e-8); all with
// batch 4, accumulation 250, warmup 0.005, cosine schedule.
TrainPlan train_preset(const std::string& preset, const std::string& dataset_path);

void emit_train_config(const TrainPlan& plan, const std::string& out_path);

struct SourceSpec {
    std::string path;
    std::string name;
    FieldMapping mapping;
};

struct PipelineConfig {
    uint64_t seed = 0;
    std::string work_dir;

    std::vector<SourceSpec> sources;
    std::string rules_file; // optional; empty -> no rules, fallback category only

    DedupConfig dedup;
    std::optional<uint64_t> dedup_hash_seed; // unset -> derived stage seed

    uint64_t classify_min_freq = 10;
    std::string denylist_file;

    DiversityConfig diversity;
    std::optional<uint64_t> diversity_seed;

    RegenConfig regen;
    ProviderConfig large_provider;
    ProviderConfig small_provider;
    ProviderConfig judge_provider;
    ProviderConfig scorer_provider;

    SelectionConfig select;
    std::optional<uint64_t> select_seed;

    static PipelineConfig from_json(const json& j);
    static PipelineConfig load(const std::string& path);
};

// Per-stage seed: hash(global seed, stage name), so stages rerun
// independently yet deterministically.
uint64_t stage_seed(uint64_t global_seed, const std::string& stage);

// Canonical stage order: ingest, dedup, classify, balance, regen,
// featurize, select.
const std::vector<std::string>& stage_chain();

struct StageManifest {
    std::string stage;
    std::map<std::string, std::string> input_hashes; // path -> content hash
    std::string config_hash;
    uint64_t seed = 0;
    uint64_t input_records = 0;
    uint64_t output_records = 0;
    std::vector<std::string> outputs; // paths relative to work_dir
    double wall_time_ms = 0.0;
    std::string version;

    json to_json() const;
    static StageManifest from_json(const json& j);

    // Manifest match = same inputs, config, seed and tool version.
    bool matches(const StageManifest& other) const;
};

struct StageStats {
    std::string stage;
    bool skipped = false;
    uint64_t input_records = 0;
    uint64_t output_records = 0;
    double wall_time_ms = 0.0;
};

struct PipelineRunStats {
    std::vector<StageStats> stages;
    uint64_t provider_backend_calls = 0;
    uint64_t provider_cache_hits = 0;
};

// Runs the requested stages in order over work_dir. Unchanged stages
// (matching manifest, outputs present) are skipped. A stage whose
// predecessor output is missing fails before any work, naming the stage.
PipelineRunStats run_pipeline(const PipelineConfig& cfg,
                              const std::vector<std::string>& stages);

PipelineRunStats run_pipeline(const PipelineConfig& cfg); // full chain

// Well-known artifact paths inside a work_dir.
namespace stage_files {
std::string ingest_samples(size_t source_index, const std::string& source_name);
std::string ingest_manifest(size_t source_index, const std::string& source_name);
inline constexpr const char* kDedupKept = "dedup/kept.jsonl";
inline constexpr const char* kDedupDropped = "dedup/dropped.jsonl";
inline constexpr const char* kLabeled = "classify/labeled.jsonl";
inline constexpr const char* kLabelStats = "classify/label_stats.json";
inline constexpr const char* kBalanced = "balance/balanced.jsonl";
inline constexpr const char* kBalanceReport = "balance/report.json";
inline constexpr const char* kEnriched = "regen/enriched.jsonl";
inline constexpr const char* kFeaturized = "featurize/featurized.jsonl";
inline constexpr const char* kSft = "select/sft.jsonl";
inline constexpr const char* kSftFeatures = "select/sft_features.jsonl";
inline constexpr const char* kKto = "select/kto.jsonl";
inline constexpr const char* kSelectReport = "select/report.json";
} // namespace stage_files

} // namespace alignforge

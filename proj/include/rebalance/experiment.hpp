#pragma once

// Config-driven experiment runner: ingest -> stratified split ->
// standardize -> sampler grid -> classifier zoo -> top-3 ensemble ->
// holdout metrics -> report table. Resampling touches the training
// partition only; the validation part picks the ensemble and the
// holdout part is scored once.

#include <array>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rebalance/classify.hpp"
#include "rebalance/cleaners.hpp"
#include "rebalance/metrics.hpp"
#include "rebalance/samplers.hpp"
#include "rebalance/texture.hpp"

namespace rebalance {

inline const std::vector<std::string> kSamplerNames = {
    "none",   "smote",       "smote_nc",  "borderline", "svm_smote",
    "adasyn", "smote_tomek", "smote_enn", "mixup",      "stem"};

struct SamplerSpec {
    std::string name = "none";
    SmoteConfig smote{};          // smote, smote_nc, smote_tomek, smote_enn, stem
    BorderlineConfig borderline{};
    SvmSmoteConfig svm{};
    AdasynConfig adasyn{};
    MixupConfig mixup{};          // mixup, stem
    double mixup_target_ratio = 1.0;  // standalone mixup balances to this
    bool remove_both = false;         // smote_tomek endpoint policy
};

struct DatasetSpec {
    std::filesystem::path path;
    std::string label_column;
    std::set<std::string> nominal_columns;
    std::set<std::string> ignore_columns;  // identifier columns to drop on load
};

struct ExperimentConfig {
    DatasetSpec dataset;
    std::array<double, 3> fractions{0.8, 0.1, 0.1};
    std::uint64_t master_seed = 0;
    std::size_t repetitions = 10;
    std::vector<SamplerSpec> samplers;
    std::vector<ClassifierKind> classifiers;
    std::filesystem::path output_dir = "runs/out";
};

// Flat key = value text with [section] headers; '#' starts a comment.
// Sections: [dataset], [split], [run], one [sampler <name>] per grid
// entry and one [classifier <name>] per zoo member. Relative paths
// resolve against the config file's directory.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Dispatch on spec.name; `seed` overrides the spec's own seed so grid
// cells get independent derived streams.
ResampleResult apply_sampler(const SamplerSpec& spec, const Dataset& data,
                             std::span<const std::size_t> train_rows, std::uint64_t seed);

// Standalone mixup as a balancing sampler: same-class convex
// combinations of minority rows until minority/majority reaches
// target_ratio.
ResampleResult mixup_oversample(const Dataset& data, std::span<const std::size_t> rows,
                                const MixupConfig& cfg, double target_ratio);

struct CellOutcome {
    std::string sampler;
    std::size_t rep = 0;
    std::uint64_t sampler_seed = 0;
    bool ok = false;
    std::string error;
    ClassCounts train_before;
    ClassCounts train_after;
    CleanReport clean;
    std::vector<SyntheticRecord> provenance;
    std::vector<std::pair<std::string, double>> validation_auc;  // per classifier
    std::vector<std::string> ensemble_members;                   // descending AUC
    std::string ensemble_code;
    ConfusionMatrix holdout_cm;
    MetricsSummary holdout;
    double holdout_auc = 0.0;
    std::vector<RocPoint> holdout_roc;
    std::vector<std::string> warnings;
    double seconds = 0.0;
};

struct TableRow {
    std::string approach;
    double acc = 0.0, auc = 0.0, rec = 0.0, pre = 0.0, f1 = 0.0;
    std::string code;       // modal winning trio across repetitions
    std::size_t ok_reps = 0;
    std::size_t total_reps = 0;
};

struct RunManifest {
    ExperimentConfig config;
    std::vector<std::pair<std::string, std::uint64_t>> subseeds;
    std::vector<CellOutcome> cells;  // sampler-major, then repetition
    std::vector<TableRow> table;
    double total_seconds = 0.0;

    bool any_failed() const;
};

// Runs the full grid and writes manifest.json, results.csv, results.md
// and per-sampler ROC point lists into config.output_dir.
RunManifest run_experiment(const ExperimentConfig& cfg);

struct Report {
    std::string markdown;
    std::string csv;
};

// Deterministic column order: Approach, Acc, AUC, Rec, Pre, F1, CL.
Report emit_report(const RunManifest& manifest);

void save_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest load_manifest(const std::filesystem::path& path);

enum class TextureMode { segments, full };  // S: one row per band, F: whole image

// Reads `labels_file` (CSV: image,label), loads each PGM from
// image_dir, runs median filter + background suppression + feature
// extraction, and writes a 52-feature CSV consumable by load_csv.
void extract_texture_dataset(const std::filesystem::path& image_dir,
                             const std::filesystem::path& labels_file, TextureMode mode,
                             const TextureConfig& cfg, const std::filesystem::path& out_csv);

// Honors REBALANCE_THREADS when set to a positive integer.
void apply_thread_env();

}  // namespace rebalance

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfml/bde.hpp"
#include "cfml/dataset.hpp"
#include "cfml/metrics.hpp"
#include "cfml/protonet.hpp"

namespace cfml {

/// Everything a run needs, JSON-serializable. Stage seeds are derived from
/// master_seed (data=1, bde=2, pseudo=3, meta=4, eval 1-shot=5, eval
/// 5-shot=6, baseline=7), so a persisted config re-runs bit-identically.
struct ExperimentConfig {
    int schema_version = 1;
    std::uint64_t master_seed = 0;
    std::string out_dir = "run";

    // Data: load from data_path (a gen-data output directory) when set,
    // otherwise generate synthetically and split by coarse class id.
    std::string data_path;
    SynthSpec synth;
    std::vector<int> train_coarse, val_coarse, test_coarse; // all empty = default split

    EncoderConfig encoder; // shared by the embedding and the meta backbone

    BdeConfig bde;
    bool visual_on = true;   // ablation switches zero the corresponding weight
    bool semantic_on = true;
    TrainConfig bde_train;
    AugmentConfig augment;

    int ns_override = 0;          // 0 = mean fine-class size of the validation split
    std::string c2f_embed = "bde"; // "bde" | "pixels"

    MetaTrainConfig meta;

    int eval_n_way = 5;
    int eval_q_query = 15;
    std::size_t eval_episodes = 1000;
};

std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, const std::string& path);

/// FNV-1a 64 over the canonical JSON serialization; stamped into every
/// artifact a run writes.
std::uint64_t config_hash(const ExperimentConfig& cfg);

/// Throws ConfigError on contradictory or unsupported settings.
void validate_config(const ExperimentConfig& cfg);

/// round(mean fine-class size), half up, clamped to at least 2.
int compute_ns_from_validation(const FineDataset& val);

/// Default coarse split for C classes: the last max(1, C/4) ids to test,
/// the max(1, C/8) before them to validation, the rest to train.
void default_split(int num_coarse, std::vector<int>& train, std::vector<int>& val,
                   std::vector<int>& test);

struct RunResult {
    std::string dir;
    std::uint64_t hash = 0;
    int ns_used = 0;
    double pseudo_ari = 0.0; // diagnostic: pseudo vs hidden fine labels
    EvalReport one_shot, five_shot;
};

/// Embedding training -> pseudo-labeling -> meta-training -> evaluation,
/// each stage persisting its artifact under out_dir (data/ bde/ pseudo/
/// meta/ eval/) and resuming from it when present. Errors carry the stage
/// name.
RunResult run_pipeline(const ExperimentConfig& cfg);

/// Baseline that meta-trains directly on coarse classes (no grouping
/// stage) and evaluates on the fine-labeled test split.
RunResult run_baseline_coarse_direct(const ExperimentConfig& cfg);

struct VariantResult {
    std::string name;
    RunResult run;
};

/// Known variants: bde, pixels, coarse-direct, visual-only, semantic-only.
/// Each runs under out_dir/<name>/ with the same master seed.
std::vector<VariantResult> run_compare(const ExperimentConfig& cfg,
                                       const std::vector<std::string>& variants);

/// Aligned text table of variant results ("mean ± ci" in percent).
std::string render_table(const std::vector<VariantResult>& rows);

} // namespace cfml

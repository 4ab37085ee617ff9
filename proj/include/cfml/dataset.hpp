#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfml/numerics.hpp"

namespace cfml {

struct CoarseSample {
    Vector x;
    int coarse_label = 0;

    bool operator==(const CoarseSample&) const = default;
};

/// Coarsely-labeled training data. Fine labels exist only as an evaluation
/// side channel: training code never reads hidden_fine_labels(), and a
/// behavioral audit test checks that permuting them changes nothing
/// downstream.
struct CoarseDataset {
    std::vector<CoarseSample> samples;
    int num_coarse_classes = 0;
    std::size_t input_dim = 0;
    std::uint64_t seed = 0;
    std::string split = "train";

    /// Evaluation-only. Parallel to samples; -1 where absent.
    const std::vector<int>& hidden_fine_labels() const { return hidden_fine_; }

    std::vector<int> hidden_fine_;

    bool operator==(const CoarseDataset&) const = default;
};

struct FineSample {
    Vector x;
    int fine_label = 0;

    bool operator==(const FineSample&) const = default;
};

/// Fine-labeled samples, used for meta-validation and meta-test only.
struct FineDataset {
    std::vector<FineSample> samples;
    int num_fine_classes = 0;
    std::size_t input_dim = 0;
    std::uint64_t seed = 0;
    std::string split = "test";

    bool operator==(const FineDataset&) const = default;
};

/// Synthetic coarse-over-fine Gaussian hierarchy. Spread parameters are
/// expected distances (per-coordinate sigma is spread / sqrt(input_dim)):
/// coarse centers sit at distance ~coarse_spread from the origin, fine
/// centers at ~fine_spread from their coarse center, samples at
/// ~noise_sigma from their fine center.
struct SynthSpec {
    int num_coarse = 12;
    int fine_per_coarse = 4;
    int samples_per_fine = 40;
    std::size_t input_dim = 32;
    double coarse_spread = 6.0;
    double fine_spread = 1.5;
    double noise_sigma = 0.5;
    std::uint64_t seed = 0;
};

/// Deterministic given spec.seed. Fine class ids are globally unique:
/// coarse c, local fine j -> c * fine_per_coarse + j.
CoarseDataset generate_hierarchical(const SynthSpec& spec);

struct MetaSplit {
    CoarseDataset train;
    FineDataset val;
    FineDataset test;
};

/// Partitions coarse classes into train/val/test. Train keeps coarse
/// labels (remapped dense) and carries the hidden fine ids along; val and
/// test expose fine labels (remapped dense per split) and drop coarse ones.
MetaSplit split_meta(const CoarseDataset& dataset,
                     const std::vector<int>& train_coarse,
                     const std::vector<int>& val_coarse,
                     const std::vector<int>& test_coarse);

/// CSV payload (one row per sample: coarse,fine,x_0,...,x_{D-1}; -1 for a
/// hidden/absent label; 17 significant digits) plus a JSON sidecar manifest
/// at csv_path with extension replaced by .json.
void save_dataset(const CoarseDataset& dataset, const std::string& csv_path);
CoarseDataset load_dataset(const std::string& csv_path);

void save_fine_dataset(const FineDataset& dataset, const std::string& csv_path);
FineDataset load_fine_dataset(const std::string& csv_path);

} // namespace cfml

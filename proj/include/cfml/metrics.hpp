#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfml/numerics.hpp"

namespace cfml {

/// Episode evaluation summary. ci95 uses the normal approximation
/// 1.96 * s / sqrt(n) with the sample standard deviation (n-1 in the
/// denominator); a single episode reports ci95 = 0.
struct EvalReport {
    int n_way = 0;
    int k_shot = 0;
    int q_query = 0;
    std::size_t episodes = 0;
    double mean_accuracy = 0.0;
    double ci95 = 0.0;
    std::uint64_t seed = 0;

    /// {"ci95","episodes","k_shot","mean_accuracy","n_way","q_query","seed"}
    /// with sorted keys and shortest round-trip floats, so equal reports
    /// serialize byte-identically.
    std::string to_json() const;
};

enum class KnnWeight {
    Similarity, // raw cosine; negative similarities vote negatively
    ExpTau,     // exp(similarity / tau)
};

struct KnnConfig {
    int k = 200;
    KnnWeight weight = KnnWeight::Similarity;
    double tau = 0.1;
};

/// Weighted kNN over unit embeddings: the min(k, M) most similar training
/// points vote for their label with the configured weight. Neighbor ties
/// break by lowest training index, vote ties by lowest label id.
int weighted_knn_predict(const std::vector<Vector>& train_embeddings,
                         const std::vector<int>& train_labels, const Vector& probe,
                         const KnnConfig& cfg);

/// kNN over many probes, parallel across probes (each output slot is
/// independent, so this matches the serial reference bitwise).
std::vector<int> knn_predict_batch(const std::vector<Vector>& train_embeddings,
                                   const std::vector<int>& train_labels,
                                   const std::vector<Vector>& probes, const KnnConfig& cfg);

namespace ref {
std::vector<int> knn_predict_batch(const std::vector<Vector>& train_embeddings,
                                   const std::vector<int>& train_labels,
                                   const std::vector<Vector>& probes, const KnnConfig& cfg);
} // namespace ref

/// Mean and 95% confidence interval of per-episode accuracies. The caller
/// fills the episode-shape echo fields.
EvalReport accuracy_ci(const std::vector<double>& accuracies);

/// Adjusted Rand Index between two labelings via pair counting; 1 for
/// identical partitions, ~0 for independent ones. When the pair-counting
/// denominator degenerates (both partitions all-singleton or both
/// single-cluster), returns 1 if the partitions are identical up to
/// renaming, else 0.
double adjusted_rand_index(const std::vector<int>& labels_a, const std::vector<int>& labels_b);

} // namespace cfml

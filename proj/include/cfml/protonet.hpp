#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfml/encoder.hpp"
#include "cfml/episodes.hpp"
#include "cfml/metrics.hpp"

namespace cfml {

struct MetaTrainConfig {
    EncoderConfig encoder; // shape for fresh initialization
    int epochs = 30;
    int episodes_per_epoch = 100;
    int n_way = 5;
    int k_shot = 1;
    int q_query = 15;
    double lr = 0.01;
    double momentum = 0.9;
    double weight_decay = 5e-4;
    std::uint64_t seed = 0;
    std::string warm_start; // checkpoint base path; empty = fresh encoder
};

/// Column n = arithmetic mean of the support embeddings labeled n (not
/// re-normalized). Throws EmptyClass if some label in [0, n_way) has no
/// support.
Matrix prototypes(const std::vector<Vector>& support_embeddings,
                  const std::vector<int>& support_labels, int n_way);

/// Softmax over negative squared Euclidean distances -|f - P_n|^2.
Vector classify_query(const Vector& f, const Matrix& protos);

struct EpisodeLoss {
    double value = 0.0;    // mean cross-entropy over all queries
    double accuracy = 0.0; // query argmax hit rate (ties: lowest label)
    Vector grad;           // encoder flat layout
};

/// Cross-entropy of classify_query against episode labels, with the
/// analytic gradient through the prototypes, the l2 normalization, and
/// the encoder.
EpisodeLoss episode_loss(const Encoder& enc, const Episode& ep);

struct MetaTrainResult {
    Encoder encoder;
    std::vector<double> epoch_loss;
    std::vector<double> epoch_accuracy; // train-episode query accuracy
};

/// Episodic SGD with momentum. One sequential rng drives initialization
/// and every episode draw, so results are deterministic given cfg.seed.
MetaTrainResult meta_train(const SamplePool& pool, const MetaTrainConfig& cfg);

/// Per-episode query accuracies over `count` freshly drawn episodes.
/// Episode e runs on the rng derived from (seed, e); episodes are
/// independent, so the parallel version matches the serial reference
/// bitwise.
std::vector<double> eval_episode_accuracies(const Encoder& enc, const SamplePool& pool,
                                            int n_way, int k_shot, int q_query,
                                            std::size_t count, std::uint64_t seed);

namespace ref {
std::vector<double> eval_episode_accuracies(const Encoder& enc, const SamplePool& pool,
                                            int n_way, int k_shot, int q_query,
                                            std::size_t count, std::uint64_t seed);
} // namespace ref

/// accuracy_ci over eval_episode_accuracies, with the episode shape and
/// seed echoed into the report.
EvalReport meta_eval(const Encoder& enc, const SamplePool& pool, int n_way, int k_shot,
                     int q_query, std::size_t count, std::uint64_t seed);

} // namespace cfml

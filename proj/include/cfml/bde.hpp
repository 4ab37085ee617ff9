#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cfml/dataset.hpp"
#include "cfml/encoder.hpp"

namespace cfml {

/// Vector-space augmentation: additive per-coordinate Gaussian noise,
/// random coordinate dropout, global scale jitter. Identity when all three
/// parameters are zero.
struct AugmentConfig {
    double noise_sigma = 0.1;
    double dropout_prob = 0.1;
    double scale_jitter = 0.05;
};

/// Model shape and loss trade-offs of the bi-level embedding.
struct BdeConfig {
    EncoderConfig encoder;
    double tau = 0.1;            // temperature on instance matching only
    double visual_weight = 1.0;  // weight of the instance-discrimination loss
    double semantic_weight = 10.0; // weight of the coarse classification loss
};

/// Optimizer schedule. lr_milestones are (epoch, factor) pairs; from the
/// given epoch on, lr = base_lr * factor (factors apply to base_lr, they do
/// not compound).
struct TrainConfig {
    int epochs = 200;
    int batch_size = 128;
    double base_lr = 0.3;
    std::vector<std::pair<int, double>> lr_milestones{{120, 0.1}, {160, 0.01}};
    double momentum = 0.9;
    double weight_decay = 5e-4;
    std::uint64_t seed = 0;

    // Optional model selection: hold out a fraction of each coarse class,
    // probe embeddings with a weighted kNN on coarse labels every
    // probe_interval epochs, and return the best-scoring snapshot.
    bool model_selection = false;
    double holdout_frac = 0.2;
    int probe_interval = 10;
    int probe_k = 200;
};

/// Trainable state: shared encoder plus the auxiliary bias-free linear
/// classifier over coarse classes (one column per class).
struct BdeParams {
    Encoder encoder;
    Matrix classifier; // embed_dim x num_classes
    double tau = 0.1;
    double visual_weight = 1.0;
    double semantic_weight = 10.0;

    static BdeParams init(const BdeConfig& cfg, int num_classes, SeededRng& rng);

    std::size_t param_count() const;
    /// Flat layout: encoder (w1,b1,w2,b2,w3,b3), then classifier row-major.
    Vector flatten() const;
    void load_flat(const Vector& flat);
    Vector decay_mask() const;
};

Vector encode(const BdeParams& params, const Vector& x);

Vector augment(const Vector& x, const AugmentConfig& cfg, SeededRng& rng);

/// P(i | probe) for every instance column of F: softmax over
/// f_i . probe / tau. Columns of F and the probe must be unit-norm.
Vector instance_match_probs(const Matrix& f_columns, const Vector& probe, double tau);

/// Instance-discrimination loss over a batch: for each instance, the
/// augmented view must be recognized as its original, and every other
/// original must not be recognized as it. Gradients are with respect to
/// the embedding matrices (columns = instances).
struct VisualLoss {
    double value = 0.0;
    Matrix grad_f;      // d loss / d F
    Matrix grad_f_hat;  // d loss / d F_hat
    std::size_t clamp_events = 0; // 1 - P clamped at 1e-12
};
VisualLoss loss_visual(const Matrix& f, const Matrix& f_hat, double tau);

/// Untempered softmax over classifier columns: P(c | x) for a unit
/// embedding f.
Vector class_probs(const Matrix& classifier, const Vector& f);

/// Coarse classification loss: sum over the batch of
/// -log[P(y | x) P(y | x_hat)], i.e. cross-entropy of the original plus
/// cross-entropy of the augmented view.
struct SemanticLoss {
    double value = 0.0;
    Matrix grad_classifier;
    Matrix grad_f;
    Matrix grad_f_hat;
};
SemanticLoss loss_semantic(const Matrix& classifier, const Matrix& f, const Matrix& f_hat,
                           const std::vector<int>& labels);

/// Joint batch loss visual_weight * L_visual + semantic_weight * L_semantic
/// with the full parameter gradient (backpropagated through the l2
/// normalization and the encoder, shared between original and augmented
/// views). Augmentation draws happen sequentially before the parallel
/// phase, so results are bit-stable for any thread count.
struct JointLoss {
    double value = 0.0;
    double visual = 0.0;
    double semantic = 0.0;
    Vector grad; // flat, layout of BdeParams::flatten
    std::size_t clamp_events = 0;
};
JointLoss loss_joint(const BdeParams& params, const std::vector<const Vector*>& batch,
                     const std::vector<int>& labels, const AugmentConfig& aug, SeededRng& rng);

namespace ref {
/// Serial reference of the batch loss kernel, kept for the consistency
/// tests and the benchmark.
JointLoss loss_joint(const BdeParams& params, const std::vector<const Vector*>& batch,
                     const std::vector<int>& labels, const AugmentConfig& aug, SeededRng& rng);
} // namespace ref

struct TrainResult {
    BdeParams params;
    std::vector<double> epoch_loss; // mean batch loss per epoch
    std::size_t clamp_events = 0;
    int selected_epoch = -1;   // set when model_selection picked a snapshot
    double selected_score = 0; // holdout kNN accuracy of the snapshot
};

/// SGD with momentum over shuffled mini-batches; deterministic given
/// cfg.seed. Throws DivergenceDetected when the loss goes non-finite.
TrainResult train_bde(const CoarseDataset& dataset, const BdeConfig& model,
                      const TrainConfig& cfg, const AugmentConfig& aug);

/// Checkpoint: JSON manifest <base>.json plus flat little-endian float64
/// parameters <base>.bin (encoder layers in order, then the classifier).
struct Checkpoint {
    std::string kind = "bde"; // "bde" or "meta"
    BdeConfig model;
    Encoder encoder;
    Matrix classifier; // empty for kind == "meta"
    int epoch = 0;
    std::uint64_t seed = 0;
};
void save_checkpoint(const Checkpoint& ckpt, const std::string& base_path);
Checkpoint load_checkpoint(const std::string& base_path);

} // namespace cfml

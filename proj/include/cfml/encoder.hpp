#pragma once

#include <cstddef>
#include <vector>

#include "cfml/numerics.hpp"

namespace cfml {

struct EncoderConfig {
    std::size_t input_dim = 32;
    std::size_t hidden_dim = 64;
    std::size_t embed_dim = 32;
};

/// Three-layer perceptron input -> hidden -> hidden -> embed with tanh
/// between layers; the output is l2-normalized, so every embedding this
/// produces is unit-norm.
struct Encoder {
    Matrix w1; // hidden x input
    Vector b1;
    Matrix w2; // hidden x hidden
    Vector b2;
    Matrix w3; // embed x hidden
    Vector b3;

    static Encoder init(const EncoderConfig& cfg, SeededRng& rng);

    EncoderConfig config() const {
        return {w1.cols, w1.rows, w3.rows};
    }
    std::size_t input_dim() const { return w1.cols; }
    std::size_t embed_dim() const { return w3.rows; }

    std::size_t param_count() const;
    static std::size_t param_count_for(const EncoderConfig& cfg);

    /// Flat layout: w1, b1, w2, b2, w3, b3 (matrices row-major).
    void flatten_to(double* out) const;
    static Encoder from_flat(const EncoderConfig& cfg, const double* flat);

    /// 1.0 for weight-matrix entries, 0.0 for biases (weight decay skips
    /// biases).
    void fill_decay_mask(double* mask) const;

    bool operator==(const Encoder&) const = default;
};

/// Forward activations kept for the backward pass.
struct EncoderCache {
    Vector a1, a2; // post-tanh hidden activations
    Vector pre;    // pre-normalization output g
    double pre_norm = 0.0;
    Vector f; // unit embedding
};

/// Unit-norm embedding of x. Throws DimensionMismatch on bad input length,
/// ZeroNorm if the pre-normalization activation vanishes.
Vector encode(const Encoder& enc, const Vector& x);

Vector encode_cached(const Encoder& enc, const Vector& x, EncoderCache& cache);

/// Accumulates d(loss)/d(params) into grad_flat (layout as flatten_to)
/// given d(loss)/d(embedding); backpropagates through the l2
/// normalization and all three layers.
void encode_backward(const Encoder& enc, const Vector& x, const EncoderCache& cache,
                     const Vector& df, double* grad_flat);

/// Embeds a batch, parallel across items; slot writes are disjoint so the
/// result is bit-identical to the serial reference.
std::vector<Vector> encode_batch(const Encoder& enc, const std::vector<const Vector*>& xs);

namespace ref {
std::vector<Vector> encode_batch(const Encoder& enc, const std::vector<const Vector*>& xs);
} // namespace ref

} // namespace cfml

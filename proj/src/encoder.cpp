#include "cfml/encoder.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cfml {

namespace {

void xavier_init(Matrix& w, SeededRng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows + w.cols));
    for (double& v : w.data) v = rng.uniform(-limit, limit);
}

// y = W x + b, rows of W dotted sequentially.
void affine(const Matrix& w, const Vector& b, const Vector& x, Vector& y) {
    y.assign(w.rows, 0.0);
    for (std::size_t r = 0; r < w.rows; ++r) {
        double s = b[r];
        const double* row = w.data.data() + r * w.cols;
        for (std::size_t c = 0; c < w.cols; ++c) s += row[c] * x[c];
        y[r] = s;
    }
}

void tanh_inplace(Vector& v) {
    for (double& x : v) x = std::tanh(x);
}

} // namespace

Encoder Encoder::init(const EncoderConfig& cfg, SeededRng& rng) {
    if (cfg.input_dim == 0 || cfg.hidden_dim == 0 || cfg.embed_dim == 0)
        throw Error(ErrorCode::InvalidSpec, "encoder dims must be positive");
    Encoder enc;
    enc.w1 = Matrix(cfg.hidden_dim, cfg.input_dim);
    enc.b1.assign(cfg.hidden_dim, 0.0);
    enc.w2 = Matrix(cfg.hidden_dim, cfg.hidden_dim);
    enc.b2.assign(cfg.hidden_dim, 0.0);
    enc.w3 = Matrix(cfg.embed_dim, cfg.hidden_dim);
    enc.b3.assign(cfg.embed_dim, 0.0);
    xavier_init(enc.w1, rng);
    xavier_init(enc.w2, rng);
    xavier_init(enc.w3, rng);
    return enc;
}

std::size_t Encoder::param_count() const {
    return w1.data.size() + b1.size() + w2.data.size() + b2.size() +
           w3.data.size() + b3.size();
}

std::size_t Encoder::param_count_for(const EncoderConfig& cfg) {
    return cfg.hidden_dim * cfg.input_dim + cfg.hidden_dim + cfg.hidden_dim * cfg.hidden_dim +
           cfg.hidden_dim + cfg.embed_dim * cfg.hidden_dim + cfg.embed_dim;
}

void Encoder::flatten_to(double* out) const {
    std::size_t k = 0;
    for (double v : w1.data) out[k++] = v;
    for (double v : b1) out[k++] = v;
    for (double v : w2.data) out[k++] = v;
    for (double v : b2) out[k++] = v;
    for (double v : w3.data) out[k++] = v;
    for (double v : b3) out[k++] = v;
}

Encoder Encoder::from_flat(const EncoderConfig& cfg, const double* flat) {
    Encoder enc;
    enc.w1 = Matrix(cfg.hidden_dim, cfg.input_dim);
    enc.b1.assign(cfg.hidden_dim, 0.0);
    enc.w2 = Matrix(cfg.hidden_dim, cfg.hidden_dim);
    enc.b2.assign(cfg.hidden_dim, 0.0);
    enc.w3 = Matrix(cfg.embed_dim, cfg.hidden_dim);
    enc.b3.assign(cfg.embed_dim, 0.0);
    std::size_t k = 0;
    for (double& v : enc.w1.data) v = flat[k++];
    for (double& v : enc.b1) v = flat[k++];
    for (double& v : enc.w2.data) v = flat[k++];
    for (double& v : enc.b2) v = flat[k++];
    for (double& v : enc.w3.data) v = flat[k++];
    for (double& v : enc.b3) v = flat[k++];
    return enc;
}

void Encoder::fill_decay_mask(double* mask) const {
    std::size_t k = 0;
    for (std::size_t i = 0; i < w1.data.size(); ++i) mask[k++] = 1.0;
    for (std::size_t i = 0; i < b1.size(); ++i) mask[k++] = 0.0;
    for (std::size_t i = 0; i < w2.data.size(); ++i) mask[k++] = 1.0;
    for (std::size_t i = 0; i < b2.size(); ++i) mask[k++] = 0.0;
    for (std::size_t i = 0; i < w3.data.size(); ++i) mask[k++] = 1.0;
    for (std::size_t i = 0; i < b3.size(); ++i) mask[k++] = 0.0;
}

Vector encode_cached(const Encoder& enc, const Vector& x, EncoderCache& cache) {
    if (x.size() != enc.input_dim())
        throw Error(ErrorCode::DimensionMismatch, "encode: input length");
    affine(enc.w1, enc.b1, x, cache.a1);
    tanh_inplace(cache.a1);
    affine(enc.w2, enc.b2, cache.a1, cache.a2);
    tanh_inplace(cache.a2);
    affine(enc.w3, enc.b3, cache.a2, cache.pre);
    cache.pre_norm = norm(cache.pre);
    if (!(cache.pre_norm > kNormEpsilon))
        throw Error(ErrorCode::ZeroNorm, "encode: pre-normalization output vanished");
    cache.f.assign(cache.pre.size(), 0.0);
    for (std::size_t i = 0; i < cache.pre.size(); ++i)
        cache.f[i] = cache.pre[i] / cache.pre_norm;
    return cache.f;
}

Vector encode(const Encoder& enc, const Vector& x) {
    EncoderCache cache;
    return encode_cached(enc, x, cache);
}

namespace {

// Offsets of each parameter block in the flat layout.
struct FlatOffsets {
    std::size_t w1, b1, w2, b2, w3, b3;
};

FlatOffsets offsets(const Encoder& enc) {
    FlatOffsets o{};
    o.w1 = 0;
    o.b1 = o.w1 + enc.w1.data.size();
    o.w2 = o.b1 + enc.b1.size();
    o.b2 = o.w2 + enc.w2.data.size();
    o.w3 = o.b2 + enc.b2.size();
    o.b3 = o.w3 + enc.w3.data.size();
    return o;
}

} // namespace

void encode_backward(const Encoder& enc, const Vector& x, const EncoderCache& cache,
                     const Vector& df, double* grad_flat) {
    const FlatOffsets off = offsets(enc);
    const std::size_t d = enc.embed_dim();
    const std::size_t h = enc.w1.rows;

    // Through l2 normalization: dg = (df - f (f . df)) / |g|
    double fdf = 0.0;
    for (std::size_t i = 0; i < d; ++i) fdf += cache.f[i] * df[i];
    Vector dg(d);
    for (std::size_t i = 0; i < d; ++i)
        dg[i] = (df[i] - cache.f[i] * fdf) / cache.pre_norm;

    // Layer 3: pre = w3 a2 + b3
    Vector da2(h, 0.0);
    for (std::size_t r = 0; r < d; ++r) {
        const double g = dg[r];
        double* wrow = grad_flat + off.w3 + r * h;
        const double* w3row = enc.w3.data.data() + r * h;
        for (std::size_t c = 0; c < h; ++c) {
            wrow[c] += g * cache.a2[c];
            da2[c] += w3row[c] * g;
        }
        grad_flat[off.b3 + r] += g;
    }

    // tanh 2
    Vector dz2(h);
    for (std::size_t i = 0; i < h; ++i)
        dz2[i] = da2[i] * (1.0 - cache.a2[i] * cache.a2[i]);

    // Layer 2: z2 = w2 a1 + b2
    Vector da1(h, 0.0);
    for (std::size_t r = 0; r < h; ++r) {
        const double g = dz2[r];
        double* wrow = grad_flat + off.w2 + r * h;
        const double* w2row = enc.w2.data.data() + r * h;
        for (std::size_t c = 0; c < h; ++c) {
            wrow[c] += g * cache.a1[c];
            da1[c] += w2row[c] * g;
        }
        grad_flat[off.b2 + r] += g;
    }

    // tanh 1
    Vector dz1(h);
    for (std::size_t i = 0; i < h; ++i)
        dz1[i] = da1[i] * (1.0 - cache.a1[i] * cache.a1[i]);

    // Layer 1: z1 = w1 x + b1
    const std::size_t in = enc.input_dim();
    for (std::size_t r = 0; r < h; ++r) {
        const double g = dz1[r];
        double* wrow = grad_flat + off.w1 + r * in;
        for (std::size_t c = 0; c < in; ++c) wrow[c] += g * x[c];
        grad_flat[off.b1 + r] += g;
    }
}

std::vector<Vector> encode_batch(const Encoder& enc, const std::vector<const Vector*>& xs) {
    std::vector<Vector> out(xs.size());
    ParallelErrors errors(xs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t i = 0; i < xs.size(); ++i)
        errors.run(i, [&, i] { out[i] = encode(enc, *xs[i]); });
    errors.rethrow_first();
    return out;
}

namespace ref {

std::vector<Vector> encode_batch(const Encoder& enc, const std::vector<const Vector*>& xs) {
    std::vector<Vector> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = encode(enc, *xs[i]);
    return out;
}

} // namespace ref

} // namespace cfml

#include "cfml/bde.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "cfml/metrics.hpp"
#include "cfml/optim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cfml {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

BdeParams BdeParams::init(const BdeConfig& cfg, int num_classes, SeededRng& rng) {
    if (num_classes <= 0) throw Error(ErrorCode::InvalidSpec, "num_classes must be positive");
    if (!(cfg.tau > 0)) throw Error(ErrorCode::NonPositiveTemperature, "tau must be > 0");
    BdeParams p;
    p.encoder = Encoder::init(cfg.encoder, rng);
    p.classifier = Matrix(cfg.encoder.embed_dim, static_cast<std::size_t>(num_classes));
    const double limit =
        std::sqrt(6.0 / static_cast<double>(p.classifier.rows + p.classifier.cols));
    for (double& v : p.classifier.data) v = rng.uniform(-limit, limit);
    p.tau = cfg.tau;
    p.visual_weight = cfg.visual_weight;
    p.semantic_weight = cfg.semantic_weight;
    return p;
}

std::size_t BdeParams::param_count() const {
    return encoder.param_count() + classifier.data.size();
}

Vector BdeParams::flatten() const {
    Vector flat(param_count());
    encoder.flatten_to(flat.data());
    std::copy(classifier.data.begin(), classifier.data.end(),
              flat.begin() + static_cast<std::ptrdiff_t>(encoder.param_count()));
    return flat;
}

void BdeParams::load_flat(const Vector& flat) {
    if (flat.size() != param_count())
        throw Error(ErrorCode::DimensionMismatch, "load_flat: length");
    encoder = Encoder::from_flat(encoder.config(), flat.data());
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(encoder.param_count()), flat.end(),
              classifier.data.begin());
}

Vector BdeParams::decay_mask() const {
    Vector mask(param_count(), 1.0); // classifier columns decay like weights
    encoder.fill_decay_mask(mask.data());
    return mask;
}

Vector encode(const BdeParams& params, const Vector& x) { return encode(params.encoder, x); }

Vector augment(const Vector& x, const AugmentConfig& cfg, SeededRng& rng) {
    // Draw order: one scale, then per coordinate one gaussian and one
    // dropout uniform. All draws happen even at zero settings so the
    // stream advance does not depend on the config.
    const double scale = rng.uniform(1.0 - cfg.scale_jitter, 1.0 + cfg.scale_jitter);
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double noise = rng.gaussian() * cfg.noise_sigma;
        const double drop = rng.uniform01();
        out[i] = drop < cfg.dropout_prob ? 0.0 : scale * (x[i] + noise);
    }
    return out;
}

namespace {

std::vector<Vector> matrix_columns(const Matrix& m) {
    std::vector<Vector> cols(m.cols, Vector(m.rows));
    for (std::size_t c = 0; c < m.cols; ++c)
        for (std::size_t r = 0; r < m.rows; ++r) cols[c][r] = m.at(r, c);
    return cols;
}

Matrix columns_to_matrix(const std::vector<Vector>& cols) {
    Matrix m(cols.empty() ? 0 : cols[0].size(), cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c)
        for (std::size_t r = 0; r < m.rows; ++r) m.at(r, c) = cols[c][r];
    return m;
}

constexpr double kProbClamp = 1e-12;

struct VisualCore {
    double value = 0.0;
    std::vector<Vector> grad_f, grad_f_hat;
    std::size_t clamp_events = 0;
};

// Instance-discrimination loss over instance-major embeddings. One code
// path; `parallel` only toggles the OpenMP clauses, every reduction stays
// in index order, so serial and parallel runs agree bitwise.
VisualCore visual_core(const std::vector<Vector>& f, const std::vector<Vector>& fhat,
                       double tau, bool parallel) {
    const std::size_t m = f.size();
    const std::size_t dim = f[0].size();
    VisualCore out;
    out.grad_f.assign(m, Vector(dim, 0.0));
    out.grad_f_hat.assign(m, Vector(dim, 0.0));

    Matrix grad_a(m, m); // d loss / d (F^T F_hat / tau)
    Matrix grad_b(m, m); // d loss / d (F^T F / tau)
    Vector recog_terms(m, 0.0);
    Vector reject_terms(m, 0.0);
    std::vector<std::size_t> clamps(m, 0);

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (std::size_t i = 0; i < m; ++i) {
        // Column i: every instance scored against the augmented probe i.
        Vector scores(m);
        for (std::size_t k = 0; k < m; ++k) scores[k] = dot(f[k], fhat[i]) / tau;
        double mx = scores[0];
        for (std::size_t k = 1; k < m; ++k) mx = std::max(mx, scores[k]);
        double total = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            scores[k] = std::exp(scores[k] - mx);
            total += scores[k];
        }
        recog_terms[i] = -(std::log(scores[i] / total));
        for (std::size_t k = 0; k < m; ++k) {
            const double p = scores[k] / total;
            grad_a.at(k, i) = p - (k == i ? 1.0 : 0.0);
        }
    }

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (std::size_t j = 0; j < m; ++j) {
        // Column j: every instance scored against the original probe j;
        // each other instance i must not claim it.
        Vector q(m);
        for (std::size_t k = 0; k < m; ++k) q[k] = dot(f[k], f[j]) / tau;
        double mx = q[0];
        for (std::size_t k = 1; k < m; ++k) mx = std::max(mx, q[k]);
        double total = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            q[k] = std::exp(q[k] - mx);
            total += q[k];
        }
        for (std::size_t k = 0; k < m; ++k) q[k] /= total;

        double term = 0.0;
        double ratio_sum = 0.0;
        Vector ratio(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            if (i == j) continue;
            const double one_minus = 1.0 - q[i];
            if (one_minus < kProbClamp) {
                term -= std::log(kProbClamp);
                ++clamps[j]; // clamped term is flat, no gradient
            } else {
                term -= std::log(one_minus);
                ratio[i] = q[i] / one_minus;
                ratio_sum += ratio[i];
            }
        }
        reject_terms[j] = term;
        for (std::size_t k = 0; k < m; ++k)
            grad_b.at(k, j) = (k == j ? 0.0 : ratio[k]) - q[k] * ratio_sum;
    }

    for (std::size_t i = 0; i < m; ++i) out.value += recog_terms[i];
    for (std::size_t j = 0; j < m; ++j) out.value += reject_terms[j];
    for (std::size_t j = 0; j < m; ++j) out.clamp_events += clamps[j];

    // d loss / d f_a = sum_i grad_a[a][i] fhat_i / tau
    //               + sum_j (grad_b[a][j] + grad_b[j][a]) f_j / tau
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (std::size_t a = 0; a < m; ++a) {
        Vector& gf = out.grad_f[a];
        for (std::size_t i = 0; i < m; ++i) {
            const double c = grad_a.at(a, i) / tau;
            const Vector& src = fhat[i];
            for (std::size_t d = 0; d < dim; ++d) gf[d] += c * src[d];
        }
        for (std::size_t j = 0; j < m; ++j) {
            const double c = (grad_b.at(a, j) + grad_b.at(j, a)) / tau;
            const Vector& src = f[j];
            for (std::size_t d = 0; d < dim; ++d) gf[d] += c * src[d];
        }
        Vector& gh = out.grad_f_hat[a];
        for (std::size_t k = 0; k < m; ++k) {
            const double c = grad_a.at(k, a) / tau;
            const Vector& src = f[k];
            for (std::size_t d = 0; d < dim; ++d) gh[d] += c * src[d];
        }
    }
    return out;
}

struct SemanticCore {
    double value = 0.0;
    Matrix grad_w;
    std::vector<Vector> grad_f, grad_f_hat;
};

SemanticCore semantic_core(const Matrix& w, const std::vector<Vector>& f,
                           const std::vector<Vector>& fhat, const std::vector<int>& labels,
                           bool parallel) {
    const std::size_t m = f.size();
    const std::size_t dim = w.rows;
    const std::size_t classes = w.cols;
    SemanticCore out;
    out.grad_w = Matrix(dim, classes);
    out.grad_f.assign(m, Vector(dim, 0.0));
    out.grad_f_hat.assign(m, Vector(dim, 0.0));

    Vector item_values(m, 0.0);
    std::vector<Vector> score_grads(m), score_grads_hat(m);

    auto ce_and_grad = [&](const Vector& emb, int label, Vector& sgrad) {
        Vector scores(classes);
        for (std::size_t c = 0; c < classes; ++c) {
            double s = 0.0;
            for (std::size_t d = 0; d < dim; ++d) s += w.at(d, c) * emb[d];
            scores[c] = s;
        }
        double mx = scores[0];
        for (std::size_t c = 1; c < classes; ++c) mx = std::max(mx, scores[c]);
        double total = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
            scores[c] = std::exp(scores[c] - mx);
            total += scores[c];
        }
        sgrad.assign(classes, 0.0);
        for (std::size_t c = 0; c < classes; ++c) sgrad[c] = scores[c] / total;
        const double ce = -std::log(sgrad[static_cast<std::size_t>(label)]);
        sgrad[static_cast<std::size_t>(label)] -= 1.0;
        return ce;
    };

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (std::size_t i = 0; i < m; ++i) {
        item_values[i] = ce_and_grad(f[i], labels[i], score_grads[i]) +
                         ce_and_grad(fhat[i], labels[i], score_grads_hat[i]);
        for (std::size_t d = 0; d < dim; ++d) {
            double gf = 0.0, gh = 0.0;
            for (std::size_t c = 0; c < classes; ++c) {
                gf += w.at(d, c) * score_grads[i][c];
                gh += w.at(d, c) * score_grads_hat[i][c];
            }
            out.grad_f[i][d] = gf;
            out.grad_f_hat[i][d] = gh;
        }
    }

    for (std::size_t i = 0; i < m; ++i) out.value += item_values[i];
    // Classifier gradient reduced in item order.
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t d = 0; d < dim; ++d)
            for (std::size_t c = 0; c < classes; ++c)
                out.grad_w.at(d, c) +=
                    f[i][d] * score_grads[i][c] + fhat[i][d] * score_grads_hat[i][c];
    return out;
}

JointLoss joint_core(const BdeParams& params, const std::vector<const Vector*>& batch,
                     const std::vector<int>& labels, const AugmentConfig& aug, SeededRng& rng,
                     bool parallel) {
    const std::size_t b = batch.size();
    if (b == 0) throw Error(ErrorCode::EmptyInput, "loss_joint: empty batch");
    if (labels.size() != b)
        throw Error(ErrorCode::DimensionMismatch, "loss_joint: labels length");
    const int classes = static_cast<int>(params.classifier.cols);
    for (int y : labels)
        if (y < 0 || y >= classes)
            throw Error(ErrorCode::InvalidLabel, "loss_joint: label out of range");
    for (const Vector* x : batch)
        if (x->size() != params.encoder.input_dim())
            throw Error(ErrorCode::DimensionMismatch, "loss_joint: input length");

    // Augmentation draws are sequential regardless of thread count.
    std::vector<Vector> xhat(b);
    for (std::size_t i = 0; i < b; ++i) xhat[i] = augment(*batch[i], aug, rng);

    std::vector<EncoderCache> cache_f(b), cache_h(b);
    std::vector<Vector> f(b), fh(b);
    ParallelErrors errors(b);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (std::size_t i = 0; i < b; ++i)
        errors.run(i, [&, i] {
            f[i] = encode_cached(params.encoder, *batch[i], cache_f[i]);
            fh[i] = encode_cached(params.encoder, xhat[i], cache_h[i]);
        });
    errors.rethrow_first();

    JointLoss out;
    std::vector<Vector> df(b, Vector(params.encoder.embed_dim(), 0.0));
    std::vector<Vector> dfh(b, Vector(params.encoder.embed_dim(), 0.0));
    Matrix grad_w(params.classifier.rows, params.classifier.cols);

    if (params.visual_weight != 0.0) {
        VisualCore vis = visual_core(f, fh, params.tau, parallel);
        out.visual = vis.value;
        out.clamp_events = vis.clamp_events;
        for (std::size_t i = 0; i < b; ++i)
            for (std::size_t d = 0; d < df[i].size(); ++d) {
                df[i][d] += params.visual_weight * vis.grad_f[i][d];
                dfh[i][d] += params.visual_weight * vis.grad_f_hat[i][d];
            }
    }
    if (params.semantic_weight != 0.0) {
        SemanticCore sem = semantic_core(params.classifier, f, fh, labels, parallel);
        out.semantic = sem.value;
        for (std::size_t i = 0; i < b; ++i)
            for (std::size_t d = 0; d < df[i].size(); ++d) {
                df[i][d] += params.semantic_weight * sem.grad_f[i][d];
                dfh[i][d] += params.semantic_weight * sem.grad_f_hat[i][d];
            }
        for (std::size_t k = 0; k < grad_w.data.size(); ++k)
            grad_w.data[k] = params.semantic_weight * sem.grad_w.data[k];
    }
    out.value = 0.0;
    if (params.visual_weight != 0.0) out.value += params.visual_weight * out.visual;
    if (params.semantic_weight != 0.0) out.value += params.semantic_weight * out.semantic;

    // Per-item encoder gradients into disjoint slots, reduced in order.
    const std::size_t enc_params = params.encoder.param_count();
    std::vector<Vector> slots(b, Vector(enc_params, 0.0));
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (std::size_t i = 0; i < b; ++i) {
        encode_backward(params.encoder, *batch[i], cache_f[i], df[i], slots[i].data());
        encode_backward(params.encoder, xhat[i], cache_h[i], dfh[i], slots[i].data());
    }

    out.grad.assign(params.param_count(), 0.0);
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t k = 0; k < enc_params; ++k) out.grad[k] += slots[i][k];
    std::copy(grad_w.data.begin(), grad_w.data.end(),
              out.grad.begin() + static_cast<std::ptrdiff_t>(enc_params));
    return out;
}

} // namespace

Vector instance_match_probs(const Matrix& f_columns, const Vector& probe, double tau) {
    if (!(tau > 0)) throw Error(ErrorCode::NonPositiveTemperature, "tau must be > 0");
    if (f_columns.rows != probe.size() || f_columns.cols == 0)
        throw Error(ErrorCode::DimensionMismatch, "instance_match_probs: shapes");
    Vector scores(f_columns.cols);
    for (std::size_t k = 0; k < f_columns.cols; ++k) {
        double s = 0.0;
        for (std::size_t d = 0; d < f_columns.rows; ++d) s += f_columns.at(d, k) * probe[d];
        scores[k] = s / tau;
    }
    softmax_inplace(scores.data(), scores.size());
    return scores;
}

VisualLoss loss_visual(const Matrix& f, const Matrix& f_hat, double tau) {
    if (!(tau > 0)) throw Error(ErrorCode::NonPositiveTemperature, "tau must be > 0");
    if (f.rows != f_hat.rows || f.cols != f_hat.cols || f.cols == 0)
        throw Error(ErrorCode::DimensionMismatch, "loss_visual: shapes");
    VisualCore core = visual_core(matrix_columns(f), matrix_columns(f_hat), tau, true);
    VisualLoss out;
    out.value = core.value;
    out.clamp_events = core.clamp_events;
    out.grad_f = columns_to_matrix(core.grad_f);
    out.grad_f_hat = columns_to_matrix(core.grad_f_hat);
    return out;
}

Vector class_probs(const Matrix& classifier, const Vector& f) {
    if (classifier.rows != f.size() || classifier.cols == 0)
        throw Error(ErrorCode::DimensionMismatch, "class_probs: shapes");
    Vector scores(classifier.cols);
    for (std::size_t c = 0; c < classifier.cols; ++c) {
        double s = 0.0;
        for (std::size_t d = 0; d < classifier.rows; ++d) s += classifier.at(d, c) * f[d];
        scores[c] = s;
    }
    softmax_inplace(scores.data(), scores.size());
    return scores;
}

SemanticLoss loss_semantic(const Matrix& classifier, const Matrix& f, const Matrix& f_hat,
                           const std::vector<int>& labels) {
    if (f.rows != f_hat.rows || f.cols != f_hat.cols || f.cols == 0)
        throw Error(ErrorCode::DimensionMismatch, "loss_semantic: embedding shapes");
    if (classifier.rows != f.rows)
        throw Error(ErrorCode::DimensionMismatch, "loss_semantic: classifier rows");
    if (labels.size() != f.cols)
        throw Error(ErrorCode::DimensionMismatch, "loss_semantic: labels length");
    for (int y : labels)
        if (y < 0 || y >= static_cast<int>(classifier.cols))
            throw Error(ErrorCode::InvalidLabel, "loss_semantic: label out of range");
    SemanticCore core =
        semantic_core(classifier, matrix_columns(f), matrix_columns(f_hat), labels, true);
    SemanticLoss out;
    out.value = core.value;
    out.grad_classifier = std::move(core.grad_w);
    out.grad_f = columns_to_matrix(core.grad_f);
    out.grad_f_hat = columns_to_matrix(core.grad_f_hat);
    return out;
}

JointLoss loss_joint(const BdeParams& params, const std::vector<const Vector*>& batch,
                     const std::vector<int>& labels, const AugmentConfig& aug, SeededRng& rng) {
    return joint_core(params, batch, labels, aug, rng, true);
}

namespace ref {
JointLoss loss_joint(const BdeParams& params, const std::vector<const Vector*>& batch,
                     const std::vector<int>& labels, const AugmentConfig& aug, SeededRng& rng) {
    return joint_core(params, batch, labels, aug, rng, false);
}
} // namespace ref

namespace {

double lr_factor(const TrainConfig& cfg, int epoch) {
    double factor = 1.0;
    for (const auto& [milestone, f] : cfg.lr_milestones)
        if (epoch >= milestone) factor = f;
    return factor;
}

void validate_train_config(const TrainConfig& cfg) {
    if (cfg.epochs < 0 || cfg.batch_size < 1)
        throw Error(ErrorCode::InvalidSpec, "bad epochs/batch_size");
    int prev_epoch = -1;
    double prev_factor = 1.0;
    for (const auto& [milestone, f] : cfg.lr_milestones) {
        if (milestone <= prev_epoch || milestone >= cfg.epochs)
            throw Error(ErrorCode::InvalidSpec,
                        "lr milestones must be strictly increasing and < epochs");
        if (f >= prev_factor)
            throw Error(ErrorCode::InvalidSpec, "lr factors must be strictly decreasing");
        prev_epoch = milestone;
        prev_factor = f;
    }
    if (cfg.model_selection &&
        (cfg.holdout_frac <= 0.0 || cfg.holdout_frac >= 1.0 || cfg.probe_interval < 1))
        throw Error(ErrorCode::InvalidSpec, "bad model selection settings");
}

double holdout_probe_accuracy(const BdeParams& params, const CoarseDataset& dataset,
                              const std::vector<std::size_t>& train_idx,
                              const std::vector<std::size_t>& holdout_idx, int k) {
    std::vector<const Vector*> train_x, hold_x;
    std::vector<int> train_y;
    train_x.reserve(train_idx.size());
    for (std::size_t i : train_idx) {
        train_x.push_back(&dataset.samples[i].x);
        train_y.push_back(dataset.samples[i].coarse_label);
    }
    for (std::size_t i : holdout_idx) hold_x.push_back(&dataset.samples[i].x);
    std::vector<Vector> train_emb = encode_batch(params.encoder, train_x);
    std::vector<Vector> hold_emb = encode_batch(params.encoder, hold_x);
    KnnConfig knn;
    knn.k = k;
    std::vector<int> pred = knn_predict_batch(train_emb, train_y, hold_emb, knn);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < holdout_idx.size(); ++i)
        if (pred[i] == dataset.samples[holdout_idx[i]].coarse_label) ++hits;
    return static_cast<double>(hits) / static_cast<double>(holdout_idx.size());
}

} // namespace

TrainResult train_bde(const CoarseDataset& dataset, const BdeConfig& model,
                      const TrainConfig& cfg, const AugmentConfig& aug) {
    if (dataset.samples.empty()) throw Error(ErrorCode::EmptyDataset, "train_bde: no samples");
    if (dataset.input_dim != model.encoder.input_dim)
        throw Error(ErrorCode::DimensionMismatch, "train_bde: encoder input_dim");
    validate_train_config(cfg);

    SeededRng rng(cfg.seed);

    std::vector<std::size_t> order(dataset.samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<std::size_t> holdout;
    if (cfg.model_selection) {
        rng.shuffle(order);
        std::size_t cut = static_cast<std::size_t>(
            cfg.holdout_frac * static_cast<double>(order.size()));
        cut = std::max<std::size_t>(1, std::min(cut, order.size() - 1));
        holdout.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
        order.erase(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
    }

    BdeParams params = BdeParams::init(model, dataset.num_coarse_classes, rng);
    Vector flat = params.flatten();
    SgdMomentum opt(flat.size(), cfg.momentum, cfg.weight_decay, params.decay_mask());

    TrainResult result;
    Vector best_flat;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = cfg.base_lr * lr_factor(cfg, epoch);
        rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<const Vector*> batch;
            std::vector<int> labels;
            batch.reserve(stop - start);
            for (std::size_t k = start; k < stop; ++k) {
                batch.push_back(&dataset.samples[order[k]].x);
                labels.push_back(dataset.samples[order[k]].coarse_label);
            }
            JointLoss jl = loss_joint(params, batch, labels, aug, rng);
            if (!std::isfinite(jl.value))
                throw Error(ErrorCode::DivergenceDetected,
                            "loss not finite at epoch " + std::to_string(epoch) + ", batch " +
                                std::to_string(batches));
            result.clamp_events += jl.clamp_events;
            opt.step(flat, jl.grad, lr);
            params.load_flat(flat);
            loss_sum += jl.value;
            ++batches;
        }
        result.epoch_loss.push_back(batches ? loss_sum / static_cast<double>(batches) : 0.0);

        if (cfg.model_selection && (epoch + 1) % cfg.probe_interval == 0) {
            const double score = holdout_probe_accuracy(params, dataset, order, holdout,
                                                        cfg.probe_k);
            if (result.selected_epoch < 0 || score > result.selected_score) {
                result.selected_epoch = epoch;
                result.selected_score = score;
                best_flat = flat;
            }
        }
    }

    if (cfg.model_selection && !best_flat.empty()) params.load_flat(best_flat);
    result.params = std::move(params);
    return result;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& base_path) {
    nlohmann::json manifest{
        {"kind", ckpt.kind},
        {"epoch", ckpt.epoch},
        {"seed", ckpt.seed},
        {"input_dim", ckpt.model.encoder.input_dim},
        {"hidden_dim", ckpt.model.encoder.hidden_dim},
        {"embed_dim", ckpt.model.encoder.embed_dim},
        {"num_classes", ckpt.classifier.cols},
        {"tau", ckpt.model.tau},
        {"visual_weight", ckpt.model.visual_weight},
        {"semantic_weight", ckpt.model.semantic_weight},
        {"layout", "float64le: w1,b1,w2,b2,w3,b3,classifier(row-major)"},
    };
    std::ofstream mout(base_path + ".json");
    if (!mout) throw Error(ErrorCode::IoError, "cannot write " + base_path + ".json");
    mout << manifest.dump(2) << "\n";

    std::ofstream bout(base_path + ".bin", std::ios::binary);
    if (!bout) throw Error(ErrorCode::IoError, "cannot write " + base_path + ".bin");
    Vector flat(ckpt.encoder.param_count());
    ckpt.encoder.flatten_to(flat.data());
    bout.write(reinterpret_cast<const char*>(flat.data()),
               static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (!ckpt.classifier.data.empty())
        bout.write(reinterpret_cast<const char*>(ckpt.classifier.data.data()),
                   static_cast<std::streamsize>(ckpt.classifier.data.size() * sizeof(double)));
}

Checkpoint load_checkpoint(const std::string& base_path) {
    std::ifstream min(base_path + ".json");
    if (!min) throw Error(ErrorCode::IoError, "cannot open " + base_path + ".json");
    nlohmann::json manifest;
    try {
        min >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::FormatError, base_path + ".json: " + e.what());
    }

    Checkpoint ckpt;
    try {
        ckpt.kind = manifest.at("kind").get<std::string>();
        ckpt.model.encoder.input_dim = manifest.at("input_dim").get<std::size_t>();
        ckpt.model.encoder.hidden_dim = manifest.at("hidden_dim").get<std::size_t>();
        ckpt.model.encoder.embed_dim = manifest.at("embed_dim").get<std::size_t>();
        ckpt.model.tau = manifest.at("tau").get<double>();
        ckpt.model.visual_weight = manifest.at("visual_weight").get<double>();
        ckpt.model.semantic_weight = manifest.at("semantic_weight").get<double>();
        ckpt.epoch = manifest.at("epoch").get<int>();
        ckpt.seed = manifest.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::FormatError, base_path + ".json: " + e.what());
    }
    const std::size_t num_classes = manifest.at("num_classes").get<std::size_t>();

    std::ifstream bin(base_path + ".bin", std::ios::binary);
    if (!bin) throw Error(ErrorCode::IoError, "cannot open " + base_path + ".bin");
    EncoderConfig ecfg = ckpt.model.encoder;
    Vector flat(Encoder::param_count_for(ecfg));
    bin.read(reinterpret_cast<char*>(flat.data()),
             static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (static_cast<std::size_t>(bin.gcount()) != flat.size() * sizeof(double))
        throw Error(ErrorCode::FormatError, base_path + ".bin: truncated encoder block");
    ckpt.encoder = Encoder::from_flat(ecfg, flat.data());

    if (num_classes > 0) {
        ckpt.classifier = Matrix(ecfg.embed_dim, num_classes);
        bin.read(reinterpret_cast<char*>(ckpt.classifier.data.data()),
                 static_cast<std::streamsize>(ckpt.classifier.data.size() * sizeof(double)));
        if (static_cast<std::size_t>(bin.gcount()) !=
            ckpt.classifier.data.size() * sizeof(double))
            throw Error(ErrorCode::FormatError, base_path + ".bin: truncated classifier block");
    }
    return ckpt;
}

} // namespace cfml

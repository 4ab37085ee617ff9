#include "cfml/protonet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cfml/bde.hpp" // checkpoint reuse for warm starts
#include "cfml/optim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cfml {

Matrix prototypes(const std::vector<Vector>& support_embeddings,
                  const std::vector<int>& support_labels, int n_way) {
    if (n_way < 1) throw Error(ErrorCode::InvalidSpec, "prototypes: n_way must be >= 1");
    if (support_embeddings.empty())
        throw Error(ErrorCode::EmptyInput, "prototypes: no support embeddings");
    if (support_embeddings.size() != support_labels.size())
        throw Error(ErrorCode::LengthMismatch, "prototypes: labels length");
    const std::size_t dim = support_embeddings[0].size();
    Matrix protos(dim, static_cast<std::size_t>(n_way));
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_way), 0);
    for (std::size_t i = 0; i < support_embeddings.size(); ++i) {
        if (support_embeddings[i].size() != dim)
            throw Error(ErrorCode::DimensionMismatch, "prototypes: embedding dims");
        const int y = support_labels[i];
        if (y < 0 || y >= n_way)
            throw Error(ErrorCode::InvalidLabel, "prototypes: label out of range");
        for (std::size_t d = 0; d < dim; ++d)
            protos.at(d, static_cast<std::size_t>(y)) += support_embeddings[i][d];
        ++counts[static_cast<std::size_t>(y)];
    }
    for (int n = 0; n < n_way; ++n) {
        if (counts[static_cast<std::size_t>(n)] == 0)
            throw Error(ErrorCode::EmptyClass,
                        "prototypes: label " + std::to_string(n) + " has no support");
        for (std::size_t d = 0; d < dim; ++d)
            protos.at(d, static_cast<std::size_t>(n)) /=
                static_cast<double>(counts[static_cast<std::size_t>(n)]);
    }
    return protos;
}

Vector classify_query(const Vector& f, const Matrix& protos) {
    if (f.size() != protos.rows || protos.cols == 0)
        throw Error(ErrorCode::DimensionMismatch, "classify_query: shapes");
    Vector logits(protos.cols);
    for (std::size_t n = 0; n < protos.cols; ++n) {
        double d2 = 0.0;
        for (std::size_t d = 0; d < f.size(); ++d) {
            const double diff = f[d] - protos.at(d, n);
            d2 += diff * diff;
        }
        logits[n] = -d2;
    }
    softmax_inplace(logits.data(), logits.size());
    return logits;
}

namespace {

void validate_episode(const Episode& ep) {
    const std::size_t n = static_cast<std::size_t>(ep.n_way);
    if (ep.n_way < 1 || ep.k_shot < 1 || ep.q_query < 1)
        throw Error(ErrorCode::InvalidSpec, "episode shape counts must be positive");
    if (ep.support.size() != n * static_cast<std::size_t>(ep.k_shot) ||
        ep.query.size() != n * static_cast<std::size_t>(ep.q_query))
        throw Error(ErrorCode::DimensionMismatch, "episode item counts");
    for (const Episode::Item& it : ep.support)
        if (it.episode_label < 0 || it.episode_label >= ep.n_way)
            throw Error(ErrorCode::InvalidLabel, "support label out of range");
    for (const Episode::Item& it : ep.query)
        if (it.episode_label < 0 || it.episode_label >= ep.n_way)
            throw Error(ErrorCode::InvalidLabel, "query label out of range");
}

// Forward-only evaluation of one episode (no gradients); serial inside so
// episodes can run concurrently.
double episode_accuracy(const Encoder& enc, const Episode& ep) {
    validate_episode(ep);
    std::vector<Vector> fs(ep.support.size());
    std::vector<int> ls(ep.support.size());
    for (std::size_t i = 0; i < ep.support.size(); ++i) {
        fs[i] = encode(enc, ep.support[i].x);
        ls[i] = ep.support[i].episode_label;
    }
    const Matrix protos = prototypes(fs, ls, ep.n_way);
    std::size_t hits = 0;
    for (const Episode::Item& it : ep.query) {
        const Vector probs = classify_query(encode(enc, it.x), protos);
        std::size_t best = 0;
        for (std::size_t n = 1; n < probs.size(); ++n)
            if (probs[n] > probs[best]) best = n; // ties keep the lowest label
        if (static_cast<int>(best) == it.episode_label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(ep.query.size());
}

std::vector<double> eval_core(const Encoder& enc, const SamplePool& pool, int n_way,
                              int k_shot, int q_query, std::size_t count, std::uint64_t seed,
                              bool parallel) {
    const std::size_t need = static_cast<std::size_t>(k_shot) + static_cast<std::size_t>(q_query);
    const std::size_t excluded = pool.num_classes() - pool.eligible(need).size();
    if (excluded > 0)
        std::fprintf(stderr,
                     "meta_eval: excluding %zu of %zu classes with fewer than %zu samples\n",
                     excluded, pool.num_classes(), need);
    std::vector<double> acc(count, 0.0);
    ParallelErrors errors(count);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#else
    (void)parallel;
#endif
    for (std::size_t e = 0; e < count; ++e)
        errors.run(e, [&, e] {
            SeededRng rng(SeededRng::derive(seed, e));
            const Episode ep = sample_episode(pool, n_way, k_shot, q_query, rng);
            acc[e] = episode_accuracy(enc, ep);
        });
    errors.rethrow_first();
    return acc;
}

} // namespace

EpisodeLoss episode_loss(const Encoder& enc, const Episode& ep) {
    validate_episode(ep);
    const std::size_t ns = ep.support.size();
    const std::size_t nq = ep.query.size();
    const std::size_t dim = enc.embed_dim();
    const std::size_t n = static_cast<std::size_t>(ep.n_way);

    std::vector<EncoderCache> cache_s(ns), cache_q(nq);
    std::vector<Vector> fs(ns), fq(nq);
    ParallelErrors errors(ns + nq);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t i = 0; i < ns + nq; ++i)
        errors.run(i, [&, i] {
            if (i < ns)
                fs[i] = encode_cached(enc, ep.support[i].x, cache_s[i]);
            else
                fq[i - ns] = encode_cached(enc, ep.query[i - ns].x, cache_q[i - ns]);
        });
    errors.rethrow_first();

    std::vector<int> support_labels(ns);
    for (std::size_t i = 0; i < ns; ++i) support_labels[i] = ep.support[i].episode_label;
    const Matrix protos = prototypes(fs, support_labels, ep.n_way);

    const double inv_nq = 1.0 / static_cast<double>(nq);
    Vector ce(nq, 0.0);
    std::vector<char> correct(nq, 0);
    std::vector<Vector> dfq(nq, Vector(dim, 0.0));
    std::vector<Matrix> dproto_slot(nq); // per-query contribution, reduced in order
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t j = 0; j < nq; ++j) {
        const int y = ep.query[j].episode_label;
        Vector logits(n);
        for (std::size_t c = 0; c < n; ++c) {
            double d2 = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                const double diff = fq[j][d] - protos.at(d, c);
                d2 += diff * diff;
            }
            logits[c] = -d2;
        }
        double mx = logits[0];
        for (std::size_t c = 1; c < n; ++c) mx = std::max(mx, logits[c]);
        double total = 0.0;
        Vector u(n);
        for (std::size_t c = 0; c < n; ++c) {
            u[c] = std::exp(logits[c] - mx);
            total += u[c];
        }
        for (std::size_t c = 0; c < n; ++c) u[c] /= total;
        ce[j] = -std::log(u[static_cast<std::size_t>(y)]);
        std::size_t best = 0;
        for (std::size_t c = 1; c < n; ++c)
            if (u[c] > u[best]) best = c;
        correct[j] = static_cast<int>(best) == y ? 1 : 0;

        // d logits_c = (u_c - delta_cy) / nq; logits_c = -|fq - P_c|^2.
        dproto_slot[j] = Matrix(dim, n);
        for (std::size_t c = 0; c < n; ++c) {
            const double g = (u[c] - (static_cast<int>(c) == y ? 1.0 : 0.0)) * inv_nq;
            for (std::size_t d = 0; d < dim; ++d) {
                const double diff = fq[j][d] - protos.at(d, c);
                dfq[j][d] += g * (-2.0) * diff;
                dproto_slot[j].at(d, c) = g * 2.0 * diff;
            }
        }
    }

    EpisodeLoss out;
    double ce_sum = 0.0;
    for (std::size_t j = 0; j < nq; ++j) ce_sum += ce[j];
    out.value = ce_sum * inv_nq;
    std::size_t hits = 0;
    for (std::size_t j = 0; j < nq; ++j) hits += static_cast<std::size_t>(correct[j]);
    out.accuracy = static_cast<double>(hits) / static_cast<double>(nq);

    Matrix dproto(dim, n);
    for (std::size_t j = 0; j < nq; ++j)
        for (std::size_t k = 0; k < dproto.data.size(); ++k)
            dproto.data[k] += dproto_slot[j].data[k];

    // Support embeddings feed prototypes as means: df_s = dP_label / K.
    const double inv_k = 1.0 / static_cast<double>(ep.k_shot);
    std::vector<Vector> dfs(ns, Vector(dim, 0.0));
    for (std::size_t i = 0; i < ns; ++i) {
        const std::size_t y = static_cast<std::size_t>(support_labels[i]);
        for (std::size_t d = 0; d < dim; ++d) dfs[i][d] = dproto.at(d, y) * inv_k;
    }

    const std::size_t params = enc.param_count();
    std::vector<Vector> slots(ns + nq, Vector(params, 0.0));
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t i = 0; i < ns + nq; ++i) {
        if (i < ns)
            encode_backward(enc, ep.support[i].x, cache_s[i], dfs[i], slots[i].data());
        else
            encode_backward(enc, ep.query[i - ns].x, cache_q[i - ns], dfq[i - ns],
                            slots[i].data());
    }
    out.grad.assign(params, 0.0);
    for (std::size_t i = 0; i < ns + nq; ++i)
        for (std::size_t k = 0; k < params; ++k) out.grad[k] += slots[i][k];
    return out;
}

MetaTrainResult meta_train(const SamplePool& pool, const MetaTrainConfig& cfg) {
    if (cfg.epochs < 0 || cfg.episodes_per_epoch < 1 || cfg.n_way < 1 || cfg.k_shot < 1 ||
        cfg.q_query < 1 || cfg.lr < 0)
        throw Error(ErrorCode::InvalidSpec, "meta_train: bad config");
    const std::size_t need = static_cast<std::size_t>(cfg.k_shot) + static_cast<std::size_t>(cfg.q_query);
    const std::size_t excluded = pool.num_classes() - pool.eligible(need).size();
    if (excluded > 0)
        std::fprintf(stderr,
                     "meta_train: excluding %zu of %zu classes with fewer than %zu samples\n",
                     excluded, pool.num_classes(), need);

    SeededRng rng(cfg.seed);
    Encoder enc;
    if (cfg.warm_start.empty()) {
        enc = Encoder::init(cfg.encoder, rng);
    } else {
        enc = load_checkpoint(cfg.warm_start).encoder;
    }
    const EncoderConfig shape = enc.config();

    Vector flat(enc.param_count());
    enc.flatten_to(flat.data());
    Vector mask(flat.size(), 1.0);
    enc.fill_decay_mask(mask.data());
    SgdMomentum opt(flat.size(), cfg.momentum, cfg.weight_decay, mask);

    MetaTrainResult result;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double loss_sum = 0.0, acc_sum = 0.0;
        for (int step = 0; step < cfg.episodes_per_epoch; ++step) {
            const Episode ep = sample_episode(pool, cfg.n_way, cfg.k_shot, cfg.q_query, rng);
            EpisodeLoss el = episode_loss(enc, ep);
            if (!std::isfinite(el.value))
                throw Error(ErrorCode::DivergenceDetected,
                            "episode loss not finite at epoch " + std::to_string(epoch));
            opt.step(flat, el.grad, cfg.lr);
            enc = Encoder::from_flat(shape, flat.data());
            loss_sum += el.value;
            acc_sum += el.accuracy;
        }
        result.epoch_loss.push_back(loss_sum / cfg.episodes_per_epoch);
        result.epoch_accuracy.push_back(acc_sum / cfg.episodes_per_epoch);
    }
    result.encoder = std::move(enc);
    return result;
}

std::vector<double> eval_episode_accuracies(const Encoder& enc, const SamplePool& pool,
                                            int n_way, int k_shot, int q_query,
                                            std::size_t count, std::uint64_t seed) {
    return eval_core(enc, pool, n_way, k_shot, q_query, count, seed, true);
}

namespace ref {
std::vector<double> eval_episode_accuracies(const Encoder& enc, const SamplePool& pool,
                                            int n_way, int k_shot, int q_query,
                                            std::size_t count, std::uint64_t seed) {
    return eval_core(enc, pool, n_way, k_shot, q_query, count, seed, false);
}
} // namespace ref

EvalReport meta_eval(const Encoder& enc, const SamplePool& pool, int n_way, int k_shot,
                     int q_query, std::size_t count, std::uint64_t seed) {
    EvalReport report = accuracy_ci(eval_episode_accuracies(enc, pool, n_way, k_shot, q_query,
                                                            count, seed));
    report.n_way = n_way;
    report.k_shot = k_shot;
    report.q_query = q_query;
    report.seed = seed;
    return report;
}

} // namespace cfml

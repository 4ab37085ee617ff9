#include "cfml/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>

#include <json.hpp>

#include "cfml/errors.hpp"

namespace cfml {

std::string EvalReport::to_json() const {
    nlohmann::json j{
        {"n_way", n_way},
        {"k_shot", k_shot},
        {"q_query", q_query},
        {"episodes", episodes},
        {"mean_accuracy", mean_accuracy},
        {"ci95", ci95},
        {"seed", seed},
    };
    return j.dump(2);
}

int weighted_knn_predict(const std::vector<Vector>& train_embeddings,
                         const std::vector<int>& train_labels, const Vector& probe,
                         const KnnConfig& cfg) {
    const std::size_t m = train_embeddings.size();
    if (m == 0) throw Error(ErrorCode::EmptyTrainSet, "knn: no training points");
    if (train_labels.size() != m) throw Error(ErrorCode::LengthMismatch, "knn: labels length");
    if (cfg.k < 1) throw Error(ErrorCode::InvalidSpec, "knn: k must be >= 1");
    if (cfg.weight == KnnWeight::ExpTau && !(cfg.tau > 0))
        throw Error(ErrorCode::NonPositiveTemperature, "knn: tau must be > 0");

    std::vector<std::pair<double, std::size_t>> sims(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (train_embeddings[i].size() != probe.size())
            throw Error(ErrorCode::DimensionMismatch, "knn: embedding dims");
        sims[i] = {dot(train_embeddings[i], probe), i};
    }
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(cfg.k), m);
    auto closer = [](const std::pair<double, std::size_t>& a,
                     const std::pair<double, std::size_t>& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    };
    std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k), sims.end(),
                      closer);

    std::map<int, double> votes; // accumulated in neighbor order
    for (std::size_t n = 0; n < k; ++n) {
        const double s = sims[n].first;
        const double w = cfg.weight == KnnWeight::Similarity ? s : std::exp(s / cfg.tau);
        votes[train_labels[sims[n].second]] += w;
    }
    int best = votes.begin()->first;
    double best_w = votes.begin()->second;
    for (const auto& [label, w] : votes)
        if (w > best_w) { // strict: ties keep the lowest label id
            best = label;
            best_w = w;
        }
    return best;
}

std::vector<int> knn_predict_batch(const std::vector<Vector>& train_embeddings,
                                   const std::vector<int>& train_labels,
                                   const std::vector<Vector>& probes, const KnnConfig& cfg) {
    std::vector<int> out(probes.size());
    ParallelErrors errors(probes.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::size_t i = 0; i < probes.size(); ++i)
        errors.run(i, [&, i] {
            out[i] = weighted_knn_predict(train_embeddings, train_labels, probes[i], cfg);
        });
    errors.rethrow_first();
    return out;
}

namespace ref {
std::vector<int> knn_predict_batch(const std::vector<Vector>& train_embeddings,
                                   const std::vector<int>& train_labels,
                                   const std::vector<Vector>& probes, const KnnConfig& cfg) {
    std::vector<int> out(probes.size());
    for (std::size_t i = 0; i < probes.size(); ++i)
        out[i] = weighted_knn_predict(train_embeddings, train_labels, probes[i], cfg);
    return out;
}
} // namespace ref

EvalReport accuracy_ci(const std::vector<double>& accuracies) {
    if (accuracies.empty()) throw Error(ErrorCode::EmptyInput, "accuracy_ci: no episodes");
    for (double a : accuracies)
        if (!(a >= 0.0 && a <= 1.0))
            throw Error(ErrorCode::InvalidSpec, "accuracy_ci: value outside [0, 1]");
    const double n = static_cast<double>(accuracies.size());
    double mean = 0.0;
    for (double a : accuracies) mean += a;
    mean /= n;
    EvalReport report;
    report.episodes = accuracies.size();
    report.mean_accuracy = mean;
    if (accuracies.size() > 1) {
        double ss = 0.0;
        for (double a : accuracies) ss += (a - mean) * (a - mean);
        report.ci95 = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return report;
}

namespace {

// Dense relabeling in first-occurrence order; two labelings describe the
// same partition iff their canonical forms are equal.
std::vector<int> canonical_partition(const std::vector<int>& labels) {
    std::map<int, int> remap;
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, fresh] = remap.try_emplace(labels[i], static_cast<int>(remap.size()));
        (void)fresh;
        out[i] = it->second;
    }
    return out;
}

std::int64_t pairs(std::int64_t c) { return c * (c - 1) / 2; }

} // namespace

double adjusted_rand_index(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
    if (labels_a.size() != labels_b.size())
        throw Error(ErrorCode::LengthMismatch, "ari: label lengths differ");
    if (labels_a.size() < 2) throw Error(ErrorCode::EmptyInput, "ari: need at least 2 items");

    std::map<std::pair<int, int>, std::int64_t> contingency;
    std::map<int, std::int64_t> rows, cols;
    for (std::size_t i = 0; i < labels_a.size(); ++i) {
        ++contingency[{labels_a[i], labels_b[i]}];
        ++rows[labels_a[i]];
        ++cols[labels_b[i]];
    }

    std::int64_t sum_cells = 0, sum_rows = 0, sum_cols = 0;
    for (const auto& [cell, c] : contingency) sum_cells += pairs(c);
    for (const auto& [label, c] : rows) sum_rows += pairs(c);
    for (const auto& [label, c] : cols) sum_cols += pairs(c);
    const double total = static_cast<double>(pairs(static_cast<std::int64_t>(labels_a.size())));
    const double expected =
        static_cast<double>(sum_rows) * static_cast<double>(sum_cols) / total;
    const double max_index =
        0.5 * (static_cast<double>(sum_rows) + static_cast<double>(sum_cols));
    if (max_index == expected)
        return canonical_partition(labels_a) == canonical_partition(labels_b) ? 1.0 : 0.0;
    return (static_cast<double>(sum_cells) - expected) / (max_index - expected);
}

} // namespace cfml

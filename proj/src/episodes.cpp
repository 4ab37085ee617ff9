#include "cfml/episodes.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace cfml {

namespace {

SamplePool pool_from_groups(const std::map<int, std::vector<Vector>>& groups) {
    SamplePool pool;
    pool.class_ids.reserve(groups.size());
    pool.items.reserve(groups.size());
    for (const auto& [id, samples] : groups) {
        pool.class_ids.push_back(id);
        pool.items.push_back(samples);
    }
    return pool;
}

} // namespace

SamplePool SamplePool::from_pseudo(const PseudoDataset& ds) {
    std::map<int, std::vector<Vector>> groups;
    for (const PseudoSample& s : ds.samples) groups[s.pseudo_fine_label].push_back(s.x);
    return pool_from_groups(groups);
}

SamplePool SamplePool::from_fine(const FineDataset& ds) {
    std::map<int, std::vector<Vector>> groups;
    for (const FineSample& s : ds.samples) groups[s.fine_label].push_back(s.x);
    return pool_from_groups(groups);
}

SamplePool SamplePool::from_coarse(const CoarseDataset& ds) {
    std::map<int, std::vector<Vector>> groups;
    for (const CoarseSample& s : ds.samples) groups[s.coarse_label].push_back(s.x);
    return pool_from_groups(groups);
}

std::vector<std::size_t> SamplePool::eligible(std::size_t min_size) const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < items.size(); ++c)
        if (items[c].size() >= min_size) out.push_back(c);
    return out;
}

Episode sample_episode(const SamplePool& pool, int n_way, int k_shot, int q_query,
                       SeededRng& rng) {
    if (n_way < 1 || k_shot < 1 || q_query < 1)
        throw Error(ErrorCode::InvalidSpec, "episode shape counts must be positive");
    const std::size_t need = static_cast<std::size_t>(k_shot) + static_cast<std::size_t>(q_query);
    if (pool.num_classes() < static_cast<std::size_t>(n_way))
        throw Error(ErrorCode::InsufficientClasses,
                    "need " + std::to_string(n_way) + " classes, pool has " +
                        std::to_string(pool.num_classes()));
    std::vector<std::size_t> classes = pool.eligible(need);
    if (classes.size() < static_cast<std::size_t>(n_way))
        throw Error(ErrorCode::InsufficientSamples,
                    "only " + std::to_string(classes.size()) + " classes hold " +
                        std::to_string(need) + " samples");

    // Partial Fisher-Yates: the first n_way entries become the chosen
    // classes, drawn without replacement.
    for (int i = 0; i < n_way; ++i) {
        const std::size_t j =
            static_cast<std::size_t>(i) +
            static_cast<std::size_t>(rng.uniform_below(classes.size() - static_cast<std::size_t>(i)));
        std::swap(classes[static_cast<std::size_t>(i)], classes[j]);
    }
    classes.resize(static_cast<std::size_t>(n_way));

    std::vector<int> perm(static_cast<std::size_t>(n_way));
    for (int i = 0; i < n_way; ++i) perm[static_cast<std::size_t>(i)] = i;
    rng.shuffle(perm);

    Episode ep;
    ep.n_way = n_way;
    ep.k_shot = k_shot;
    ep.q_query = q_query;
    ep.class_map.assign(static_cast<std::size_t>(n_way), -1);
    for (int i = 0; i < n_way; ++i)
        ep.class_map[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
            pool.class_ids[classes[static_cast<std::size_t>(i)]];

    for (int i = 0; i < n_way; ++i) {
        const std::vector<Vector>& members = pool.items[classes[static_cast<std::size_t>(i)]];
        std::vector<std::size_t> pos(members.size());
        for (std::size_t p = 0; p < pos.size(); ++p) pos[p] = p;
        for (std::size_t d = 0; d < need; ++d) {
            const std::size_t j = d + static_cast<std::size_t>(rng.uniform_below(pos.size() - d));
            std::swap(pos[d], pos[j]);
        }
        const int label = perm[static_cast<std::size_t>(i)];
        for (std::size_t d = 0; d < need; ++d) {
            Episode::Item item{members[pos[d]], label, pos[d]};
            (d < static_cast<std::size_t>(k_shot) ? ep.support : ep.query)
                .push_back(std::move(item));
        }
    }
    return ep;
}

std::vector<Episode> episode_stream(const SamplePool& pool, int n_way, int k_shot, int q_query,
                                    std::size_t count, std::uint64_t seed) {
    const std::size_t need = static_cast<std::size_t>(k_shot) + static_cast<std::size_t>(q_query);
    const std::size_t excluded = pool.num_classes() - pool.eligible(need).size();
    if (excluded > 0)
        std::fprintf(stderr,
                     "episode_stream: excluding %zu of %zu classes with fewer than %zu samples\n",
                     excluded, pool.num_classes(), need);
    std::vector<Episode> out;
    out.reserve(count);
    for (std::size_t e = 0; e < count; ++e) {
        SeededRng rng(SeededRng::derive(seed, e));
        out.push_back(sample_episode(pool, n_way, k_shot, q_query, rng));
    }
    return out;
}

} // namespace cfml

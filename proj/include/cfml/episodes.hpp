#pragma once

#include <cstdint>
#include <vector>

#include "cfml/c2f.hpp"
#include "cfml/dataset.hpp"
#include "cfml/numerics.hpp"

namespace cfml {

/// One N-way K-shot Q-query task. Episode labels are a random permutation
/// of the chosen classes, so nothing about the source class ids leaks into
/// the label values.
struct Episode {
    int n_way = 0;
    int k_shot = 0;
    int q_query = 0;

    struct Item {
        Vector x;
        int episode_label = 0;
        std::size_t source_index = 0; // position within the pool's class list
    };
    std::vector<Item> support; // N*K items, grouped by drawn class
    std::vector<Item> query;   // N*Q items, grouped by drawn class
    std::vector<int> class_map; // episode label -> source class id
};

/// Samples grouped by class id, the episode sampler's source. Built from
/// pseudo-labels (meta-training), fine labels (evaluation), or coarse
/// labels (the coarse-direct baseline).
struct SamplePool {
    std::vector<int> class_ids;              // original ids, ascending
    std::vector<std::vector<Vector>> items;  // per class, in source order

    static SamplePool from_pseudo(const PseudoDataset& ds);
    static SamplePool from_fine(const FineDataset& ds);
    static SamplePool from_coarse(const CoarseDataset& ds);

    std::size_t num_classes() const { return items.size(); }
    /// Indices of classes holding at least min_size samples.
    std::vector<std::size_t> eligible(std::size_t min_size) const;
};

/// Draws one episode. Draw order (all via `rng`): N distinct eligible
/// classes without replacement, one label permutation, then per chosen
/// class K+Q distinct samples without replacement (first K to support).
/// Throws InsufficientClasses when the pool has fewer than N classes,
/// InsufficientSamples when fewer than N classes hold K+Q samples.
Episode sample_episode(const SamplePool& pool, int n_way, int k_shot, int q_query,
                       SeededRng& rng);

/// `count` episodes; episode e runs on the rng derived from (seed, e), so
/// a stream can be regenerated or consumed out of order without changing
/// any episode. Undersized classes are excluded with one stderr warning
/// per call.
std::vector<Episode> episode_stream(const SamplePool& pool, int n_way, int k_shot, int q_query,
                                    std::size_t count, std::uint64_t seed);

} // namespace cfml

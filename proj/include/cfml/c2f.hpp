#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfml/dataset.hpp"
#include "cfml/numerics.hpp"

namespace cfml {

struct PseudoSample {
    Vector x;
    int coarse_label = 0;
    int pseudo_fine_label = 0;    // globally unique across coarse classes
    std::size_t source_index = 0; // index into the originating dataset

    bool operator==(const PseudoSample&) const = default;
};

/// Output of greedy pseudo-labeling: pseudo-classes of exactly group_size
/// samples, each pure in its coarse label; leftovers are dropped.
struct PseudoDataset {
    std::vector<PseudoSample> samples;
    int num_pseudo_classes = 0;
    int num_coarse_classes = 0;
    std::size_t input_dim = 0;
    int group_size = 0; // N_s
    std::size_t dropped_count = 0;
    std::uint64_t seed = 0;
    std::string embedding_id; // which checkpoint produced the embeddings

    bool operator==(const PseudoDataset&) const = default;
};

/// Greedy coarse-to-fine grouping. Per coarse class with M samples: embed
/// everything, precompute the similarity matrix once, then repeat
/// floor(M / group_size) times: draw a seed uniformly from the remaining
/// samples, absorb the group_size - 1 remaining samples most similar to it
/// (ties by lowest sample index), remove the group. Remaining M mod
/// group_size samples are dropped. Pseudo ids are sequential in creation
/// order; each class runs on the sub-seed rng.seed() XOR coarse id, so the
/// parallel and serial versions agree exactly.
///
/// `embed` must be pure (it is called concurrently) and return unit
/// vectors of one fixed length.
PseudoDataset pseudo_label(const CoarseDataset& dataset, const EmbedFn& embed, int group_size,
                           SeededRng& rng);

namespace ref {
PseudoDataset pseudo_label(const CoarseDataset& dataset, const EmbedFn& embed, int group_size,
                           SeededRng& rng);
} // namespace ref

/// Identity feature baseline: the raw input l2-normalized.
Vector pixels_embed(const Vector& x);

/// CSV rows `coarse_label,pseudo_fine_label,x_0,...` plus a JSON manifest
/// (same base name, .json) recording the grouping settings.
void save_pseudo_dataset(const PseudoDataset& ds, const std::string& path);
PseudoDataset load_pseudo_dataset(const std::string& path);

} // namespace cfml

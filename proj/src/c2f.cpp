#include "cfml/c2f.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "csv_io.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cfml {

Vector pixels_embed(const Vector& x) { return l2_normalize(x); }

namespace {

struct ClassResult {
    // Each group lists dataset indices: the seed first, then the absorbed
    // samples in descending-similarity order.
    std::vector<std::vector<std::size_t>> groups;
    std::size_t dropped = 0;
};

// Greedy grouping of one coarse class; pure and serial, so the caller may
// run classes concurrently without changing the result.
ClassResult process_class(const CoarseDataset& ds, const std::vector<std::size_t>& members,
                          const EmbedFn& embed, int group_size, std::uint64_t sub_seed) {
    ClassResult out;
    const std::size_t m = members.size();
    if (m < static_cast<std::size_t>(group_size)) {
        out.dropped = m;
        return out;
    }

    std::vector<Vector> emb(m);
    for (std::size_t i = 0; i < m; ++i) {
        emb[i] = embed(ds.samples[members[i]].x);
        if (emb[i].size() != emb[0].size() || emb[i].empty())
            throw Error(ErrorCode::EmbeddingDimMismatch,
                        "pseudo_label: embedding length changed mid-class");
    }
    Matrix cols(emb[0].size(), m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t d = 0; d < emb[0].size(); ++d) cols.at(d, i) = emb[i][d];
    const Matrix sim = gram(cols); // computed once, masked by removal below

    SeededRng sub(sub_seed);
    std::vector<std::size_t> alive(m);
    for (std::size_t i = 0; i < m; ++i) alive[i] = i;

    while (alive.size() >= static_cast<std::size_t>(group_size)) {
        const std::size_t pick = static_cast<std::size_t>(sub.uniform_below(alive.size()));
        const std::size_t seed_pos = alive[pick];

        std::vector<std::size_t> cand;
        cand.reserve(alive.size() - 1);
        for (std::size_t p : alive)
            if (p != seed_pos) cand.push_back(p);
        // Highest similarity to the seed wins; ties go to the lowest
        // sample index (positions are in dataset order).
        std::sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
            const double sa = sim.at(seed_pos, a), sb = sim.at(seed_pos, b);
            if (sa != sb) return sa > sb;
            return a < b;
        });
        cand.resize(static_cast<std::size_t>(group_size) - 1);

        std::vector<std::size_t> group{members[seed_pos]};
        for (std::size_t p : cand) group.push_back(members[p]);
        out.groups.push_back(std::move(group));

        std::vector<char> removed(m, 0);
        removed[seed_pos] = 1;
        for (std::size_t p : cand) removed[p] = 1;
        std::erase_if(alive, [&](std::size_t p) { return removed[p] != 0; });
    }
    out.dropped = alive.size();
    return out;
}

PseudoDataset assemble(const CoarseDataset& ds, const std::vector<ClassResult>& per_class,
                       int group_size, std::uint64_t seed) {
    PseudoDataset out;
    out.num_coarse_classes = ds.num_coarse_classes;
    out.input_dim = ds.input_dim;
    out.group_size = group_size;
    out.seed = seed;
    int next_id = 0;
    for (std::size_t c = 0; c < per_class.size(); ++c) {
        for (const auto& group : per_class[c].groups) {
            for (std::size_t idx : group)
                out.samples.push_back(
                    {ds.samples[idx].x, ds.samples[idx].coarse_label, next_id, idx});
            ++next_id;
        }
        out.dropped_count += per_class[c].dropped;
    }
    out.num_pseudo_classes = next_id;
    return out;
}

PseudoDataset pseudo_label_core(const CoarseDataset& ds, const EmbedFn& embed, int group_size,
                                SeededRng& rng, bool parallel) {
    if (ds.samples.empty()) throw Error(ErrorCode::EmptyDataset, "pseudo_label: no samples");
    if (group_size < 1)
        throw Error(ErrorCode::InvalidGroupSize, "pseudo_label: group size must be >= 1");

    std::vector<std::vector<std::size_t>> by_class(
        static_cast<std::size_t>(ds.num_coarse_classes));
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        const int c = ds.samples[i].coarse_label;
        if (c < 0 || c >= ds.num_coarse_classes)
            throw Error(ErrorCode::InvalidLabel, "pseudo_label: coarse label out of range");
        by_class[static_cast<std::size_t>(c)].push_back(i);
    }

    std::vector<ClassResult> per_class(by_class.size());
    ParallelErrors errors(by_class.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#else
    (void)parallel;
#endif
    for (std::size_t c = 0; c < by_class.size(); ++c)
        errors.run(c, [&, c] {
            per_class[c] = process_class(ds, by_class[c], embed, group_size,
                                         rng.seed() ^ static_cast<std::uint64_t>(c));
        });
    errors.rethrow_first();
    return assemble(ds, per_class, group_size, rng.seed());
}

} // namespace

PseudoDataset pseudo_label(const CoarseDataset& dataset, const EmbedFn& embed, int group_size,
                           SeededRng& rng) {
    return pseudo_label_core(dataset, embed, group_size, rng, true);
}

namespace ref {
PseudoDataset pseudo_label(const CoarseDataset& dataset, const EmbedFn& embed, int group_size,
                           SeededRng& rng) {
    return pseudo_label_core(dataset, embed, group_size, rng, false);
}
} // namespace ref

void save_pseudo_dataset(const PseudoDataset& ds, const std::string& path) {
    std::vector<detail::CsvRow> rows;
    rows.reserve(ds.samples.size());
    for (const PseudoSample& s : ds.samples)
        rows.push_back({s.coarse_label, s.pseudo_fine_label, s.x});
    detail::write_rows(path, rows);
    detail::write_manifest(path, {{"num_pseudo_classes", ds.num_pseudo_classes},
                                  {"num_coarse_classes", ds.num_coarse_classes},
                                  {"input_dim", ds.input_dim},
                                  {"num_samples", ds.samples.size()},
                                  {"group_size", ds.group_size},
                                  {"dropped_count", ds.dropped_count},
                                  {"seed", ds.seed},
                                  {"embedding_id", ds.embedding_id}});
}

PseudoDataset load_pseudo_dataset(const std::string& path) {
    nlohmann::json manifest = detail::read_manifest(path);
    PseudoDataset ds;
    try {
        ds.num_pseudo_classes = manifest.at("num_pseudo_classes").get<int>();
        ds.num_coarse_classes = manifest.at("num_coarse_classes").get<int>();
        ds.input_dim = manifest.at("input_dim").get<std::size_t>();
        ds.group_size = manifest.at("group_size").get<int>();
        ds.dropped_count = manifest.at("dropped_count").get<std::size_t>();
        ds.seed = manifest.at("seed").get<std::uint64_t>();
        ds.embedding_id = manifest.at("embedding_id").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::FormatError, std::string("manifest: ") + e.what());
    }
    if (ds.num_pseudo_classes < 0 || ds.num_coarse_classes <= 0 || ds.input_dim == 0 ||
        ds.group_size < 1)
        throw Error(ErrorCode::FormatError, "manifest: bad dimensions");

    auto rows = detail::read_rows(path, ds.input_dim);
    const std::size_t expected = manifest.at("num_samples").get<std::size_t>();
    if (rows.size() != expected)
        throw Error(ErrorCode::FormatError, path + ": row count mismatch");

    // source_index does not round-trip (the CSV has no provenance column);
    // loaded samples index their own row order.
    std::map<int, std::size_t> group_count;
    std::map<int, int> group_coarse;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        detail::CsvRow& row = rows[i];
        if (row.label_a < 0 || row.label_a >= ds.num_coarse_classes)
            throw Error(ErrorCode::FormatError, path + ": coarse label out of range");
        if (row.label_b < 0 || row.label_b >= ds.num_pseudo_classes)
            throw Error(ErrorCode::FormatError, path + ": pseudo label out of range");
        ++group_count[row.label_b];
        auto [it, fresh] = group_coarse.emplace(row.label_b, row.label_a);
        if (!fresh && it->second != row.label_a)
            throw Error(ErrorCode::FormatError,
                        path + ": pseudo class spans two coarse classes");
        ds.samples.push_back({std::move(row.x), row.label_a, row.label_b, i});
    }
    if (static_cast<int>(group_count.size()) != ds.num_pseudo_classes)
        throw Error(ErrorCode::FormatError, path + ": missing pseudo classes");
    for (const auto& [id, count] : group_count)
        if (count != static_cast<std::size_t>(ds.group_size))
            throw Error(ErrorCode::FormatError,
                        path + ": pseudo class " + std::to_string(id) + " has wrong size");
    return ds;
}

} // namespace cfml

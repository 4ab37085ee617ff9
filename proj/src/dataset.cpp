#include "cfml/dataset.hpp"

#include <cmath>
#include <map>
#include <set>

#include <json.hpp>

#include "csv_io.hpp"

namespace cfml {

using detail::CsvRow;
using detail::read_manifest;
using detail::read_rows;
using detail::write_manifest;
using detail::write_rows;

CoarseDataset generate_hierarchical(const SynthSpec& spec) {
    if (spec.num_coarse <= 0 || spec.fine_per_coarse <= 0 || spec.samples_per_fine <= 0 ||
        spec.input_dim == 0)
        throw Error(ErrorCode::InvalidSpec, "all counts must be positive");
    if (spec.coarse_spread < 0 || spec.fine_spread < 0 || spec.noise_sigma < 0)
        throw Error(ErrorCode::InvalidSpec, "spreads must be nonnegative");
    if (!(spec.fine_spread < spec.coarse_spread))
        throw Error(ErrorCode::InvalidSpec, "fine_spread must be < coarse_spread");

    SeededRng rng(spec.seed);
    const std::size_t dim = spec.input_dim;
    const double root_d = std::sqrt(static_cast<double>(dim));

    auto gaussian_offset = [&](double spread) {
        Vector v(dim);
        const double scale = spread / root_d;
        for (std::size_t d = 0; d < dim; ++d) v[d] = scale * rng.gaussian();
        return v;
    };

    CoarseDataset ds;
    ds.num_coarse_classes = spec.num_coarse;
    ds.input_dim = dim;
    ds.seed = spec.seed;
    ds.split = "train";

    for (int c = 0; c < spec.num_coarse; ++c) {
        Vector coarse_center = gaussian_offset(spec.coarse_spread);
        for (int j = 0; j < spec.fine_per_coarse; ++j) {
            Vector fine_center = gaussian_offset(spec.fine_spread);
            for (std::size_t d = 0; d < dim; ++d) fine_center[d] += coarse_center[d];
            const int fine_id = c * spec.fine_per_coarse + j;
            for (int s = 0; s < spec.samples_per_fine; ++s) {
                Vector x = gaussian_offset(spec.noise_sigma);
                for (std::size_t d = 0; d < dim; ++d) x[d] += fine_center[d];
                ds.samples.push_back({std::move(x), c});
                ds.hidden_fine_.push_back(fine_id);
            }
        }
    }
    return ds;
}

MetaSplit split_meta(const CoarseDataset& dataset, const std::vector<int>& train_coarse,
                     const std::vector<int>& val_coarse, const std::vector<int>& test_coarse) {
    const int c_total = dataset.num_coarse_classes;
    std::map<int, int> member_of; // coarse id -> 0 train / 1 val / 2 test
    auto add_set = [&](const std::vector<int>& ids, int which, const char* name) {
        if (ids.empty()) throw Error(ErrorCode::EmptySplit, std::string(name) + " split is empty");
        for (int id : ids) {
            if (id < 0 || id >= c_total)
                throw Error(ErrorCode::InvalidSpec,
                            "coarse id " + std::to_string(id) + " out of range");
            auto [it, inserted] = member_of.emplace(id, which);
            if (!inserted)
                throw Error(ErrorCode::OverlappingSplit,
                            "coarse id " + std::to_string(id) + " appears in two splits");
        }
    };
    add_set(train_coarse, 0, "train");
    add_set(val_coarse, 1, "val");
    add_set(test_coarse, 2, "test");
    if (static_cast<int>(member_of.size()) != c_total)
        throw Error(ErrorCode::InvalidSpec, "splits do not cover all coarse classes");

    // Dense remaps in sorted-original-id order.
    std::map<int, int> train_remap;
    for (int id : std::set<int>(train_coarse.begin(), train_coarse.end()))
        train_remap.emplace(id, static_cast<int>(train_remap.size()));

    MetaSplit out;
    out.train.num_coarse_classes = static_cast<int>(train_remap.size());
    out.train.input_dim = dataset.input_dim;
    out.train.seed = dataset.seed;
    out.train.split = "train";
    out.val.input_dim = dataset.input_dim;
    out.val.seed = dataset.seed;
    out.val.split = "val";
    out.test.input_dim = dataset.input_dim;
    out.test.seed = dataset.seed;
    out.test.split = "test";

    // Fine remaps per evaluation split, dense over the fine ids present.
    std::set<int> val_fine_ids, test_fine_ids;
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        const int which = member_of.at(dataset.samples[i].coarse_label);
        if (which == 0) continue;
        const int fine = dataset.hidden_fine_labels()[i];
        if (fine < 0)
            throw Error(ErrorCode::InvalidSpec,
                        "val/test split requires hidden fine labels");
        (which == 1 ? val_fine_ids : test_fine_ids).insert(fine);
    }
    std::map<int, int> val_remap, test_remap;
    for (int id : val_fine_ids) val_remap.emplace(id, static_cast<int>(val_remap.size()));
    for (int id : test_fine_ids) test_remap.emplace(id, static_cast<int>(test_remap.size()));
    out.val.num_fine_classes = static_cast<int>(val_remap.size());
    out.test.num_fine_classes = static_cast<int>(test_remap.size());

    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        const CoarseSample& s = dataset.samples[i];
        const int which = member_of.at(s.coarse_label);
        if (which == 0) {
            out.train.samples.push_back({s.x, train_remap.at(s.coarse_label)});
            out.train.hidden_fine_.push_back(dataset.hidden_fine_labels()[i]);
        } else if (which == 1) {
            out.val.samples.push_back({s.x, val_remap.at(dataset.hidden_fine_labels()[i])});
        } else {
            out.test.samples.push_back({s.x, test_remap.at(dataset.hidden_fine_labels()[i])});
        }
    }
    return out;
}

void save_dataset(const CoarseDataset& dataset, const std::string& csv_path) {
    std::vector<CsvRow> rows;
    rows.reserve(dataset.samples.size());
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        const int fine = i < dataset.hidden_fine_.size() ? dataset.hidden_fine_[i] : -1;
        rows.push_back({dataset.samples[i].coarse_label, fine, dataset.samples[i].x});
    }
    write_rows(csv_path, rows);
    write_manifest(csv_path, {{"num_coarse_classes", dataset.num_coarse_classes},
                              {"input_dim", dataset.input_dim},
                              {"num_samples", dataset.samples.size()},
                              {"seed", dataset.seed},
                              {"split", dataset.split}});
}

CoarseDataset load_dataset(const std::string& csv_path) {
    nlohmann::json manifest = read_manifest(csv_path);
    CoarseDataset ds;
    try {
        ds.num_coarse_classes = manifest.at("num_coarse_classes").get<int>();
        ds.input_dim = manifest.at("input_dim").get<std::size_t>();
        ds.seed = manifest.at("seed").get<std::uint64_t>();
        ds.split = manifest.at("split").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::FormatError, std::string("manifest: ") + e.what());
    }
    if (ds.num_coarse_classes <= 0 || ds.input_dim == 0)
        throw Error(ErrorCode::FormatError, "manifest: bad dimensions");

    auto rows = read_rows(csv_path, ds.input_dim);
    const std::size_t expected = manifest.at("num_samples").get<std::size_t>();
    if (rows.size() != expected)
        throw Error(ErrorCode::FormatError,
                    csv_path + ": expected " + std::to_string(expected) + " rows, found " +
                        std::to_string(rows.size()));
    for (CsvRow& row : rows) {
        if (row.label_a < 0 || row.label_a >= ds.num_coarse_classes)
            throw Error(ErrorCode::FormatError, csv_path + ": coarse label out of range");
        if (row.label_b < -1)
            throw Error(ErrorCode::FormatError, csv_path + ": bad fine label");
        ds.samples.push_back({std::move(row.x), row.label_a});
        ds.hidden_fine_.push_back(row.label_b);
    }
    return ds;
}

void save_fine_dataset(const FineDataset& dataset, const std::string& csv_path) {
    std::vector<CsvRow> rows;
    rows.reserve(dataset.samples.size());
    for (const FineSample& s : dataset.samples) rows.push_back({-1, s.fine_label, s.x});
    write_rows(csv_path, rows);
    write_manifest(csv_path, {{"num_coarse_classes", -1},
                              {"num_fine_classes", dataset.num_fine_classes},
                              {"input_dim", dataset.input_dim},
                              {"num_samples", dataset.samples.size()},
                              {"seed", dataset.seed},
                              {"split", dataset.split}});
}

FineDataset load_fine_dataset(const std::string& csv_path) {
    nlohmann::json manifest = read_manifest(csv_path);
    FineDataset ds;
    try {
        ds.num_fine_classes = manifest.at("num_fine_classes").get<int>();
        ds.input_dim = manifest.at("input_dim").get<std::size_t>();
        ds.seed = manifest.at("seed").get<std::uint64_t>();
        ds.split = manifest.at("split").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::FormatError, std::string("manifest: ") + e.what());
    }
    if (ds.num_fine_classes <= 0 || ds.input_dim == 0)
        throw Error(ErrorCode::FormatError, "manifest: bad dimensions");

    auto rows = read_rows(csv_path, ds.input_dim);
    const std::size_t expected = manifest.at("num_samples").get<std::size_t>();
    if (rows.size() != expected)
        throw Error(ErrorCode::FormatError, csv_path + ": row count mismatch");
    for (CsvRow& row : rows) {
        if (row.label_b < 0 || row.label_b >= ds.num_fine_classes)
            throw Error(ErrorCode::FormatError, csv_path + ": fine label out of range");
        ds.samples.push_back({std::move(row.x), row.label_b});
    }
    return ds;
}

} // namespace cfml

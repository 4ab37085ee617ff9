#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "cfml/c2f.hpp"
#include "cfml/errors.hpp"
#include "cfml/metrics.hpp"
#include "oracles.hpp"
#include "scratch.hpp"

using namespace cfml;

namespace {

constexpr double kPi = 3.14159265358979323846;

CoarseDataset angular_dataset() {
  // six unit vectors on the circle: a tight cluster near 0 degrees and
  // another near 120 degrees
  CoarseDataset ds;
  ds.num_coarse_classes = 1;
  ds.input_dim = 2;
  for (double deg : {0.0, 5.0, 10.0, 120.0, 125.0, 130.0}) {
    const double rad = deg * kPi / 180.0;
    ds.samples.push_back({{std::cos(rad), std::sin(rad)}, 0});
    ds.hidden_fine_.push_back(deg < 60.0 ? 0 : 1);
  }
  return ds;
}

std::set<std::set<std::size_t>> partition_of(const PseudoDataset& ps) {
  std::map<int, std::set<std::size_t>> groups;
  for (const auto& s : ps.samples) groups[s.pseudo_fine_label].insert(s.source_index);
  std::set<std::set<std::size_t>> out;
  for (auto& [id, g] : groups) out.insert(std::move(g));
  return out;
}

CoarseDataset random_dataset(std::uint64_t seed, int num_coarse, int per_class_min,
                             int per_class_max, std::size_t dim) {
  SeededRng rng(seed);
  CoarseDataset ds;
  ds.num_coarse_classes = num_coarse;
  ds.input_dim = dim;
  for (int c = 0; c < num_coarse; ++c) {
    const int n = per_class_min +
                  static_cast<int>(rng.uniform_below(
                      static_cast<std::uint64_t>(per_class_max - per_class_min + 1)));
    for (int i = 0; i < n; ++i) {
      Vector x(dim);
      for (auto& v : x) v = rng.gaussian();
      ds.samples.push_back({std::move(x), c});
      ds.hidden_fine_.push_back(-1);
    }
  }
  return ds;
}

}  // namespace

TEST_CASE("pixels_embed: normalizes and rejects zero input") {
  const Vector e = pixels_embed(Vector{3.0, 4.0});
  CHECK(e[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(e[1] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK_THROWS_AS(pixels_embed(Vector{0.0, 0.0}), Error);
}

TEST_CASE("grouping: two tight angular clusters split exactly, any seed") {
  // [DERIVED] within-cluster cosines (>= cos 10 deg) dominate cross-cluster
  // ones (<= cos 110 deg), so greedy absorption recovers the clusters no
  // matter which seed sample starts a group
  const CoarseDataset ds = angular_dataset();
  const std::set<std::set<std::size_t>> want{{0, 1, 2}, {3, 4, 5}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SeededRng rng(seed);
    const PseudoDataset ps = pseudo_label(ds, pixels_embed, 3, rng);
    CHECK(ps.num_pseudo_classes == 2);
    CHECK(ps.dropped_count == 0);
    CHECK(partition_of(ps) == want);
  }
}

TEST_CASE("grouping: floor(M / N_s) groups per class, remainder dropped") {
  auto counts = [](int m, int ns) {
    CoarseDataset ds;
    ds.num_coarse_classes = 1;
    ds.input_dim = 3;
    SeededRng gen(5);
    for (int i = 0; i < m; ++i) {
      Vector x{gen.gaussian(), gen.gaussian(), gen.gaussian()};
      ds.samples.push_back({std::move(x), 0});
      ds.hidden_fine_.push_back(-1);
    }
    SeededRng rng(7);
    const PseudoDataset ps = pseudo_label(ds, pixels_embed, ns, rng);
    return std::make_pair(ps.num_pseudo_classes, ps.dropped_count);
  };
  CHECK(counts(10, 3) == std::make_pair(3, std::size_t{1}));
  CHECK(counts(5, 2) == std::make_pair(2, std::size_t{1}));
  CHECK(counts(4, 5) == std::make_pair(0, std::size_t{4}));
  CHECK(counts(6, 1) == std::make_pair(6, std::size_t{0}));
  CHECK(counts(6, 6) == std::make_pair(1, std::size_t{0}));
}

TEST_CASE("grouping: structural invariants hold on random datasets") {
  for (std::uint64_t trial = 0; trial < 30; ++trial) {
    const int num_coarse = 2 + static_cast<int>(trial % 3);
    const CoarseDataset ds = random_dataset(100 + trial, num_coarse, 5, 23, 6);
    const int ns = 2 + static_cast<int>(trial % 4);
    SeededRng rng(trial);
    const PseudoDataset ps = pseudo_label(ds, pixels_embed, ns, rng);

    CHECK(ps.group_size == ns);
    CHECK(ps.num_coarse_classes == num_coarse);
    CHECK(ps.input_dim == 6);

    // every pseudo class has exactly ns members, pure in coarse label, and
    // pseudo ids are dense and sequential
    std::map<int, std::vector<const PseudoSample*>> by_class;
    std::set<std::size_t> seen_sources;
    for (const auto& s : ps.samples) {
      by_class[s.pseudo_fine_label].push_back(&s);
      CHECK(seen_sources.insert(s.source_index).second);  // no duplicates
      REQUIRE(s.source_index < ds.samples.size());
      CHECK(s.x == ds.samples[s.source_index].x);
      CHECK(s.coarse_label == ds.samples[s.source_index].coarse_label);
    }
    CHECK(static_cast<int>(by_class.size()) == ps.num_pseudo_classes);
    for (int p = 0; p < ps.num_pseudo_classes; ++p) {
      REQUIRE(by_class.count(p) == 1);
      const auto& members = by_class[p];
      CHECK(static_cast<int>(members.size()) == ns);
      for (const auto* m : members) CHECK(m->coarse_label == members[0]->coarse_label);
    }

    // totals: floor(M_c / ns) groups per class, the rest dropped
    std::map<int, int> class_sizes;
    for (const auto& s : ds.samples) ++class_sizes[s.coarse_label];
    int want_groups = 0;
    std::size_t want_dropped = 0;
    for (const auto& [c, m] : class_sizes) {
      want_groups += m / ns;
      want_dropped += static_cast<std::size_t>(m % ns);
    }
    CHECK(ps.num_pseudo_classes == want_groups);
    CHECK(ps.dropped_count == want_dropped);
    CHECK(ps.samples.size() == static_cast<std::size_t>(want_groups * ns));
  }
}

TEST_CASE("grouping: deterministic in the rng seed") {
  const CoarseDataset ds = random_dataset(55, 3, 8, 20, 5);
  SeededRng a(9), b(9), c(10);
  const PseudoDataset pa = pseudo_label(ds, pixels_embed, 3, a);
  const PseudoDataset pb = pseudo_label(ds, pixels_embed, 3, b);
  CHECK(pa == pb);
  const PseudoDataset pc = pseudo_label(ds, pixels_embed, 3, c);
  CHECK_FALSE(pa == pc);  // different seed, different greedy order
}

TEST_CASE("grouping: serial reference agrees bit for bit") {
  const CoarseDataset ds = random_dataset(66, 4, 6, 25, 7);
  SeededRng a(13), b(13);
  CHECK(pseudo_label(ds, pixels_embed, 4, a) == ref::pseudo_label(ds, pixels_embed, 4, b));
}

TEST_CASE("grouping: an oracle embedding recovers hidden structure exactly") {
  // inputs one-hot in their hidden fine id: similarity is 1 within a fine
  // class and 0 across, so grouping at the true size is perfect
  CoarseDataset ds;
  ds.num_coarse_classes = 2;
  ds.input_dim = 4;
  SeededRng order_rng(3);
  std::vector<std::pair<int, int>> slots;  // (fine, coarse)
  for (int f = 0; f < 4; ++f)
    for (int i = 0; i < 5; ++i) slots.push_back({f, f / 2});
  order_rng.shuffle(slots);  // interleave classes in the dataset
  for (const auto& [f, c] : slots) {
    Vector x(4, 0.0);
    x[static_cast<std::size_t>(f)] = 2.5;  // scale irrelevant after normalize
    ds.samples.push_back({std::move(x), c});
    ds.hidden_fine_.push_back(f);
  }
  SeededRng rng(17);
  const PseudoDataset ps = pseudo_label(ds, pixels_embed, 5, rng);
  CHECK(ps.num_pseudo_classes == 4);
  CHECK(ps.dropped_count == 0);
  std::vector<int> pseudo, truth;
  for (const auto& s : ps.samples) {
    pseudo.push_back(s.pseudo_fine_label);
    truth.push_back(ds.hidden_fine_labels()[s.source_index]);
  }
  CHECK(adjusted_rand_index(pseudo, truth) == 1.0);
}

TEST_CASE("grouping: input validation") {
  const CoarseDataset ds = random_dataset(77, 2, 4, 8, 3);
  SeededRng rng(1);
  CoarseDataset empty;
  empty.num_coarse_classes = 1;
  empty.input_dim = 3;
  CHECK_THROWS_AS(pseudo_label(empty, pixels_embed, 2, rng), Error);
  CHECK_THROWS_AS(pseudo_label(ds, pixels_embed, 0, rng), Error);
  CHECK_THROWS_AS(pseudo_label(ds, pixels_embed, -3, rng), Error);
  // an embedding whose output length varies is rejected
  EmbedFn bad = [](const Vector& x) {
    return Vector(x[0] > 0 ? 2 : 3, 0.5);
  };
  CHECK_THROWS_AS(pseudo_label(ds, bad, 2, rng), Error);
}

TEST_CASE("persistence: pseudo dataset round trips, source order preserved") {
  testutil::ScratchDir dir("pseudo_roundtrip");
  const CoarseDataset ds = random_dataset(88, 3, 6, 15, 4);
  SeededRng rng(19);
  PseudoDataset ps = pseudo_label(ds, pixels_embed, 3, rng);
  ps.embedding_id = "test:embedding";
  save_pseudo_dataset(ps, dir.file("pseudo.csv"));
  const PseudoDataset back = load_pseudo_dataset(dir.file("pseudo.csv"));
  CHECK(back.num_pseudo_classes == ps.num_pseudo_classes);
  CHECK(back.num_coarse_classes == ps.num_coarse_classes);
  CHECK(back.input_dim == ps.input_dim);
  CHECK(back.group_size == ps.group_size);
  CHECK(back.dropped_count == ps.dropped_count);
  CHECK(back.seed == ps.seed);
  CHECK(back.embedding_id == "test:embedding");
  REQUIRE(back.samples.size() == ps.samples.size());
  for (std::size_t i = 0; i < ps.samples.size(); ++i) {
    // source_index does not survive the file format; everything else must
    CHECK(back.samples[i].x == ps.samples[i].x);
    CHECK(back.samples[i].coarse_label == ps.samples[i].coarse_label);
    CHECK(back.samples[i].pseudo_fine_label == ps.samples[i].pseudo_fine_label);
  }
}

TEST_CASE("persistence: corrupted pseudo files are rejected") {
  const CoarseDataset ds = random_dataset(99, 2, 6, 6, 3);
  SeededRng rng(23);
  const PseudoDataset ps = pseudo_label(ds, pixels_embed, 3, rng);

  auto tamper = [&](const std::string& name, auto mutate) {
    testutil::ScratchDir dir(name);
    const std::string path = dir.file("p.csv");
    save_pseudo_dataset(ps, path);
    std::ifstream in(path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    in.close();
    mutate(lines);
    std::ofstream out(path);
    for (const auto& l : lines) out << l << "\n";
    out.close();
    CHECK_THROWS_AS(load_pseudo_dataset(path), Error);
  };

  // pseudo label out of range
  tamper("pseudo_tamper_label", [](std::vector<std::string>& lines) {
    lines[0] = "0,99,1,1,1";
  });
  // a missing row disagrees with the manifest row count
  tamper("pseudo_tamper_rows", [](std::vector<std::string>& lines) {
    lines.pop_back();
  });
  // moving a sample between two groups of the same coarse class breaks the
  // fixed group size (row 0 is pseudo class 0; class 1 shares its coarse)
  tamper("pseudo_tamper_size", [](std::vector<std::string>& lines) {
    const auto c1 = lines[0].find(',');
    const auto c2 = lines[0].find(',', c1 + 1);
    lines[0] = lines[0].substr(0, c1) + ",1" + lines[0].substr(c2);
  });
  // flipping one coarse label breaks group purity
  tamper("pseudo_tamper_purity", [](std::vector<std::string>& lines) {
    const auto comma = lines[0].find(',');
    lines[0] = (lines[0][0] == '0' ? "1" : "0") + lines[0].substr(comma);
  });
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "cfml/episodes.hpp"
#include "cfml/errors.hpp"
#include "oracles.hpp"

using namespace cfml;

namespace {

// pool with `sizes[i]` distinct samples in class i; coordinate 0 encodes
// the class, coordinate 1 the position, so items are identifiable
SamplePool make_pool(const std::vector<int>& sizes) {
  SamplePool pool;
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    pool.class_ids.push_back(static_cast<int>(c));
    std::vector<Vector> items;
    for (int i = 0; i < sizes[c]; ++i)
      items.push_back({static_cast<double>(c), static_cast<double>(i)});
    pool.items.push_back(std::move(items));
  }
  return pool;
}

}  // namespace

TEST_CASE("pool: construction from each label source") {
  PseudoDataset ps;
  ps.num_pseudo_classes = 2;
  ps.num_coarse_classes = 1;
  ps.input_dim = 2;
  ps.group_size = 2;
  ps.samples.push_back({{1.0, 0.0}, 0, 1, 0});
  ps.samples.push_back({{2.0, 0.0}, 0, 0, 1});
  ps.samples.push_back({{3.0, 0.0}, 0, 1, 2});
  ps.samples.push_back({{4.0, 0.0}, 0, 0, 3});
  const SamplePool from_ps = SamplePool::from_pseudo(ps);
  REQUIRE(from_ps.num_classes() == 2);
  CHECK(from_ps.class_ids == std::vector<int>{0, 1});
  // source order within each class is preserved
  CHECK(from_ps.items[0][0][0] == 2.0);
  CHECK(from_ps.items[0][1][0] == 4.0);
  CHECK(from_ps.items[1][0][0] == 1.0);
  CHECK(from_ps.items[1][1][0] == 3.0);

  FineDataset fd;
  fd.num_fine_classes = 2;
  fd.input_dim = 1;
  fd.samples.push_back({{5.0}, 1});
  fd.samples.push_back({{6.0}, 0});
  const SamplePool from_fd = SamplePool::from_fine(fd);
  REQUIRE(from_fd.num_classes() == 2);
  CHECK(from_fd.items[0][0][0] == 6.0);
  CHECK(from_fd.items[1][0][0] == 5.0);

  CoarseDataset cd;
  cd.num_coarse_classes = 2;
  cd.input_dim = 1;
  cd.samples.push_back({{7.0}, 1});
  cd.samples.push_back({{8.0}, 0});
  cd.hidden_fine_ = {-1, -1};
  const SamplePool from_cd = SamplePool::from_coarse(cd);
  REQUIRE(from_cd.num_classes() == 2);
  CHECK(from_cd.items[0][0][0] == 8.0);
  CHECK(from_cd.items[1][0][0] == 7.0);
}

TEST_CASE("pool: eligibility by minimum class size") {
  const SamplePool pool = make_pool({5, 2, 7, 3});
  CHECK(pool.eligible(3) == std::vector<std::size_t>{0, 2, 3});
  CHECK(pool.eligible(6) == std::vector<std::size_t>{2});
  CHECK(pool.eligible(8).empty());
}

TEST_CASE("episode: shape contract and within-episode consistency") {
  const SamplePool pool = make_pool({6, 6, 6, 6});
  SeededRng rng(3);
  for (int t = 0; t < 50; ++t) {
    const Episode ep = sample_episode(pool, 3, 2, 2, rng);
    CHECK(ep.n_way == 3);
    CHECK(ep.k_shot == 2);
    CHECK(ep.q_query == 2);
    REQUIRE(ep.support.size() == 6);
    REQUIRE(ep.query.size() == 6);
    REQUIRE(ep.class_map.size() == 3);

    // class_map holds 3 distinct source classes
    std::set<int> sources(ep.class_map.begin(), ep.class_map.end());
    CHECK(sources.size() == 3);

    // episode labels cover 0..N-1, K or Q items each, and every item's
    // payload belongs to the mapped source class
    std::map<int, int> sup_counts, qry_counts;
    std::set<std::pair<int, std::size_t>> used;  // (source class, position)
    for (const auto& item : ep.support) {
      CHECK(item.episode_label >= 0);
      CHECK(item.episode_label < 3);
      ++sup_counts[item.episode_label];
      const int src = ep.class_map[static_cast<std::size_t>(item.episode_label)];
      CHECK(item.x[0] == static_cast<double>(src));
      CHECK(item.x[1] == static_cast<double>(item.source_index));
      CHECK(used.insert({src, item.source_index}).second);  // disjoint
    }
    for (const auto& item : ep.query) {
      ++qry_counts[item.episode_label];
      const int src = ep.class_map[static_cast<std::size_t>(item.episode_label)];
      CHECK(item.x[0] == static_cast<double>(src));
      CHECK(used.insert({src, item.source_index}).second);  // support/query disjoint
    }
    for (int l = 0; l < 3; ++l) {
      CHECK(sup_counts[l] == 2);
      CHECK(qry_counts[l] == 2);
    }
  }
}

TEST_CASE("episode: error split between class count and class size") {
  const SamplePool pool = make_pool({4, 4, 1});
  SeededRng rng(5);
  // only 3 classes exist
  try {
    sample_episode(pool, 4, 1, 1, rng);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientClasses);
  }
  // 3 classes exist but only 2 can fill K+Q = 3
  try {
    sample_episode(pool, 3, 1, 2, rng);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientSamples);
  }
  // bad shapes
  CHECK_THROWS_AS(sample_episode(pool, 0, 1, 1, rng), Error);
  CHECK_THROWS_AS(sample_episode(pool, 2, 0, 1, rng), Error);
  CHECK_THROWS_AS(sample_episode(pool, 2, 1, 0, rng), Error);
}

TEST_CASE("episode: class draws are uniform over eligible pairs") {
  // 2-way episodes over 4 equal classes: each of the 6 unordered pairs
  // should appear with frequency 1/6
  const SamplePool pool = make_pool({4, 4, 4, 4});
  std::map<std::set<int>, int> pair_counts;
  const int trials = 10000;
  SeededRng rng(7);
  for (int t = 0; t < trials; ++t) {
    const Episode ep = sample_episode(pool, 2, 1, 1, rng);
    pair_counts[{ep.class_map[0], ep.class_map[1]}]++;
  }
  CHECK(pair_counts.size() == 6);
  // 3-sigma band around 1/6 for a binomial proportion over 10^4 draws
  const double p = 1.0 / 6.0;
  const double band = 3.0 * std::sqrt(p * (1.0 - p) / trials);
  for (const auto& [pair, n] : pair_counts) {
    const double freq = static_cast<double>(n) / trials;
    CHECK(freq > p - band);
    CHECK(freq < p + band);
  }
}

TEST_CASE("episode: label permutation detaches labels from class ids") {
  // with classes {0,1}, episode label 0 should map to source class 0 about
  // half the time; a missing permutation would pin it to the first drawn
  const SamplePool pool = make_pool({3, 3});
  int label0_is_class0 = 0;
  const int trials = 4000;
  SeededRng rng(9);
  for (int t = 0; t < trials; ++t) {
    const Episode ep = sample_episode(pool, 2, 1, 1, rng);
    label0_is_class0 += ep.class_map[0] == 0;
  }
  const double freq = static_cast<double>(label0_is_class0) / trials;
  CHECK(freq > 0.45);
  CHECK(freq < 0.55);
}

TEST_CASE("stream: deterministic, restartable, and order independent") {
  const SamplePool pool = make_pool({8, 8, 8, 5, 8});
  const auto a = episode_stream(pool, 3, 1, 2, 12, 42);
  const auto b = episode_stream(pool, 3, 1, 2, 12, 42);
  REQUIRE(a.size() == 12);
  for (std::size_t e = 0; e < a.size(); ++e) {
    CHECK(a[e].class_map == b[e].class_map);
    REQUIRE(a[e].support.size() == b[e].support.size());
    for (std::size_t i = 0; i < a[e].support.size(); ++i) {
      CHECK(a[e].support[i].x == b[e].support[i].x);
      CHECK(a[e].support[i].episode_label == b[e].support[i].episode_label);
    }
  }
  // a shorter stream is a prefix of a longer one: episode e depends only on
  // (seed, e), not on how many episodes were requested
  const auto head = episode_stream(pool, 3, 1, 2, 5, 42);
  for (std::size_t e = 0; e < head.size(); ++e) {
    CHECK(head[e].class_map == a[e].class_map);
    for (std::size_t i = 0; i < head[e].query.size(); ++i)
      CHECK(head[e].query[i].x == a[e].query[i].x);
  }
  // different seed, different stream
  const auto c = episode_stream(pool, 3, 1, 2, 12, 43);
  bool any_diff = false;
  for (std::size_t e = 0; e < c.size(); ++e) any_diff |= !(c[e].class_map == a[e].class_map);
  CHECK(any_diff);
}

TEST_CASE("stream: undersized classes are never drawn") {
  // class 3 holds 2 samples and cannot fill K+Q = 4
  const SamplePool pool = make_pool({6, 6, 6, 2, 6});
  const auto eps = episode_stream(pool, 3, 2, 2, 40, 11);
  for (const auto& ep : eps)
    for (int src : ep.class_map) CHECK(src != 3);
}

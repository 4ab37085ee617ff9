#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "cfml/errors.hpp"
#include "cfml/metrics.hpp"
#include "oracles.hpp"

using namespace cfml;

static std::vector<Vector> random_unit_set(std::size_t n, std::size_t d,
                                           SeededRng& rng) {
  std::vector<Vector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(oracle::random_unit(d, rng));
  return out;
}

TEST_CASE("knn: k=1 returns the nearest neighbor's label") {
  std::vector<Vector> train{{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}};
  std::vector<int> labels{5, 7, 9};
  KnnConfig cfg;
  cfg.k = 1;
  CHECK(weighted_knn_predict(train, labels, Vector{0.9, 0.1}, cfg) == 5);
  CHECK(weighted_knn_predict(train, labels, Vector{0.1, 0.9}, cfg) == 7);
  CHECK(weighted_knn_predict(train, labels, Vector{-0.7, -0.1}, cfg) == 9);
}

TEST_CASE("knn: single-label train set always wins") {
  SeededRng rng(5);
  auto train = random_unit_set(40, 6, rng);
  std::vector<int> labels(40, 3);
  KnnConfig cfg;
  cfg.k = 10;
  for (int t = 0; t < 10; ++t) {
    const Vector probe = oracle::random_unit(6, rng);
    CHECK(weighted_knn_predict(train, labels, probe, cfg) == 3);
  }
}

TEST_CASE("knn: equal votes break toward the lowest label") {
  // two neighbors with identical similarity but different labels
  std::vector<Vector> train{{1.0, 0.0}, {1.0, 0.0}};
  std::vector<int> labels{4, 2};
  KnnConfig cfg;
  cfg.k = 2;
  CHECK(weighted_knn_predict(train, labels, Vector{1.0, 0.0}, cfg) == 2);
}

TEST_CASE("knn: negative similarities vote against a label in raw mode") {
  // one aligned neighbor of label 1, two anti-aligned of label 0: label 0's
  // votes sum negative, so label 1 wins even though it is outnumbered.
  std::vector<Vector> train{{-1.0, 0.0}, {-1.0, 0.0}, {1.0, 0.0}};
  std::vector<int> labels{0, 0, 1};
  KnnConfig cfg;
  cfg.k = 3;
  cfg.weight = KnnWeight::Similarity;
  CHECK(weighted_knn_predict(train, labels, Vector{1.0, 0.0}, cfg) == 1);
  // exponential weighting keeps votes positive but tiny for anti-aligned
  cfg.weight = KnnWeight::ExpTau;
  CHECK(weighted_knn_predict(train, labels, Vector{1.0, 0.0}, cfg) == 1);
}

TEST_CASE("knn: matches a brute-force oracle on random data") {
  SeededRng rng(41);
  const std::size_t n = 300, d = 8;
  auto train = random_unit_set(n, d, rng);
  std::vector<int> labels(n);
  for (auto& l : labels) l = static_cast<int>(rng.uniform_below(12));
  for (auto mode : {KnnWeight::Similarity, KnnWeight::ExpTau}) {
    KnnConfig cfg;
    cfg.weight = mode;
    for (int k : {1, 7, 50, 200, 500}) {
      cfg.k = k;
      for (int t = 0; t < 25; ++t) {
        const Vector probe = oracle::random_unit(d, rng);
        const int got = weighted_knn_predict(train, labels, probe, cfg);
        const int want = oracle::brute_knn(train, labels, probe,
                                           static_cast<std::size_t>(k),
                                           mode == KnnWeight::ExpTau, cfg.tau);
        CHECK(got == want);
      }
    }
  }
}

TEST_CASE("knn: batch wrapper agrees with per-probe calls") {
  SeededRng rng(43);
  auto train = random_unit_set(60, 5, rng);
  std::vector<int> labels(60);
  for (auto& l : labels) l = static_cast<int>(rng.uniform_below(4));
  auto probes = random_unit_set(17, 5, rng);
  KnnConfig cfg;
  cfg.k = 9;
  const auto batch = knn_predict_batch(train, labels, probes, cfg);
  REQUIRE(batch.size() == probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i)
    CHECK(batch[i] == weighted_knn_predict(train, labels, probes[i], cfg));
}

TEST_CASE("knn: input validation") {
  std::vector<Vector> train{{1.0, 0.0}};
  std::vector<int> labels{0};
  KnnConfig cfg;
  CHECK_THROWS_AS(weighted_knn_predict({}, {}, Vector{1.0, 0.0}, cfg), Error);
  CHECK_THROWS_AS(
      weighted_knn_predict(train, std::vector<int>{0, 1}, Vector{1.0, 0.0}, cfg),
      Error);
  KnnConfig zero_k;
  zero_k.k = 0;
  CHECK_THROWS_AS(weighted_knn_predict(train, labels, Vector{1.0, 0.0}, zero_k),
                  Error);
  KnnConfig bad_tau;
  bad_tau.weight = KnnWeight::ExpTau;
  bad_tau.tau = 0.0;
  CHECK_THROWS_AS(weighted_knn_predict(train, labels, Vector{1.0, 0.0}, bad_tau),
                  Error);
  CHECK_THROWS_AS(weighted_knn_predict(train, labels, Vector{1.0, 0.0, 0.0}, cfg),
                  Error);
}

TEST_CASE("accuracy_ci: closed form on a balanced 0/1 sample") {
  // [DERIVED] 1.96*sqrt(250/999)/sqrt(1000), computed independently
  Vector accs(1000);
  for (std::size_t i = 0; i < 500; ++i) accs[i] = 1.0;
  const EvalReport r = accuracy_ci(accs);
  CHECK(r.mean_accuracy == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(r.ci95 - oracle::kCi95Balanced1000) < 1e-12);
  CHECK(r.episodes == 1000);
}

TEST_CASE("accuracy_ci: degenerate and invalid inputs") {
  const EvalReport ones = accuracy_ci(Vector(64, 1.0));
  CHECK(ones.mean_accuracy == 1.0);
  CHECK(ones.ci95 == 0.0);
  const EvalReport single = accuracy_ci(Vector{0.7});
  CHECK(single.mean_accuracy == 0.7);
  CHECK(single.ci95 == 0.0);
  CHECK_THROWS_AS(accuracy_ci(Vector{}), Error);
  CHECK_THROWS_AS(accuracy_ci(Vector{0.5, 1.2}), Error);
  CHECK_THROWS_AS(accuracy_ci(Vector{-0.1}), Error);
}

TEST_CASE("ari: identical and relabeled partitions score exactly 1") {
  std::vector<int> a{0, 0, 1, 1, 2, 2, 2};
  CHECK(adjusted_rand_index(a, a) == 1.0);
  std::vector<int> renamed{5, 5, 9, 9, 1, 1, 1};
  CHECK(adjusted_rand_index(a, renamed) == 1.0);
}

TEST_CASE("ari: frozen small cases from the published formula") {
  // [DERIVED] exact rationals 2/17 and 8/33 computed by hand from the
  // pair-counting definition
  CHECK(adjusted_rand_index({0, 0, 1, 1, 1, 2}, {0, 0, 0, 1, 1, 1}) ==
        doctest::Approx(2.0 / 17.0).epsilon(1e-12));
  CHECK(adjusted_rand_index({0, 0, 0, 1, 1, 1}, {0, 0, 1, 1, 2, 2}) ==
        doctest::Approx(8.0 / 33.0).epsilon(1e-12));
}

TEST_CASE("ari: singletons versus one big cluster score 0") {
  CHECK(adjusted_rand_index({0, 1, 2, 3}, {0, 0, 0, 0}) == 0.0);
  CHECK(adjusted_rand_index({0, 0, 0, 0}, {0, 1, 2, 3}) == 0.0);
}

TEST_CASE("ari: degenerate all-same versus all-same") {
  // both sides a single cluster: max_index == expected_index, but the
  // partitions are identical, so the score is pinned to 1
  CHECK(adjusted_rand_index({0, 0, 0}, {4, 4, 4}) == 1.0);
  // all singletons on both sides is also identical as a partition
  CHECK(adjusted_rand_index({0, 1, 2}, {7, 8, 9}) == 1.0);
}

TEST_CASE("ari: symmetric in its arguments") {
  SeededRng rng(59);
  for (int t = 0; t < 30; ++t) {
    std::vector<int> a(40), b(40);
    for (auto& x : a) x = static_cast<int>(rng.uniform_below(5));
    for (auto& x : b) x = static_cast<int>(rng.uniform_below(3));
    CHECK(adjusted_rand_index(a, b) == adjusted_rand_index(b, a));
  }
}

TEST_CASE("ari: near zero for independent random partitions") {
  SeededRng rng(61);
  double sum = 0.0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    std::vector<int> a(200), b(200);
    for (auto& x : a) x = static_cast<int>(rng.uniform_below(5));
    for (auto& x : b) x = static_cast<int>(rng.uniform_below(5));
    sum += adjusted_rand_index(a, b);
  }
  CHECK(std::abs(sum / trials) < 0.05);
}

TEST_CASE("ari: input validation") {
  CHECK_THROWS_AS(adjusted_rand_index({0, 1}, {0, 1, 2}), Error);
  CHECK_THROWS_AS(adjusted_rand_index({0}, {0}), Error);
  CHECK_THROWS_AS(adjusted_rand_index({}, {}), Error);
}

TEST_CASE("eval report serializes with a stable schema") {
  EvalReport r;
  r.n_way = 5;
  r.k_shot = 1;
  r.q_query = 15;
  r.episodes = 1000;
  r.mean_accuracy = 0.5;
  r.ci95 = 0.03125;
  r.seed = 7;
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j.at("n_way").get<int>() == 5);
  CHECK(j.at("k_shot").get<int>() == 1);
  CHECK(j.at("q_query").get<int>() == 15);
  CHECK(j.at("episodes").get<std::size_t>() == 1000);
  CHECK(j.at("mean_accuracy").get<double>() == 0.5);
  CHECK(j.at("ci95").get<double>() == 0.03125);
  CHECK(j.at("seed").get<std::uint64_t>() == 7);
  CHECK(j.size() == 7);
  // equal reports serialize identically; a field change shows up
  EvalReport same = r;
  CHECK(same.to_json() == r.to_json());
  same.mean_accuracy = 0.25;
  CHECK_FALSE(same.to_json() == r.to_json());
}

// Independent reference implementations and frozen constants used by the
// tests. Everything here is deliberately naive (triple loops, long double,
// full sorts) so it shares no code with the library under test. Frozen
// decimal constants were computed with 40-digit arithmetic and pasted in.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

#include "cfml/numerics.hpp"

namespace oracle {

// --- frozen high-precision constants -------------------------------------
// softmax([1,2,3])
inline constexpr double kSoftmax123[3] = {0.0900305731703804579980221,
                                          0.2447284710547976524729596,
                                          0.6652409557748218895290183};
// softmax([0,-2])
inline constexpr double kSoftmax0m2[2] = {0.8807970779778824440597291,
                                          0.1192029220221175559402709};
// visual loss for two orthonormal instances, clean copies, tau = 0.1
inline constexpr double kVisualLossOrtho2 = 1.815955968674585870779513e-04;
// 1.96 * sqrt(250/999) / sqrt(1000): ci95 of 500 ones + 500 zeros
inline constexpr double kCi95Balanced1000 = 0.03100582786124830051481494;
// ln 5: mean cross-entropy of a uniform 5-way predictor
inline constexpr double kLog5 = 1.609437912434100374600759;

// --- naive gram ----------------------------------------------------------
inline cfml::Matrix naive_gram(const cfml::Matrix& f) {
  cfml::Matrix g(f.cols, f.cols);
  for (std::size_t i = 0; i < f.cols; ++i)
    for (std::size_t j = 0; j < f.cols; ++j) {
      long double acc = 0.0L;
      for (std::size_t d = 0; d < f.rows; ++d)
        acc += static_cast<long double>(f.at(d, i)) * f.at(d, j);
      g.at(i, j) = static_cast<double>(acc);
    }
  return g;
}

// --- scalar loss formulas (long double, straight from the definitions) ---
// columns of f / f_hat are the embeddings; no normalization is applied here.
inline long double visual_loss_scalar(const cfml::Matrix& f,
                                      const cfml::Matrix& f_hat, double tau) {
  const std::size_t m = f.cols, d = f.rows;
  auto score = [&](std::size_t k, const cfml::Matrix& probe, std::size_t i) {
    long double s = 0.0L;
    for (std::size_t r = 0; r < d; ++r)
      s += static_cast<long double>(f.at(r, k)) * probe.at(r, i);
    return s / static_cast<long double>(tau);
  };
  auto prob = [&](std::size_t k, const cfml::Matrix& probe, std::size_t i) {
    long double num = 0.0L, den = 0.0L, mx = score(0, probe, i);
    for (std::size_t t = 1; t < m; ++t) mx = std::max(mx, score(t, probe, i));
    for (std::size_t t = 0; t < m; ++t) {
      long double e = std::exp(score(t, probe, i) - mx);
      den += e;
      if (t == k) num = e;
    }
    return num / den;
  };
  long double loss = 0.0L;
  for (std::size_t i = 0; i < m; ++i) loss -= std::log(prob(i, f_hat, i));
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < m; ++i)
      if (i != j) loss -= std::log(1.0L - prob(i, f, j));
  return loss;
}

// cross entropy of an untempered bias-free linear head, summed over columns.
inline long double semantic_loss_scalar(const cfml::Matrix& w,
                                        const cfml::Matrix& f,
                                        const cfml::Matrix& f_hat,
                                        const std::vector<int>& labels) {
  const std::size_t c = w.cols, d = w.rows;
  auto ce = [&](const cfml::Matrix& probe, std::size_t i, int y) {
    std::vector<long double> s(c, 0.0L);
    for (std::size_t k = 0; k < c; ++k)
      for (std::size_t r = 0; r < d; ++r)
        s[k] += static_cast<long double>(w.at(r, k)) * probe.at(r, i);
    long double mx = *std::max_element(s.begin(), s.end());
    long double den = 0.0L;
    for (std::size_t k = 0; k < c; ++k) den += std::exp(s[k] - mx);
    return -(s[static_cast<std::size_t>(y)] - mx - std::log(den));
  };
  long double loss = 0.0L;
  for (std::size_t i = 0; i < f.cols; ++i) {
    loss += ce(f, i, labels[i]);
    loss += ce(f_hat, i, labels[i]);
  }
  return loss;
}

// --- brute-force weighted kNN --------------------------------------------
// Full sort by (similarity desc, index asc), then vote over the top k.
inline int brute_knn(const std::vector<cfml::Vector>& train,
                     const std::vector<int>& labels, const cfml::Vector& probe,
                     std::size_t k, bool exp_tau = false, double tau = 0.1) {
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> sim(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    long double s = 0.0L;
    for (std::size_t d = 0; d < probe.size(); ++d)
      s += static_cast<long double>(train[i][d]) * probe[d];
    sim[i] = static_cast<double>(s);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sim[a] != sim[b]) return sim[a] > sim[b];
    return a < b;
  });
  const std::size_t kk = std::min(k, train.size());
  std::map<int, double> votes;
  for (std::size_t r = 0; r < kk; ++r) {
    const std::size_t i = order[r];
    votes[labels[i]] += exp_tau ? std::exp(sim[i] / tau) : sim[i];
  }
  int best = -1;
  double best_v = 0.0;
  for (const auto& [lbl, v] : votes)
    if (best < 0 || v > best_v) {
      best = lbl;
      best_v = v;
    }
  return best;
}

// --- plain k-means (Lloyd) for separability checks ------------------------
inline std::vector<int> kmeans(const std::vector<cfml::Vector>& xs, int k,
                               cfml::SeededRng& rng, int iters = 50) {
  const std::size_t n = xs.size(), d = xs[0].size();
  std::vector<cfml::Vector> centers;
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(perm);
  for (int c = 0; c < k; ++c) centers.push_back(xs[perm[static_cast<std::size_t>(c)]]);
  std::vector<int> assign(n, 0);
  for (int it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = 0.0;
      int arg = -1;
      for (int c = 0; c < k; ++c) {
        double dist = 0.0;
        for (std::size_t r = 0; r < d; ++r) {
          const double diff = xs[i][r] - centers[static_cast<std::size_t>(c)][r];
          dist += diff * diff;
        }
        if (arg < 0 || dist < best) {
          best = dist;
          arg = c;
        }
      }
      assign[i] = arg;
    }
    std::vector<cfml::Vector> acc(static_cast<std::size_t>(k), cfml::Vector(d, 0.0));
    std::vector<std::size_t> cnt(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(assign[i]);
      ++cnt[c];
      for (std::size_t r = 0; r < d; ++r) acc[c][r] += xs[i][r];
    }
    for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c)
      if (cnt[c] > 0)
        for (std::size_t r = 0; r < d; ++r) centers[c][r] = acc[c][r] / static_cast<double>(cnt[c]);
  }
  return assign;
}

// --- misc helpers ---------------------------------------------------------
inline cfml::Vector random_unit(std::size_t d, cfml::SeededRng& rng) {
  cfml::Vector v(d);
  for (auto& x : v) x = rng.gaussian();
  return cfml::l2_normalize(v);
}

inline cfml::Matrix columns(const std::vector<cfml::Vector>& cols) {
  cfml::Matrix m(cols[0].size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t r = 0; r < cols[j].size(); ++r) m.at(r, j) = cols[j][r];
  return m;
}

}  // namespace oracle

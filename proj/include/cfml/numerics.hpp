#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <random>
#include <vector>

#include "cfml/errors.hpp"

namespace cfml {

using Vector = std::vector<double>;

/// Maps an input sample to a unit-norm embedding. Implementations must be
/// pure (safe to call concurrently).
using EmbedFn = std::function<Vector(const Vector&)>;

/// Dense row-major matrix. No arithmetic operators on purpose; the few
/// kernels that need matrix math spell out their loops so the reduction
/// order stays fixed.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    bool operator==(const Matrix&) const = default;
};

/// Deterministic random source. Raw draws come from std::mt19937_64 (fully
/// specified by the standard); all distribution transforms are implemented
/// here explicitly so the draw sequence does not depend on the standard
/// library vendor. Single-owner: hand off, never share across threads.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01();

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t uniform_below(std::uint64_t n);

    double uniform(double lo, double hi);

    /// Standard normal via Box-Muller (cosine branch, stateless:
    /// two uniforms per draw).
    double gaussian();

    /// Fisher-Yates shuffle driven by this generator.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    /// Stable derivation of an independent sub-seed (splitmix64 finalizer).
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t tag);

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

constexpr double kNormEpsilon = 1e-12;

/// Sequential dot product; index order is the determinism contract.
double dot(const Vector& a, const Vector& b);

double norm(const Vector& v);

bool all_finite(const Vector& v);

/// Scales v to unit length. Throws ZeroNorm when the norm is <= 1e-12.
Vector l2_normalize(const Vector& v);

/// Numerically safe softmax (max subtraction). Throws EmptyInput.
Vector softmax(const Vector& scores);

/// In-place softmax over a raw range; shared by the batch kernels so the
/// serial and parallel paths produce bit-identical values.
void softmax_inplace(double* values, std::size_t n);

/// Similarity matrix S = F^T F for a D x M matrix whose columns are
/// unit-norm embeddings. Parallel over output rows; each entry is a
/// sequential dot, and the lower triangle mirrors the upper, so the result
/// is bit-stable for any thread count.
Matrix gram(const Matrix& f);

namespace ref {
/// Naive double-loop reference, kept serial for testing and benchmarks.
Matrix gram(const Matrix& f);
} // namespace ref

/// Max over coordinates of |analytic - central difference| / max(1, |analytic|).
/// Throws NonFiniteFunction if f evaluates to NaN/Inf near the point.
double check_gradient(const std::function<double(const Vector&)>& f,
                      const std::function<Vector(const Vector&)>& grad_f,
                      const Vector& point, double step = 1e-5);

/// Exceptions must not escape an OpenMP region. Loop bodies that can throw
/// run through run(); afterwards rethrow_first() raises the exception from
/// the lowest slot, so the error a caller sees is thread-count independent.
class ParallelErrors {
public:
    explicit ParallelErrors(std::size_t slots) : slots_(slots) {}

    template <typename F> void run(std::size_t slot, F&& body) noexcept {
        try {
            body();
        } catch (...) {
            slots_[slot] = std::current_exception();
        }
    }

    void rethrow_first() const {
        for (const std::exception_ptr& e : slots_)
            if (e) std::rethrow_exception(e);
    }

private:
    std::vector<std::exception_ptr> slots_;
};

} // namespace cfml

#include "cfml/numerics.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cfml {

const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::ZeroNorm: return "ZeroNorm";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteFunction: return "NonFiniteFunction";
    case ErrorCode::NonPositiveTemperature: return "NonPositiveTemperature";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::OverlappingSplit: return "OverlappingSplit";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::InvalidGroupSize: return "InvalidGroupSize";
    case ErrorCode::EmbeddingDimMismatch: return "EmbeddingDimMismatch";
    case ErrorCode::InsufficientClasses: return "InsufficientClasses";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::EmptyTrainSet: return "EmptyTrainSet";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "UnknownError";
}

double SeededRng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t SeededRng::uniform_below(std::uint64_t n) {
    if (n == 0) throw Error(ErrorCode::EmptyInput, "uniform_below(0)");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

double SeededRng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

double SeededRng::gaussian() {
    // u1 in (0, 1] keeps the log finite.
    double u1 = 1.0 - uniform01();
    double u2 = uniform01();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

std::uint64_t SeededRng::derive(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::DimensionMismatch, "dot: lengths differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const Vector& v) { return std::sqrt(dot(v, v)); }

bool all_finite(const Vector& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

Vector l2_normalize(const Vector& v) {
    double n = norm(v);
    if (!(n > kNormEpsilon))
        throw Error(ErrorCode::ZeroNorm, "l2_normalize: norm <= 1e-12");
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
    return out;
}

void softmax_inplace(double* values, std::size_t n) {
    double mx = values[0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, values[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        values[i] = std::exp(values[i] - mx);
        sum += values[i];
    }
    for (std::size_t i = 0; i < n; ++i) values[i] /= sum;
}

Vector softmax(const Vector& scores) {
    if (scores.empty()) throw Error(ErrorCode::EmptyInput, "softmax: empty input");
    Vector out = scores;
    softmax_inplace(out.data(), out.size());
    return out;
}

namespace {

inline double column_dot(const Matrix& f, std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t d = 0; d < f.rows; ++d) s += f.at(d, i) * f.at(d, j);
    return s;
}

} // namespace

Matrix gram(const Matrix& f) {
    if (f.rows == 0 || f.cols == 0)
        throw Error(ErrorCode::DimensionMismatch, "gram: empty matrix");
    const std::size_t m = f.cols;
    Matrix s(m, m);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8)
#endif
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            double v = column_dot(f, i, j);
            s.at(i, j) = v;
            s.at(j, i) = v;
        }
    }
    return s;
}

namespace ref {

Matrix gram(const Matrix& f) {
    if (f.rows == 0 || f.cols == 0)
        throw Error(ErrorCode::DimensionMismatch, "gram: empty matrix");
    const std::size_t m = f.cols;
    Matrix s(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            s.at(i, j) = column_dot(f, i, j);
    return s;
}

} // namespace ref

double check_gradient(const std::function<double(const Vector&)>& f,
                      const std::function<Vector(const Vector&)>& grad_f,
                      const Vector& point, double step) {
    Vector analytic = grad_f(point);
    if (analytic.size() != point.size())
        throw Error(ErrorCode::DimensionMismatch, "check_gradient: gradient length");
    double worst = 0.0;
    Vector p = point;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double saved = p[i];
        p[i] = saved + step;
        double fp = f(p);
        p[i] = saved - step;
        double fm = f(p);
        p[i] = saved;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw Error(ErrorCode::NonFiniteFunction, "check_gradient: f not finite");
        double fd = (fp - fm) / (2.0 * step);
        double err = std::abs(analytic[i] - fd) / std::max(1.0, std::abs(analytic[i]));
        worst = std::max(worst, err);
    }
    return worst;
}

} // namespace cfml

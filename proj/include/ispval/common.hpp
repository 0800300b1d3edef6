#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ispval {

// ---------------------------------------------------------------------------
// Error hierarchy
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

// p-hat style estimators require exact dP/dQ weights.
class NonNormalizedWeights : public Error {
public:
    using Error::Error;
};

// Weights known up to a constant must all share that constant.
class MixedWeightScales : public Error {
public:
    using Error::Error;
};

class DegenerateWeights : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class InfeasibleMargins : public Error {
public:
    using Error::Error;
};

class NotInFiber : public Error {
public:
    using Error::Error;
};

class TooLarge : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, long line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Compensated summation
// ---------------------------------------------------------------------------

// Kahan accumulator. Falls back to plain accumulation once the running
// sum leaves the finite range, so infinities do not poison the state with NaN.
class KahanSum {
public:
    void add(double x) {
        double y = x - c_;
        double t = sum_ + y;
        if (std::isfinite(t)) {
            c_ = (t - sum_) - y;
        } else {
            c_ = 0.0;
        }
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

// log(sum_i exp(x_i)) with max shift; empty input or all -inf gives -inf.
inline double log_sum_exp(std::span<const double> xs) {
    double m = kNegInf;
    for (double x : xs) m = std::max(m, x);
    if (m == kNegInf) return kNegInf;
    KahanSum s;
    for (double x : xs) s.add(std::exp(x - m));
    return m + std::log(s.value());
}

inline double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// ---------------------------------------------------------------------------
// Deterministic random streams
// ---------------------------------------------------------------------------

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += kGolden);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Stream `index` of a master seed. Streams are stable across thread counts:
// replication i always sees the same generator state.
inline Rng make_stream(std::uint64_t master_seed, std::uint64_t index) {
    std::uint64_t s = master_seed;
    s ^= splitmix64(index) + kGolden + (index << 1);
    std::uint64_t seed = splitmix64(s);
    return Rng(seed);
}

// Named sub-seed of a master seed, for keeping experiment phases apart.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
    std::uint64_t s = master ^ (0xA24BAED4963EE407ull + kGolden * (tag + 1));
    return splitmix64(s);
}

// Uniform on the open interval (0,1).
inline double uniform01(Rng& g) {
    return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
}

// Unbiased integer in [0, n).
inline std::uint64_t uniform_below(Rng& g, std::uint64_t n) {
    std::uint64_t threshold = (0 - n) % n;
    for (;;) {
        std::uint64_t r = g();
        if (r >= threshold) return r % n;
    }
}

// Standard normal via Marsaglia polar (no cached spare: keeps draws a pure
// function of the stream position).
inline double normal_variate(Rng& g) {
    for (;;) {
        double u = 2.0 * uniform01(g) - 1.0;
        double v = 2.0 * uniform01(g) - 1.0;
        double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }
}

// Standard Cauchy by inverse cdf.
inline double cauchy_variate(Rng& g) {
    return std::tan(3.14159265358979323846 * (uniform01(g) - 0.5));
}

// k distinct indices from [0, n), uniformly, in selection order.
std::vector<int> sample_without_replacement(Rng& g, int n, int k);

// In-place Fisher-Yates.
template <typename T>
void shuffle_vector(Rng& g, std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = uniform_below(g, i);
        std::swap(v[i - 1], v[j]);
    }
}

// ---------------------------------------------------------------------------
// Deterministic parallel loop
// ---------------------------------------------------------------------------

// Runs fn(i) for i in [0, count). Work item i must not depend on any other
// item, so results are identical for every thread count.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

unsigned default_thread_count();

}  // namespace ispval

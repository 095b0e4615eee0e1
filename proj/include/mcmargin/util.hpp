#pragma once

#include <cstdint>
#include <cstdio>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcmargin {

// Shortest exact decimal form: 17 significant digits round-trip any double.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Stream derivation: independent sub-seeds from a master seed and a tag path.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = splitmix64(seed ^ 0xA24BAED4963EE407ull);
    h = splitmix64(h ^ splitmix64(a));
    h = splitmix64(h ^ splitmix64(b + 0x9552FCCA183EC8F1ull));
    h = splitmix64(h ^ splitmix64(c + 0x2B7E151628AED2A6ull));
    return h;
}

// mt19937_64 with a fixed 53-bit uniform mapping so draws do not depend on
// the standard library's distribution internals.
struct Rng {
    std::mt19937_64 eng;

    explicit Rng(std::uint64_t seed) : eng(seed) {}

    // uniform on [0,1)
    double unit() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * unit(); }

    bool bernoulli(double p) { return unit() < p; }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // rejection-free modulo bias is negligible for the small n used here,
        // but keep it exact anyway
        std::uint64_t lim = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v;
        do { v = eng(); } while (v >= lim);
        return v % n;
    }
};

// Dense row-major matrix, just enough for Gram matrices and parameter blocks.
struct Mat {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
};

// Running mean / standard error accumulator.
struct MeanAcc {
    long long n = 0;
    double mean = 0.0, m2 = 0.0;

    void add(double v) {
        ++n;
        double d = v - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (v - mean);
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double stderr_mean() const { return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace mcmargin

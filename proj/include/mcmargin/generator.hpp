#pragma once

#include <cmath>
#include <stdexcept>

#include "dataset.hpp"
#include "example_spec.hpp"
#include "util.hpp"

namespace mcmargin {

// Deterministic sampler: one mt19937_64 stream per handle, advanced in a
// fixed draw order. Repeated sample() calls continue the stream.
struct GeneratorHandle {
    ExampleSpec spec;
    std::uint64_t seed = 0;
    Rng rng;

    GeneratorHandle(const ExampleSpec& s, std::uint64_t seed_) : spec(s), seed(seed_), rng(seed_) {}
};

inline GeneratorHandle make_generator(const ExampleSpec& spec, std::uint64_t seed) {
    validate_spec(spec);
    return GeneratorHandle(spec, seed);
}

namespace detail {

// label draw given conditional probabilities, consuming exactly one uniform
inline int draw_label(Rng& rng, const std::vector<double>& probs) {
    double u = rng.unit(), acc = 0.0;
    for (size_t c = 0; c + 1 < probs.size(); ++c) {
        acc += probs[c];
        if (u < acc) return static_cast<int>(c) + 1;
    }
    return static_cast<int>(probs.size());
}

} // namespace detail

// One covariate draw from the world's X-marginal (label not included).
inline std::vector<double> draw_x(Rng& rng, const ExampleSpec& spec) {
    if (const auto* e = std::get_if<Ex51>(&spec)) {
        double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
        double mag = std::pow(rng.unit(), 1.0 / (e->gamma + 1.0));
        return {sign * mag};
    }
    if (const auto* e = std::get_if<Ex52>(&spec)) {
        for (;;) {
            double x1 = rng.uniform(-1.0, 1.0);
            double x2 = rng.uniform(-1.0, 1.0);
            double acc = std::pow(std::min(std::fabs(x1), std::fabs(x2)), e->gamma);
            if (rng.unit() < acc) return {x1, x2};
        }
    }
    if (std::holds_alternative<Ex53>(spec)) return {rng.unit()};
    const auto& e = std::get<Ex54>(spec);
    std::vector<double> x(e.p);
    for (int j = 0; j < e.p; ++j) x[j] = rng.uniform(-1.0, 1.0);
    return x;
}

inline Dataset sample(GeneratorHandle& gen, int n) {
    if (n < 1) throw std::invalid_argument("sample: n >= 1");
    Dataset ds;
    ds.k = spec_classes(gen.spec);
    ds.d = spec_dim(gen.spec);
    ds.x.reserve(n);
    ds.y.reserve(n);
    Rng& rng = gen.rng;

    for (int i = 0; i < n; ++i) {
        std::vector<double> x = draw_x(rng, gen.spec);
        int y = detail::draw_label(rng, label_probs(gen.spec, x));
        ds.x.push_back(std::move(x));
        ds.y.push_back(y);
    }
    return ds;
}

} // namespace mcmargin

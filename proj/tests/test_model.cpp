#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "mcmargin/decision.hpp"
#include "mcmargin/penalty.hpp"
#include "mcmargin/serialize.hpp"
#include "mcmargin/util.hpp"

using namespace mcmargin;

namespace {

// full-matrix Jacobi eigenvalue sweep; adequate for the small Grams used here
std::vector<double> sym_eigenvalues(Mat a) {
    const int n = a.rows;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-24) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (std::fabs(a(p, q)) < 1e-18) continue;
                double theta = 0.5 * (a(q, q) - a(p, p)) / a(p, q);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int i = 0; i < n; ++i) {
                    double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    double api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
            }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = a(i, i);
    return ev;
}

LinearDecision lin2(double w, double b) {
    LinearDecision d(2, 1, true);
    d.wfree = {w};
    d.bfree = {b};
    return d;
}

} // namespace

TEST_CASE("linear decision evaluation and zero sum") {
    LinearDecision d = lin2(1.0, 0.0);
    auto f = d.eval({0.5});
    CHECK(f[0] == Catch::Approx(0.5));
    CHECK(f[1] == Catch::Approx(-0.5));

    Rng rng(201);
    for (int t = 0; t < 200; ++t) {
        int k = 2 + static_cast<int>(rng.below(4));
        int dim = 1 + static_cast<int>(rng.below(3));
        LinearDecision dec(k, dim, true);
        for (double& w : dec.wfree) w = rng.uniform(-2.0, 2.0);
        for (double& b : dec.bfree) b = rng.uniform(-2.0, 2.0);
        std::vector<double> x(dim);
        for (double& v : x) v = rng.uniform(-2.0, 2.0);
        auto vals = dec.eval(x);
        double s = 0.0;
        for (double v : vals) s += v;
        CHECK(std::fabs(s) < 1e-10);
    }
    CHECK_THROWS(d.eval({0.5, 0.5}));  // dimension mismatch
}

TEST_CASE("zero-parameter decisions evaluate to zero") {
    LinearDecision lin(3, 2, true);
    for (double v : lin.eval({0.3, -0.4})) CHECK(v == 0.0);
    KernelDecision kd(3, KernelId::SplineW1, {{0.5}});
    for (double v : kd.eval({0.25})) CHECK(v == 0.0);
}

TEST_CASE("kernel decision evaluation") {
    KernelDecision kd(3, KernelId::SplineW1, {{0.2}});
    // alpha row (1, -1, 0): free columns store the first k-1 entries
    kd.afree = {1.0, -1.0};
    auto f = kd.eval({0.7});
    CHECK(f[0] == Catch::Approx(1.2));
    CHECK(f[1] == Catch::Approx(-1.2));
    CHECK(f[2] == Catch::Approx(0.0).margin(1e-12));

    Rng rng(202);
    for (int t = 0; t < 100; ++t) {
        int k = 2 + static_cast<int>(rng.below(3));
        std::vector<std::vector<double>> pts(4, std::vector<double>(1));
        for (auto& p : pts) p[0] = rng.unit();
        KernelDecision dec(k, KernelId::SplineW2, pts);
        for (double& a : dec.afree) a = rng.uniform(-1.0, 1.0);
        auto vals = dec.eval({rng.unit()});
        double s = 0.0;
        for (double v : vals) s += v;
        CHECK(std::fabs(s) < 1e-10);
    }
}

TEST_CASE("classification tie-break and scale invariance") {
    LinearDecision d(3, 1, true);
    CHECK(classify(Decision{d}, {0.7}) == 1);  // all-zero scores tie on class 1

    Rng rng(203);
    for (int t = 0; t < 200; ++t) {
        int k = 2 + static_cast<int>(rng.below(4));
        LinearDecision dec(k, 2, true);
        for (double& w : dec.wfree) w = rng.uniform(-2.0, 2.0);
        for (double& b : dec.bfree) b = rng.uniform(-1.0, 1.0);
        std::vector<double> x{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
        int before = classify(Decision{dec}, x);
        double c = rng.uniform(0.1, 10.0);
        LinearDecision scaled = dec;
        for (double& w : scaled.wfree) w *= c;
        for (double& b : scaled.bfree) b *= c;
        CHECK(classify(Decision{scaled}, x) == before);
    }
}

TEST_CASE("kernel formulas") {
    using V = std::vector<double>;
    CHECK(kernel_eval(KernelId::SplineW1, V{0.2}, V{0.7}) == Catch::Approx(1.2));
    CHECK(kernel_eval(KernelId::SplineW2, V{0.2}, V{0.7}) ==
          Catch::Approx(1.1526666666666665).epsilon(1e-15));
    CHECK(kernel_eval(KernelId::SplineW2, V{0.5}, V{0.5}) ==
          Catch::Approx(1.2916666666666667).epsilon(1e-15));
    Rng rng(204);
    for (int t = 0; t < 200; ++t) {
        double s = rng.unit(), u = rng.unit();
        CHECK(kernel_eval(KernelId::SplineW1, V{s}, V{u}) ==
              kernel_eval(KernelId::SplineW1, V{u}, V{s}));
        CHECK(kernel_eval(KernelId::SplineW2, V{s}, V{u}) ==
              kernel_eval(KernelId::SplineW2, V{u}, V{s}));
        CHECK(kernel_eval(KernelId::SplineW2, V{0.0}, V{u}) == Catch::Approx(1.0));
    }
    CHECK_THROWS(kernel_eval(KernelId::SplineW1, V{-0.1}, V{0.5}));
    CHECK_THROWS(kernel_eval(KernelId::SplineW2, V{0.5}, V{1.2}));
}

TEST_CASE("gram matrices are symmetric positive semidefinite") {
    Rng rng(205);
    for (KernelId kid : {KernelId::SplineW1, KernelId::SplineW2}) {
        for (int rep = 0; rep < 50; ++rep) {
            int n = 2 + static_cast<int>(rng.below(9));
            std::vector<std::vector<double>> pts(n, std::vector<double>(1));
            for (auto& p : pts) p[0] = rng.unit();
            Mat g = gram(kid, pts);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) CHECK(g(i, j) == g(j, i));
            for (double ev : sym_eigenvalues(g)) CHECK(ev >= -1e-8);
        }
    }
    // linear kernel on orthogonal unit vectors gives the identity
    Mat id = gram(KernelId::Linear, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(id(i, j) == (i == j ? 1.0 : 0.0));
}

TEST_CASE("penalty values at pinned points") {
    LinearDecision d(2, 2, true);
    d.wfree = {1.0, 1.0};  // derived second row is (-1, -1)
    CHECK(penalty_eval(Penalty{PenaltyId::SqL2, 0.5}, Decision{d}) == Catch::Approx(4.0));
    CHECK(penalty_eval(Penalty{PenaltyId::L1, 0.5}, Decision{d}) == Catch::Approx(4.0));

    LinearDecision e(2, 3, true);
    e.wfree = {1.0, 0.0, 0.0};
    CHECK(penalty_eval(Penalty{PenaltyId::ElasticNet, 0.9}, Decision{e}) == Catch::Approx(1.0));

    KernelDecision kd(3, KernelId::SplineW1, {{0.2}});
    kd.afree = {1.0, -1.0};
    CHECK(penalty_eval(Penalty{PenaltyId::RkhsSeminorm, 0.5}, Decision{kd}) ==
          Catch::Approx(2.4));
}

TEST_CASE("penalty homogeneity degrees") {
    Rng rng(206);
    for (int t = 0; t < 100; ++t) {
        LinearDecision d(2, 3, true);
        for (double& w : d.wfree) w = rng.uniform(-2.0, 2.0);
        double c = rng.uniform(0.2, 5.0);
        LinearDecision s = d;
        for (double& w : s.wfree) w *= c;
        CHECK(penalty_eval(Penalty{PenaltyId::SqL2, 0.5}, Decision{s}) ==
              Catch::Approx(c * c * penalty_eval(Penalty{PenaltyId::SqL2, 0.5}, Decision{d})));
        CHECK(penalty_eval(Penalty{PenaltyId::L1, 0.5}, Decision{s}) ==
              Catch::Approx(c * penalty_eval(Penalty{PenaltyId::L1, 0.5}, Decision{d})));

        KernelDecision kd(2, KernelId::SplineW2, {{0.1}, {0.8}});
        for (double& a : kd.afree) a = rng.uniform(-1.0, 1.0);
        KernelDecision ks = kd;
        for (double& a : ks.afree) a *= c;
        CHECK(penalty_eval(Penalty{PenaltyId::RkhsSeminorm, 0.5}, Decision{ks}) ==
              Catch::Approx(c * c *
                            penalty_eval(Penalty{PenaltyId::RkhsSeminorm, 0.5}, Decision{kd})));
    }
}

TEST_CASE("penalties ignore intercepts") {
    LinearDecision d(2, 1, true);
    d.wfree = {2.0};
    d.bfree = {0.0};
    LinearDecision e = d;
    e.bfree = {5.0};
    for (PenaltyId pid : {PenaltyId::SqL2, PenaltyId::L1, PenaltyId::ElasticNet})
        CHECK(penalty_eval(Penalty{pid, 0.5}, Decision{d}) ==
              penalty_eval(Penalty{pid, 0.5}, Decision{e}));
}

TEST_CASE("penalty and decision form mismatches are rejected") {
    LinearDecision lin(2, 1, true);
    KernelDecision kd(2, KernelId::SplineW1, {{0.5}});
    CHECK_THROWS(penalty_eval(Penalty{PenaltyId::RkhsSeminorm, 0.5}, Decision{lin}));
    CHECK_THROWS(penalty_eval(Penalty{PenaltyId::SqL2, 0.5}, Decision{kd}));
}

TEST_CASE("model serialization round-trips byte-identically") {
    Rng rng(207);
    for (int t = 0; t < 50; ++t) {
        Decision dec;
        if (t % 2 == 0) {
            int k = 2 + static_cast<int>(rng.below(3));
            bool ic = rng.bernoulli(0.5);
            LinearDecision lin(k, 2, ic);
            for (double& w : lin.wfree) w = rng.uniform(-3.0, 3.0);
            for (double& b : lin.bfree) b = rng.uniform(-3.0, 3.0);
            dec = lin;
        } else {
            int k = 2 + static_cast<int>(rng.below(3));
            std::vector<std::vector<double>> pts(3, std::vector<double>(1));
            for (auto& p : pts) p[0] = rng.unit();
            KernelDecision kd(k, rng.bernoulli(0.5) ? KernelId::SplineW1 : KernelId::SplineW2,
                              pts);
            for (double& a : kd.afree) a = rng.uniform(-3.0, 3.0);
            dec = kd;
        }
        std::string once = write_model_string(dec, "seed=1 generator=test spec=unit");
        ModelDoc doc = read_model_string(once);
        CHECK(write_model_string(doc.decision, doc.meta) == once);
    }
}

TEST_CASE("model parser rejects malformed documents") {
    CHECK_THROWS(read_model_string("not a model"));
    LinearDecision lin(2, 1, true);
    std::string good = write_model_string(Decision{lin}, "");
    CHECK_THROWS(read_model_string(good.substr(0, good.size() / 2)));
}

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include "mcmargin/dataset.hpp"
#include "mcmargin/generator.hpp"

using namespace mcmargin;

namespace {

constexpr double kKs1pc = 1.6276; // one-sample KS critical scale at the 1% level

double ks_stat(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        double f = cdf(xs[i]);
        d = std::max(d, std::max((i + 1) / n - f, f - i / n));
    }
    return d;
}

double three_sigma(double p, int n) { return 3.0 * std::sqrt(p * (1.0 - p) / n); }

std::vector<ExampleSpec> all_specs() {
    return {Ex51{0.75, 0.25, 0.0}, Ex52{0.7, 1.0}, Ex53{1}, Ex54{0.8, 3}};
}

} // namespace

TEST_CASE("identical spec and seed reproduce identical draws") {
    for (const ExampleSpec& spec : all_specs()) {
        auto g1 = make_generator(spec, 42);
        auto g2 = make_generator(spec, 42);
        Dataset a = sample(g1, 1000), b = sample(g2, 1000);
        REQUIRE(a.n() == b.n());
        CHECK(a.y == b.y);
        CHECK(a.x == b.x);
    }
}

TEST_CASE("repeated sampling continues the stream") {
    auto g1 = make_generator(Ex51{}, 7);
    auto g2 = make_generator(Ex51{}, 7);
    Dataset whole = sample(g1, 1000);
    Dataset first = sample(g2, 400), rest = sample(g2, 600);
    for (int i = 0; i < 400; ++i) {
        CHECK(whole.x[i] == first.x[i]);
        CHECK(whole.y[i] == first.y[i]);
    }
    for (int i = 0; i < 600; ++i) {
        CHECK(whole.x[400 + i] == rest.x[i]);
        CHECK(whole.y[400 + i] == rest.y[i]);
    }
}

TEST_CASE("adjacent seeds give different streams") {
    for (const ExampleSpec& spec : all_specs()) {
        auto g1 = make_generator(spec, 1000);
        auto g2 = make_generator(spec, 1001);
        Dataset a = sample(g1, 10), b = sample(g2, 10);
        bool differ = false;
        for (int i = 0; i < 10 && !differ; ++i)
            differ = a.x[i] != b.x[i] || a.y[i] != b.y[i];
        CHECK(differ);
    }
}

TEST_CASE("uniform-density marginal passes a KS test") {
    auto g = make_generator(Ex51{0.75, 0.25, 0.0}, 11);
    const int n = 100000;
    Dataset ds = sample(g, n);
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = ds.x[i][0];
    double d = ks_stat(std::move(xs), [](double t) { return (t + 1.0) / 2.0; });
    CHECK(d < kKs1pc / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("magnitude law follows the power CDF") {
    const double gamma = 2.0;
    auto g = make_generator(Ex51{0.75, 0.25, gamma}, 12);
    const int n = 100000;
    Dataset ds = sample(g, n);
    std::vector<double> mags(n);
    int pos = 0;
    for (int i = 0; i < n; ++i) {
        mags[i] = std::fabs(ds.x[i][0]);
        if (ds.x[i][0] > 0.0) ++pos;
    }
    double d = ks_stat(std::move(mags), [gamma](double t) { return std::pow(t, gamma + 1.0); });
    CHECK(d < kKs1pc / std::sqrt(static_cast<double>(n)));
    // sign is a fair coin, independent of the magnitude
    CHECK(std::fabs(pos / static_cast<double>(n) - 0.5) < three_sigma(0.5, n));
}

TEST_CASE("four-class world label and quadrant frequencies") {
    const int n = 100000;
    for (double gamma : {0.0, 2.0}) {
        const double theta = 0.7;
        auto g = make_generator(Ex52{theta, gamma}, 13);
        Dataset ds = sample(g, n);
        int own = 0;
        int quad[4] = {0, 0, 0, 0};
        for (int i = 0; i < n; ++i) {
            int r = ex52_region(ds.x[i][0], ds.x[i][1]);
            if (ds.y[i] == r) ++own;
            ++quad[r - 1];
        }
        CHECK(std::fabs(own / static_cast<double>(n) - theta) < three_sigma(theta, n));
        // symmetric density: each quadrant carries mass 1/4
        for (int q = 0; q < 4; ++q)
            CHECK(std::fabs(quad[q] / static_cast<double>(n) - 0.25) < three_sigma(0.25, n));
    }
}

TEST_CASE("three-class world region-conditional frequencies") {
    const int n = 100000;
    auto g = make_generator(Ex53{1}, 14);
    Dataset ds = sample(g, n);
    int count[3] = {0, 0, 0}, own[3] = {0, 0, 0};
    for (int i = 0; i < n; ++i) {
        double v = ds.x[i][0];
        int region = v <= 1.0 / 3.0 ? 0 : (v <= 2.0 / 3.0 ? 1 : 2);
        ++count[region];
        if (ds.y[i] == region + 1) ++own[region];
    }
    const double p = 5.0 / 11.0;
    for (int r = 0; r < 3; ++r) {
        REQUIRE(count[r] > 0);
        CHECK(std::fabs(own[r] / static_cast<double>(count[r]) - p) < three_sigma(p, count[r]));
    }
}

TEST_CASE("sparse world sign-conditional frequencies") {
    const int n = 100000;
    const double tau = 0.8;
    auto g = make_generator(Ex54{tau, 3}, 15);
    Dataset ds = sample(g, n);
    int npos = 0, pos1 = 0, nneg = 0, neg1 = 0;
    for (int i = 0; i < n; ++i) {
        if (ds.x[i][0] > 0.0) {
            ++npos;
            if (ds.y[i] == 1) ++pos1;
        } else {
            ++nneg;
            if (ds.y[i] == 1) ++neg1;
        }
    }
    CHECK(std::fabs(pos1 / static_cast<double>(npos) - tau) < three_sigma(tau, npos));
    CHECK(std::fabs(neg1 / static_cast<double>(nneg) - (1.0 - tau)) <
          three_sigma(1.0 - tau, nneg));
}

TEST_CASE("one-dimensional sparse world matches the flat two-class world") {
    // Ex54 at p=1 and Ex51 at gamma=0 with theta1=tau, theta2=1-tau share
    // one joint law; compare marginals by a two-sample KS test plus
    // sign-conditional label frequencies.
    const int n = 100000;
    const double tau = 0.8;
    auto ga = make_generator(Ex54{tau, 1}, 16);
    auto gb = make_generator(Ex51{tau, 1.0 - tau, 0.0}, 17);
    Dataset a = sample(ga, n), b = sample(gb, n);

    std::vector<double> xa(n), xb(n);
    for (int i = 0; i < n; ++i) {
        xa[i] = a.x[i][0];
        xb[i] = b.x[i][0];
    }
    std::sort(xa.begin(), xa.end());
    std::sort(xb.begin(), xb.end());
    double d = 0.0;
    size_t i = 0, j = 0;
    while (i < xa.size() && j < xb.size()) {
        if (xa[i] <= xb[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::fabs(i / static_cast<double>(n) - j / static_cast<double>(n)));
    }
    CHECK(d < kKs1pc * std::sqrt(2.0 / n));

    auto cond_freq = [n](const Dataset& ds, bool positive) {
        int tot = 0, ones = 0;
        for (int t = 0; t < n; ++t) {
            if ((ds.x[t][0] > 0.0) != positive) continue;
            ++tot;
            if (ds.y[t] == 1) ++ones;
        }
        return ones / static_cast<double>(tot);
    };
    CHECK(std::fabs(cond_freq(a, true) - cond_freq(b, true)) < 2.0 * three_sigma(tau, n / 2));
    CHECK(std::fabs(cond_freq(a, false) - cond_freq(b, false)) <
          2.0 * three_sigma(1.0 - tau, n / 2));
}

TEST_CASE("dataset CSV round-trip is exact") {
    for (const ExampleSpec& spec : all_specs()) {
        auto g = make_generator(spec, 18);
        Dataset ds = sample(g, 500);
        std::ostringstream os;
        write_dataset_csv(os, ds, "seed=18 generator=mt19937_64 spec=" + spec_string(spec));
        std::istringstream is(os.str());
        Dataset back = read_dataset_csv(is);
        REQUIRE(back.n() == ds.n());
        CHECK(back.d == ds.d);
        CHECK(back.y == ds.y);
        for (int i = 0; i < ds.n(); ++i)
            for (int j = 0; j < ds.d; ++j) CHECK(back.x[i][j] == ds.x[i][j]);
    }
}

TEST_CASE("dataset CSV parser rejects malformed input") {
    std::istringstream empty("");
    CHECK_THROWS(read_dataset_csv(empty));
    std::istringstream bad_header("x1,label\n0.5,1\n");
    CHECK_THROWS(read_dataset_csv(bad_header));
    std::istringstream short_row("x1,x2,y\n0.5,1\n");
    CHECK_THROWS(read_dataset_csv(short_row));
    std::istringstream zero_label("x1,y\n0.5,0\n");
    CHECK_THROWS(read_dataset_csv(zero_label));
}

TEST_CASE("generator construction validates parameters") {
    CHECK_THROWS_AS(make_generator(Ex51{0.4, 0.25, 0.0}, 1), usage_error);
    CHECK_THROWS_AS(make_generator(Ex51{0.75, 0.6, 0.0}, 1), usage_error);
    CHECK_THROWS_AS(make_generator(Ex51{0.75, 0.25, -1.0}, 1), usage_error);
    CHECK_THROWS_AS(make_generator(Ex52{0.2, 0.0}, 1), usage_error);
    CHECK_THROWS_AS(make_generator(Ex53{0}, 1), usage_error);
    CHECK_THROWS_AS(make_generator(Ex54{0.5, 1}, 1), usage_error);
    CHECK_THROWS_AS(make_generator(Ex54{0.8, 0}, 1), usage_error);

    auto g = make_generator(Ex51{}, 1);
    CHECK_THROWS(sample(g, 0));
}

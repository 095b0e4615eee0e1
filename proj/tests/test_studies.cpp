#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mcmargin/studies.hpp"

using namespace mcmargin;

TEST_CASE("figure study rows carry the documented invariants") {
    std::vector<double> grid{0.125, 0.25};
    auto rows = fig1_study(0.75, 0.0, grid);
    REQUIRE(rows.size() == grid.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].theta2 == grid[i]);
        CHECK(rows[i].e_v4 <= 1e-6);
        for (double v : {rows[i].e_v1, rows[i].e_v2, rows[i].e_v3, rows[i].e_v4})
            CHECK(v >= -1e-9);
    }
    // asymmetric side: regret falls as the loss flattens
    CHECK(rows[0].e_v1 >= rows[0].e_v2 - 1e-6);
    CHECK(rows[0].e_v2 >= rows[0].e_v3 - 1e-6);
    CHECK(rows[0].e_v3 >= rows[0].e_v4 - 1e-6);
    // symmetric point: every ideal rule is Bayes
    CHECK(rows[1].e_v1 <= 1e-4);
    CHECK(rows[1].e_v2 <= 1e-4);
    CHECK(rows[1].e_v3 <= 1e-4);
    CHECK(rows[1].e_v4 <= 1e-4);
}

TEST_CASE("figure study rejects bad grids") {
    CHECK_THROWS_AS(fig1_study(0.75, 0.0, {}), usage_error);
    CHECK_THROWS(fig1_study(0.75, 0.0, {0.6}));
    CHECK_THROWS(fig1_study(0.4, 0.0, {0.125}));
}

TEST_CASE("log-log regression recovers exact power laws") {
    std::vector<double> n{100, 200, 400, 800, 1600};
    std::vector<double> y(n.size());
    const double c = 3.7;
    for (size_t i = 0; i < n.size(); ++i) y[i] = c * std::pow(n[i], -0.5);
    SlopeFit f = fit_loglog_slope(n, y);
    CHECK(f.slope == Catch::Approx(-0.5).margin(1e-12));
    CHECK(f.intercept == Catch::Approx(std::log(c)).margin(1e-10));
    CHECK(f.se == Catch::Approx(0.0).margin(1e-10));

    CHECK_THROWS_AS(fit_loglog_slope({100}, {1.0}), usage_error);
    CHECK_THROWS_AS(fit_loglog_slope({100, 200}, {1.0}), usage_error);
    CHECK_THROWS_AS(fit_loglog_slope({-5, -2, -1}, {1.0, 1.0, 1.0}), usage_error);
}

TEST_CASE("rate study validates its options") {
    RateOptions opt;
    opt.fit.loss = LossId::BinaryHinge;
    opt.reps = 3;
    opt.n_grid = {40, 80};
    ExampleSpec spec = Ex51{0.75, 0.125, 0.0};
    CHECK_THROWS_AS(rate_study(spec, opt), usage_error);  // too few sizes
    opt.n_grid = {40, 80, 80};
    CHECK_THROWS_AS(rate_study(spec, opt), usage_error);  // not strictly increasing
    opt.n_grid = {40, 80, 160};
    opt.reps = 1;
    CHECK_THROWS_AS(rate_study(spec, opt), usage_error);  // too few reps
    opt.reps = 3;
    opt.lambda0 = 0.0;
    CHECK_THROWS_AS(rate_study(spec, opt), usage_error);  // bad schedule scale
}

TEST_CASE("rate study is deterministic and carries the stated exponent") {
    RateOptions opt;
    opt.fit.loss = LossId::BinaryHinge;
    opt.fit.penalty = {PenaltyId::SqL2, 0.5};
    opt.fit.max_iters = 2000;
    opt.fit.stages = 9;
    opt.n_grid = {40, 80, 160};
    opt.reps = 4;
    opt.seed = 5;
    ExampleSpec spec = Ex51{0.75, 0.125, 0.0};
    RateStudyResult a = rate_study(spec, opt);
    RateStudyResult b = rate_study(spec, opt);
    REQUIRE(a.rows.size() == 3);
    for (size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].n == opt.n_grid[i]);
        CHECK(a.rows[i].mean_regret == b.rows[i].mean_regret);
        CHECK(a.rows[i].stderr_regret == b.rows[i].stderr_regret);
        CHECK(a.rows[i].reps_used == opt.reps);
        // row invariant: means sit above the noise floor marker
        CHECK(a.rows[i].mean_regret >= -2.0 * a.rows[i].stderr_regret);
    }
    CHECK(a.slope.slope == b.slope.slope);
    CHECK(a.theory_slope == Catch::Approx(-0.5));
    CHECK(a.seed == opt.seed);
    CHECK(std::isfinite(a.slope.slope));

    // no stated exponent for this pairing: the field stays unset
    opt.fit.loss = LossId::Svm1;
    opt.reps = 2;
    RateStudyResult c = rate_study(Ex52{0.7, 0.0}, opt);
    CHECK(std::isnan(c.theory_slope));
}

TEST_CASE("feature study ranks the informative coordinate first") {
    FeatureOptions opt;
    opt.tau = 0.8;
    opt.p = 200;
    opt.n = 100;
    opt.theta = 0.9;
    opt.lambda_grid = {0.003, 0.01, 0.03, 0.1};
    opt.seed = 3;
    opt.fit.max_iters = 3000;
    opt.fit.stages = 10;
    FeatureStudyResult res = feature_study(opt);
    REQUIRE(res.ranked.size() == 200);
    CHECK(res.ranked[0].index == 1);
    CHECK_FALSE(res.degenerate);
    CHECK(res.test_ge <= 0.35);
    CHECK(res.val_error >= 0.0);
    CHECK(res.val_error <= 1.0);
    bool on_grid = false;
    for (double l : opt.lambda_grid) on_grid = on_grid || l == res.lambda_chosen;
    CHECK(on_grid);
    // ranked magnitudes are nonincreasing
    for (size_t j = 1; j < res.ranked.size(); ++j)
        CHECK(res.ranked[j - 1].weight >= res.ranked[j].weight);
}

TEST_CASE("feature study flags grid-wide zero fits") {
    FeatureOptions opt;
    opt.tau = 0.8;
    opt.p = 10;
    opt.n = 50;
    opt.theta = 0.9;
    opt.lambda_grid = {1e6};
    opt.seed = 4;
    opt.fit.max_iters = 1500;
    opt.fit.stages = 8;
    FeatureStudyResult res = feature_study(opt);
    CHECK(res.degenerate);
}

TEST_CASE("single-coordinate feature study matches the flat-world pipeline") {
    const double lambda = 0.01;
    FeatureOptions opt;
    opt.tau = 0.8;
    opt.p = 1;
    opt.n = 100;
    opt.theta = 0.9;
    opt.lambda_grid = {lambda};
    opt.seed = 6;
    opt.fit.max_iters = 3000;
    opt.fit.stages = 10;
    FeatureStudyResult res = feature_study(opt);

    // direct fit on the equivalent two-class flat world at matched (n, lambda)
    Ex51 world{0.8, 0.2, 0.0};
    auto gen = make_generator(world, 61);
    Dataset ds = sample(gen, 100);
    FitConfig cfg;
    cfg.loss = LossId::BinaryHinge;
    cfg.penalty = {PenaltyId::ElasticNet, 0.9};
    cfg.lambda = lambda;
    cfg.max_iters = 3000;
    cfg.stages = 10;
    FitReport fr = fit_linear(ds, cfg);
    double direct = generalization_error(world, fr.decision).value;
    CHECK(std::fabs(res.test_ge - direct) < 0.03);
}

TEST_CASE("feature study validates its options") {
    FeatureOptions opt;
    opt.lambda_grid = {0.01};
    opt.n = 5;
    CHECK_THROWS_AS(feature_study(opt), usage_error);
    opt.n = 100;
    opt.p = 0;
    CHECK_THROWS_AS(feature_study(opt), usage_error);
    opt.p = 10;
    opt.lambda_grid = {};
    CHECK_THROWS_AS(feature_study(opt), usage_error);
    opt.lambda_grid = {0.01};
    opt.tau = 0.5;
    CHECK_THROWS_AS(feature_study(opt), usage_error);
}

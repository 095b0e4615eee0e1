#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "generator.hpp"
#include "oracle.hpp"
#include "solver.hpp"
#include "util.hpp"

namespace mcmargin {

// ---- ideal-performance curves over the class-2 noise level ----------------

struct Fig1Row {
    double theta2 = 0.0;
    double e_v1 = 0.0;  // exponential
    double e_v2 = 0.0;  // logistic
    double e_v3 = 0.0;  // hinge
    double e_v4 = 0.0;  // psi
};

// Misclassification regret of each loss's ideal linear classifier on the
// two-class world, swept over theta2 at fixed theta1 and gamma.
inline std::vector<Fig1Row> fig1_study(double theta1, double gamma,
                                       const std::vector<double>& theta2_grid) {
    if (theta2_grid.empty()) throw usage_error("fig1: empty theta2 grid");
    const LossId order[4] = {LossId::BinaryExp, LossId::BinaryLogit, LossId::BinaryHinge,
                             LossId::BinaryPsi};
    std::vector<Fig1Row> rows;
    rows.reserve(theta2_grid.size());
    for (double t2 : theta2_grid) {
        Ex51 ex{theta1, t2, gamma};
        validate_spec(ex);
        Fig1Row row;
        row.theta2 = t2;
        const double bayes = bayes_risk(ex);
        double* out[4] = {&row.e_v1, &row.e_v2, &row.e_v3, &row.e_v4};
        for (int j = 0; j < 4; ++j) {
            try {
                IdealMin im = ideal_minimizer_1d(order[j], ex);
                *out[j] = misclass_risk_linear_1d(ex, im.a, im.b) - bayes;
            } catch (const std::exception& e) {
                throw std::runtime_error("fig1: theta2=" + fmt17(t2) + ": " + e.what());
            }
        }
        rows.push_back(row);
    }
    return rows;
}

// ---- empirical convergence-rate study -------------------------------------

struct SlopeFit {
    double slope = 0.0;
    double se = 0.0;
    double intercept = 0.0;
};

// Least-squares slope of log(y) against log(n); se from the residuals.
inline SlopeFit fit_loglog_slope(const std::vector<double>& n, const std::vector<double>& y) {
    const int m = static_cast<int>(n.size());
    if (m < 2 || y.size() != n.size()) throw usage_error("slope fit: need >= 2 matched points");
    std::vector<double> lx(m), ly(m);
    for (int i = 0; i < m; ++i) {
        if (!(n[i] > 0.0) || !(y[i] > 0.0)) throw usage_error("slope fit: need positive values");
        lx[i] = std::log(n[i]);
        ly[i] = std::log(y[i]);
    }
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < m; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < m; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx <= 0.0) throw usage_error("slope fit: degenerate abscissa");
    SlopeFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (m > 2) {
        double rss = 0.0;
        for (int i = 0; i < m; ++i) {
            double r = ly[i] - (f.intercept + f.slope * lx[i]);
            rss += r * r;
        }
        f.se = std::sqrt(std::max(0.0, rss / (m - 2)) / sxx);
    }
    return f;
}

struct RateOptions {
    FitConfig fit;                   // lambda is overridden by the schedule
    std::vector<int> n_grid;
    int reps = 50;
    std::uint64_t seed = 1;
    double lambda0 = 1.0;            // schedule: lambda = lambda0 / n
    std::optional<KernelId> kernel;  // kernel fits when set, linear otherwise
    OracleOpts oracle;
};

struct RateRow {
    int n = 0;
    double mean_regret = 0.0;
    double stderr_regret = 0.0;
    int reps_used = 0;
    bool dropped = false;  // nonpositive mean: excluded from the regression
};

struct RateStudyResult {
    std::vector<RateRow> rows;
    SlopeFit slope;
    double theory_slope = std::numeric_limits<double>::quiet_NaN();  // when stated
    double lambda0 = 0.0;
    std::uint64_t seed = 0;
    bool any_dropped = false;
};

// reps independent fit/evaluate replications per sample size; the regression
// runs on log(mean regret) vs log(n). The regret reference is the loss's own
// ideal linear classifier on the two-class 1-D world (where the oracle is
// exact and the gap can have either sign, hence the absolute value) and the
// Bayes rule everywhere else.
inline RateStudyResult rate_study(const ExampleSpec& spec, const RateOptions& opt) {
    validate_spec(spec);
    if (opt.n_grid.size() < 3) throw usage_error("rate study: need at least 3 sample sizes");
    if (opt.reps < 2) throw usage_error("rate study: need reps >= 2");
    for (size_t i = 0; i < opt.n_grid.size(); ++i) {
        if (opt.n_grid[i] < 2) throw usage_error("rate study: sample sizes must be >= 2");
        if (i > 0 && opt.n_grid[i] <= opt.n_grid[i - 1])
            throw usage_error("rate study: sample sizes must be strictly increasing");
    }
    if (!(opt.lambda0 > 0.0)) throw usage_error("rate study: lambda0 must be > 0");

    const auto* ex51 = std::get_if<Ex51>(&spec);
    double ref_ge = 0.0;
    if (ex51) {
        IdealMin im = ideal_minimizer_1d(opt.fit.loss, *ex51);
        ref_ge = misclass_risk_linear_1d(*ex51, im.a, im.b);
    } else {
        ref_ge = bayes_risk(spec);
    }

    RateStudyResult res;
    res.lambda0 = opt.lambda0;
    res.seed = opt.seed;
    try {
        res.theory_slope = theory_rate(spec, opt.fit.loss);
    } catch (const usage_error&) {
        // no stated exponent for this world/loss pair; leave NaN
    }
    for (int n : opt.n_grid) {
        MeanAcc acc;
        for (int rep = 0; rep < opt.reps; ++rep) {
            GeneratorHandle gen = make_generator(spec, derive_seed(opt.seed, n, rep, 0xDA));
            Dataset ds = sample(gen, n);
            FitConfig cfg = opt.fit;
            cfg.lambda = opt.lambda0 / n;
            FitReport fr =
                opt.kernel ? fit_kernel(ds, cfg, *opt.kernel) : fit_linear(ds, cfg);
            OracleOpts oo = opt.oracle;
            oo.mc_seed = derive_seed(opt.seed, n, rep, 0xEE);
            const double ge = generalization_error(spec, fr.decision, oo).value;
            acc.add(ex51 ? std::fabs(ge - ref_ge) : ge - ref_ge);
        }
        RateRow row;
        row.n = n;
        row.mean_regret = acc.mean;
        row.stderr_regret = acc.stderr_mean();
        row.reps_used = opt.reps;
        row.dropped = !(row.mean_regret > 0.0);
        res.any_dropped = res.any_dropped || row.dropped;
        res.rows.push_back(row);
    }

    std::vector<double> ns, ys;
    for (const RateRow& r : res.rows)
        if (!r.dropped) {
            ns.push_back(r.n);
            ys.push_back(r.mean_regret);
        }
    if (ns.size() < 3)
        throw std::runtime_error("rate study: fewer than 3 usable sample sizes after drops");
    res.slope = fit_loglog_slope(ns, ys);
    return res;
}

// ---- high-dimension feature-selection study --------------------------------

struct FeatureRank {
    int index = 0;  // 1-based coordinate
    double weight = 0.0;
};

struct FeatureOptions {
    double tau = 0.8;
    int p = 200;
    int n = 100;
    double theta = 0.9;  // elastic-net l1 weight
    std::vector<double> lambda_grid;
    std::uint64_t seed = 1;
    FitConfig fit;  // loss/penalty fields are overridden below
    OracleOpts oracle;
};

struct FeatureStudyResult {
    double lambda_chosen = 0.0;
    double val_error = 0.0;  // empirical misclassification on the validation set
    double test_ge = 0.0;    // oracle Monte Carlo generalization error
    double test_ge_se = 0.0;
    std::vector<FeatureRank> ranked;  // |w_j| descending, index ascending on ties
    LinearDecision decision;
    bool degenerate = false;  // every fit on the grid had an all-zero slope
    std::uint64_t seed = 0;
};

// Hinge + elastic-net path over the lambda grid: train on one sample, choose
// lambda by misclassification on an independent validation sample of the same
// size, report the oracle test error and the ranked slope magnitudes.
inline FeatureStudyResult feature_study(const FeatureOptions& opt) {
    Ex54 spec{opt.tau, opt.p};
    validate_spec(spec);
    if (opt.lambda_grid.empty()) throw usage_error("feature study: empty lambda grid");
    for (double l : opt.lambda_grid)
        if (!(l >= 0.0)) throw usage_error("feature study: lambda must be >= 0");
    if (opt.n < 10) throw usage_error("feature study: need n >= 10");
    if (opt.p < 1) throw usage_error("feature study: need p >= 1");

    GeneratorHandle gtrain = make_generator(spec, derive_seed(opt.seed, 1, 0, 0));
    GeneratorHandle gval = make_generator(spec, derive_seed(opt.seed, 2, 0, 0));
    Dataset train = sample(gtrain, opt.n);
    Dataset val = sample(gval, opt.n);

    FitConfig cfg = opt.fit;
    cfg.loss = LossId::BinaryHinge;
    cfg.penalty = Penalty{PenaltyId::ElasticNet, opt.theta};

    FeatureStudyResult res;
    res.seed = opt.seed;
    bool have = false;
    bool all_zero = true;
    const LinearDecision* warm = nullptr;
    LinearDecision prev;
    for (double lam : opt.lambda_grid) {
        cfg.lambda = lam;
        FitReport fr = fit_linear(train, cfg, warm);
        const auto& dec = std::get<LinearDecision>(fr.decision);
        prev = dec;
        warm = &prev;

        double wmax = 0.0;
        for (double w : dec.wfree) wmax = std::max(wmax, std::fabs(w));
        if (wmax > 0.0) all_zero = false;

        int wrong = 0;
        for (int i = 0; i < val.n(); ++i)
            if (argmax_class(dec.eval(val.x[i])) != val.y[i]) ++wrong;
        const double verr = static_cast<double>(wrong) / val.n();
        if (!have || verr < res.val_error) {
            have = true;
            res.val_error = verr;
            res.lambda_chosen = lam;
            res.decision = dec;
        }
    }
    res.degenerate = all_zero;

    OracleOpts oo = opt.oracle;
    oo.mc_seed = derive_seed(opt.seed, 3, 0, 0);
    GeValue ge = generalization_error(ExampleSpec{spec}, Decision{res.decision}, oo);
    res.test_ge = ge.value;
    res.test_ge_se = ge.se;

    res.ranked.resize(opt.p);
    for (int j = 0; j < opt.p; ++j)
        res.ranked[j] = FeatureRank{j + 1, std::fabs(res.decision.wfree[j])};
    std::stable_sort(res.ranked.begin(), res.ranked.end(),
                     [](const FeatureRank& a, const FeatureRank& b) {
                         if (a.weight != b.weight) return a.weight > b.weight;
                         return a.index < b.index;
                     });
    return res;
}

}  // namespace mcmargin

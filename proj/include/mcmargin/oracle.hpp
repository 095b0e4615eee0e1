#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <variant>
#include <vector>

#include "decision.hpp"
#include "example_spec.hpp"
#include "generator.hpp"
#include "losses.hpp"
#include "quadrature.hpp"
#include "util.hpp"

namespace mcmargin {

using DecisionFn = std::function<std::vector<double>(const std::vector<double>&)>;

inline DecisionFn as_fn(const Decision& dec) {
    return [dec](const std::vector<double>& x) { return eval_decision(dec, x); };
}

// Bayes decision vector: (k-1)/k at the conditional-mode class, -1/k elsewhere.
inline std::vector<double> bayes_rule(const ExampleSpec& spec, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != spec_dim(spec))
        throw std::invalid_argument("bayes_rule: x dimension mismatch");
    const double lo = std::holds_alternative<Ex53>(spec) ? 0.0 : -1.0;
    for (double v : x)
        if (!(v >= lo && v <= 1.0)) throw std::domain_error("bayes_rule: x outside the support");
    std::vector<double> p = label_probs(spec, x);
    int k = static_cast<int>(p.size());
    int mode = argmax_class(p);
    std::vector<double> f(k, -1.0 / k);
    f[mode - 1] = (k - 1.0) / k;
    return f;
}

inline DecisionFn bayes_rule_fn(const ExampleSpec& spec) {
    return [spec](const std::vector<double>& x) { return bayes_rule(spec, x); };
}

inline double bayes_risk(const ExampleSpec& spec) {
    if (const auto* e = std::get_if<Ex51>(&spec)) return 0.5 * (1.0 - e->theta1 + e->theta2);
    if (const auto* e = std::get_if<Ex52>(&spec)) return 1.0 - e->theta;
    if (std::holds_alternative<Ex53>(spec)) return 6.0 / 11.0;
    return 1.0 - std::get<Ex54>(spec).tau;
}

// Exact misclassification risk of the 1-D linear rule f(x) = a x + b
// (decision (f,-f)) under the two-class world. a = 0 is degenerate.
inline double misclass_risk_linear_1d(const Ex51& e, double a, double b) {
    if (a == 0.0) throw std::invalid_argument("misclass_risk_linear_1d: a = 0 is degenerate");
    double t = -b / a; // threshold of the class-1 region {x : sign(a)(x - t) > 0}
    double base = 0.5 * (1.0 - e.theta1 + e.theta2);
    double ge_pos; // risk of: class 1 on x > t
    if (t >= 0.0)
        ge_pos = base + 0.5 * (2.0 * e.theta1 - 1.0) * std::pow(std::min(t, 1.0), e.gamma + 1.0);
    else
        ge_pos = base + 0.5 * (1.0 - 2.0 * e.theta2) * std::pow(std::min(-t, 1.0), e.gamma + 1.0);
    return a > 0.0 ? ge_pos : 1.0 - ge_pos;
}

namespace detail {

// loss of the decision at point x, label y (binary margin convention applied)
inline double point_loss(LossId loss, const DecisionFn& f, const std::vector<double>& x, int y) {
    return decision_value_loss(loss, f(x), y);
}

} // namespace detail

// Population V-risk E V(f(X), Y) by numerical integration.
//   Ex51: two adaptive-Simpson pieces against the signed-density split
//   Ex52: tensor Gauss-Legendre per quadrant (gl_n x gl_n nodes)
//   Ex53: adaptive Simpson on each constant-probability third
inline double v_risk_quadrature(const ExampleSpec& spec, LossId loss, const DecisionFn& f,
                                double tol = 1e-9, int gl_n = 200) {
    validate_spec(spec);
    if (loss_is_binary(loss) && spec_classes(spec) != 2)
        throw std::invalid_argument("v_risk_quadrature: binary loss on a multiclass world");
    if (const auto* e = std::get_if<Ex51>(&spec)) {
        const double g = e->gamma;
        auto side = [&](double sgn, double theta) {
            return adaptive_simpson(
                [&](double s) {
                    // s is |x| on (0,1]; density of |X| per side is (g+1)s^g / 2
                    std::vector<double> x{sgn * s};
                    auto fv = f(x);
                    double w = 0.5 * (g + 1.0) * std::pow(s, g);
                    return w * (theta * decision_value_loss(loss, fv, 1) +
                                (1.0 - theta) * decision_value_loss(loss, fv, 2));
                },
                0.0, 1.0, tol);
        };
        return side(1.0, e->theta1) + side(-1.0, e->theta2);
    }
    if (const auto* e = std::get_if<Ex52>(&spec)) {
        const double g = e->gamma;
        const double lam = (g + 1.0) * (g + 2.0) / 8.0;
        const GaussLegendre gl = (gl_n == 200) ? gauss_legendre_200() : gauss_legendre(gl_n);
        double total = 0.0;
        for (double sx : {1.0, -1.0})
            for (double sy : {1.0, -1.0}) {
                double q = 0.0;
                for (int i = 0; i < gl_n; ++i) {
                    double u = 0.5 * (gl.nodes[i] + 1.0);
                    for (int j = 0; j < gl_n; ++j) {
                        double v = 0.5 * (gl.nodes[j] + 1.0);
                        std::vector<double> x{sx * u, sy * v};
                        auto fv = f(x);
                        auto p = label_probs(spec, x);
                        double integrand = 0.0;
                        for (int c = 0; c < 4; ++c)
                            integrand += p[c] * decision_value_loss(loss, fv, c + 1);
                        double dens = lam * std::pow(std::min(u, v), g);
                        q += gl.weights[i] * gl.weights[j] * dens * integrand;
                    }
                }
                total += q * 0.25; // two [-1,1] -> [0,1] interval maps
            }
        return total;
    }
    if (std::holds_alternative<Ex53>(spec)) {
        double total = 0.0;
        const double cuts[4] = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
        for (int piece = 0; piece < 3; ++piece) {
            total += adaptive_simpson(
                [&](double s) {
                    std::vector<double> x{s};
                    auto fv = f(x);
                    auto p = label_probs(spec, x);
                    double integrand = 0.0;
                    for (int c = 0; c < 3; ++c)
                        integrand += p[c] * decision_value_loss(loss, fv, c + 1);
                    return integrand;
                },
                cuts[piece], cuts[piece + 1], tol);
        }
        return total;
    }
    throw std::invalid_argument("v_risk_quadrature: unsupported world (no low-dimensional quadrature)");
}

inline double v_risk_quadrature(const ExampleSpec& spec, LossId loss, const Decision& dec,
                                double tol = 1e-9, int gl_n = 200) {
    // unbounded-exponent guard for the exponential loss on 1-D linear rules
    if (loss == LossId::BinaryExp && std::holds_alternative<Ex51>(spec)) {
        if (const auto* lin = std::get_if<LinearDecision>(&dec)) {
            double a = lin->wfree[0], b = lin->intercept ? lin->bfree[0] : 0.0;
            if (std::fabs(a) + std::fabs(b) > 100.0)
                throw std::invalid_argument("v_risk_quadrature: |a|+|b| > 100 overflows the exponential loss");
        }
    }
    return v_risk_quadrature(spec, loss, as_fn(dec), tol, gl_n);
}

struct GeValue {
    double value = 0.0;
    double se = 0.0; // zero for exact / quadrature paths
};

struct OracleOpts {
    long long mc_draws = 1'000'000;
    std::uint64_t mc_seed = 0x5EEDBA5Eull;
    int ex53_grid = 20001;
    double quad_tol = 1e-9;
};

// Generalization error P(Y != argmax_c f_c(X)).
//   Ex51: exact closed form (linear k=2 rules)
//   Ex52/Ex54: Monte Carlo on fresh draws, conditional error probabilities
//   Ex53: stratified midpoint quadrature on the three thirds
inline GeValue generalization_error(const ExampleSpec& spec, const Decision& dec,
                                    const OracleOpts& opts = {}) {
    validate_spec(spec);
    if (const auto* e = std::get_if<Ex51>(&spec)) {
        const auto* lin = std::get_if<LinearDecision>(&dec);
        if (!lin || lin->k != 2 || lin->d != 1)
            throw std::invalid_argument("generalization_error: ex51 expects a k=2, d=1 linear rule");
        double a = lin->wfree[0], b = lin->intercept ? lin->bfree[0] : 0.0;
        if (a == 0.0) {
            // constant classifier; ties go to class 1
            int cls = b >= 0.0 ? 1 : 2;
            double p1 = 0.5 * (e->theta1 + e->theta2);
            return {cls == 1 ? 1.0 - p1 : p1, 0.0};
        }
        return {misclass_risk_linear_1d(*e, a, b), 0.0};
    }
    if (std::holds_alternative<Ex52>(spec) || std::holds_alternative<Ex54>(spec)) {
        if (opts.mc_draws < 1'000'000)
            throw std::invalid_argument("generalization_error: need at least 1e6 Monte Carlo draws");
        Rng rng(opts.mc_seed);
        MeanAcc acc;
        for (long long i = 0; i < opts.mc_draws; ++i) {
            std::vector<double> x = draw_x(rng, spec);
            auto p = label_probs(spec, x);
            int c = classify(dec, x);
            acc.add(1.0 - p[c - 1]);
        }
        return {acc.mean, acc.stderr_mean()};
    }
    // Ex53
    const int per = opts.ex53_grid / 3;
    double total = 0.0;
    const double cuts[4] = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
    for (int piece = 0; piece < 3; ++piece) {
        double lo = cuts[piece], hi = cuts[piece + 1];
        double h = (hi - lo) / per;
        double s = 0.0;
        for (int i = 0; i < per; ++i) {
            std::vector<double> x{lo + (i + 0.5) * h};
            auto p = label_probs(spec, x);
            s += 1.0 - p[classify(dec, x) - 1];
        }
        total += s * h;
    }
    return {total, 0.0};
}

// Regret references: the global Bayes rule, or a fitted/ideal 1-D linear rule.
struct RefGlobalBayes {};
struct RefIdeal {
    double a = 1.0, b = 0.0;
};
using Reference = std::variant<RefGlobalBayes, RefIdeal>;

struct RegretReport {
    double e = 0.0;   // generalization-error regret
    double e_v = 0.0; // V-risk regret
    GeValue ge_dec, ge_ref;
    double v_dec = 0.0, v_ref = 0.0;
};

inline LinearDecision linear_1d(double a, double b) {
    LinearDecision lin(2, 1, true);
    lin.wfree[0] = a;
    lin.bfree[0] = b;
    return lin;
}

inline RegretReport regrets(const ExampleSpec& spec, LossId loss, const Decision& dec,
                            const Reference& ref, const OracleOpts& opts = {}) {
    RegretReport r;
    r.ge_dec = generalization_error(spec, dec, opts);
    r.v_dec = v_risk_quadrature(spec, loss, dec, opts.quad_tol);
    if (std::holds_alternative<RefGlobalBayes>(ref)) {
        r.ge_ref = {bayes_risk(spec), 0.0};
        r.v_ref = v_risk_quadrature(spec, loss, bayes_rule_fn(spec), opts.quad_tol);
    } else {
        const auto& id = std::get<RefIdeal>(ref);
        if (!std::holds_alternative<Ex51>(spec))
            throw std::invalid_argument("regrets: ideal-rule reference is specific to the 1-D world");
        Decision refdec = linear_1d(id.a, id.b);
        r.ge_ref = generalization_error(spec, refdec, opts);
        r.v_ref = v_risk_quadrature(spec, loss, refdec, opts.quad_tol);
    }
    r.e = r.ge_dec.value - r.ge_ref.value;
    r.e_v = r.v_dec - r.v_ref;
    return r;
}

struct IdealMin {
    double a = 0.0, b = 0.0;
    double vrisk = 0.0;
    double grad_norm = 0.0; // 0 for the pinned-slope psi family (limit case)
};

// Population V-risk minimizer over 1-D linear rules f = a x + b.
// Convex losses: grid scan over [-20,20]^2 (step 0.25), then coordinate-wise
// golden-section refinement with a central-difference gradient stop.
// BinaryPsi: slope pinned at 1e6, threshold t = b/a minimized by golden
// section (the minimizer escapes to infinity along fixed t).
inline IdealMin ideal_minimizer_1d(LossId loss, const Ex51& e, double grid_step = 0.25) {
    if (!loss_is_binary(loss))
        throw std::invalid_argument("ideal_minimizer_1d: binary losses only");
    ExampleSpec spec = e;
    if (loss == LossId::BinaryPsi) {
        const double A = 1e6;
        auto risk_t = [&](double t) {
            return v_risk_quadrature(spec, loss, as_fn(linear_1d(A, t * A)), 1e-12);
        };
        double t = golden_section_min(risk_t, -0.95, 0.95, 1e-9);
        return {A, t * A, risk_t(t), 0.0};
    }
    auto risk = [&](double a, double b, double tol) {
        return v_risk_quadrature(spec, loss, as_fn(linear_1d(a, b)), tol);
    };
    // fixed-node estimate, good to ~1e-4 near O(1) risk values; used only to
    // rule grid points out, never to rank survivors
    static const GaussLegendre gl = gauss_legendre(128);
    const double g = e.gamma;
    MarginVector u(1);
    auto risk_estimate = [&](double a, double b) {
        double tot = 0.0;
        for (double sgn : {1.0, -1.0}) {
            const double theta = sgn > 0.0 ? e.theta1 : e.theta2;
            double acc = 0.0;
            for (size_t i = 0; i < gl.nodes.size(); ++i) {
                double s = 0.5 * (gl.nodes[i] + 1.0);
                double m = a * sgn * s + b;
                u[0] = m;
                double l1 = loss_eval(loss, u);
                u[0] = -m;
                double l2 = loss_eval(loss, u);
                acc += gl.weights[i] * 0.5 * (g + 1.0) * std::pow(s, g) *
                       (theta * l1 + (1.0 - theta) * l2);
            }
            tot += 0.5 * acc;
        }
        return tot;
    };
    const double lo = -20.0, hi = 20.0;
    double best_a = 0.0, best_b = 0.0, best_v = std::numeric_limits<double>::infinity();
    const int steps = static_cast<int>(std::lround((hi - lo) / grid_step));
    for (int i = 0; i <= steps; ++i)
        for (int j = 0; j <= steps; ++j) {
            double a = lo + i * grid_step, b = lo + j * grid_step;
            if (loss == LossId::BinaryExp && std::fabs(a) + std::fabs(b) > 100.0) continue;
            if (risk_estimate(a, b) >= best_v + 0.02) continue;
            double v = risk(a, b, 1e-9);
            if (v < best_v) {
                best_v = v;
                best_a = a;
                best_b = b;
            }
        }
    // coordinate golden-section passes at tight quadrature tolerance
    const double rtol = 1e-12;
    double a = best_a, b = best_b;
    double span = grid_step;
    double gnorm = std::numeric_limits<double>::infinity();
    for (int pass = 0; pass < 30; ++pass) {
        a = golden_section_min([&](double aa) { return risk(aa, b, rtol); }, a - span, a + span, 1e-9);
        b = golden_section_min([&](double bb) { return risk(a, bb, rtol); }, b - span, b + span, 1e-9);
        span = std::max(0.5 * span, 1e-4);
        const double h = 1e-5;
        double ga = (risk(a + h, b, rtol) - risk(a - h, b, rtol)) / (2.0 * h);
        double gb = (risk(a, b + h, rtol) - risk(a, b - h, rtol)) / (2.0 * h);
        gnorm = std::sqrt(ga * ga + gb * gb);
        if (gnorm < 1e-6) break;
    }
    return {a, b, risk(a, b, rtol), gnorm};
}

// Largest negative root (closest to zero) of the stationarity quartic
// 9(th-1) - 16(th-1)x + 12(th-1)x^2 + (64 th - 4)x^4 for the 4-class
// linear-rule world. Scan step 1e-3 toward -10, then bisection.
inline double quartic_root(double theta) {
    if (!(theta > 0.25 && theta < 1.0)) throw usage_error("quartic_root: need 1/4 < theta < 1");
    auto p = [&](double x) {
        return 9.0 * (theta - 1.0) - 16.0 * (theta - 1.0) * x + 12.0 * (theta - 1.0) * x * x +
               (64.0 * theta - 4.0) * x * x * x * x;
    };
    const double step = 1e-3;
    double prev = 0.0, fprev = p(prev);
    for (double x = -step; x >= -10.0; x -= step) {
        double fx = p(x);
        if (fx == 0.0) return x;
        if ((fx > 0.0) != (fprev > 0.0)) return bisect_root(p, x, prev, 1e-15);
        prev = x;
        fprev = fx;
    }
    throw std::runtime_error("quartic_root: no negative root found in (-10, 0)");
}

// 4-class linear rule from the six free slopes (w11,w12,w21,w22,w31,w32);
// the fourth row is the negative sum. No intercepts.
inline LinearDecision ex52_pattern_decision(const std::vector<double>& w6) {
    if (w6.size() != 6) throw std::invalid_argument("ex52_pattern_decision: need 6 slopes");
    LinearDecision lin(4, 2, false);
    lin.wfree = w6;
    return lin;
}

// Theoretical population-regret exponents in n for the worked worlds.
inline double theory_rate(const ExampleSpec& spec, LossId loss) {
    if (std::holds_alternative<Ex51>(spec)) {
        switch (loss) {
        case LossId::BinaryExp:
        case LossId::BinaryLogit:
        case LossId::BinaryHinge: return -0.5;
        case LossId::BinaryPsi: return -1.0;
        default: break;
        }
    } else if (const auto* e = std::get_if<Ex52>(&spec)) {
        if (loss == LossId::Svm2 || loss == LossId::Logit) return -(e->gamma + 1.0) / 2.0;
    } else if (const auto* e = std::get_if<Ex53>(&spec)) {
        if (loss == LossId::Svm1) return -0.5;
        if (loss == LossId::Psi) return e->m == 1 ? -0.5 : -2.0 * e->m / (2.0 * e->m + 3.0);
    } else if (std::holds_alternative<Ex54>(spec)) {
        if (loss == LossId::BinaryHinge) return -0.25;
    }
    throw usage_error("theory_rate: no stated rate for this world/loss pair");
}

} // namespace mcmargin

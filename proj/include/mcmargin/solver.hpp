#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "decision.hpp"
#include "losses.hpp"
#include "penalty.hpp"
#include "util.hpp"

namespace mcmargin {

// Caveat: SquaredMin is nonconvex for k >= 3; the subgradient path then acts
// as a local method and carries no global-optimum guarantee.
struct FitConfig {
    LossId loss = LossId::Logit;
    Penalty penalty{PenaltyId::SqL2, 0.5};
    double lambda = 1e-3;
    int max_iters = 20000;   // total descent-iteration budget per convex solve
    int stages = 14;         // step halves from one stage to the next
    int dc_max_outer = 20;   // outer linearization rounds for the psi losses
    double rel_tol = 1e-6;
    double step0 = 1.0;
    bool intercept = true;   // linear fits only; kernel decisions carry none
    // The descent path is zero-initialized and fully deterministic; the seed
    // is carried for interface parity and future stochastic variants.
    std::uint64_t seed = 0;
};

// Key/value config document: one `key = value` pair per line, `#` comments,
// blank lines skipped. Keys: loss, penalty, theta, lambda, max_iters, stages,
// dc_max_outer, rel_tol, step0, seed, intercept. Unknown keys are rejected.
inline FitConfig parse_fit_config(std::istream& is) {
    FitConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::string key, eq, val;
        std::istringstream ls(line);
        if (!(ls >> key)) continue;
        ls >> eq;
        if (eq == "=") ls >> val; else val = eq;
        std::string extra;
        if (val.empty() || (ls >> extra))
            throw usage_error("config line " + std::to_string(lineno) + ": expected 'key = value'");
        try {
            if (key == "loss") cfg.loss = parse_loss(val);
            else if (key == "penalty") cfg.penalty.id = parse_penalty(val);
            else if (key == "theta") cfg.penalty.theta = std::stod(val);
            else if (key == "lambda") cfg.lambda = std::stod(val);
            else if (key == "max_iters") cfg.max_iters = std::stoi(val);
            else if (key == "stages") cfg.stages = std::stoi(val);
            else if (key == "dc_max_outer") cfg.dc_max_outer = std::stoi(val);
            else if (key == "rel_tol") cfg.rel_tol = std::stod(val);
            else if (key == "step0") cfg.step0 = std::stod(val);
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "intercept") {
                if (val == "true" || val == "1") cfg.intercept = true;
                else if (val == "false" || val == "0") cfg.intercept = false;
                else throw usage_error("intercept takes true/false");
            } else {
                throw usage_error("unknown config key: " + key);
            }
        } catch (const usage_error&) {
            throw;
        } catch (const std::exception&) {
            throw usage_error("config line " + std::to_string(lineno) + ": bad value for " + key);
        }
    }
    return cfg;
}

inline FitConfig parse_fit_config(const std::string& text) {
    std::istringstream is(text);
    return parse_fit_config(is);
}

struct FitReport {
    Decision decision;
    double objective = 0.0;
    // convex fits: best objective after each stage; DC fits: true objective
    // after the initializer and after each accepted outer round. Nonincreasing
    // in both cases.
    std::vector<double> objective_trace;
    bool converged = false;
    int iters_used = 0;
    int dc_outer_used = 0;
};

// Penalized empirical objective: mean loss over the sample plus lambda * J.
inline double objective(const Dataset& ds, const Decision& dec, LossId loss, const Penalty& pen,
                        double lambda, const Mat* gram = nullptr) {
    if (ds.n() == 0) throw usage_error("objective: empty dataset");
    double s = 0.0;
    for (int i = 0; i < ds.n(); ++i) s += decision_value_loss(loss, eval_decision(dec, ds.x[i]), ds.y[i]);
    return s / ds.n() + lambda * penalty_eval(pen, dec, gram);
}

namespace detail {

// Margin-space loss used inside the solver. psi_vex swaps in the convex
// majorization part 2*(1 - min u)_+ used by the DC outer loop.
struct SolverLoss {
    LossId id;
    bool psi_vex = false;

    double value(const MarginVector& u) const {
        if (!psi_vex) return loss_eval(id, u);
        double m = u[0];
        for (double v : u) m = std::min(m, v);
        return m < 1.0 ? 2.0 * (1.0 - m) : 0.0;
    }
    void subgrad(const MarginVector& u, MarginVector& g) const {
        if (!psi_vex) {
            loss_subgrad_u_into(id, u, g);
            return;
        }
        g.assign(u.size(), 0.0);
        int a = argmin_lowest(u);
        if (u[a] < 1.0) g[a] = -2.0;
    }
};

struct StagedOpts {
    double step0 = 1.0;
    double step_scale = 1.0;  // conditioning multiplier (kernel Gram scaling)
    int max_iters = 20000;
    int stages = 14;
    double rel_tol = 1e-6;
};

struct StagedOut {
    std::vector<double> x;
    double obj = 0.0;
    std::vector<double> trace;
    bool converged = false;
    int iters = 0;
};

// Subgradient descent with a constant step per stage, halved between stages,
// with a within-stage Polyak average and best-iterate tracking. The returned
// trace is the running best objective at each stage boundary, so it is
// nonincreasing by construction. `prox` runs after every step (no-op lambda
// when the penalty has no proximal part).
template <class FObj, class FSub, class FProx>
StagedOut staged_minimize(std::vector<double> x0, FObj&& fobj, FSub&& fsub, FProx&& prox,
                          const StagedOpts& o) {
    const int dim = static_cast<int>(x0.size());
    StagedOut out;
    std::vector<double> x = std::move(x0), g(dim), avg(dim);
    std::vector<double> best = x;
    double fbest = fobj(x);
    out.trace.push_back(fbest);
    const int per_stage = std::max(1, o.max_iters / std::max(1, o.stages));
    int stale = 0;
    for (int s = 0; s < o.stages; ++s) {
        const double eta = o.step0 * std::ldexp(1.0, -s) * o.step_scale;
        std::fill(avg.begin(), avg.end(), 0.0);
        for (int t = 0; t < per_stage; ++t) {
            fsub(x, g);
            for (double& v : g) {
                // one overflowing sample must not poison the whole iterate
                if (!std::isfinite(v)) v = 0.0;
                else v = std::clamp(v, -1e8, 1e8);
            }
            for (int j = 0; j < dim; ++j) x[j] -= eta * g[j];
            prox(x, eta);
            for (int j = 0; j < dim; ++j) avg[j] += x[j];
            ++out.iters;
        }
        for (int j = 0; j < dim; ++j) avg[j] /= per_stage;
        const double fprev = fbest;
        const double favg = fobj(avg);
        if (std::isfinite(favg) && favg < fbest) { fbest = favg; best = avg; }
        const double fx = fobj(x);
        if (std::isfinite(fx) && fx < fbest) { fbest = fx; best = x; }
        x = best;
        out.trace.push_back(fbest);
        if (fprev - fbest <= o.rel_tol * std::max(1.0, std::fabs(fbest))) ++stale;
        else stale = 0;
        if (s >= 3 && stale >= 3) {
            out.converged = true;
            break;
        }
    }
    out.x = std::move(best);
    out.obj = fbest;
    return out;
}

inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// ---- linear path ---------------------------------------------------------
// Parameter layout: wfree ((k-1) x d, row-major) followed by bfree (k-1).

struct LinearProblem {
    const Dataset* ds;
    SolverLoss sl;
    Penalty pen;
    double lambda;
    bool intercept;
    const std::vector<double>* tilt;  // flattened n x L, may be null
    int k, d, L;

    int wlen() const { return (k - 1) * d; }
    int dim() const { return wlen() + (k - 1); }

    void margins_at(const std::vector<double>& p, int i, std::vector<double>& f,
                    MarginVector& u) const {
        const std::vector<double>& x = ds->x[i];
        double last = 0.0;
        for (int c = 0; c < k - 1; ++c) {
            double v = p[wlen() + c];
            for (int j = 0; j < d; ++j) v += p[c * d + j] * x[j];
            f[c] = v;
            last -= v;
        }
        f[k - 1] = last;
        if (loss_is_binary(sl.id)) {
            const double sign = ds->y[i] == 1 ? 1.0 : -1.0;
            u.resize(1);
            u[0] = sign * 0.5 * (f[0] - f[1]);
        } else {
            functional_margin_into(f, ds->y[i], u);
        }
    }

    double risk(const std::vector<double>& p, std::vector<double>& f, MarginVector& u) const {
        double s = 0.0;
        for (int i = 0; i < ds->n(); ++i) {
            margins_at(p, i, f, u);
            double v = sl.value(u);
            if (tilt)
                for (int j = 0; j < L; ++j) v += (*tilt)[i * L + j] * u[j];
            s += v;
        }
        return s / ds->n();
    }

    void risk_subgrad(const std::vector<double>& p, std::vector<double>& grad,
                      std::vector<double>& f, MarginVector& u, MarginVector& s,
                      std::vector<double>& gf) const {
        std::fill(grad.begin(), grad.end(), 0.0);
        const int n = ds->n();
        for (int i = 0; i < n; ++i) {
            margins_at(p, i, f, u);
            sl.subgrad(u, s);
            if (tilt)
                for (int j = 0; j < L; ++j) s[j] += (*tilt)[i * L + j];
            const std::vector<double>& x = ds->x[i];
            if (loss_is_binary(sl.id)) {
                const double sign = ds->y[i] == 1 ? 1.0 : -1.0;
                const double coef = s[0] * sign;
                if (coef != 0.0) {
                    for (int j = 0; j < d; ++j) grad[j] += coef * x[j];
                    if (intercept) grad[wlen()] += coef;
                }
            } else {
                std::fill(gf.begin(), gf.end(), 0.0);
                const int yi = ds->y[i] - 1;
                int t = 0;
                for (int j = 0; j < k; ++j) {
                    if (j == yi) continue;
                    gf[j] -= s[t];
                    gf[yi] += s[t];
                    ++t;
                }
                const double glast = gf[k - 1];
                for (int c = 0; c < k - 1; ++c) {
                    const double coef = gf[c] - glast;
                    if (coef == 0.0) continue;
                    for (int j = 0; j < d; ++j) grad[c * d + j] += coef * x[j];
                    if (intercept) grad[wlen() + c] += coef;
                }
            }
        }
        const double inv = 1.0 / n;
        for (double& v : grad) v *= inv;
    }

    // Slope-matrix penalty over all k rows, the last row being minus the sum
    // of the free ones. The l1 part of ElasticNet (and the whole L1 penalty
    // when k = 2) is handled by prox() instead of a subgradient term.
    double pen_value(const std::vector<double>& p) const {
        switch (pen.id) {
        case PenaltyId::SqL2: {
            double s = 0.0;
            for (int j = 0; j < d; ++j) {
                double col = 0.0;
                for (int c = 0; c < k - 1; ++c) {
                    const double w = p[c * d + j];
                    s += w * w;
                    col += w;
                }
                s += col * col;
            }
            return s;
        }
        case PenaltyId::L1: {
            double s = 0.0;
            for (int j = 0; j < d; ++j) {
                double col = 0.0;
                for (int c = 0; c < k - 1; ++c) {
                    const double w = p[c * d + j];
                    s += std::fabs(w);
                    col += w;
                }
                s += std::fabs(col);
            }
            return s;
        }
        case PenaltyId::ElasticNet: {
            double l1 = 0.0, l2 = 0.0;
            for (int j = 0; j < d; ++j) {
                l1 += std::fabs(p[j]);
                l2 += p[j] * p[j];
            }
            return pen.theta * l1 + (1.0 - pen.theta) * l2;
        }
        case PenaltyId::RkhsSeminorm:
            throw usage_error("fit: rkhs penalty requires a kernel decision");
        }
        throw std::logic_error("pen_value: unreachable");
    }

    void pen_grad_add(const std::vector<double>& p, std::vector<double>& grad) const {
        if (lambda == 0.0) return;
        switch (pen.id) {
        case PenaltyId::SqL2:
            for (int j = 0; j < d; ++j) {
                double col = 0.0;
                for (int c = 0; c < k - 1; ++c) col += p[c * d + j];
                for (int c = 0; c < k - 1; ++c)
                    grad[c * d + j] += lambda * 2.0 * (p[c * d + j] + col);
            }
            return;
        case PenaltyId::L1:
            if (k == 2) return;  // proximal
            for (int j = 0; j < d; ++j) {
                double col = 0.0;
                for (int c = 0; c < k - 1; ++c) col += p[c * d + j];
                for (int c = 0; c < k - 1; ++c)
                    grad[c * d + j] += lambda * (sgn(p[c * d + j]) + sgn(col));
            }
            return;
        case PenaltyId::ElasticNet:
            for (int j = 0; j < d; ++j) grad[j] += lambda * 2.0 * (1.0 - pen.theta) * p[j];
            return;
        case PenaltyId::RkhsSeminorm:
            return;
        }
    }

    void prox(std::vector<double>& p, double eta) const {
        if (lambda == 0.0) return;
        double thr = 0.0;
        if (pen.id == PenaltyId::L1 && k == 2) thr = eta * lambda * 2.0;
        else if (pen.id == PenaltyId::ElasticNet) thr = eta * lambda * pen.theta;
        else return;
        for (int j = 0; j < wlen(); ++j) {
            const double w = p[j];
            p[j] = w > thr ? w - thr : (w < -thr ? w + thr : 0.0);
        }
    }
};

inline FitReport run_convex_linear(const Dataset& ds, const FitConfig& cfg, const SolverLoss& sl,
                                   const std::vector<double>* tilt, const LinearDecision* init) {
    const int k = ds.k, d = ds.d;
    LinearProblem pr{&ds, sl, cfg.penalty, cfg.lambda, cfg.intercept, tilt, k, d,
                     loss_is_binary(sl.id) ? 1 : k - 1};

    std::vector<double> x0(pr.dim(), 0.0);
    if (init) {
        if (init->k != k || init->d != d || init->intercept != cfg.intercept)
            throw usage_error("fit: warm start has mismatched dimensions");
        std::copy(init->wfree.begin(), init->wfree.end(), x0.begin());
        if (cfg.intercept)
            std::copy(init->bfree.begin(), init->bfree.end(), x0.begin() + pr.wlen());
    }

    std::vector<double> f(k), gf(k);
    MarginVector u, s;
    auto fobj = [&](const std::vector<double>& p) {
        return pr.risk(p, f, u) + cfg.lambda * pr.pen_value(p);
    };
    auto fsub = [&](const std::vector<double>& p, std::vector<double>& g) {
        pr.risk_subgrad(p, g, f, u, s, gf);
        pr.pen_grad_add(p, g);
    };
    auto fprox = [&](std::vector<double>& p, double eta) { pr.prox(p, eta); };

    StagedOpts so{cfg.step0, 1.0, cfg.max_iters, cfg.stages, cfg.rel_tol};
    StagedOut res = staged_minimize(std::move(x0), fobj, fsub, fprox, so);

    LinearDecision dec(k, d, cfg.intercept);
    dec.wfree.assign(res.x.begin(), res.x.begin() + pr.wlen());
    if (cfg.intercept) dec.bfree.assign(res.x.begin() + pr.wlen(), res.x.end());

    FitReport rep;
    rep.decision = std::move(dec);
    rep.objective = res.obj;
    rep.objective_trace = std::move(res.trace);
    rep.converged = res.converged;
    rep.iters_used = res.iters;
    return rep;
}

// ---- kernel path ---------------------------------------------------------
// Parameters are the free coefficient columns, row-major n x (k-1); the last
// column is minus their sum. Decisions are anchored at the training points,
// so scores on the sample are G * A.

struct KernelProblem {
    const Dataset* ds;
    const Mat* G;
    SolverLoss sl;
    double lambda;
    const std::vector<double>* tilt;
    int k, L;

    int n() const { return ds->n(); }
    int dim() const { return n() * (k - 1); }

    void scores(const std::vector<double>& p, std::vector<double>& F) const {
        const int nn = n(), km1 = k - 1;
        std::fill(F.begin(), F.end(), 0.0);
        for (int i = 0; i < nn; ++i) {
            double* Fi = F.data() + i * km1;
            for (int l = 0; l < nn; ++l) {
                const double gil = (*G)(i, l);
                if (gil == 0.0) continue;
                const double* al = p.data() + l * km1;
                for (int c = 0; c < km1; ++c) Fi[c] += gil * al[c];
            }
        }
    }

    void margins_from_scores(const std::vector<double>& F, int i, std::vector<double>& f,
                             MarginVector& u) const {
        const int km1 = k - 1;
        double last = 0.0;
        for (int c = 0; c < km1; ++c) {
            f[c] = F[i * km1 + c];
            last -= f[c];
        }
        f[k - 1] = last;
        if (loss_is_binary(sl.id)) {
            const double sign = ds->y[i] == 1 ? 1.0 : -1.0;
            u.resize(1);
            u[0] = sign * 0.5 * (f[0] - f[1]);
        } else {
            functional_margin_into(f, ds->y[i], u);
        }
    }

    // seminorm sum_c alpha_c' G alpha_c over all k columns, from cached scores
    double pen_value(const std::vector<double>& p, const std::vector<double>& F) const {
        const int nn = n(), km1 = k - 1;
        double s = 0.0;
        for (int i = 0; i < nn; ++i) {
            double rowsum = 0.0, asum = 0.0;
            for (int c = 0; c < km1; ++c) {
                s += p[i * km1 + c] * F[i * km1 + c];
                rowsum += F[i * km1 + c];
                asum += p[i * km1 + c];
            }
            s += asum * rowsum;
        }
        return s;
    }

    double full_objective(const std::vector<double>& p, std::vector<double>& F,
                          std::vector<double>& f, MarginVector& u) const {
        scores(p, F);
        double s = 0.0;
        for (int i = 0; i < n(); ++i) {
            margins_from_scores(F, i, f, u);
            double v = sl.value(u);
            if (tilt)
                for (int j = 0; j < L; ++j) v += (*tilt)[i * L + j] * u[j];
            s += v;
        }
        return s / n() + lambda * pen_value(p, F);
    }

    void full_subgrad(const std::vector<double>& p, std::vector<double>& grad,
                      std::vector<double>& F, std::vector<double>& M, std::vector<double>& f,
                      MarginVector& u, MarginVector& s, std::vector<double>& gf) const {
        const int nn = n(), km1 = k - 1;
        scores(p, F);
        // M holds the pre-Gram factor: loss part (gf_c - gf_last)/n plus the
        // seminorm part 2*lambda*(alpha_ic + rowsum(alpha_i)).
        for (int i = 0; i < nn; ++i) {
            margins_from_scores(F, i, f, u);
            sl.subgrad(u, s);
            if (tilt)
                for (int j = 0; j < L; ++j) s[j] += (*tilt)[i * L + j];
            std::fill(gf.begin(), gf.end(), 0.0);
            if (loss_is_binary(sl.id)) {
                const double sign = ds->y[i] == 1 ? 1.0 : -1.0;
                gf[0] = s[0] * sign * 0.5;
                gf[1] = -gf[0];
            } else {
                const int yi = ds->y[i] - 1;
                int t = 0;
                for (int j = 0; j < k; ++j) {
                    if (j == yi) continue;
                    gf[j] -= s[t];
                    gf[yi] += s[t];
                    ++t;
                }
            }
            double asum = 0.0;
            for (int c = 0; c < km1; ++c) asum += p[i * km1 + c];
            for (int c = 0; c < km1; ++c)
                M[i * km1 + c] = (gf[c] - gf[k - 1]) / nn +
                                 2.0 * lambda * (p[i * km1 + c] + asum);
        }
        std::fill(grad.begin(), grad.end(), 0.0);
        for (int i = 0; i < nn; ++i) {
            double* gi = grad.data() + i * km1;
            for (int l = 0; l < nn; ++l) {
                const double gil = (*G)(i, l);
                if (gil == 0.0) continue;
                const double* ml = M.data() + l * km1;
                for (int c = 0; c < km1; ++c) gi[c] += gil * ml[c];
            }
        }
    }
};

inline FitReport run_convex_kernel(const Dataset& ds, const FitConfig& cfg, KernelId kid,
                                   const Mat& G, const SolverLoss& sl,
                                   const std::vector<double>* tilt, const KernelDecision* init) {
    const int k = ds.k, n = ds.n();
    KernelProblem pr{&ds, &G, sl, cfg.lambda, tilt, k, loss_is_binary(sl.id) ? 1 : k - 1};

    std::vector<double> x0(pr.dim(), 0.0);
    if (init) {
        if (init->k != k || static_cast<int>(init->afree.size()) != pr.dim())
            throw usage_error("fit: warm start has mismatched dimensions");
        x0 = init->afree;
    }

    double ginf = 1.0;
    for (int i = 0; i < n; ++i) {
        double rs = 0.0;
        for (int j = 0; j < n; ++j) rs += std::fabs(G(i, j));
        ginf = std::max(ginf, rs);
    }

    std::vector<double> F(static_cast<size_t>(n) * (k - 1)), M(F.size()), f(k), gf(k);
    MarginVector u, s;
    auto fobj = [&](const std::vector<double>& p) { return pr.full_objective(p, F, f, u); };
    auto fsub = [&](const std::vector<double>& p, std::vector<double>& g) {
        pr.full_subgrad(p, g, F, M, f, u, s, gf);
    };
    auto fprox = [](std::vector<double>&, double) {};

    StagedOpts so{cfg.step0, 1.0 / ginf, cfg.max_iters, cfg.stages, cfg.rel_tol};
    StagedOut res = staged_minimize(std::move(x0), fobj, fsub, fprox, so);

    KernelDecision dec(k, kid, ds.x);
    dec.afree = std::move(res.x);

    FitReport rep;
    rep.decision = std::move(dec);
    rep.objective = res.obj;
    rep.objective_trace = std::move(res.trace);
    rep.converged = res.converged;
    rep.iters_used = res.iters;
    return rep;
}

// Linearization coefficients for the concave part of psi at the current
// margins: row i is 2 * e_argmin when min u_i < 0, else zero.
template <class MarginFn>
void psi_tilt_rows(int n, int L, MarginFn&& margins_of, std::vector<double>& tilt) {
    tilt.assign(static_cast<size_t>(n) * L, 0.0);
    MarginVector u;
    for (int i = 0; i < n; ++i) {
        margins_of(i, u);
        int a = argmin_lowest(u);
        if (u[a] < 0.0) tilt[i * L + a] = 2.0;
    }
}

inline void decision_margins(const Decision& dec, const Dataset& ds, LossId id, int i,
                             MarginVector& u) {
    std::vector<double> f = eval_decision(dec, ds.x[i]);
    if (loss_is_binary(id)) {
        const double sign = ds.y[i] == 1 ? 1.0 : -1.0;
        u.resize(1);
        u[0] = sign * 0.5 * (f[0] - f[1]);
    } else {
        functional_margin_into(f, ds.y[i], u);
    }
}

// DC outer loop shared by both decision forms: repeatedly majorize the
// concave part at the current iterate and re-solve the convex remainder with
// a warm start. An inner solve that fails to decrease the true objective is
// discarded and the loop stops, so the recorded trace never increases.
template <class InnerFit>
FitReport run_dc(const Dataset& ds, const FitConfig& cfg, FitReport init, InnerFit&& inner,
                 const Mat* gram) {
    const int L = loss_is_binary(cfg.loss) ? 1 : ds.k - 1;
    FitReport cur = std::move(init);
    double obj = objective(ds, cur.decision, cfg.loss, cfg.penalty, cfg.lambda, gram);
    std::vector<double> trace{obj};
    int iters = cur.iters_used;
    bool converged = false;
    int outer_used = 0;
    std::vector<double> tilt;
    for (int round = 0; round < cfg.dc_max_outer; ++round) {
        psi_tilt_rows(ds.n(), L,
                      [&](int i, MarginVector& u) { decision_margins(cur.decision, ds, cfg.loss, i, u); },
                      tilt);
        FitReport next = inner(cur, tilt);
        iters += next.iters_used;
        const double nobj = objective(ds, next.decision, cfg.loss, cfg.penalty, cfg.lambda, gram);
        if (!(nobj <= obj)) {
            converged = true;
            break;
        }
        const double drop = obj - nobj;
        cur.decision = std::move(next.decision);
        obj = nobj;
        trace.push_back(obj);
        ++outer_used;
        if (drop <= cfg.rel_tol * std::max(1.0, std::fabs(obj))) {
            converged = true;
            break;
        }
    }
    cur.objective = obj;
    cur.objective_trace = std::move(trace);
    cur.converged = converged;
    cur.iters_used = iters;
    cur.dc_outer_used = outer_used;
    return cur;
}

inline void validate_fit_config(const Dataset& ds, const FitConfig& cfg) {
    if (ds.n() < 1) throw usage_error("fit: empty dataset");
    if (ds.k < 2) throw usage_error("fit: need k >= 2");
    if (!(cfg.lambda >= 0.0)) throw usage_error("fit: lambda must be >= 0");
    if (cfg.max_iters < 1) throw usage_error("fit: max_iters must be >= 1");
    if (cfg.stages < 1) throw usage_error("fit: stages must be >= 1");
    if (!(cfg.step0 > 0.0)) throw usage_error("fit: step0 must be > 0");
    if (!(cfg.rel_tol >= 0.0)) throw usage_error("fit: rel_tol must be >= 0");
    if (cfg.dc_max_outer < 1) throw usage_error("fit: dc_max_outer must be >= 1");
    if (loss_is_binary(cfg.loss) && ds.k != 2)
        throw usage_error(std::string("fit: loss '") + loss_name(cfg.loss) + "' requires k = 2");
    if (cfg.loss == LossId::ZeroOne)
        throw usage_error("fit: loss 'zeroone' has no usable subgradient");
    if (cfg.penalty.id == PenaltyId::ElasticNet) {
        if (ds.k != 2) throw usage_error("fit: elasticnet penalty requires k = 2");
        if (!(cfg.penalty.theta >= 0.0 && cfg.penalty.theta <= 1.0))
            throw usage_error("fit: elasticnet theta must lie in [0, 1]");
    }
}

}  // namespace detail

inline FitReport fit_linear(const Dataset& ds, const FitConfig& cfg,
                            const LinearDecision* init = nullptr) {
    detail::validate_fit_config(ds, cfg);
    if (cfg.penalty.id == PenaltyId::RkhsSeminorm)
        throw usage_error("fit: rkhs penalty requires a kernel fit");
    const bool dc = cfg.loss == LossId::Psi || cfg.loss == LossId::BinaryPsi;
    if (!dc) {
        return detail::run_convex_linear(ds, cfg, detail::SolverLoss{cfg.loss, false}, nullptr,
                                         init);
    }
    FitConfig icfg = cfg;
    // sum-hinge initializer: the min-hinge collapses to zero whenever no class
    // holds a pointwise majority, which strands the DC loop at its kink
    icfg.loss = cfg.loss == LossId::BinaryPsi ? LossId::BinaryHinge : LossId::Svm1;
    FitReport start = detail::run_convex_linear(
        ds, icfg, detail::SolverLoss{icfg.loss, false}, nullptr, init);
    auto inner = [&](const FitReport& cur, const std::vector<double>& tilt) {
        const auto* warm = std::get_if<LinearDecision>(&cur.decision);
        return detail::run_convex_linear(ds, cfg, detail::SolverLoss{cfg.loss, true}, &tilt, warm);
    };
    return detail::run_dc(ds, cfg, std::move(start), inner, nullptr);
}

inline FitReport fit_kernel(const Dataset& ds, const FitConfig& cfg, KernelId kid,
                            const Mat* gram = nullptr, const KernelDecision* init = nullptr) {
    detail::validate_fit_config(ds, cfg);
    if (cfg.penalty.id != PenaltyId::RkhsSeminorm)
        throw usage_error("fit: kernel fits take the rkhs penalty");
    Mat own;
    if (!gram) {
        own = mcmargin::gram(kid, ds.x);
        gram = &own;
    } else if (gram->rows != ds.n() || gram->cols != ds.n()) {
        throw usage_error("fit: gram matrix does not match the dataset");
    }
    const bool dc = cfg.loss == LossId::Psi || cfg.loss == LossId::BinaryPsi;
    if (!dc) {
        return detail::run_convex_kernel(ds, cfg, kid, *gram,
                                         detail::SolverLoss{cfg.loss, false}, nullptr, init);
    }
    FitConfig icfg = cfg;
    icfg.loss = cfg.loss == LossId::BinaryPsi ? LossId::BinaryHinge : LossId::Svm1;
    FitReport start = detail::run_convex_kernel(
        ds, icfg, kid, *gram, detail::SolverLoss{icfg.loss, false}, nullptr, init);
    auto inner = [&](const FitReport& cur, const std::vector<double>& tilt) {
        const auto* warm = std::get_if<KernelDecision>(&cur.decision);
        return detail::run_convex_kernel(ds, cfg, kid, *gram, detail::SolverLoss{cfg.loss, true},
                                         &tilt, warm);
    };
    return detail::run_dc(ds, cfg, std::move(start), inner, gram);
}

}  // namespace mcmargin

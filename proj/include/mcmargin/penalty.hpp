#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "decision.hpp"

namespace mcmargin {

enum class PenaltyId { SqL2, L1, ElasticNet, RkhsSeminorm };

struct Penalty {
    PenaltyId id = PenaltyId::SqL2;
    double theta = 0.5; // ElasticNet mixing weight on the L1 part
};

inline const char* penalty_name(PenaltyId id) {
    switch (id) {
    case PenaltyId::SqL2: return "sql2";
    case PenaltyId::L1: return "l1";
    case PenaltyId::ElasticNet: return "elasticnet";
    case PenaltyId::RkhsSeminorm: return "rkhs";
    }
    return "?";
}

inline PenaltyId parse_penalty(std::string_view s) {
    for (PenaltyId id : {PenaltyId::SqL2, PenaltyId::L1, PenaltyId::ElasticNet, PenaltyId::RkhsSeminorm})
        if (s == penalty_name(id)) return id;
    throw usage_error("unknown penalty name: " + std::string(s));
}

// Intercepts are never penalized. SqL2 and L1 run over the full slope matrix
// (all k rows, the derived one included). ElasticNet applies to the single
// free slope row and therefore requires k = 2. RkhsSeminorm sums the
// quadratic form alpha_c' G alpha_c over all k coefficient columns.
inline double penalty_eval(const Penalty& pen, const Decision& dec, const Mat* gram_opt = nullptr) {
    switch (pen.id) {
    case PenaltyId::SqL2: {
        const auto* lin = std::get_if<LinearDecision>(&dec);
        if (!lin) throw std::invalid_argument("penalty_eval: sql2 applies to linear decisions");
        double s = 0.0;
        for (int c = 0; c < lin->k; ++c)
            for (int j = 0; j < lin->d; ++j) { double v = lin->w(c, j); s += v * v; }
        return s;
    }
    case PenaltyId::L1: {
        const auto* lin = std::get_if<LinearDecision>(&dec);
        if (!lin) throw std::invalid_argument("penalty_eval: l1 applies to linear decisions");
        double s = 0.0;
        for (int c = 0; c < lin->k; ++c)
            for (int j = 0; j < lin->d; ++j) s += std::fabs(lin->w(c, j));
        return s;
    }
    case PenaltyId::ElasticNet: {
        const auto* lin = std::get_if<LinearDecision>(&dec);
        if (!lin) throw std::invalid_argument("penalty_eval: elasticnet applies to linear decisions");
        if (lin->k != 2) throw std::invalid_argument("penalty_eval: elasticnet requires k = 2");
        if (pen.theta < 0.0 || pen.theta > 1.0)
            throw std::invalid_argument("penalty_eval: elasticnet mixing weight in [0,1]");
        double l1 = 0.0, l2 = 0.0;
        for (int j = 0; j < lin->d; ++j) {
            double v = lin->wfree[j];
            l1 += std::fabs(v);
            l2 += v * v;
        }
        return pen.theta * l1 + (1.0 - pen.theta) * l2;
    }
    case PenaltyId::RkhsSeminorm: {
        const auto* kd = std::get_if<KernelDecision>(&dec);
        if (!kd) throw std::invalid_argument("penalty_eval: rkhs applies to kernel decisions");
        Mat local;
        const Mat* g = gram_opt;
        if (!g) {
            local = gram(kd->kernel, kd->anchors);
            g = &local;
        }
        const int n = kd->n();
        double s = 0.0;
        for (int c = 0; c < kd->k; ++c) {
            // alpha_c' G alpha_c
            for (int i = 0; i < n; ++i) {
                double gi = 0.0;
                for (int j = 0; j < n; ++j) gi += (*g)(i, j) * kd->alpha(j, c);
                s += kd->alpha(i, c) * gi;
            }
        }
        return s;
    }
    }
    throw std::logic_error("penalty_eval: unreachable");
}

} // namespace mcmargin

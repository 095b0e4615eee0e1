#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "util.hpp"

namespace mcmargin {

// Margin vector u(f,y) = (f_y - f_j)_{j != y}, length k-1, class order preserved.
using MarginVector = std::vector<double>;

enum class LossId {
    Logit,      // log(1 + sum_j exp(-u_j))
    Svm1,       // sum_j [1 - u_j]_+
    Svm2,       // sum_j [mean(u)*(k-1)/k - u_j + 1]_+  (written via sum(u)/k)
    Svm3,       // [1 - min_j u_j]_+
    Psi,        // psi(min_j u_j), psi = 0 / 2(1-x) / 2 on x>1 / [0,1] / x<0
    SquaredMin, // (1 - min_j u_j)^2
    ZeroOne,    // I[min_j u_j < 0]
    BinaryExp,  // exp(-u), scalar margin
    BinaryLogit,// log(1 + exp(-u)), scalar margin
    BinaryHinge,// [1 - u]_+, scalar margin
    BinaryPsi   // psi(u), scalar margin
};

inline const char* loss_name(LossId id) {
    switch (id) {
    case LossId::Logit: return "logit";
    case LossId::Svm1: return "svm1";
    case LossId::Svm2: return "svm2";
    case LossId::Svm3: return "svm3";
    case LossId::Psi: return "psi";
    case LossId::SquaredMin: return "l2min";
    case LossId::ZeroOne: return "zeroone";
    case LossId::BinaryExp: return "exp";
    case LossId::BinaryLogit: return "blogit";
    case LossId::BinaryHinge: return "hinge";
    case LossId::BinaryPsi: return "bpsi";
    }
    return "?";
}

inline LossId parse_loss(std::string_view s) {
    for (LossId id : {LossId::Logit, LossId::Svm1, LossId::Svm2, LossId::Svm3, LossId::Psi,
                      LossId::SquaredMin, LossId::ZeroOne, LossId::BinaryExp, LossId::BinaryLogit,
                      LossId::BinaryHinge, LossId::BinaryPsi})
        if (s == loss_name(id)) return id;
    throw usage_error("unknown loss name: " + std::string(s));
}

inline bool loss_is_binary(LossId id) {
    return id == LossId::BinaryExp || id == LossId::BinaryLogit || id == LossId::BinaryHinge ||
           id == LossId::BinaryPsi;
}

// Losses the convex solver accepts.
inline bool loss_is_convex(LossId id) {
    switch (id) {
    case LossId::Logit:
    case LossId::Svm1:
    case LossId::Svm2:
    case LossId::Svm3:
    case LossId::BinaryExp:
    case LossId::BinaryLogit:
    case LossId::BinaryHinge:
        return true;
    default:
        return false;
    }
}

// u(f,y): differences f_y - f_j for j != y, increasing j. y is 1-based.
inline void functional_margin_into(const std::vector<double>& f, int y, MarginVector& u) {
    const int k = static_cast<int>(f.size());
    if (k < 2) throw std::invalid_argument("functional_margin: need k >= 2");
    if (y < 1 || y > k) throw std::invalid_argument("functional_margin: label out of range");
    u.resize(k - 1);
    int t = 0;
    for (int j = 0; j < k; ++j)
        if (j != y - 1) u[t++] = f[y - 1] - f[j];
}

inline MarginVector functional_margin(const std::vector<double>& f, int y) {
    MarginVector u;
    functional_margin_into(f, y, u);
    return u;
}

namespace detail {

inline double psi_scalar(double x) {
    if (x > 1.0) return 0.0;
    if (x < 0.0) return 2.0;
    return 2.0 * (1.0 - x);
}

// derivative choice at the kinks x=0, x=1: the flat branch (0)
inline double psi_scalar_d(double x) { return (x > 0.0 && x < 1.0) ? -2.0 : 0.0; }

inline int argmin_lowest(const MarginVector& u) {
    int a = 0;
    for (int j = 1; j < static_cast<int>(u.size()); ++j)
        if (u[j] < u[a]) a = j;
    return a;
}

inline double clamped_exp(double x) { return std::exp(std::min(x, 700.0)); }

} // namespace detail

inline void check_margin_arity(LossId id, const MarginVector& u) {
    if (u.empty()) throw std::invalid_argument("loss: empty margin vector");
    if (loss_is_binary(id) && u.size() != 1)
        throw std::invalid_argument("loss: binary tag requires a length-1 margin");
}

inline double loss_eval(LossId id, const MarginVector& u) {
    check_margin_arity(id, u);
    const int km1 = static_cast<int>(u.size());
    switch (id) {
    case LossId::Logit: {
        // log(1 + sum exp(-u_j)) via log-sum-exp with the implicit 0 term
        double m = 0.0;
        for (double v : u) m = std::max(m, -v);
        double s = std::exp(-m);
        for (double v : u) s += std::exp(-v - m);
        return m + std::log(s);
    }
    case LossId::Svm1: {
        double s = 0.0;
        for (double v : u) s += std::max(0.0, 1.0 - v);
        return s;
    }
    case LossId::Svm2: {
        const double k = km1 + 1;
        double sum = 0.0;
        for (double v : u) sum += v;
        double s = 0.0;
        for (double v : u) s += std::max(0.0, sum / k - v + 1.0);
        return s;
    }
    case LossId::Svm3:
        return std::max(0.0, 1.0 - *std::min_element(u.begin(), u.end()));
    case LossId::Psi:
        return detail::psi_scalar(*std::min_element(u.begin(), u.end()));
    case LossId::SquaredMin: {
        double m = 1.0 - *std::min_element(u.begin(), u.end());
        return m * m;
    }
    case LossId::ZeroOne:
        return *std::min_element(u.begin(), u.end()) < 0.0 ? 1.0 : 0.0;
    case LossId::BinaryExp:
        return detail::clamped_exp(-u[0]);
    case LossId::BinaryLogit:
        return std::max(0.0, -u[0]) + std::log1p(std::exp(-std::fabs(u[0])));
    case LossId::BinaryHinge:
        return std::max(0.0, 1.0 - u[0]);
    case LossId::BinaryPsi:
        return detail::psi_scalar(u[0]);
    }
    throw std::logic_error("loss_eval: unreachable");
}

// Subgradient w.r.t. u. Kink conventions: hinge-type kinks take the flat
// branch (0); min-based losses put the derivative on the lowest-index argmin.
inline void loss_subgrad_u_into(LossId id, const MarginVector& u, MarginVector& g) {
    check_margin_arity(id, u);
    const int km1 = static_cast<int>(u.size());
    g.assign(km1, 0.0);
    switch (id) {
    case LossId::Logit: {
        double m = 0.0;
        for (double v : u) m = std::max(m, -v);
        double s = std::exp(-m);
        for (double v : u) s += std::exp(-v - m);
        for (int j = 0; j < km1; ++j) g[j] = -std::exp(-u[j] - m) / s;
        return;
    }
    case LossId::Svm1:
        for (int j = 0; j < km1; ++j) g[j] = (u[j] < 1.0) ? -1.0 : 0.0;
        return;
    case LossId::Svm2: {
        const double k = km1 + 1;
        double sum = 0.0;
        for (double v : u) sum += v;
        for (int i = 0; i < km1; ++i) {
            if (sum / k - u[i] + 1.0 > 0.0) {
                for (int j = 0; j < km1; ++j) g[j] += 1.0 / k - (i == j ? 1.0 : 0.0);
            }
        }
        return;
    }
    case LossId::Svm3: {
        int a = detail::argmin_lowest(u);
        if (u[a] < 1.0) g[a] = -1.0;
        return;
    }
    case LossId::Psi: {
        int a = detail::argmin_lowest(u);
        g[a] = detail::psi_scalar_d(u[a]);
        return;
    }
    case LossId::SquaredMin: {
        int a = detail::argmin_lowest(u);
        g[a] = -2.0 * (1.0 - u[a]);
        return;
    }
    case LossId::BinaryExp:
        g[0] = -detail::clamped_exp(-u[0]);
        return;
    case LossId::BinaryLogit:
        // -1/(1+exp(u)), computed without overflow
        g[0] = (u[0] >= 0.0) ? -std::exp(-u[0]) / (1.0 + std::exp(-u[0]))
                             : -1.0 / (1.0 + std::exp(u[0]));
        return;
    case LossId::BinaryHinge:
        g[0] = (u[0] < 1.0) ? -1.0 : 0.0;
        return;
    case LossId::BinaryPsi:
        g[0] = detail::psi_scalar_d(u[0]);
        return;
    case LossId::ZeroOne:
        throw std::invalid_argument("loss_subgrad_u: no subgradient for the 0-1 loss");
    }
    throw std::logic_error("loss_subgrad_u: unreachable");
}

inline MarginVector loss_subgrad_u(LossId id, const MarginVector& u) {
    MarginVector g;
    loss_subgrad_u_into(id, u, g);
    return g;
}

// Difference-of-convex split of the psi losses: psi(min u) = vex - cav with
// vex = 2(1-m)_+ and cav = 2(-m)_+, m = min_j u_j. Both parts convex in u.
inline std::pair<double, double> dc_components(const MarginVector& u) {
    if (u.empty()) throw std::invalid_argument("dc_components: empty margin vector");
    double m = *std::min_element(u.begin(), u.end());
    return {2.0 * std::max(0.0, 1.0 - m), 2.0 * std::max(0.0, -m)};
}

// Loss of a decision-value vector f at label y. Multiclass tags act on the
// functional margin; binary tags act on the scalar margin m = y*(f1-f2)/2
// with the class-1 <-> +1, class-2 <-> -1 coding (m = y*f for zero-sum
// decisions (f,-f)).
inline double decision_value_loss(LossId id, const std::vector<double>& f, int y) {
    if (loss_is_binary(id)) {
        if (f.size() != 2) throw std::invalid_argument("decision_value_loss: binary tag requires k = 2");
        if (y < 1 || y > 2) throw std::invalid_argument("decision_value_loss: label out of range");
        double m = 0.5 * (f[0] - f[1]);
        return loss_eval(id, {y == 1 ? m : -m});
    }
    return loss_eval(id, functional_margin(f, y));
}

// argmax class, lowest index on ties; 1-based labels
inline int argmax_class(const std::vector<double>& f) {
    int a = 0;
    for (int j = 1; j < static_cast<int>(f.size()); ++j)
        if (f[j] > f[a]) a = j;
    return a + 1;
}

inline double misclass_loss(const std::vector<double>& f, int y) {
    if (y < 1 || y > static_cast<int>(f.size()))
        throw std::invalid_argument("misclass_loss: label out of range");
    return argmax_class(f) == y ? 0.0 : 1.0;
}

} // namespace mcmargin

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "losses.hpp"
#include "util.hpp"

namespace mcmargin {

enum class KernelId { Linear, SplineW1, SplineW2 };

inline const char* kernel_name(KernelId id) {
    switch (id) {
    case KernelId::Linear: return "linear";
    case KernelId::SplineW1: return "spline_w1";
    case KernelId::SplineW2: return "spline_w2";
    }
    return "?";
}

inline KernelId parse_kernel(std::string_view s) {
    for (KernelId id : {KernelId::Linear, KernelId::SplineW1, KernelId::SplineW2})
        if (s == kernel_name(id)) return id;
    throw usage_error("unknown kernel name: " + std::string(s));
}

// Spline kernels are the order-1/order-2 reproducing kernels on [0,1]:
//   W1: K(s,t) = 1 + min(s,t)
//   W2: K(s,t) = 1 + st + st*m - (s+t)*m^2/2 + m^3/3,  m = min(s,t)
inline double kernel_eval(KernelId id, const std::vector<double>& s, const std::vector<double>& t) {
    if (s.size() != t.size()) throw std::invalid_argument("kernel_eval: dimension mismatch");
    switch (id) {
    case KernelId::Linear: {
        double acc = 0.0;
        for (size_t i = 0; i < s.size(); ++i) acc += s[i] * t[i];
        return acc;
    }
    case KernelId::SplineW1:
    case KernelId::SplineW2: {
        if (s.size() != 1) throw std::invalid_argument("kernel_eval: spline kernels are univariate");
        double a = s[0], b = t[0];
        if (a < -1e-12 || a > 1.0 + 1e-12 || b < -1e-12 || b > 1.0 + 1e-12)
            throw std::invalid_argument("kernel_eval: spline kernel domain is [0,1]");
        double m = std::min(a, b);
        if (id == KernelId::SplineW1) return 1.0 + m;
        return 1.0 + a * b + a * b * m - (a + b) * m * m / 2.0 + m * m * m / 3.0;
    }
    }
    throw std::logic_error("kernel_eval: unreachable");
}

inline Mat gram(KernelId id, const std::vector<std::vector<double>>& pts) {
    const int n = static_cast<int>(pts.size());
    Mat g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double v = kernel_eval(id, pts[i], pts[j]);
            g(i, j) = v;
            g(j, i) = v;
        }
    return g;
}

// Linear decision f_c(x) = w_c . x + b_c with sum-to-zero rows: the first
// k-1 rows (and intercepts) are free, the last is minus their sum.
struct LinearDecision {
    int k = 2, d = 1;
    bool intercept = true;
    std::vector<double> wfree; // (k-1) x d row-major
    std::vector<double> bfree; // (k-1), present iff intercept

    LinearDecision() = default;
    LinearDecision(int k_, int d_, bool intercept_)
        : k(k_), d(d_), intercept(intercept_),
          wfree(static_cast<size_t>(k_ - 1) * d_, 0.0),
          bfree(intercept_ ? static_cast<size_t>(k_ - 1) : 0, 0.0) {
        if (k < 2 || d < 1) throw std::invalid_argument("LinearDecision: need k >= 2, d >= 1");
    }

    double w(int c, int j) const {
        if (c < k - 1) return wfree[static_cast<size_t>(c) * d + j];
        double s = 0.0;
        for (int r = 0; r < k - 1; ++r) s += wfree[static_cast<size_t>(r) * d + j];
        return -s;
    }
    double b(int c) const {
        if (!intercept) return 0.0;
        if (c < k - 1) return bfree[c];
        double s = 0.0;
        for (int r = 0; r < k - 1; ++r) s += bfree[r];
        return -s;
    }

    std::vector<double> eval(const std::vector<double>& x) const {
        if (static_cast<int>(x.size()) != d) throw std::invalid_argument("LinearDecision: x dimension");
        std::vector<double> f(k, 0.0);
        for (int c = 0; c < k - 1; ++c) {
            double v = intercept ? bfree[c] : 0.0;
            for (int j = 0; j < d; ++j) v += wfree[static_cast<size_t>(c) * d + j] * x[j];
            f[c] = v;
            f[k - 1] -= v;
        }
        return f;
    }
};

// Kernel expansion f_c(x) = sum_i alpha_{ic} K(x_i, x) with sum-to-zero
// columns: first k-1 alpha columns free, last derived.
struct KernelDecision {
    int k = 2;
    KernelId kernel = KernelId::SplineW1;
    std::vector<std::vector<double>> anchors; // n points, each of dim d
    std::vector<double> afree;                // n x (k-1) row-major

    KernelDecision() = default;
    KernelDecision(int k_, KernelId kern, std::vector<std::vector<double>> pts)
        : k(k_), kernel(kern), anchors(std::move(pts)),
          afree(anchors.size() * static_cast<size_t>(k_ - 1), 0.0) {
        if (k < 2 || anchors.empty()) throw std::invalid_argument("KernelDecision: need k >= 2 and anchors");
    }

    int n() const { return static_cast<int>(anchors.size()); }
    int d() const { return static_cast<int>(anchors.front().size()); }

    double alpha(int i, int c) const {
        if (c < k - 1) return afree[static_cast<size_t>(i) * (k - 1) + c];
        double s = 0.0;
        for (int r = 0; r < k - 1; ++r) s += afree[static_cast<size_t>(i) * (k - 1) + r];
        return -s;
    }

    std::vector<double> eval(const std::vector<double>& x) const {
        std::vector<double> f(k, 0.0);
        for (int i = 0; i < n(); ++i) {
            double kv = kernel_eval(kernel, anchors[i], x);
            for (int c = 0; c < k - 1; ++c) {
                double a = afree[static_cast<size_t>(i) * (k - 1) + c];
                f[c] += a * kv;
                f[k - 1] -= a * kv;
            }
        }
        return f;
    }
};

using Decision = std::variant<LinearDecision, KernelDecision>;

inline std::vector<double> eval_decision(const Decision& dec, const std::vector<double>& x) {
    return std::visit([&](const auto& m) { return m.eval(x); }, dec);
}

inline int classify(const Decision& dec, const std::vector<double>& x) {
    return argmax_class(eval_decision(dec, x));
}

inline int decision_classes(const Decision& dec) {
    return std::visit([](const auto& m) { return m.k; }, dec);
}

} // namespace mcmargin

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>

#include "bz/errors.hpp"

namespace bz {

struct IntegralResult {
    double value = 0.0;
    double err = 0.0;
};

namespace detail {

// 16-point Gauss-Legendre rule on [-1,1]. Nodes and weights are computed
// once by Newton iteration on P_16 (standard cos-based initial guesses
// converge in a handful of steps to full double accuracy).
struct GaussLegendre16 {
    std::array<double, 16> node{};
    std::array<double, 16> weight{};

    GaussLegendre16() {
        constexpr int n = 16;
        for (int i = 0; i < n; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                // evaluate P_n and P_n' at x by the three-term recurrence
                double p0 = 1.0, p1 = 0.0;
                for (int j = 0; j < n; ++j) {
                    double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
                }
                pp = n * (x * p0 - p1) / (x * x - 1.0);
                double dx = p0 / pp;
                x -= dx;
                if (std::fabs(dx) < 1e-16) break;
            }
            node[static_cast<size_t>(i)] = x;
            weight[static_cast<size_t>(i)] = 2.0 / ((1.0 - x * x) * pp * pp);
        }
    }

    static const GaussLegendre16& get() {
        static const GaussLegendre16 rule;
        return rule;
    }
};

} // namespace detail

// One 16-point panel over [a,b].
inline double gl_panel(const std::function<double(double)>& f, double a, double b) {
    const auto& rule = detail::GaussLegendre16::get();
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0.0;
    for (size_t i = 0; i < rule.node.size(); ++i)
        acc += rule.weight[i] * f(mid + half * rule.node[i]);
    return acc * half;
}

// Composite Gauss-Legendre over [a,b]: split into `panels` equal panels.
inline double gl_composite(const std::function<double(double)>& f, double a, double b, int panels) {
    double acc = 0.0;
    const double w = (b - a) / panels;
    for (int k = 0; k < panels; ++k)
        acc += gl_panel(f, a + k * w, a + (k + 1) * w);
    return acc;
}

// Step-halving error control: double the panel count until two successive
// composites agree within tol. The final difference is the error estimate.
inline IntegralResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                         double tol, int initial_panels = 4,
                                         int max_panels = 1 << 16) {
    double prev = gl_composite(f, a, b, initial_panels);
    for (int panels = initial_panels * 2; panels <= max_panels; panels *= 2) {
        double cur = gl_composite(f, a, b, panels);
        double diff = std::fabs(cur - prev);
        if (diff <= tol) return {cur, diff};
        prev = cur;
    }
    throw ToleranceNotReached("quadrature did not reach tolerance on [" + std::to_string(a) +
                              ", " + std::to_string(b) + "]");
}

} // namespace bz

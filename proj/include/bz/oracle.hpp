#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "bz/bigint.hpp"
#include "bz/errors.hpp"
#include "bz/quadrature.hpp"
#include "bz/series.hpp"
#include "bz/spec.hpp"

namespace bz {

// ---------------------------------------------------------------------------
// Evaluation results and coefficient-growth verdicts.
// ---------------------------------------------------------------------------

enum class EvalMethod {
    ClosedForm, // exact constructor composition; err is a machine-epsilon heuristic
    FixedPoint, // iterated recursive system; err extrapolated from the contraction rate
    Series,     // truncated sum; err is the geometric tail bound from the growth rate
    Laplace,    // quadrature of e^{-u} EGF(xu); err = quadrature + truncation estimates
    Rational,   // linear solve for automaton OGFs; err from the residual
};

struct EvalResult {
    double value = 0.0;
    double err = 0.0; // absolute bound; rigorous where the method allows, else documented heuristic
    EvalMethod method = EvalMethod::ClosedForm;
};

enum class GrowthVerdict { AtMostExponential, Superexponential, Inconclusive };

struct GrowthEstimate {
    GrowthVerdict verdict = GrowthVerdict::Inconclusive;
    double rate = 0.0;   // asserted bound on limsup a_{n+1}/a_n (margin already applied)
    double margin = 0.0; // relative inflation applied to the raw window estimate
};

namespace detail {

inline double rat_log(const BigRat& v) {
    return big_log(boost::multiprecision::numerator(v)) -
           big_log(boost::multiprecision::denominator(v));
}

// Per-step geometric rates between consecutive nonzero coefficients:
// rate_i = (a_{n_{i+1}} / a_{n_i})^{1/(n_{i+1}-n_i)}. The stride-normalized
// form keeps periodic-support sequences (e.g. words of (ab)*) usable.
template <class Coeff, class LogFn>
std::vector<double> step_rates(const std::vector<Coeff>& c, LogFn&& lg) {
    std::vector<int> nz;
    for (size_t n = 0; n < c.size(); ++n)
        if (c[n] != 0) nz.push_back(static_cast<int>(n));
    std::vector<double> rates;
    for (size_t i = 0; i + 1 < nz.size(); ++i) {
        double dl = lg(c[static_cast<size_t>(nz[i + 1])]) - lg(c[static_cast<size_t>(nz[i])]);
        rates.push_back(std::exp(dl / (nz[i + 1] - nz[i])));
    }
    return rates;
}

template <class Coeff>
bool finite_support(const std::vector<Coeff>& c, int window) {
    int last_nz = -1;
    for (size_t n = 0; n < c.size(); ++n)
        if (c[n] != 0) last_nz = static_cast<int>(n);
    if (last_nz < 0) return true; // identically zero
    return static_cast<int>(c.size()) - 1 - last_nz >= window;
}

} // namespace detail

// Ratio test over the trailing half of the nonzero-coefficient window.
// Needs at least 8 usable ratios; otherwise Inconclusive (except for
// clearly finite-support sequences, whose tail is exactly zero).
inline GrowthEstimate growth_estimate(const SeriesCoeffs& coeffs) {
    const auto& a = coeffs.counts;
    if (detail::finite_support(a, std::max(8, coeffs.order / 2)))
        return {GrowthVerdict::AtMostExponential, 0.0, 0.0};

    std::vector<double> rates = detail::step_rates(a, [](const BigInt& v) { return big_log(v); });
    if (rates.size() < 8) return {GrowthVerdict::Inconclusive, 0.0, 0.0};

    std::vector<double> window(rates.begin() + static_cast<long>(rates.size() / 2), rates.end());
    double mx = window[0], mn = window[0];
    int increases = 0;
    for (size_t i = 0; i < window.size(); ++i) {
        mx = std::max(mx, window[i]);
        mn = std::min(mn, window[i]);
        if (i > 0 && window[i] > window[i - 1]) ++increases;
    }
    double spread = (mx - mn) / (0.5 * (mx + mn));

    if (spread <= 0.10) {
        double margin = spread + 0.01;
        return {GrowthVerdict::AtMostExponential, mx * (1.0 + margin), margin};
    }
    bool increasing = increases >= static_cast<int>(0.75 * (window.size() - 1)) &&
                      window.back() >= 1.3 * window.front();
    if (increasing) return {GrowthVerdict::Superexponential, 0.0, 0.0};
    return {GrowthVerdict::Inconclusive, 0.0, 0.0};
}

// ---------------------------------------------------------------------------
// EGF evaluation.
//
// Non-recursive systems compose the constructor closed forms (exp, 1/(1-v),
// log); recursive systems iterate the same composition from zero, which
// increases monotonically to the least fixed point below the singularity.
// Above it, values blow past the divergence ceiling or fail to contract.
// ---------------------------------------------------------------------------

enum class EgfStrategy { Auto, ClosedForm, FixedPoint, Series };

namespace detail {

// Fixed-point iterates must stay under this to count as contracting.
inline constexpr double egf_divergence_ceiling = 1e12;
// Closed-form composition has no iteration to guard; only genuine overflow
// (needed well past the decay of e^{-u} in the Laplace integrals) is an error.
inline constexpr double egf_overflow_ceiling = 1e250;
inline constexpr int egf_max_iterations = 10000;

inline double eval_egf_node(const SpecSystem& sys, ExprId id,
                            const std::map<std::string, double>& classes, double x,
                            std::vector<double>* nodes,
                            double ceiling = egf_overflow_ceiling) {
    const ExprNode& nd = sys.node(id);
    double v = 0.0;
    switch (nd.kind) {
        case ExprKind::Epsilon:
            v = 1.0;
            break;
        case ExprKind::Atom:
            v = x;
            break;
        case ExprKind::Union:
            v = eval_egf_node(sys, nd.left, classes, x, nodes, ceiling) +
                eval_egf_node(sys, nd.right, classes, x, nodes, ceiling);
            break;
        case ExprKind::Product:
            v = eval_egf_node(sys, nd.left, classes, x, nodes, ceiling) *
                eval_egf_node(sys, nd.right, classes, x, nodes, ceiling);
            break;
        case ExprKind::Seq: {
            double inner = eval_egf_node(sys, nd.left, classes, x, nodes, ceiling);
            if (inner >= 1.0)
                throw EgfDivergent("SEQ argument reached 1 (EGF singularity hit)");
            v = std::pow(inner, nd.min_card) / (1.0 - inner);
            break;
        }
        case ExprKind::Set: {
            double inner = eval_egf_node(sys, nd.left, classes, x, nodes, ceiling);
            v = std::exp(inner);
            double term = 1.0;
            for (int j = 0; j < nd.min_card; ++j) {
                v -= term;
                term *= inner / (j + 1);
            }
            break;
        }
        case ExprKind::Cyc: {
            double inner = eval_egf_node(sys, nd.left, classes, x, nodes, ceiling);
            if (inner >= 1.0)
                throw EgfDivergent("CYC argument reached 1 (EGF singularity hit)");
            v = -std::log1p(-inner);
            double term = inner;
            for (int j = 1; j < nd.min_card; ++j) {
                v -= term / j;
                term *= inner;
            }
            break;
        }
        case ExprKind::Ref:
            v = classes.at(nd.ref);
            break;
    }
    if (!std::isfinite(v) || v > ceiling)
        throw EgfDivergent("EGF value exceeded the divergence ceiling");
    if (nodes) (*nodes)[static_cast<size_t>(id)] = v;
    return v;
}

inline bool system_is_recursive(const SpecSystem& sys) {
    // cycle in the class dependency graph
    std::map<std::string, std::vector<std::string>> deps;
    for (const auto& [name, body] : sys.classes()) {
        std::vector<ExprId> stack{body};
        auto& out = deps[name];
        while (!stack.empty()) {
            ExprId id = stack.back();
            stack.pop_back();
            const ExprNode& nd = sys.node(id);
            if (nd.kind == ExprKind::Ref) out.push_back(nd.ref);
            if (nd.left != invalid_expr) stack.push_back(nd.left);
            if (nd.right != invalid_expr) stack.push_back(nd.right);
        }
    }
    std::map<std::string, int> color;
    auto dfs = [&](auto&& self, const std::string& c) -> bool {
        color[c] = 1;
        for (const auto& nx : deps[c]) {
            int st = color.count(nx) ? color[nx] : 0;
            if (st == 1) return true;
            if (st == 0 && self(self, nx)) return true;
        }
        color[c] = 2;
        return false;
    };
    for (const auto& [name, body] : sys.classes()) {
        (void)body;
        if (!color.count(name) && dfs(dfs, name)) return true;
    }
    return false;
}

struct EgfSolution {
    std::map<std::string, double> classes;
    std::vector<double> nodes; // per arena node
    bool recursive = false;
    double contraction_err = 0.0;
};

inline EgfSolution solve_egf(const ValidatedSpec& spec, double x) {
    const SpecSystem& sys = spec.system();
    EgfSolution sol;
    sol.recursive = system_is_recursive(sys);
    for (const auto& [name, body] : sys.classes()) {
        (void)body;
        sol.classes[name] = 0.0;
    }
    sol.nodes.assign(static_cast<size_t>(sys.node_count()), 0.0);

    // recursive systems iterate under the pinned 1e12 divergence ceiling;
    // a one-pass closed form is only bounded by floating-point range
    const double ceiling = sol.recursive ? egf_divergence_ceiling : egf_overflow_ceiling;
    double prev_delta = std::numeric_limits<double>::infinity();
    double last_delta = std::numeric_limits<double>::infinity();
    int round = 0;
    for (; round < egf_max_iterations; ++round) {
        std::map<std::string, double> next = sol.classes;
        double delta = 0.0;
        for (const auto& [name, body] : sys.classes()) {
            double v = eval_egf_node(sys, body, sol.classes, x, nullptr, ceiling);
            delta = std::max(delta, std::fabs(v - sol.classes[name]));
            next[name] = v;
        }
        sol.classes = std::move(next);
        prev_delta = last_delta;
        last_delta = delta;
        double scale = 1.0;
        for (const auto& [name, v] : sol.classes) {
            (void)name;
            scale = std::max(scale, std::fabs(v));
        }
        if (delta <= 1e-15 * scale) break;
    }
    if (round == egf_max_iterations)
        throw EgfDivergent("fixed-point iteration failed to contract within the budget");

    if (sol.recursive && std::isfinite(prev_delta) && prev_delta > 0.0) {
        double rho = std::min(last_delta / prev_delta, 0.999);
        sol.contraction_err = last_delta * rho / (1.0 - rho);
    }
    // a final pass records per-node values against the settled class values
    for (const auto& [name, body] : sys.classes()) {
        (void)name;
        eval_egf_node(sys, body, sol.classes, x, &sol.nodes, ceiling);
    }
    return sol;
}

} // namespace detail

// Per-arena-node EGF values at parameter x (the sampler's branch weights).
inline std::vector<double> egf_node_values(const ValidatedSpec& spec, double x) {
    return detail::solve_egf(spec, x).nodes;
}

// Truncated EGF series with a geometric tail bound derived from the
// coefficient window; used as the cross-check strategy.
inline EvalResult egf_eval_series(const SeriesCoeffs& coeffs, double x) {
    const auto& b = coeffs.egf;
    if (!detail::finite_support(b, std::max(8, coeffs.order / 2))) {
        std::vector<double> rates = detail::step_rates(b, detail::rat_log);
        if (rates.size() < 8)
            throw InconclusiveGrowth("EGF series: coefficient window too short for a tail bound");
        double r_tail = 0.0;
        for (size_t i = rates.size() - std::min<size_t>(rates.size(), rates.size() / 2);
             i < rates.size(); ++i)
            r_tail = std::max(r_tail, rates[i]);
        double q = x * r_tail * 1.01;
        if (q > 0.95)
            throw EgfDivergent("EGF series: x inside the uncertain band of the radius estimate");
        BigRat xr = rat_from_double(x);
        BigRat partial = 0;
        BigRat xpow = 1;
        for (int n = 0; n <= coeffs.order; ++n) {
            partial += b[static_cast<size_t>(n)] * xpow;
            xpow *= xr;
        }
        // anchor C over the trailing window so sparse sequences are covered
        double c_anchor = 0.0;
        double lr = std::log(std::max(r_tail, 1e-300));
        for (int n = std::max(0, coeffs.order - 8); n <= coeffs.order; ++n)
            if (b[static_cast<size_t>(n)] != 0)
                c_anchor = std::max(c_anchor,
                                    std::exp(detail::rat_log(b[static_cast<size_t>(n)]) - n * lr));
        double tail = c_anchor * std::pow(q, coeffs.order + 1) / (1.0 - q);
        return {to_double(partial), tail + 1e-15 * std::fabs(to_double(partial)), EvalMethod::Series};
    }
    // finite support: the truncated sum is exact
    BigRat xr = rat_from_double(x);
    BigRat partial = 0;
    BigRat xpow = 1;
    for (int n = 0; n <= coeffs.order; ++n) {
        partial += b[static_cast<size_t>(n)] * xpow;
        xpow *= xr;
    }
    double v = to_double(partial);
    return {v, 1e-15 * std::fabs(v), EvalMethod::Series};
}

// EGF value of one class. Auto picks closed-form composition for
// non-recursive systems and fixed-point iteration otherwise; the Series
// strategy computes its own coefficients at the default truncation.
inline EvalResult egf_eval(const ValidatedSpec& spec, const std::string& class_name, double x,
                           double tol = 1e-12, EgfStrategy strategy = EgfStrategy::Auto,
                           int series_order = 64) {
    if (x < 0.0) throw Error("egf_eval: x must be >= 0");
    if (strategy == EgfStrategy::Series)
        return egf_eval_series(egf_coeffs(spec, class_name, series_order), x);

    detail::EgfSolution sol = detail::solve_egf(spec, x);
    if (strategy == EgfStrategy::ClosedForm && sol.recursive)
        throw Error("egf_eval: closed-form strategy requested for a recursive system");
    double v = sol.classes.at(class_name);
    double err = sol.contraction_err + 1e-14 * (1.0 + std::fabs(v));
    if (tol > 0.0 && err > tol * (1.0 + std::fabs(v)))
        throw ToleranceNotReached("egf_eval: error bound " + std::to_string(err) +
                                  " above requested tolerance");
    return {v, err, sol.recursive ? EvalMethod::FixedPoint : EvalMethod::ClosedForm};
}

// ---------------------------------------------------------------------------
// OGF evaluation: truncated series route and Laplace-Borel quadrature route.
// The two routes are kept independent so their agreement is a real check of
// the normalization identity rather than a tautology.
// ---------------------------------------------------------------------------

namespace detail {

// C such that a_n <= C rate^n over the trailing window (heuristic anchor,
// inherits the growth verdict's confidence).
inline double growth_anchor(const SeriesCoeffs& coeffs, double rate) {
    if (rate <= 0.0) return 0.0;
    double c = 0.0;
    double lr = std::log(rate);
    for (int n = std::max(0, coeffs.order - 12); n <= coeffs.order; ++n) {
        const BigInt& a = coeffs.counts[static_cast<size_t>(n)];
        if (a != 0) c = std::max(c, std::exp(big_log(a) - n * lr));
    }
    return c;
}

inline void require_series_convergence(const GrowthEstimate& growth, double x) {
    if (growth.verdict == GrowthVerdict::Superexponential)
        throw DivergentOgf("OGF divergent: superexponential coefficient growth");
    if (growth.verdict == GrowthVerdict::Inconclusive)
        throw InconclusiveGrowth("OGF: coefficient growth inconclusive");
    if (x * growth.rate > 0.95)
        throw DivergentOgf("OGF: x * R exceeds the 0.95 safety margin");
}

} // namespace detail

// Sum of a_n x^n up to the truncation order, exact in rational arithmetic,
// plus a geometric tail bound folded into the error.
inline EvalResult ogf_eval_series(const SeriesCoeffs& coeffs, const GrowthEstimate& growth,
                                  double x) {
    if (x < 0.0) throw Error("ogf_eval_series: x must be >= 0");
    if (x == 0.0) // the sum collapses to a_0 regardless of growth
        return {to_double(coeffs.counts[0]), 0.0, EvalMethod::Series};
    detail::require_series_convergence(growth, x);
    BigRat xr = rat_from_double(x);
    BigRat partial = 0;
    BigRat xpow = 1;
    for (int n = 0; n <= coeffs.order; ++n) {
        partial += BigRat(coeffs.counts[static_cast<size_t>(n)]) * xpow;
        xpow *= xr;
    }
    double q = x * growth.rate;
    double tail = (q > 0.0) ? detail::growth_anchor(coeffs, growth.rate) *
                                  std::pow(q, coeffs.order + 1) / (1.0 - q)
                            : 0.0;
    double v = to_double(partial);
    return {v, tail + 1e-15 * std::fabs(v), EvalMethod::Series};
}

namespace detail {

// Panel-by-panel scan of int_0^inf integrand(u) du until the contributions
// decay out. With the divergence guard on, six consecutive growing panels
// past the initial transient flag a divergent integrand; off is for callers
// whose growth verdict already certifies integrability (finite support).
inline EvalResult laplace_scan(const std::function<double(double)>& integrand, double tol,
                               bool divergence_guard) {
    const double width = 4.0;
    const int max_panels = 5000;
    double total = 0.0, err = 0.0;
    double prev_panel = std::numeric_limits<double>::infinity();
    int grow_streak = 0;
    for (int k = 0; k < max_panels; ++k) {
        double a = k * width, b = (k + 1) * width;
        IntegralResult r;
        try {
            r = integrate_adaptive(integrand, a, b, tol / (8.0 * (k + 1) * (k + 2)));
        } catch (const EgfDivergent&) {
            throw DivergentOgf("Laplace integrand hits an EGF singularity at finite u");
        }
        total += r.value;
        err += r.err;
        if (r.value > prev_panel) {
            if (++grow_streak >= 6 && b > 24.0 && divergence_guard)
                throw DivergentOgf("Laplace integrand fails the monotone-decay check");
        } else {
            grow_streak = 0;
        }
        if (r.value < tol / 8.0 && r.value < prev_panel) {
            double rho = (prev_panel > 0.0) ? r.value / prev_panel : 0.0;
            if (rho < 0.9) {
                err += r.value * rho / (1.0 - rho);
                if (err > tol)
                    throw ToleranceNotReached("ogf_eval_laplace: accumulated error above tolerance");
                return {total, err, EvalMethod::Laplace};
            }
        }
        prev_panel = r.value;
    }
    throw ToleranceNotReached("ogf_eval_laplace: integrand did not decay out");
}

} // namespace detail

// A(x) = integral_0^inf e^{-u} EGF(xu) du, by composite Gauss-Legendre
// panels. Without a growth hint the domain is extended panel by panel until
// the contributions decay out, guarded against divergent integrands; a
// singularity of the EGF evaluator at finite u surfaces as DivergentOgf.
inline EvalResult ogf_eval_laplace(const std::function<double(double)>& egf, double x,
                                   double tol) {
    if (x < 0.0) throw Error("ogf_eval_laplace: x must be >= 0");
    auto integrand = [&](double u) { return std::exp(-u) * egf(x * u); };
    return detail::laplace_scan(integrand, tol, true);
}

// Hinted variant: the growth verdict supplies the cutoff
// U = log(C / ((1-q) tol/2)) / (1-q) with q = x * rate, beyond which
// e^{-u(1-q)} C/(1-q) < tol/2. The value still comes from quadrature alone.
inline EvalResult ogf_eval_laplace(const std::function<double(double)>& egf, double x, double tol,
                                   const SeriesCoeffs& coeffs, const GrowthEstimate& growth) {
    // rate 0 means finite support: e^{-u} poly(xu) is integrable for every x
    // but may legitimately grow through many panels, so scan without the
    // divergence tripwire instead of cutting on a geometric envelope
    if (growth.verdict == GrowthVerdict::AtMostExponential && growth.rate <= 0.0) {
        auto integrand = [&](double u) { return std::exp(-u) * egf(x * u); };
        return detail::laplace_scan(integrand, tol, false);
    }
    if (growth.verdict != GrowthVerdict::AtMostExponential || x * growth.rate >= 0.98)
        return ogf_eval_laplace(egf, x, tol); // fall back to the self-guarded scan
    double q = x * growth.rate;
    double c = std::max(detail::growth_anchor(coeffs, growth.rate), 1e-12);
    double u_cut = std::log(2.0 * c / ((1.0 - q) * tol)) / (1.0 - q);
    u_cut = std::max(u_cut, 8.0);
    auto integrand = [&](double u) { return std::exp(-u) * egf(x * u); };
    IntegralResult r;
    try {
        r = integrate_adaptive(integrand, 0.0, u_cut, tol / 2.0,
                               std::max(4, static_cast<int>(u_cut / 4.0)));
    } catch (const EgfDivergent&) {
        throw DivergentOgf("Laplace integrand hits an EGF singularity at finite u");
    }
    double tail = c * std::exp(-u_cut * (1.0 - q)) / (1.0 - q);
    return {r.value, r.err + tail, EvalMethod::Laplace};
}

// Mean of the ordinary Boltzmann size law at x: sum n a_n x^n / sum a_n x^n,
// both sums carrying geometric tail bounds.
inline double expected_size_ordinary(const SeriesCoeffs& coeffs, const GrowthEstimate& growth,
                                     double x) {
    if (x < 0.0) throw Error("expected_size_ordinary: x must be >= 0");
    if (x == 0.0) return 0.0;
    detail::require_series_convergence(growth, x);
    BigRat xr = rat_from_double(x);
    BigRat num = 0, den = 0, xpow = 1;
    for (int n = 0; n <= coeffs.order; ++n) {
        BigRat t = BigRat(coeffs.counts[static_cast<size_t>(n)]) * xpow;
        den += t;
        num += BigRat(n) * t;
        xpow *= xr;
    }
    double q = x * growth.rate;
    double c = detail::growth_anchor(coeffs, growth.rate);
    int np = coeffs.order + 1;
    double den_tail = (q > 0.0) ? c * std::pow(q, np) / (1.0 - q) : 0.0;
    double num_tail = (q > 0.0)
                          ? c * std::pow(q, np) * (np * (1.0 - q) + q) / ((1.0 - q) * (1.0 - q))
                          : 0.0;
    double d = to_double(den);
    if (d <= 0.0) throw DivergentOgf("expected_size_ordinary: zero OGF value");
    double mean = to_double(num) / d;
    double mean_err = (num_tail + mean * den_tail) / d;
    if (den_tail > 1e-6 * d || mean_err > 1e-6 * (1.0 + mean))
        throw ToleranceNotReached("expected_size_ordinary: truncation order too small for x");
    return mean;
}

} // namespace bz

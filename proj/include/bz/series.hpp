#pragma once

#include <map>
#include <string>
#include <vector>

#include "bz/bigint.hpp"
#include "bz/errors.hpp"
#include "bz/spec.hpp"

namespace bz {

// Exact counting sequence of one class: counts a_0..a_N and the EGF
// coefficients a_n/n! as exact rationals. egf[n] * n! == counts[n] always.
struct SeriesCoeffs {
    std::string class_name;
    int order = 0;
    std::vector<BigInt> counts;
    std::vector<BigRat> egf;
};

// ---------------------------------------------------------------------------
// Truncated power-series arithmetic over exact rationals. A Series holds
// EGF coefficients up to a fixed order; every operation truncates there.
// ---------------------------------------------------------------------------

using Series = std::vector<BigRat>;

namespace ps {

inline Series zero(int order) { return Series(static_cast<size_t>(order) + 1, BigRat(0)); }

inline Series one(int order) {
    Series s = zero(order);
    s[0] = 1;
    return s;
}

inline Series add(const Series& f, const Series& g) {
    Series h(f.size());
    for (size_t n = 0; n < f.size(); ++n) h[n] = f[n] + g[n];
    return h;
}

inline Series mul(const Series& f, const Series& g) {
    Series h(f.size(), BigRat(0));
    for (size_t i = 0; i < f.size(); ++i) {
        if (f[i] == 0) continue;
        for (size_t j = 0; i + j < f.size(); ++j) {
            if (g[j] == 0) continue;
            h[i + j] += f[i] * g[j];
        }
    }
    return h;
}

inline Series pow(const Series& f, int k) {
    Series acc = one(static_cast<int>(f.size()) - 1);
    for (int i = 0; i < k; ++i) acc = mul(acc, f);
    return acc;
}

// 1/(1-f) for f with zero constant term: h_n = [n=0] + sum_{j>=1} f_j h_{n-j}.
inline Series quasi_inverse(const Series& f) {
    if (f[0] != 0) throw IllFounded("<series>", "quasi-inverse of a series with nonzero constant term");
    Series h(f.size(), BigRat(0));
    h[0] = 1;
    for (size_t n = 1; n < f.size(); ++n) {
        BigRat acc = 0;
        for (size_t j = 1; j <= n; ++j)
            if (f[j] != 0) acc += f[j] * h[n - j];
        h[n] = acc;
    }
    return h;
}

// exp(f) for f with zero constant term, via h' = f' h:
// n h_n = sum_{j=1..n} j f_j h_{n-j}.
inline Series exp(const Series& f) {
    if (f[0] != 0) throw IllFounded("<series>", "exp of a series with nonzero constant term");
    Series h(f.size(), BigRat(0));
    h[0] = 1;
    for (size_t n = 1; n < f.size(); ++n) {
        BigRat acc = 0;
        for (size_t j = 1; j <= n; ++j)
            if (f[j] != 0) acc += BigRat(j) * f[j] * h[n - j];
        h[n] = acc / BigRat(n);
    }
    return h;
}

// log(1/(1-f)) for f with zero constant term, via L' = f'/(1-f):
// n L_n = [x^{n-1}] (f' * quasi_inverse(f)).
inline Series log_quasi_inverse(const Series& f) {
    Series g = quasi_inverse(f);
    Series l(f.size(), BigRat(0));
    for (size_t n = 1; n < f.size(); ++n) {
        BigRat acc = 0;
        for (size_t i = 0; i + 1 <= n; ++i) {
            // (f')_i = (i+1) f_{i+1}
            if (f[i + 1] != 0) acc += BigRat(i + 1) * f[i + 1] * g[n - 1 - i];
        }
        l[n] = acc / BigRat(n);
    }
    return l;
}

// SEQ>=k(f) = f^k / (1-f)
inline Series seq_min(const Series& f, int k) {
    Series h = quasi_inverse(f);
    if (k > 0) h = mul(pow(f, k), h);
    return h;
}

// SET>=k(f) = exp(f) - sum_{j<k} f^j / j!
inline Series set_min(const Series& f, int k) {
    Series h = exp(f);
    if (k > 0) {
        Series term = one(static_cast<int>(f.size()) - 1);
        for (int j = 0; j < k; ++j) {
            for (size_t n = 0; n < h.size(); ++n) h[n] -= term[n];
            term = mul(term, f);
            for (auto& c : term) c /= BigRat(j + 1);
        }
    }
    return h;
}

// CYC>=k(f) = sum_{j>=k} f^j / j, k >= 1
inline Series cyc_min(const Series& f, int k) {
    Series h = log_quasi_inverse(f);
    if (k > 1) {
        Series term = f;
        for (int j = 1; j < k; ++j) {
            for (size_t n = 0; n < h.size(); ++n) h[n] -= term[n] / BigRat(j);
            term = mul(term, f);
        }
    }
    return h;
}

} // namespace ps

// ---------------------------------------------------------------------------
// egf_coeffs: exact coefficients of one class of a validated system.
//
// Recursive systems are resolved by iterating the coefficient map from the
// zero series; for a well-founded system every coefficient up to N is
// stable after at most N+1 rounds (each round fixes at least one further
// coefficient along every productive recursion).
// ---------------------------------------------------------------------------

namespace detail {

inline Series eval_series_expr(const SpecSystem& sys, ExprId id,
                               const std::map<std::string, Series>& env, int order) {
    const ExprNode& nd = sys.node(id);
    switch (nd.kind) {
        case ExprKind::Epsilon:
            return ps::one(order);
        case ExprKind::Atom: {
            Series s = ps::zero(order);
            if (order >= 1) s[1] = 1;
            return s;
        }
        case ExprKind::Union:
            return ps::add(eval_series_expr(sys, nd.left, env, order),
                           eval_series_expr(sys, nd.right, env, order));
        case ExprKind::Product:
            return ps::mul(eval_series_expr(sys, nd.left, env, order),
                           eval_series_expr(sys, nd.right, env, order));
        case ExprKind::Seq:
            return ps::seq_min(eval_series_expr(sys, nd.left, env, order), nd.min_card);
        case ExprKind::Set:
            return ps::set_min(eval_series_expr(sys, nd.left, env, order), nd.min_card);
        case ExprKind::Cyc:
            return ps::cyc_min(eval_series_expr(sys, nd.left, env, order), nd.min_card);
        case ExprKind::Ref:
            return env.at(nd.ref);
    }
    return ps::zero(order);
}

} // namespace detail

inline SeriesCoeffs egf_coeffs(const ValidatedSpec& spec, const std::string& class_name, int order) {
    if (order < 0) throw Error("egf_coeffs: negative order");
    const SpecSystem& sys = spec.system();
    sys.class_expr(class_name); // throws UnknownName early

    std::map<std::string, Series> env;
    for (const auto& [name, body] : sys.classes()) {
        (void)body;
        env[name] = ps::zero(order);
    }

    bool stable = false;
    for (int round = 0; round <= order + 1 && !stable; ++round) {
        stable = true;
        std::map<std::string, Series> next = env;
        for (const auto& [name, body] : sys.classes()) {
            next[name] = detail::eval_series_expr(sys, body, env, order);
            if (next[name] != env[name]) stable = false;
        }
        env = std::move(next);
    }
    if (!stable) {
        // one extra round distinguishes "converged on the last pass" from a
        // genuinely non-stabilizing (unvalidated) system
        std::map<std::string, Series> next = env;
        bool ok = true;
        for (const auto& [name, body] : sys.classes()) {
            next[name] = detail::eval_series_expr(sys, body, env, order);
            if (next[name] != env[name]) ok = false;
        }
        if (!ok)
            throw IllFounded(class_name, "coefficients failed to stabilize");
        env = std::move(next);
    }

    SeriesCoeffs out;
    out.class_name = class_name;
    out.order = order;
    out.egf = env[class_name];
    out.counts.resize(static_cast<size_t>(order) + 1);
    BigInt fact = 1;
    for (int n = 0; n <= order; ++n) {
        if (n > 0) fact *= n;
        BigRat a = out.egf[static_cast<size_t>(n)] * BigRat(fact);
        if (boost::multiprecision::denominator(a) != 1)
            throw Error("egf_coeffs: non-integer labeled count at n=" + std::to_string(n));
        BigInt cnt = boost::multiprecision::numerator(a);
        if (cnt < 0) throw Error("egf_coeffs: negative count at n=" + std::to_string(n));
        out.counts[static_cast<size_t>(n)] = cnt;
    }
    return out;
}

} // namespace bz

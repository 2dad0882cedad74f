#pragma once

#include <cmath>
#include <stdexcept>

#include "bz/rng.hpp"

namespace bz {

// Standard normal via the Marsaglia polar method.
inline double normal01(RandomSource& rng) {
    for (;;) {
        double a = 2.0 * rng.unit() - 1.0;
        double b = 2.0 * rng.unit() - 1.0;
        double s = a * a + b * b;
        if (s > 0.0 && s < 1.0)
            return a * std::sqrt(-2.0 * std::log(s) / s);
    }
}

// Gamma(shape, scale 1) variate, Marsaglia & Tsang (2000). O(1) expected
// draws per variate for shape >= 1 (acceptance rate > 0.95); shapes below 1
// are boosted through Gamma(shape+1) and a power of a uniform.
inline double gamma_variate(double shape, RandomSource& rng) {
    if (!(shape > 0.0)) throw std::domain_error("gamma_variate: shape must be > 0");
    if (shape < 1.0) {
        double u = rng.unit();
        while (u == 0.0) u = rng.unit();
        return gamma_variate(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal01(rng);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        double u = rng.unit();
        while (u == 0.0) u = rng.unit();
        double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

// The discrete laws below are drawn by sequential inversion on the
// cumulative probabilities: parameters are desk-scale, so the scan is
// short, exact, and free of rejection constants. Each supports
// conditioning on a minimum count (the ">= k" constructor variants).

// Poisson(lambda) conditioned on k >= min_count. P(k) ∝ lambda^k / k!.
inline long draw_poisson(double lambda, RandomSource& rng, long min_count = 0) {
    if (lambda < 0.0) throw std::domain_error("draw_poisson: lambda < 0");
    if (lambda == 0.0) {
        if (min_count > 0) throw std::domain_error("draw_poisson: lambda 0 with min > 0");
        return 0;
    }
    long k = min_count;
    // w_k = lambda^k / k!, cumulative scan against u * Z with
    // Z = e^lambda - sum_{j<min} lambda^j/j!
    double z = std::exp(lambda);
    double w = 1.0;
    for (long j = 1; j <= min_count; ++j) {
        z -= w;
        w *= lambda / static_cast<double>(j);
    }
    if (!(z > 0.0)) throw std::domain_error("draw_poisson: conditioned mass underflow");
    double target = rng.unit() * z;
    double cum = w;
    while (cum <= target && k < (1L << 30)) {
        ++k;
        w *= lambda / static_cast<double>(k);
        cum += w;
    }
    return k;
}

// Geometric with success-ish parameter p in [0,1): P(k) = (1-p) p^k.
// Conditioning on k >= min_count is a plain shift (memorylessness).
inline long draw_geometric(double p, RandomSource& rng, long min_count = 0) {
    if (!(p >= 0.0 && p < 1.0)) throw std::domain_error("draw_geometric: p outside [0,1)");
    if (p == 0.0) return min_count;
    double target = rng.unit();
    double w = 1.0 - p;
    double cum = w;
    long k = 0;
    while (cum <= target && k < (1L << 30)) {
        ++k;
        w *= p;
        cum += w;
    }
    return k + min_count;
}

// Logarithmic law: P(k) ∝ lambda^k / k for k >= max(1, min_count),
// normalized by -ln(1-lambda) minus the excluded prefix.
inline long draw_loglaw(double lambda, RandomSource& rng, long min_count = 1) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw std::domain_error("draw_loglaw: lambda outside (0,1)");
    if (min_count < 1) min_count = 1;
    double z = -std::log1p(-lambda);
    double w = 1.0; // lambda^k, maintained alongside k
    for (long j = 1; j < min_count; ++j) {
        w *= lambda;
        z -= w / static_cast<double>(j);
    }
    if (!(z > 0.0)) throw std::domain_error("draw_loglaw: conditioned mass underflow");
    long k = min_count;
    w *= lambda;
    double target = rng.unit() * z;
    double cum = w / static_cast<double>(k);
    while (cum <= target && k < (1L << 30)) {
        ++k;
        w *= lambda;
        cum += w / static_cast<double>(k);
    }
    return k;
}

} // namespace bz

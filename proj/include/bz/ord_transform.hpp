#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bz/bigint.hpp"
#include "bz/distributions.hpp"
#include "bz/errors.hpp"
#include "bz/oracle.hpp"
#include "bz/rng.hpp"
#include "bz/series.hpp"

namespace bz {

// Ordinary sampling on top of a size-biased sampler: draw u from the density
//
//     d(u) = e^{-u} EGF(x u) / A(x),  u >= 0,
//
// then run the size-biased sampler at parameter x*u. Mixing the Gamma(n+1)
// laws with weights pi_n = a_n x^n / A(x) turns x^n/n! into x^n exactly,
// because the u-integral of e^{-u} u^n is n!.
//
// Two interchangeable u-draw strategies, fed by the two independent oracle
// routes: Mixture tabulates pi_n from the coefficients and draws
// u ~ Gamma(n+1, 1); InverseCdf tabulates the cumulative of d(u) from the
// EGF evaluator and inverts it by interpolation.

enum class UStrategyChoice { Mixture, InverseCdf };

// What the builder needs to know about a class, independent of whether the
// objects are spec terms, automaton words, or interleavings.
struct OrdinaryModel {
    double x = 0.0;
    std::function<SeriesCoeffs(int)> coeffs_at; // coefficients through a requested order
    std::function<double(double)> egf;          // t -> EGF(t)
    int initial_order = 64;
    int max_order = 4096;
};

// --- Mixture strategy -------------------------------------------------------

class MixtureTable {
  public:
    MixtureTable(std::vector<double> pi, double tail) : pi_(std::move(pi)), tail_(tail) {
        double sum = 0.0;
        for (double p : pi_) sum += p;
        if (!(tail_ < 1e-9))
            throw TailTooHeavy("mixture tail mass " + std::to_string(tail_) +
                               " at the truncation cap");
        if (sum + tail_ > 1.0 + 1e-12)
            throw Error("mixture weights sum past 1: " + std::to_string(sum + tail_));
        cum_.resize(pi_.size());
        double c = 0.0;
        for (size_t n = 0; n < pi_.size(); ++n) {
            c += pi_[n];
            cum_[n] = c;
        }
    }

    // Size-law inversion; the sub-1e-9 tail collapses onto the last index.
    long draw_size(RandomSource& rng) const {
        double v = rng.unit();
        size_t lo = 0, hi = cum_.size();
        while (lo < hi) {
            size_t mid = (lo + hi) / 2;
            if (cum_[mid] > v)
                hi = mid;
            else
                lo = mid + 1;
        }
        return static_cast<long>(lo < cum_.size() ? lo : cum_.size() - 1);
    }

    double draw(RandomSource& rng) const {
        return gamma_variate(static_cast<double>(draw_size(rng)) + 1.0, rng);
    }

    const std::vector<double>& weights() const { return pi_; }
    double tail() const { return tail_; }

  private:
    std::vector<double> pi_;
    std::vector<double> cum_;
    double tail_;
};

// --- InverseCdf strategy ----------------------------------------------------

class InverseCdfTable {
  public:
    // grid[i] = i * step; cdf has one entry per grid point, cdf[0] == 0.
    InverseCdfTable(double step, std::vector<double> cdf) : step_(step), cdf_(std::move(cdf)) {
        if (cdf_.size() < 2) throw Error("inverse-cdf table needs at least one cell");
        for (size_t i = 1; i < cdf_.size(); ++i)
            if (cdf_[i] < cdf_[i - 1]) throw Error("inverse-cdf table not monotone");
        if (!(cdf_.back() >= 1.0 - 1e-9))
            throw TailTooHeavy("inverse-cdf table reaches only " + std::to_string(cdf_.back()) +
                               " at its cutoff");
    }

    double draw(RandomSource& rng) const {
        double v = rng.unit();
        if (v >= cdf_.back()) return step_ * static_cast<double>(cdf_.size() - 1);
        size_t lo = 0, hi = cdf_.size() - 1;
        while (lo + 1 < hi) {
            size_t mid = (lo + hi) / 2;
            if (cdf_[mid] > v)
                hi = mid;
            else
                lo = mid;
        }
        double seg = cdf_[hi] - cdf_[lo];
        double frac = seg > 0.0 ? (v - cdf_[lo]) / seg : 0.0;
        return step_ * (static_cast<double>(lo) + frac);
    }

    double cutoff() const { return step_ * static_cast<double>(cdf_.size() - 1); }
    const std::vector<double>& cdf() const { return cdf_; }
    double step() const { return step_; }

  private:
    double step_;
    std::vector<double> cdf_;
};

using UStrategy = std::variant<MixtureTable, InverseCdfTable>;

// Built state shared by every ordinary sampler: the cross-checked OGF value,
// the growth verdict it rests on, and the chosen u-draw table.
struct UService {
    double x = 0.0;
    EvalResult a;          // A(x), series route, Laplace-cross-checked
    GrowthEstimate growth; // verdict the series tail bound used
    SeriesCoeffs coeffs;   // as extended during the build
    std::function<double(double)> egf;
    UStrategy strategy;

    double draw_u(RandomSource& rng) const {
        return std::visit([&](const auto& s) { return s.draw(rng); }, strategy);
    }

    double density(double u) const { return std::exp(-u) * egf(x * u) / a.value; }
};

namespace detail {

inline SeriesCoeffs coeffs_with_conclusive_growth(const OrdinaryModel& model,
                                                  GrowthEstimate& growth) {
    int order = model.initial_order;
    SeriesCoeffs coeffs = model.coeffs_at(order);
    growth = growth_estimate(coeffs);
    while (growth.verdict == GrowthVerdict::Inconclusive && order < model.max_order) {
        order = std::min(order * 2, model.max_order);
        coeffs = model.coeffs_at(order);
        growth = growth_estimate(coeffs);
    }
    return coeffs;
}

inline MixtureTable build_mixture(const OrdinaryModel& model, SeriesCoeffs& coeffs,
                                  GrowthEstimate& growth, const EvalResult& a) {
    (void)a;
    const double x = model.x;
    BigRat xr = rat_from_double(x);
    for (;;) {
        double q = x * growth.rate;
        double anchor = growth_anchor(coeffs, growth.rate);
        BigRat partial = 0, xpow = 1;
        std::vector<BigRat> terms(static_cast<size_t>(coeffs.order) + 1);
        for (int n = 0; n <= coeffs.order; ++n) {
            terms[static_cast<size_t>(n)] = BigRat(coeffs.counts[static_cast<size_t>(n)]) * xpow;
            partial += terms[static_cast<size_t>(n)];
            xpow *= xr;
        }
        double p = to_double(partial);
        if (p <= 0.0) throw DegenerateLaw("ordinary law has zero mass at x = " + std::to_string(x));
        double tail_bound = (q > 0.0) ? anchor * std::pow(q, coeffs.order + 1) / (1.0 - q) : 0.0;
        if (tail_bound <= 1e-10 * p) {
            double norm = p + 0.5 * tail_bound;
            std::vector<double> pi(terms.size());
            double sum = 0.0;
            for (size_t n = 0; n < terms.size(); ++n) {
                pi[n] = to_double(terms[n]) / norm;
                sum += pi[n];
            }
            return MixtureTable(std::move(pi), std::max(0.0, 1.0 - sum));
        }
        if (coeffs.order >= model.max_order)
            throw TailTooHeavy("mixture tail still " + std::to_string(tail_bound / p) +
                               " relative at order " + std::to_string(coeffs.order));
        coeffs = model.coeffs_at(std::min(coeffs.order * 2, model.max_order));
        growth = growth_estimate(coeffs);
        require_series_convergence(growth, x);
    }
}

inline InverseCdfTable build_inverse_cdf(const OrdinaryModel& model, double a_value) {
    const double x = model.x;
    const double step = 1.0 / 256.0;
    const size_t max_cells = 1u << 18;
    auto integrand = [&](double u) { return std::exp(-u) * model.egf(x * u); };
    std::vector<double> cdf{0.0};
    double cum = 0.0;
    bool ceiling_hit = false;
    for (size_t cell = 0; cell < max_cells; ++cell) {
        double a = static_cast<double>(cell) * step;
        double mass = 0.0;
        try {
            mass = gl_panel(integrand, a, a + step) / a_value;
        } catch (const EgfDivergent&) {
            ceiling_hit = true;
            break;
        }
        cum += std::max(mass, 0.0);
        cdf.push_back(cum);
        if (cum >= 1.0 - 5e-10 || (mass < 1e-13 && a > 8.0)) break;
    }
    if (cum < 1.0 - 1e-9) {
        if (ceiling_hit)
            throw DivergentOgf("u-density mass ran into the EGF evaluation ceiling");
        throw TailTooHeavy("inverse-cdf table reaches only " + std::to_string(cum) +
                           " within the cell budget");
    }
    if (cum > 1.0 + 1e-6)
        throw InconsistentOracle("u-density integrates to " + std::to_string(cum) +
                                 "; OGF value and EGF evaluator disagree");
    return InverseCdfTable(step, std::move(cdf));
}

} // namespace detail

// Runs the full pre-flight: conclusive growth verdict, convergence at x,
// series OGF value cross-checked against the Laplace route, then the
// requested u-draw table.
inline UService build_u_service(const OrdinaryModel& model, UStrategyChoice choice) {
    if (!(model.x >= 0.0)) throw Error("ordinary sampler: x must be >= 0");

    GrowthEstimate growth;
    SeriesCoeffs coeffs = detail::coeffs_with_conclusive_growth(model, growth);
    detail::require_series_convergence(growth, model.x);

    // the series value normalizes the u-density, so tighten the truncation
    // until its tail bound is negligible against the value itself
    EvalResult a_series = ogf_eval_series(coeffs, growth, model.x);
    while (a_series.err > 1e-10 * (1.0 + std::fabs(a_series.value)) &&
           coeffs.order < model.max_order) {
        coeffs = model.coeffs_at(std::min(coeffs.order * 2, model.max_order));
        growth = growth_estimate(coeffs);
        detail::require_series_convergence(growth, model.x);
        a_series = ogf_eval_series(coeffs, growth, model.x);
    }
    if (a_series.err > 1e-9 * (1.0 + std::fabs(a_series.value)))
        throw TailTooHeavy("series OGF tail still " + std::to_string(a_series.err) +
                           " at the truncation cap");
    if (!(a_series.value > 0.0))
        throw DegenerateLaw("ordinary law has zero mass at x = " + std::to_string(model.x));
    EvalResult a_laplace =
        ogf_eval_laplace(model.egf, model.x, 1e-8 * (1.0 + a_series.value), coeffs, growth);
    double gap = std::fabs(a_series.value - a_laplace.value);
    if (gap > 4.0 * (a_series.err + a_laplace.err) + 1e-12 * (1.0 + a_series.value))
        throw InconsistentOracle("series OGF " + std::to_string(a_series.value) +
                                 " vs Laplace OGF " + std::to_string(a_laplace.value) +
                                 " beyond the combined error budget");

    if (choice == UStrategyChoice::Mixture) {
        MixtureTable table = detail::build_mixture(model, coeffs, growth, a_series);
        // the table may have extended the order; refresh the reported value
        a_series = ogf_eval_series(coeffs, growth, model.x);
        return UService{model.x,   a_series, growth, std::move(coeffs), model.egf,
                        UStrategy(std::move(table))};
    }
    return UService{model.x,
                    a_series,
                    growth,
                    std::move(coeffs),
                    model.egf,
                    UStrategy(detail::build_inverse_cdf(model, a_series.value))};
}

// Total mass of the built u-density by panel quadrature out to decay; the
// machine check of the normalization identity behind the transform.
inline IntegralResult density_mass(const UService& svc) {
    const double step = 0.25;
    const size_t max_cells = 1u << 16;
    auto d = [&](double u) { return svc.density(u); };
    double total = 0.0, err = 0.0, last = 0.0;
    for (size_t cell = 0; cell < max_cells; ++cell) {
        double a = static_cast<double>(cell) * step;
        double mass;
        try {
            mass = gl_panel(d, a, a + step);
        } catch (const EgfDivergent&) {
            break; // evaluation ceiling past the mass; the tail bound below covers it
        }
        total += mass;
        err += 2e-16 * std::fabs(mass) + 1e-18;
        if (mass < 1e-13 && a > 8.0) {
            // geometric extrapolation of the remaining cells
            double rho = (last > 0.0) ? std::min(mass / last, 0.99) : 0.0;
            err += mass * rho / (1.0 - rho) + mass;
            return {total, err};
        }
        last = mass;
    }
    return {total, err + 1e-9};
}

// Gen must be copyable with `draw(double x, RandomSource&) const` returning
// the object type; the exponential front-ends and the word samplers all
// satisfy this.
template <class Gen>
class OrdinarySampler {
  public:
    using object_type =
        std::decay_t<decltype(std::declval<const Gen&>().draw(0.0, std::declval<RandomSource&>()))>;

    struct Sample {
        object_type object{};
        double u = 0.0;
        double x_effective = 0.0;
    };

    OrdinarySampler(Gen gen, const OrdinaryModel& model, UStrategyChoice choice, RandomSource rng)
        : gen_(std::move(gen)), svc_(build_u_service(model, choice)), rng_(rng) {}

    Sample sample() {
        for (int attempt = 0; attempt < 10; ++attempt) {
            double u = svc_.draw_u(rng_);
            double xe = svc_.x * u;
            try {
                Sample s;
                s.object = gen_.draw(xe, rng_);
                s.u = u;
                s.x_effective = xe;
                return s;
            } catch (const EgfDivergent&) {
                continue; // u landed past the evaluator's range; mass < 1e-9
            } catch (const DegenerateLaw&) {
                continue; // u == 0 on a class without a size-0 object
            }
        }
        throw InconsistentOracle(
            "u draws kept landing beyond the EGF evaluator's range; growth verdict suspect");
    }

    double draw_u() { return svc_.draw_u(rng_); }
    double density(double u) const { return svc_.density(u); }
    double x() const { return svc_.x; }
    const EvalResult& ogf_value() const { return svc_.a; }
    const UService& service() const { return svc_; }
    const Gen& generator() const { return gen_; }
    RandomSource& rng() { return rng_; }

  private:
    Gen gen_;
    UService svc_;
    RandomSource rng_;
};

} // namespace bz

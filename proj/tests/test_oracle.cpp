#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "bz/oracle.hpp"
#include "helpers.hpp"

using namespace bz;

TEST_CASE("counting-series values against closed forms") {
    ValidatedSpec sets = load_spec("set.bz");
    ValidatedSpec bell = load_spec("bell.bz");
    ValidatedSpec pairs = load_spec("pairs.bz");
    ValidatedSpec cyc = load_spec("cyc.bz");

    for (double x : {0.0, 0.2, 0.5, 0.8, 1.5}) {
        CHECK_THAT(egf_eval(sets, "A", x).value,
                   Catch::Matchers::WithinRel(std::exp(x), 1e-10));
        CHECK_THAT(egf_eval(bell, "B", x).value,
                   Catch::Matchers::WithinRel(std::exp(std::exp(x) - 1.0), 1e-10));
        CHECK_THAT(egf_eval(pairs, "P", x).value,
                   Catch::Matchers::WithinRel((1.0 + x) * std::exp(x), 1e-10));
    }
    for (double x : {0.2, 0.5, 0.9}) {
        CHECK_THAT(egf_eval(cyc, "C", x).value,
                   Catch::Matchers::WithinRel(-std::log1p(-x), 1e-10));
    }
}

TEST_CASE("tree series solves T = x e^T") {
    // Independent oracle: bisection on f(t) = x e^t - t over [0, 1].
    ValidatedSpec cayley = load_spec("cayley.bz");
    for (double x : {0.05, 0.2, 0.3}) {
        double lo = 0.0, hi = 1.0;
        for (int i = 0; i < 200; ++i) {
            double mid = 0.5 * (lo + hi);
            (x * std::exp(mid) - mid > 0 ? lo : hi) = mid;
        }
        CHECK_THAT(egf_eval(cayley, "T", x).value, Catch::Matchers::WithinRel(lo, 1e-9));
    }
}

TEST_CASE("fixed-point and series strategies agree") {
    ValidatedSpec cayley = load_spec("cayley.bz");
    EvalResult fp = egf_eval(cayley, "T", 0.25, 1e-12, EgfStrategy::FixedPoint);
    EvalResult se = egf_eval(cayley, "T", 0.25, 1e-12, EgfStrategy::Series, 128);
    CHECK(fp.method == EvalMethod::FixedPoint);
    CHECK(se.method == EvalMethod::Series);
    CHECK_THAT(fp.value, Catch::Matchers::WithinAbs(se.value, fp.err + se.err + 1e-12));
}

TEST_CASE("counting series diverges past the tree singularity") {
    // T(x) has its dominant singularity at 1/e; beyond it the fixed point
    // escapes every ceiling.
    ValidatedSpec cayley = load_spec("cayley.bz");
    CHECK_THROWS_AS(egf_eval(cayley, "T", 0.5), EgfDivergent);
    CHECK_THROWS_AS(egf_eval(cayley, "T", 1.0), EgfDivergent);
}

TEST_CASE("growth verdicts") {
    auto verdict = [](const char* file, const std::string& cls) {
        return growth_estimate(egf_coeffs(load_spec(file), cls, 64));
    };
    GrowthEstimate sets = verdict("set.bz", "A");
    CHECK(sets.verdict == GrowthVerdict::AtMostExponential);
    CHECK(sets.rate <= 1.2);

    GrowthEstimate pairs = verdict("pairs.bz", "P");
    CHECK(pairs.verdict == GrowthVerdict::AtMostExponential);
    CHECK(pairs.rate >= 1.0);
    CHECK(pairs.rate <= 1.2);

    // n^(n-1), n!, B_n and (n-1)! all outgrow every geometric envelope
    CHECK(verdict("cayley.bz", "T").verdict == GrowthVerdict::Superexponential);
    CHECK(verdict("seqz.bz", "S").verdict == GrowthVerdict::Superexponential);
    CHECK(verdict("bell.bz", "B").verdict == GrowthVerdict::Superexponential);
    CHECK(verdict("cyc.bz", "C").verdict == GrowthVerdict::Superexponential);
}

TEST_CASE("finite-support coefficients report zero growth rate") {
    SeriesCoeffs c = egf_coeffs(load_spec("set.bz"), "A", 64);
    for (size_t n = 4; n < c.egf.size(); ++n) {
        c.egf[n] = 0;
        c.counts[n] = 0;
    }
    GrowthEstimate g = growth_estimate(c);
    CHECK(g.verdict == GrowthVerdict::AtMostExponential);
    CHECK(g.rate == 0.0);
}

TEST_CASE("ordinary values by direct summation") {
    SeriesCoeffs sets = egf_coeffs(load_spec("set.bz"), "A", 64);
    GrowthEstimate g = growth_estimate(sets);
    // counts are all 1: A(x) = 1/(1-x)
    CHECK_THAT(ogf_eval_series(sets, g, 0.5).value, Catch::Matchers::WithinRel(2.0, 1e-9));
    CHECK_THAT(ogf_eval_series(sets, g, 0.25).value,
               Catch::Matchers::WithinRel(4.0 / 3.0, 1e-9));
    CHECK(ogf_eval_series(sets, g, 0.0).value == 1.0);
}

TEST_CASE("ordinary summation refuses divergent or hopeless inputs") {
    SeriesCoeffs seqs = egf_coeffs(load_spec("seqz.bz"), "S", 64);
    GrowthEstimate g = growth_estimate(seqs);
    CHECK(g.verdict == GrowthVerdict::Superexponential);
    for (double x : {0.01, 0.1, 0.5, 0.9}) {
        CHECK_THROWS_AS(ogf_eval_series(seqs, g, x), DivergentOgf);
    }

    SeriesCoeffs sets = egf_coeffs(load_spec("set.bz"), "A", 64);
    GrowthEstimate gs = growth_estimate(sets);
    CHECK_THROWS_AS(ogf_eval_series(sets, gs, 1.1), DivergentOgf);
}

TEST_CASE("transformed integral agrees with direct summation") {
    // Both routes to A(x): term sum of counts[n] x^n versus the damped
    // integral of the counting series along the ray.
    ValidatedSpec spec = load_spec("set.bz");
    SeriesCoeffs coeffs = egf_coeffs(spec, "A", 128);
    GrowthEstimate g = growth_estimate(coeffs);
    for (double x : {0.2, 0.5, 0.8}) {
        EvalResult series = ogf_eval_series(coeffs, g, x);
        EvalResult lap =
            ogf_eval_laplace([](double t) { return std::exp(t); }, x, 1e-10, coeffs, g);
        CHECK(lap.method == EvalMethod::Laplace);
        CHECK_THAT(lap.value,
                   Catch::Matchers::WithinAbs(series.value,
                                              4 * (series.err + lap.err) + 1e-9));
        CHECK_THAT(lap.value, Catch::Matchers::WithinRel(1.0 / (1.0 - x), 1e-7));
    }
}

TEST_CASE("integral route detects divergence") {
    // x past the damper: e^{-u} e^{1.02u} grows panel over panel forever, so
    // the scan must refuse rather than return a partial sum.
    CHECK_THROWS_AS(ogf_eval_laplace([](double t) { return std::exp(t); }, 1.02, 1e-8),
                    DivergentOgf);
    // an EGF singularity at finite u surfaces as divergence too
    auto capped = [](double t) -> double {
        if (t > 5.0) throw EgfDivergent("beyond the evaluator range");
        return std::exp(t);
    };
    CHECK_THROWS_AS(ogf_eval_laplace(capped, 1.0, 1e-8), DivergentOgf);
}

TEST_CASE("expected ordinary size matches the geometric mean") {
    // For counts 1,1,1,... at x: E[N] = x / (1 - x).
    SeriesCoeffs coeffs = egf_coeffs(load_spec("set.bz"), "A", 256);
    GrowthEstimate g = growth_estimate(coeffs);
    CHECK_THAT(expected_size_ordinary(coeffs, g, 0.5), Catch::Matchers::WithinRel(1.0, 1e-6));
    CHECK_THAT(expected_size_ordinary(coeffs, g, 0.8), Catch::Matchers::WithinRel(4.0, 1e-6));
}

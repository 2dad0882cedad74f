// Acceptance gate: every release-blocking property on one page. Each
// criterion prints exactly one PASS/FAIL line with its wall-clock time; the
// exit code is the number of failures. Tolerances are written out at the
// call sites so the gate is auditable without chasing constants.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bz/check_suite.hpp"
#include "bz/exp_sampler.hpp"
#include "bz/oracle.hpp"
#include "bz/ord_transform.hpp"
#include "bz/quadrature.hpp"
#include "bz/rng.hpp"
#include "bz/series.hpp"
#include "bz/spec.hpp"
#include "bz/stats.hpp"
#include "bz/words.hpp"
#include "helpers.hpp"

using namespace bz;

namespace {

int failures = 0;

void criterion(int idx, const std::string& label, const std::function<void()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    std::string verdict = "PASS", detail;
    try {
        body();
    } catch (const std::exception& e) {
        verdict = "FAIL";
        detail = std::string(" [") + e.what() + "]";
        ++failures;
    }
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    std::cout << verdict << " criterion " << idx << ": " << label << detail << " (" << ms
              << " ms)\n";
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::runtime_error(msg);
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(12);
    ss << v;
    return ss.str();
}

// geometric(1/2) on sizes with the overflow bucket at `cutoff`; the partial
// sums are exact in binary so the law sums to 1 exactly
std::vector<double> half_geometric_law(int cutoff) {
    std::vector<double> law(static_cast<size_t>(cutoff) + 1);
    for (int n = 0; n < cutoff; ++n) law[static_cast<size_t>(n)] = std::pow(0.5, n + 1);
    law[static_cast<size_t>(cutoff)] = std::pow(0.5, cutoff);
    return law;
}

std::vector<double> poisson_law(double lambda, int cutoff) {
    std::vector<double> law(static_cast<size_t>(cutoff) + 1, 0.0);
    double term = std::exp(-lambda), head = 0.0;
    for (int n = 0; n < cutoff; ++n) {
        law[static_cast<size_t>(n)] = term;
        head += term;
        term *= lambda / (n + 1);
    }
    law[static_cast<size_t>(cutoff)] = std::max(0.0, 1.0 - head);
    return law;
}

void require_fit(const SizeHistogram& h, const std::vector<double>& law, const std::string& what) {
    Chi2Result r = chi_square(h, law);
    require(r.p_value >= 1e-3, what + ": chi-square p = " + fmt(r.p_value) + " below 1e-3");
}

// series and Laplace OGF routes (plus the rational route for automata)
// agree within 4*(combined error) + 1e-9*(1 + |value|)
void require_route_agreement(const OrdinaryModel& model, const Dfa* dfa, double x,
                             const std::string& what) {
    GrowthEstimate growth;
    SeriesCoeffs coeffs = detail::coeffs_with_conclusive_growth(model, growth);
    EvalResult s = ogf_eval_series(coeffs, growth, x);
    EvalResult l = ogf_eval_laplace(model.egf, x, 1e-8 * (1.0 + std::fabs(s.value)), coeffs, growth);
    double budget = 4.0 * (s.err + l.err) + 1e-9 * (1.0 + std::fabs(s.value));
    require(std::fabs(s.value - l.value) <= budget,
            what + ": series " + fmt(s.value) + " vs Laplace " + fmt(l.value) +
                " beyond budget " + fmt(budget));
    if (dfa) {
        EvalResult r = ogf_rational_eval(*dfa, x);
        double rb = 4.0 * (s.err + r.err) + 1e-9 * (1.0 + std::fabs(s.value));
        require(std::fabs(s.value - r.value) <= rb,
                what + ": series " + fmt(s.value) + " vs rational " + fmt(r.value) +
                    " beyond budget " + fmt(rb));
    }
}

} // namespace

int main() {
    const ValidatedSpec set = load_spec("set.bz");
    const ValidatedSpec pairs = load_spec("pairs.bz");
    const ValidatedSpec bell = load_spec("bell.bz");
    const ValidatedSpec cayley = load_spec("cayley.bz");
    const ValidatedSpec seqz = load_spec("seqz.bz");
    const Dfa ab = Dfa::load(data_path("ab.json"));
    const Dfa astar = Dfa::load(data_path("astar.json"));
    const Dfa bstar = Dfa::load(data_path("bstar.json"));
    const Dfa even_a = Dfa::load(data_path("even_a.json"));
    const Dfa endb = Dfa::load(data_path("endb.json"));

    criterion(1, "u-density integrates to unit mass on both front-ends", [&] {
        for (double x : {0.2, 0.5, 0.8}) {
            UService svc = build_u_service(spec_model(set, "A", x), UStrategyChoice::Mixture);
            IntegralResult m = density_mass(svc);
            require(std::fabs(m.value - 1.0) <= 1e-8 + m.err,
                    "set class at x=" + fmt(x) + ": mass " + fmt(m.value));
        }
        WordSampler ws(ab);
        for (double x : {0.1, 0.25, 0.4}) {
            UService svc = build_u_service(word_model(ws, x), UStrategyChoice::Mixture);
            IntegralResult m = density_mass(svc);
            require(std::fabs(m.value - 1.0) <= 1e-8 + m.err,
                    "two-letter words at x=" + fmt(x) + ": mass " + fmt(m.value));
        }
    });

    criterion(2, "damped monomial integrals reproduce n! for n <= 20", [&] {
        for (int n = 0; n <= 20; ++n) {
            double fact = to_double(factorial(static_cast<unsigned>(n)));
            auto f = [n](double u) { return std::exp(-u) * std::pow(u, n); };
            IntegralResult r =
                integrate_adaptive(f, 0.0, std::max(80.0, 6.0 * n), 1e-9 * fact, 16);
            require(std::fabs(r.value - fact) <= 1e-8 * fact,
                    "n=" + std::to_string(n) + ": integral " + fmt(r.value) + " vs " + fmt(fact));
        }
    });

    criterion(3, "ordinary draws follow a_n x^n / A(x) on specs and words", [&] {
        {
            RandomSource rng(0xACC3);
            auto sampler = make_ordinary_spec_sampler(set, "A", 0.5, UStrategyChoice::Mixture, rng,
                                                      std::nullopt);
            SizeHistogram h(16);
            for (int i = 0; i < 100000; ++i) h.add(sampler.sample().object.size());
            require_fit(h, half_geometric_law(16), "set class at x=0.5 over 1e5 draws");
        }
        {
            RandomSource rng(0xACC3 + 1);
            auto sampler = make_ordinary_word_sampler(ab, 0.25, UStrategyChoice::Mixture, rng);
            SizeHistogram h(16);
            for (int i = 0; i < 100000; ++i)
                h.add(static_cast<long>(sampler.sample().object.size()));
            require_fit(h, half_geometric_law(16), "two-letter words at x=0.25 over 1e5 draws");
        }
    });

    criterion(4, "exponential draws follow a_n x^n / (n! Ahat(x))", [&] {
        RandomSource rng(0xACC4);
        ExpSampler sampler(set, "A");
        SizeHistogram h(12);
        for (int i = 0; i < 100000; ++i) h.add(sampler.draw(0.5, rng).size());
        require_fit(h, poisson_law(0.5, 12), "set class at x=0.5 over 1e5 draws");
    });

    criterion(5, "independent OGF routes agree on every shipped convergent pair", [&] {
        for (double x : {0.2, 0.5, 0.8})
            require_route_agreement(spec_model(set, "A", x), nullptr, x, "set@" + fmt(x));
        for (double x : {0.3, 0.6})
            require_route_agreement(spec_model(pairs, "P", x), nullptr, x, "pairs@" + fmt(x));
        WordSampler wab(ab), was(astar), wbs(bstar), wea(even_a), web(endb);
        for (double x : {0.1, 0.25, 0.4})
            require_route_agreement(word_model(wab, x), &ab, x, "ab@" + fmt(x));
        for (double x : {0.3, 0.6})
            require_route_agreement(word_model(was, x), &astar, x, "astar@" + fmt(x));
        require_route_agreement(word_model(wbs, 0.5), &bstar, 0.5, "bstar@0.5");
        for (double x : {0.2, 0.4})
            require_route_agreement(word_model(wea, x), &even_a, x, "even_a@" + fmt(x));
        for (double x : {0.25, 0.45})
            require_route_agreement(word_model(web, x), &endb, x, "endb@" + fmt(x));
        ShuffleSampler ss(astar, bstar);
        for (double x : {0.25, 0.4})
            require_route_agreement(shuffle_model(ss, x), nullptr, x, "astar||bstar@" + fmt(x));
    });

    criterion(6, "exhaustive enumeration matches the coefficient oracle", [&] {
        const std::vector<long> bell_counts{1, 1, 2, 5, 15, 52};
        SeriesCoeffs bc = egf_coeffs(bell, bell.system().root(), 5);
        for (int n = 0; n <= 5; ++n) {
            require(bc.counts[static_cast<size_t>(n)] == bell_counts[static_cast<size_t>(n)],
                    "set-partition counts drifted at n=" + std::to_string(n));
            size_t found = enumerate_objects(bell, bell.system().root(), n).size();
            require(BigInt(found) == bc.counts[static_cast<size_t>(n)],
                    "set-partition enumeration found " + std::to_string(found) +
                        " objects at n=" + std::to_string(n));
        }
        const std::vector<long> tree_counts{0, 1, 2, 9, 64, 625};
        SeriesCoeffs tc = egf_coeffs(cayley, cayley.system().root(), 5);
        for (int n = 0; n <= 5; ++n) {
            require(tc.counts[static_cast<size_t>(n)] == tree_counts[static_cast<size_t>(n)],
                    "rooted-tree counts drifted at n=" + std::to_string(n));
            size_t found = enumerate_objects(cayley, cayley.system().root(), n).size();
            require(BigInt(found) == tc.counts[static_cast<size_t>(n)],
                    "rooted-tree enumeration found " + std::to_string(found) +
                        " objects at n=" + std::to_string(n));
        }
        SeriesCoeffs wc = count_words(ab, 6);
        SeriesCoeffs ec = count_words(even_a, 6);
        for (int n = 0; n <= 6; ++n) {
            require(BigInt(enumerate_words(ab, n).size()) == wc.counts[static_cast<size_t>(n)],
                    "two-letter word enumeration drifted at n=" + std::to_string(n));
            require(wc.counts[static_cast<size_t>(n)] == (BigInt(1) << n),
                    "two-letter word counts drifted at n=" + std::to_string(n));
            require(BigInt(enumerate_words(even_a, n).size()) == ec.counts[static_cast<size_t>(n)],
                    "even-a word enumeration drifted at n=" + std::to_string(n));
        }
    });

    criterion(7, "factorial growth is refused ordinarily, served exponentially", [&] {
        for (double x : {0.1, 0.3, 0.5, 0.9}) {
            bool refused = false;
            try {
                build_u_service(spec_model(seqz, "S", x), UStrategyChoice::Mixture);
            } catch (const DivergentOgf&) {
                refused = true;
            }
            require(refused, "sequence class accepted an ordinary build at x=" + fmt(x));
        }
        RandomSource rng(0xACC7);
        ExpSampler sampler(seqz, "S");
        SizeHistogram h(16);
        for (int i = 0; i < 20000; ++i) h.add(sampler.draw(0.5, rng).size());
        require_fit(h, half_geometric_law(16), "sequence class at x=0.5 over 2e4 draws");
    });

    criterion(8, "the two u-draw strategies sample the same law", [&] {
        RandomSource rng_m(0xACC8), rng_i(0xACC8 + 1);
        auto mix =
            make_ordinary_spec_sampler(set, "A", 0.5, UStrategyChoice::Mixture, rng_m, std::nullopt);
        auto inv = make_ordinary_spec_sampler(set, "A", 0.5, UStrategyChoice::InverseCdf, rng_i,
                                              std::nullopt);
        SizeHistogram hm(16), hi(16);
        for (int i = 0; i < 100000; ++i) {
            hm.add(mix.sample().object.size());
            hi.add(inv.sample().object.size());
        }
        double tv = tv_distance(hm, hi);
        require(tv < 0.01, "total variation " + fmt(tv) + " between strategies");
    });

    criterion(9, "shuffle sampling and its convolution identity hold", [&] {
        ShuffleSampler ss(astar, bstar);
        SeriesCoeffs sc = ss.coeffs(64);
        for (int n = 0; n <= 64; ++n)
            require(sc.counts[static_cast<size_t>(n)] == (BigInt(1) << n),
                    "interleaving counts drifted from the EGF product at n=" + std::to_string(n));
        RandomSource rng(0xACC9);
        auto sampler =
            make_ordinary_shuffle_sampler(astar, bstar, 0.25, UStrategyChoice::Mixture, rng);
        SizeHistogram h(16);
        for (int i = 0; i < 100000; ++i)
            h.add(static_cast<long>(sampler.sample().object.size()));
        require_fit(h, half_geometric_law(16), "astar||bstar at x=0.25 over 1e5 draws");
    });

    criterion(10, "ordinary draws conditioned on one size are uniform", [&] {
        RandomSource rng(0xACCA);
        auto sampler = make_ordinary_word_sampler(ab, 0.25, UStrategyChoice::Mixture, rng);
        std::vector<std::string> keys = enumerate_words(ab, 3);
        std::map<std::string, std::uint64_t> hits;
        std::uint64_t conditioned = 0;
        for (int i = 0; i < 400000; ++i) {
            auto s = sampler.sample();
            if (s.object.size() != 3) continue;
            ++conditioned;
            require(hits.size() <= keys.size() && std::find(keys.begin(), keys.end(), s.object) !=
                                                      keys.end(),
                    "sampler produced a word outside the language: " + s.object);
            ++hits[s.object];
        }
        require(conditioned >= 20000,
                "only " + std::to_string(conditioned) + " draws landed on size 3");
        std::vector<std::uint64_t> counts;
        for (const auto& k : keys) counts.push_back(hits[k]);
        std::vector<double> uniform(keys.size(), 1.0 / static_cast<double>(keys.size()));
        Chi2Result r = chi_square_counts(counts, uniform);
        require(r.p_value >= 1e-3,
                "conditioned words: chi-square p = " + fmt(r.p_value) + " below 1e-3");
    });

    std::cout << (failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL") << " (" << failures
              << " of 10 criteria failing)\n";
    return failures;
}

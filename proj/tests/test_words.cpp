#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <set>
#include <string>

#include <json.hpp>

#include "bz/stats.hpp"
#include "bz/words.hpp"
#include "helpers.hpp"

using namespace bz;
using nlohmann::json;

namespace {

json minimal_dfa() {
    return json{{"alphabet", {"a"}},
                {"states", 1},
                {"start", 0},
                {"accept", {0}},
                {"delta", {{"0,a", 0}}}};
}

} // namespace

TEST_CASE("malformed automata are rejected") {
    json base = minimal_dfa();

    json j = base;
    j.erase("delta");
    CHECK_THROWS_AS(Dfa::from_json(j), SyntaxError);

    j = base;
    j["alphabet"] = {"ab"};
    CHECK_THROWS_AS(Dfa::from_json(j), SyntaxError);

    j = base;
    j["alphabet"] = {"a", "a"};
    CHECK_THROWS_AS(Dfa::from_json(j), SyntaxError);

    j = base;
    j["start"] = 3;
    CHECK_THROWS_AS(Dfa::from_json(j), SyntaxError);

    j = base;
    j["accept"] = {7};
    CHECK_THROWS_AS(Dfa::from_json(j), SyntaxError);

    j = base;
    j["delta"] = {{"0,b", 0}};
    CHECK_THROWS_AS(Dfa::from_json(j), SyntaxError);

    j = base;
    j["states"] = 2; // row for state 1 missing: not total
    CHECK_THROWS_AS(Dfa::from_json(j), SyntaxError);

    CHECK_THROWS_AS(Dfa::load(data_path("missing.json")), Error);
}

TEST_CASE("unreachable states are pruned at load") {
    json j{{"alphabet", {"a"}},
           {"states", 3},
           {"start", 0},
           {"accept", {0, 2}},
           {"delta", {{"0,a", 0}, {"1,a", 2}, {"2,a", 2}}}};
    Dfa d = Dfa::from_json(j);
    CHECK(d.state_count() == 1);
    CHECK(d.accepts("aaa"));
}

TEST_CASE("acceptance and shortest word") {
    Dfa even_a = Dfa::load(data_path("even_a.json"));
    CHECK(even_a.accepts(""));
    CHECK(even_a.accepts("aa"));
    CHECK(even_a.accepts("aba"));
    CHECK_FALSE(even_a.accepts("a"));
    CHECK_FALSE(even_a.accepts("ab"));
    CHECK_FALSE(even_a.accepts("abc")); // letter outside the alphabet
    CHECK(even_a.shortest_accepted() == 0);

    Dfa endb = Dfa::load(data_path("endb.json"));
    CHECK(endb.shortest_accepted() == 1);

    json dead{{"alphabet", {"a"}},
              {"states", 2},
              {"start", 0},
              {"accept", {1}},
              {"delta", {{"0,a", 0}, {"1,a", 1}}}};
    CHECK(Dfa::from_json(dead).shortest_accepted() == -1);
}

TEST_CASE("an empty language refuses to build a sampler") {
    json dead{{"alphabet", {"a"}},
              {"states", 2},
              {"start", 0},
              {"accept", {1}},
              {"delta", {{"0,a", 0}, {"1,a", 1}}}};
    CHECK_THROWS_AS(WordSampler(Dfa::from_json(dead)), EmptyLanguage);
}

TEST_CASE("word lengths follow the size-biased law") {
    // {a,b}*: EGF e^{2x}, so lengths at x are Poisson(2x).
    WordSampler s(Dfa::load(data_path("ab.json")));
    RandomSource rng(701);
    SizeHistogram h(12);
    for (int i = 0; i < 20000; ++i) h.add(static_cast<long>(s.draw(0.25, rng).size()));

    std::vector<double> law(13, 0.0);
    double term = std::exp(-0.5), head = 0.0;
    for (int n = 0; n < 12; ++n) {
        law[static_cast<size_t>(n)] = term;
        head += term;
        term *= 0.5 / (n + 1);
    }
    law[12] = 1.0 - head;
    CHECK(chi_square(h, law).p_value >= 1e-3);
}

TEST_CASE("drawn words are accepted and uniform within a length") {
    Dfa dfa = Dfa::load(data_path("ab.json"));
    WordSampler s(dfa);
    RandomSource rng(703);
    std::map<std::string, std::uint64_t> by_word;
    std::uint64_t hits = 0;
    for (int i = 0; i < 20000; ++i) {
        std::string w = s.draw(0.5, rng);
        REQUIRE(dfa.accepts(w));
        if (w.size() == 3) {
            ++hits;
            ++by_word[w];
        }
    }
    REQUIRE(by_word.size() == 8);
    std::vector<std::uint64_t> counts;
    for (const auto& [w, c] : by_word) counts.push_back(c);
    CHECK(chi_square_counts(counts, std::vector<double>(8, 0.125)).p_value >= 1e-3);
}

TEST_CASE("structured languages sample correctly too") {
    Dfa dfa = Dfa::load(data_path("even_a.json"));
    WordSampler s(dfa);
    RandomSource rng(709);
    for (int i = 0; i < 2000; ++i) {
        std::string w = s.draw(0.8, rng);
        REQUIRE(dfa.accepts(w));
    }
}

TEST_CASE("x = 0 hands out the empty word or nothing") {
    WordSampler ab(Dfa::load(data_path("ab.json")));
    RandomSource rng(711);
    CHECK(ab.draw(0.0, rng).empty());

    WordSampler endb(Dfa::load(data_path("endb.json")));
    CHECK_THROWS_AS(endb.draw(0.0, rng), EmptyLanguage);
}

TEST_CASE("sampler EGF value matches the closed form") {
    WordSampler ab(Dfa::load(data_path("ab.json")));
    CHECK_THAT(ab.egf_value(0.25), Catch::Matchers::WithinRel(std::exp(0.5), 1e-10));
    WordSampler even_a(Dfa::load(data_path("even_a.json")));
    // 1 + (e^{2x} - 1)/2
    CHECK_THAT(even_a.egf_value(0.3),
               Catch::Matchers::WithinRel(0.5 * (1.0 + std::exp(0.6)), 1e-10));
}

TEST_CASE("rational route agrees with summation and closed forms") {
    Dfa ab = Dfa::load(data_path("ab.json"));
    Dfa even_a = Dfa::load(data_path("even_a.json"));
    Dfa endb = Dfa::load(data_path("endb.json"));

    EvalResult r = ogf_rational_eval(ab, 0.25);
    CHECK(r.method == EvalMethod::Rational);
    CHECK_THAT(r.value, Catch::Matchers::WithinRel(2.0, 1e-10));

    // 1 + x/(1-2x) and x/(1-2x)
    CHECK_THAT(ogf_rational_eval(even_a, 0.2).value,
               Catch::Matchers::WithinRel(1.0 + 0.2 / 0.6, 1e-10));
    CHECK_THAT(ogf_rational_eval(endb, 0.25).value,
               Catch::Matchers::WithinRel(0.5, 1e-10));

    WordSampler s(even_a);
    SeriesCoeffs coeffs = s.coeffs(64);
    GrowthEstimate g = growth_estimate(coeffs);
    for (double x : {0.1, 0.3, 0.45}) {
        EvalResult sum = ogf_eval_series(coeffs, g, x);
        EvalResult rat = ogf_rational_eval(even_a, x);
        CHECK_THAT(rat.value, Catch::Matchers::WithinAbs(
                                  sum.value, 4 * (sum.err + rat.err) + 1e-9));
    }

    // past the growth margin the rational route refuses like the series one
    CHECK_THROWS_AS(ogf_rational_eval(ab, 0.5), DivergentOgf);
}

TEST_CASE("ordinary word sampler hits the ordinary law") {
    RandomSource rng(719);
    auto sampler = make_ordinary_word_sampler(Dfa::load(data_path("ab.json")), 0.25,
                                              UStrategyChoice::Mixture, rng);
    SizeHistogram h(16);
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        auto s = sampler.sample();
        h.add(static_cast<long>(s.object.size()));
    }
    // a_n x^n / A = 2^n 4^{-n} / 2 = 2^{-(n+1)}
    std::vector<double> law(17, 0.0);
    double head = 0.0;
    for (int k = 0; k < 16; ++k) {
        law[static_cast<size_t>(k)] = std::pow(0.5, k + 1);
        head += law[static_cast<size_t>(k)];
    }
    law[16] = 1.0 - head;
    CHECK(chi_square(h, law).p_value >= 1e-3);
}

TEST_CASE("interleavings carry a consistent merge pattern") {
    Dfa astar = Dfa::load(data_path("astar.json"));
    Dfa bstar = Dfa::load(data_path("bstar.json"));
    ShuffleSampler sh(astar, bstar);
    RandomSource rng(727);
    SizeHistogram h(12);
    for (int i = 0; i < 20000; ++i) {
        Interleaving iv = sh.draw(0.25, rng);
        REQUIRE(iv.pattern.size() == iv.left.size());
        std::string merged = iv.merged();
        REQUIRE(merged.size() == iv.size());
        // pattern positions are distinct and the merged word reads the left
        // word at exactly those positions
        std::set<int> at(iv.pattern.begin(), iv.pattern.end());
        REQUIRE(at.size() == iv.pattern.size());
        size_t li = 0, ri = 0;
        for (size_t pos = 0; pos < merged.size(); ++pos) {
            if (at.count(static_cast<int>(pos))) {
                REQUIRE(merged[pos] == iv.left[li++]);
            } else {
                REQUIRE(merged[pos] == iv.right[ri++]);
            }
        }
        h.add(static_cast<long>(iv.size()));
    }
    // EGF product e^x e^x: sizes are Poisson(2x) = Poisson(0.5)
    std::vector<double> law(13, 0.0);
    double term = std::exp(-0.5), head = 0.0;
    for (int n = 0; n < 12; ++n) {
        law[static_cast<size_t>(n)] = term;
        head += term;
        term *= 0.5 / (n + 1);
    }
    law[12] = 1.0 - head;
    CHECK(chi_square(h, law).p_value >= 1e-3);
}

TEST_CASE("interleavings of a fixed size are equifrequent") {
    // c_2 = C(2,0) + C(2,1) + C(2,2) = 4 interleavings of size 2: bb, aa,
    // and a|b merged in either order; the exponential law is uniform over
    // them at fixed size.
    Dfa astar = Dfa::load(data_path("astar.json"));
    Dfa bstar = Dfa::load(data_path("bstar.json"));
    ShuffleSampler sh(astar, bstar);
    RandomSource rng(733);
    std::map<std::string, std::uint64_t> seen;
    for (int i = 0; i < 30000; ++i) {
        Interleaving iv = sh.draw(0.5, rng);
        if (iv.size() != 2) continue;
        std::string key = iv.left + "|" + iv.right + "|";
        for (int p : iv.pattern) key += std::to_string(p) + ",";
        ++seen[key];
    }
    REQUIRE(seen.size() == 4);
    std::vector<std::uint64_t> counts;
    for (const auto& [k, v] : seen) counts.push_back(v);
    CHECK(chi_square_counts(counts, std::vector<double>(4, 0.25)).p_value >= 1e-3);
}

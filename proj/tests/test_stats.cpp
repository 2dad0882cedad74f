#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <string>

#include "bz/stats.hpp"
#include "helpers.hpp"

using namespace bz;

TEST_CASE("exact proportions give a zero statistic") {
    Chi2Result r = chi_square_counts({25, 25, 25, 25}, {0.25, 0.25, 0.25, 0.25});
    CHECK(r.statistic == 0.0);
    CHECK(r.dof == 3);
    CHECK(r.p_value == 1.0);
    CHECK(r.merged_buckets == 4);
}

TEST_CASE("statistic scales linearly with the sample size") {
    Chi2Result once = chi_square_counts({30, 70}, {0.5, 0.5});
    Chi2Result twice = chi_square_counts({60, 140}, {0.5, 0.5});
    CHECK_THAT(twice.statistic, Catch::Matchers::WithinRel(2.0 * once.statistic, 1e-12));
    CHECK(once.dof == twice.dof);
}

TEST_CASE("bucket relabeling leaves the result unchanged when nothing merges") {
    Chi2Result a = chi_square_counts({30, 50, 20}, {0.3, 0.5, 0.2});
    Chi2Result b = chi_square_counts({20, 30, 50}, {0.2, 0.3, 0.5});
    CHECK_THAT(a.statistic, Catch::Matchers::WithinRel(b.statistic, 1e-12));
    CHECK(a.dof == b.dof);
    CHECK_THAT(a.p_value, Catch::Matchers::WithinRel(b.p_value, 1e-12));
}

TEST_CASE("thin tails merge inward until viable") {
    Chi2Result r = chi_square_counts({88, 6, 4, 2}, {0.9, 0.05, 0.03, 0.02});
    CHECK(r.merged_buckets == 3);
    CHECK(r.dof == 2);
    REQUIRE(r.merge_log.size() == 3);
    CHECK(r.merge_log[0].find("buckets 0..0") != std::string::npos);
    CHECK(r.merge_log[2].find("buckets 2..3") != std::string::npos);
}

TEST_CASE("a front remainder folds into the innermost group") {
    // expected: [2, 90, 8] -> tail group {2}, then {1}, front remainder
    // {0} folds into group {1}: two groups spanning 0..1 and 2..2
    Chi2Result r = chi_square_counts({3, 89, 8}, {0.02, 0.9, 0.08});
    CHECK(r.merged_buckets == 2);
    CHECK(r.dof == 1);
    CHECK(r.merge_log[0].find("buckets 0..1") != std::string::npos);
}

TEST_CASE("degenerate laws are refused") {
    CHECK_THROWS_AS(chi_square_counts({100}, {1.0}), DegenerateLaw);
    CHECK_THROWS_AS(chi_square_counts({99, 1}, {0.99, 0.01}), DegenerateLaw);
    CHECK_THROWS_AS(chi_square_counts({0, 0}, {0.5, 0.5}), DegenerateLaw);
}

TEST_CASE("malformed laws are refused") {
    CHECK_THROWS_AS(chi_square_counts({50, 50}, {0.5, 0.4}), Error);
    CHECK_THROWS_AS(chi_square_counts({50, 50}, {1.5, -0.5}), Error);
    CHECK_THROWS_AS(chi_square_counts({50, 50}, {0.5}), Error);
}

TEST_CASE("histograms bucket overflow sizes together") {
    SizeHistogram h(4);
    for (long n : {0L, 1L, 4L, 9L, 2L, 4L}) h.add(n);
    CHECK(h.total == 6);
    CHECK(h.counts[0] == 1);
    CHECK(h.counts[4] == 3); // 4, 9 and 4 again
    auto f = h.frequencies();
    CHECK_THAT(f[4], Catch::Matchers::WithinRel(0.5, 1e-12));
}

TEST_CASE("total variation distance") {
    SizeHistogram a(2), b(2);
    for (int i = 0; i < 10; ++i) a.add(0);
    for (int i = 0; i < 10; ++i) b.add(1);
    CHECK(tv_distance(a, a) == 0.0);
    CHECK(tv_distance(a, b) == 1.0);
    SizeHistogram c(3);
    CHECK_THROWS_AS(tv_distance(a, c), Error);
}

TEST_CASE("size laws put the leftover mass in the overflow bucket") {
    SeriesCoeffs coeffs = egf_coeffs(load_spec("set.bz"), "A", 32);
    std::vector<double> exp_law = exp_size_law(coeffs, 0.5, std::exp(0.5), 8);
    std::vector<double> ord_law = ord_size_law(coeffs, 0.5, 2.0, 8);
    double es = 0.0, os = 0.0;
    for (double p : exp_law) es += p;
    for (double p : ord_law) os += p;
    CHECK_THAT(es, Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(os, Catch::Matchers::WithinAbs(1.0, 1e-12));
    // Poisson(1/2) head and geometric(1/2) head
    CHECK_THAT(exp_law[1], Catch::Matchers::WithinRel(0.5 * std::exp(-0.5), 1e-10));
    CHECK_THAT(ord_law[1], Catch::Matchers::WithinRel(0.25, 1e-10));
    CHECK_THROWS_AS(exp_size_law(coeffs, 0.5, std::exp(0.5), 64), Error);
}

TEST_CASE("object enumeration matches the exact counts") {
    struct Case {
        const char* file;
        const char* cls;
    } cases[] = {{"set.bz", "A"}, {"bell.bz", "B"}, {"cayley.bz", "T"},
                 {"seqz.bz", "S"}, {"cyc.bz", "C"},  {"pairs.bz", "P"}};
    for (const auto& c : cases) {
        ValidatedSpec spec = load_spec(c.file);
        SeriesCoeffs coeffs = egf_coeffs(spec, c.cls, 6);
        for (int n = 0; n <= 6; ++n) {
            auto objs = enumerate_objects(spec, c.cls, n);
            INFO(c.file << " n=" << n);
            CHECK(BigInt(objs.size()) == coeffs.counts[static_cast<size_t>(n)]);
            std::set<std::string> keys;
            for (const auto& o : objs) {
                CHECK(o.size() == n);
                keys.insert(to_term(o));
            }
            // canonical serialization is injective: no duplicates
            CHECK(keys.size() == objs.size());
        }
    }
}

TEST_CASE("enumerated partitions of three elements") {
    auto objs = enumerate_objects(load_spec("bell.bz"), "B", 3);
    std::set<std::string> keys;
    for (const auto& o : objs) keys.insert(to_term(o));
    CHECK(keys == std::set<std::string>{
                      "Set{Set{Z:1}, Set{Z:2}, Set{Z:3}}", "Set{Set{Z:1}, Set{Z:2, Z:3}}",
                      "Set{Set{Z:1, Z:2}, Set{Z:3}}", "Set{Set{Z:1, Z:3}, Set{Z:2}}",
                      "Set{Set{Z:1, Z:2, Z:3}}"});
}

TEST_CASE("oversized enumerations are refused") {
    CHECK_THROWS_AS(enumerate_objects(load_spec("set.bz"), "A", 9), TooLarge);
    CHECK_THROWS_AS(enumerate_words(Dfa::load(data_path("ab.json")), 25), TooLarge);
}

TEST_CASE("word enumeration is exact and ordered") {
    Dfa ab = Dfa::load(data_path("ab.json"));
    auto words = enumerate_words(ab, 2);
    CHECK(words == std::vector<std::string>{"aa", "ab", "ba", "bb"});

    Dfa even_a = Dfa::load(data_path("even_a.json"));
    SeriesCoeffs counted = count_words(even_a, 6);
    for (int n = 0; n <= 6; ++n) {
        auto ws = enumerate_words(even_a, n);
        CHECK(BigInt(ws.size()) == counted.counts[static_cast<size_t>(n)]);
        for (const auto& w : ws) CHECK(even_a.accepts(w));
    }
}

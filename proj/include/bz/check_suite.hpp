#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bz/errors.hpp"
#include "bz/exp_sampler.hpp"
#include "bz/ord_transform.hpp"
#include "bz/rng.hpp"
#include "bz/stats.hpp"
#include "bz/words.hpp"

namespace bz {

// ---------------------------------------------------------------------------
// One-command verification bundle. Each check is independent, uses its own
// derived random stream, and reports pass/fail/skip plus a detail string;
// a thrown component error fails the check that depended on it instead of
// aborting the suite, so a divergent OGF shows up as failed ordinary-route
// checks next to a passing exponential route.
// ---------------------------------------------------------------------------

enum class CheckStatus { Pass, Fail, Skip };

inline const char* to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::Fail: return "fail";
        case CheckStatus::Skip: return "skip";
    }
    return "?";
}

struct CheckOutcome {
    std::string name;
    CheckStatus status = CheckStatus::Skip;
    std::string detail;
    std::optional<double> statistic;
    std::optional<double> p_value;
};

struct CheckReport {
    std::vector<CheckOutcome> checks;
    std::uint64_t seed = 0;
    std::uint64_t trials = 0;

    bool ok() const {
        return std::none_of(checks.begin(), checks.end(),
                            [](const CheckOutcome& c) { return c.status == CheckStatus::Fail; });
    }

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : checks) {
            nlohmann::json j{{"name", c.name}, {"status", to_string(c.status)},
                             {"detail", c.detail}};
            if (c.statistic) j["statistic"] = *c.statistic;
            if (c.p_value) j["p_value"] = *c.p_value;
            arr.push_back(std::move(j));
        }
        return nlohmann::json{{"checks", std::move(arr)}, {"seed", seed}, {"trials", trials}};
    }
};

struct CheckConfig {
    double x = 0.5;
    std::uint64_t trials = 100000;
    std::uint64_t seed = 0;
    double significance = 1e-3;
    UStrategyChoice strategy = UStrategyChoice::Mixture;
    std::optional<long> ceiling;  // spec classes only; conditions every law on n <= ceiling
    int cutoff = 24;              // histogram overflow bucket
    int uniformity_max_size = 4;  // largest size considered for conditional uniformity
};

namespace detail {

// What the suite needs from a samplable class, independent of the front end
// (spec term, automaton word, or interleaving). Keys are canonical object
// serializations: equal keys iff equal objects.
struct SuiteTarget {
    std::string descriptor;
    OrdinaryModel model; // coefficient and EGF routes, ceiling-conditioned if requested
    int enum_max = 6;    // largest size keys_at supports
    std::function<std::vector<std::string>(int)> keys_at;
    std::function<std::pair<long, std::string>(double, RandomSource&)> exp_draw;
    std::vector<std::pair<std::string, std::function<EvalResult()>>> egf_routes;
    std::vector<std::pair<std::string, std::function<EvalResult()>>> ogf_routes;
    std::function<std::function<std::pair<long, std::string>()>(UStrategyChoice, RandomSource)>
        make_ord_draw;
};

inline std::string describe(const Error& e) {
    return std::string(e.what());
}

// Runs `body` as one named check; a bz::Error becomes a Fail with the message
// as detail rather than aborting the remaining checks.
template <class Body>
CheckOutcome guarded_check(const std::string& name, Body&& body) {
    CheckOutcome out;
    out.name = name;
    try {
        body(out);
    } catch (const Error& e) {
        out.status = CheckStatus::Fail;
        out.detail = describe(e);
    }
    return out;
}

inline CheckOutcome check_coefficients(const SuiteTarget& target,
                                       const std::optional<long>& ceiling) {
    return guarded_check("coefficient_vs_enumeration", [&](CheckOutcome& out) {
        int top = std::min(target.enum_max, 6);
        if (ceiling) top = std::min<long>(top, *ceiling);
        SeriesCoeffs coeffs = target.model.coeffs_at(top);
        for (int n = 0; n <= top; ++n) {
            std::vector<std::string> keys = target.keys_at(n);
            std::sort(keys.begin(), keys.end());
            if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) {
                out.status = CheckStatus::Fail;
                out.detail = "duplicate object in the size-" + std::to_string(n) + " enumeration";
                return;
            }
            if (BigInt(keys.size()) != coeffs.counts[static_cast<size_t>(n)]) {
                out.status = CheckStatus::Fail;
                out.detail = "n=" + std::to_string(n) + ": enumeration found " +
                             std::to_string(keys.size()) + " objects, coefficients say " +
                             coeffs.counts[static_cast<size_t>(n)].str();
                return;
            }
        }
        out.status = CheckStatus::Pass;
        out.detail = "counts match exhaustive enumeration for n <= " + std::to_string(top);
    });
}

inline CheckOutcome check_routes(const std::string& name,
                                 const std::vector<std::pair<std::string,
                                                             std::function<EvalResult()>>>& routes) {
    return guarded_check(name, [&](CheckOutcome& out) {
        std::vector<std::pair<std::string, EvalResult>> values;
        for (const auto& [route_name, eval] : routes) {
            try {
                values.emplace_back(route_name, eval());
            } catch (const Error& e) {
                out.status = CheckStatus::Fail;
                out.detail = route_name + ": " + describe(e);
                return;
            }
        }
        std::string joined;
        for (size_t i = 0; i < values.size(); ++i) {
            const auto& [ni, ri] = values[i];
            joined += (i ? ", " : "") + ni + "=" + std::to_string(ri.value);
            for (size_t j = i + 1; j < values.size(); ++j) {
                const auto& [nj, rj] = values[j];
                double budget = 4.0 * (ri.err + rj.err) + 1e-9 * (1.0 + std::fabs(ri.value));
                if (std::fabs(ri.value - rj.value) > budget) {
                    out.status = CheckStatus::Fail;
                    out.detail = ni + "=" + std::to_string(ri.value) + " vs " + nj + "=" +
                                 std::to_string(rj.value) + " beyond the combined error budget";
                    return;
                }
            }
        }
        out.status = CheckStatus::Pass;
        out.detail = joined;
    });
}

inline CheckOutcome check_density(const SuiteTarget& target, UStrategyChoice strategy) {
    return guarded_check("density_normalization", [&](CheckOutcome& out) {
        UService svc = build_u_service(target.model, strategy);
        IntegralResult mass = density_mass(svc);
        double gap = std::fabs(mass.value - 1.0);
        out.statistic = mass.value;
        if (gap <= 1e-8 + mass.err) {
            out.status = CheckStatus::Pass;
            out.detail = "u-density mass " + std::to_string(mass.value);
        } else {
            out.status = CheckStatus::Fail;
            out.detail = "u-density mass " + std::to_string(mass.value) + " off by " +
                         std::to_string(gap);
        }
    });
}

inline void finish_chi2(CheckOutcome& out, const Chi2Result& r, double significance,
                        const std::string& what) {
    out.statistic = r.statistic;
    out.p_value = r.p_value;
    if (r.p_value >= significance) {
        out.status = CheckStatus::Pass;
        out.detail = what + ": p=" + std::to_string(r.p_value) + " over " +
                     std::to_string(r.merged_buckets) + " buckets";
    } else {
        out.status = CheckStatus::Fail;
        out.detail = what + " rejected: p=" + std::to_string(r.p_value) + " < " +
                     std::to_string(significance);
    }
}

inline CheckOutcome check_exp_law(const SuiteTarget& target, const CheckConfig& cfg,
                                  RandomSource rng) {
    return guarded_check("exp_size_law", [&](CheckOutcome& out) {
        SeriesCoeffs coeffs = target.model.coeffs_at(std::max(cfg.cutoff, 64));
        double normalizer = target.model.egf(cfg.x);
        std::vector<double> law = exp_size_law(coeffs, cfg.x, normalizer, cfg.cutoff);
        SizeHistogram hist(cfg.cutoff);
        hist.seed = rng.seed();
        hist.descriptor = target.descriptor + " exp x=" + std::to_string(cfg.x);
        for (std::uint64_t t = 0; t < cfg.trials; ++t)
            hist.add(target.exp_draw(cfg.x, rng).first);
        finish_chi2(out, chi_square(hist, law), cfg.significance, "size law vs x^n e_n / EGF(x)");
    });
}

inline CheckOutcome check_ord_law(const SuiteTarget& target, const CheckConfig& cfg,
                                  RandomSource rng) {
    return guarded_check("ord_size_law", [&](CheckOutcome& out) {
        auto draw = target.make_ord_draw(cfg.strategy, rng);
        SeriesCoeffs coeffs = target.model.coeffs_at(std::max(cfg.cutoff, 64));
        GrowthEstimate growth = growth_estimate(coeffs);
        EvalResult a = ogf_eval_series(coeffs, growth, cfg.x);
        std::vector<double> law = ord_size_law(coeffs, cfg.x, a.value, cfg.cutoff);
        SizeHistogram hist(cfg.cutoff);
        hist.seed = rng.seed();
        hist.descriptor = target.descriptor + " ord x=" + std::to_string(cfg.x);
        for (std::uint64_t t = 0; t < cfg.trials; ++t) hist.add(draw().first);
        finish_chi2(out, chi_square(hist, law), cfg.significance, "size law vs x^n a_n / OGF(x)");
    });
}

// Conditioned on its size, a Boltzmann draw is uniform over the objects of
// that size; this holds for both sampler flavors, so the check runs on the
// always-available exponential route. The target size is the one with the
// most expected conditioned draws among sizes 2..uniformity_max_size.
inline CheckOutcome check_uniformity(const SuiteTarget& target, const CheckConfig& cfg,
                                     RandomSource rng) {
    return guarded_check("conditional_uniformity", [&](CheckOutcome& out) {
        int top = std::min(target.enum_max, cfg.uniformity_max_size);
        if (cfg.ceiling) top = std::min<long>(top, *cfg.ceiling);
        SeriesCoeffs coeffs = target.model.coeffs_at(std::max(top, 8));
        double normalizer = target.model.egf(cfg.x);
        std::vector<double> law = exp_size_law(coeffs, cfg.x, normalizer, std::max(top, 8));

        int pick = -1;
        double best_mass = 0.0;
        for (int n = 2; n <= top; ++n) {
            if (coeffs.counts[static_cast<size_t>(n)] == 0) continue;
            if (pick < 0 || law[static_cast<size_t>(n)] > best_mass) {
                pick = n;
                best_mass = law[static_cast<size_t>(n)];
            }
        }
        if (pick < 0) {
            out.status = CheckStatus::Skip;
            out.detail = "no size in 2.." + std::to_string(top) + " has objects to compare";
            return;
        }

        std::vector<std::string> keys = target.keys_at(pick);
        std::sort(keys.begin(), keys.end());
        std::map<std::string, size_t> index;
        for (size_t i = 0; i < keys.size(); ++i) index[keys[i]] = i;

        std::vector<std::uint64_t> counts(keys.size(), 0);
        std::uint64_t hits = 0;
        for (std::uint64_t t = 0; t < cfg.trials; ++t) {
            auto [size, key] = target.exp_draw(cfg.x, rng);
            if (size != pick) continue;
            auto it = index.find(key);
            if (it == index.end()) {
                out.status = CheckStatus::Fail;
                out.detail = "drew a size-" + std::to_string(pick) +
                             " object missing from the enumeration: " + key;
                return;
            }
            ++counts[it->second];
            ++hits;
        }
        if (keys.size() == 1) {
            out.status = CheckStatus::Pass;
            out.detail = "single object at size " + std::to_string(pick) + "; " +
                         std::to_string(hits) + " conditioned draws all matched it";
            return;
        }
        if (hits < 5 * keys.size() || hits < 50) {
            out.status = CheckStatus::Skip;
            out.detail = "only " + std::to_string(hits) + " draws landed on size " +
                         std::to_string(pick) + "; too few for a chi-square";
            return;
        }
        std::vector<double> uniform(keys.size(), 1.0 / static_cast<double>(keys.size()));
        finish_chi2(out, chi_square_counts(counts, uniform), cfg.significance,
                    "uniformity over the " + std::to_string(keys.size()) + " objects of size " +
                        std::to_string(pick));
    });
}

inline CheckOutcome check_strategies(const SuiteTarget& target, const CheckConfig& cfg,
                                     RandomSource rng_a, RandomSource rng_b) {
    return guarded_check("strategy_equivalence", [&](CheckOutcome& out) {
        auto draw_mix = target.make_ord_draw(UStrategyChoice::Mixture, rng_a);
        auto draw_inv = target.make_ord_draw(UStrategyChoice::InverseCdf, rng_b);
        SizeHistogram mix(cfg.cutoff), inv(cfg.cutoff);
        mix.seed = rng_a.seed();
        inv.seed = rng_b.seed();
        mix.descriptor = target.descriptor + " mixture";
        inv.descriptor = target.descriptor + " inverse-cdf";
        for (std::uint64_t t = 0; t < cfg.trials; ++t) {
            mix.add(draw_mix().first);
            inv.add(draw_inv().first);
        }
        double tv = tv_distance(mix, inv);
        // the 0.01 bound is stated at 1e5 draws per strategy; below that
        // budget the null TV itself scales like 1/sqrt(trials)
        double bound = 0.01 * std::sqrt(1e5 / static_cast<double>(std::min<std::uint64_t>(
                                                  cfg.trials, 100000)));
        out.statistic = tv;
        if (tv < bound) {
            out.status = CheckStatus::Pass;
            out.detail = "mixture vs inverse-cdf TV distance " + std::to_string(tv);
        } else {
            out.status = CheckStatus::Fail;
            out.detail = "mixture vs inverse-cdf TV distance " + std::to_string(tv) + " >= " +
                         std::to_string(bound);
        }
    });
}

inline CheckOutcome skipped(const std::string& name) {
    CheckOutcome out;
    out.name = name;
    out.status = CheckStatus::Skip;
    out.detail = "trials = 0; sampling checks skipped";
    return out;
}

inline CheckReport run_suite(const SuiteTarget& target, const CheckConfig& cfg) {
    CheckReport report;
    report.seed = cfg.seed;
    report.trials = cfg.trials;
    RandomSource master(cfg.seed);

    report.checks.push_back(check_coefficients(target, cfg.ceiling));
    report.checks.push_back(check_routes("egf_cross_method", target.egf_routes));
    report.checks.push_back(check_routes("ogf_cross_method", target.ogf_routes));
    report.checks.push_back(check_density(target, cfg.strategy));
    if (cfg.trials == 0) {
        report.checks.push_back(skipped("exp_size_law"));
        report.checks.push_back(skipped("ord_size_law"));
        report.checks.push_back(skipped("conditional_uniformity"));
        report.checks.push_back(skipped("strategy_equivalence"));
    } else {
        report.checks.push_back(check_exp_law(target, cfg, master.derive(1)));
        report.checks.push_back(check_ord_law(target, cfg, master.derive(2)));
        report.checks.push_back(check_uniformity(target, cfg, master.derive(3)));
        report.checks.push_back(check_strategies(target, cfg, master.derive(4), master.derive(5)));
    }
    return report;
}

template <class Gen, class SizeFn, class KeyFn>
std::function<std::function<std::pair<long, std::string>()>(UStrategyChoice, RandomSource)>
ord_draw_factory(Gen gen, OrdinaryModel model, SizeFn size_of, KeyFn key_of) {
    return [gen = std::move(gen), model = std::move(model), size_of,
            key_of](UStrategyChoice choice, RandomSource rng) {
        auto sampler = std::make_shared<OrdinarySampler<Gen>>(gen, model, choice, rng);
        return [sampler, size_of, key_of]() {
            auto s = sampler->sample();
            return std::make_pair(size_of(s.object), key_of(s.object));
        };
    };
}

inline SuiteTarget spec_target(const ValidatedSpec& spec, const std::string& class_name,
                               const CheckConfig& cfg) {
    SuiteTarget target;
    target.descriptor = class_name;
    target.model = spec_model(spec, class_name, cfg.x, cfg.ceiling);
    target.enum_max = max_enumeration_size;
    target.keys_at = [spec, class_name, ceiling = cfg.ceiling](int n) {
        if (ceiling && n > *ceiling) return std::vector<std::string>{};
        std::vector<std::string> keys;
        for (const auto& obj : enumerate_objects(spec, class_name, n)) keys.push_back(to_term(obj));
        return keys;
    };

    ExpSampler gen(spec, class_name);
    gen.set_ceiling(cfg.ceiling);
    target.exp_draw = [gen](double t, RandomSource& rng) {
        LabeledObject obj = gen.draw(t, rng);
        return std::make_pair(static_cast<long>(obj.size()), to_term(obj));
    };

    const double x = cfg.x;
    if (cfg.ceiling) {
        // the conditioned EGF is the truncation polynomial itself; the only
        // second route available is the series sum, which must agree exactly
        target.egf_routes = {
            {"polynomial", [model = target.model, x] { return EvalResult{model.egf(x), 1e-12, EvalMethod::ClosedForm}; }},
            {"series", [model = target.model, x] { return egf_eval_series(model.coeffs_at(64), x); }},
        };
    } else {
        target.egf_routes = {
            {"constructor", [spec, class_name, x] { return egf_eval(spec, class_name, x, 0.0); }},
            {"series", [spec, class_name, x] {
                 return egf_eval_series(egf_coeffs(spec, class_name, 64), x);
             }},
        };
    }
    target.ogf_routes = {
        {"series", [model = target.model, x] {
             GrowthEstimate growth;
             SeriesCoeffs coeffs = coeffs_with_conclusive_growth(model, growth);
             return ogf_eval_series(coeffs, growth, x);
         }},
        {"laplace", [model = target.model, x] {
             GrowthEstimate growth;
             SeriesCoeffs coeffs = coeffs_with_conclusive_growth(model, growth);
             require_series_convergence(growth, x);
             EvalResult head = ogf_eval_series(coeffs, growth, x);
             return ogf_eval_laplace(model.egf, x, 1e-8 * (1.0 + head.value), coeffs, growth);
         }},
    };
    target.make_ord_draw = ord_draw_factory(
        std::move(gen), target.model,
        [](const LabeledObject& o) { return static_cast<long>(o.size()); },
        [](const LabeledObject& o) { return to_term(o); });
    return target;
}

inline SuiteTarget word_target(const Dfa& dfa, const CheckConfig& cfg) {
    if (cfg.ceiling) throw Error("size ceiling applies to spec classes only");
    WordSampler sampler(dfa);
    SuiteTarget target;
    target.descriptor = "words(" + sampler.name() + ")";
    target.model = word_model(sampler, cfg.x);
    target.enum_max = 6;
    target.keys_at = [dfa](int n) { return enumerate_words(dfa, n); };
    target.exp_draw = [sampler](double t, RandomSource& rng) {
        std::string w = sampler.draw(t, rng);
        return std::make_pair(static_cast<long>(w.size()), w);
    };
    const double x = cfg.x;
    target.egf_routes = {
        {"length-law", [sampler, x] {
             double v = sampler.egf_value(x);
             return EvalResult{v, 1e-12 * (1.0 + v), EvalMethod::Series};
         }},
        {"series", [sampler, x] { return egf_eval_series(sampler.coeffs(64), x); }},
    };
    target.ogf_routes = {
        {"series", [model = target.model, x] {
             GrowthEstimate growth;
             SeriesCoeffs coeffs = coeffs_with_conclusive_growth(model, growth);
             return ogf_eval_series(coeffs, growth, x);
         }},
        {"laplace", [model = target.model, x] {
             GrowthEstimate growth;
             SeriesCoeffs coeffs = coeffs_with_conclusive_growth(model, growth);
             require_series_convergence(growth, x);
             EvalResult head = ogf_eval_series(coeffs, growth, x);
             return ogf_eval_laplace(model.egf, x, 1e-8 * (1.0 + head.value), coeffs, growth);
         }},
        {"rational", [dfa, x] { return ogf_rational_eval(dfa, x); }},
    };
    target.make_ord_draw = ord_draw_factory(
        std::move(sampler), target.model,
        [](const std::string& w) { return static_cast<long>(w.size()); },
        [](const std::string& w) { return w; });
    return target;
}

inline std::string interleaving_key(const Interleaving& iv) {
    std::string key = iv.left + "|" + iv.right + "|";
    for (size_t i = 0; i < iv.pattern.size(); ++i)
        key += (i ? "," : "") + std::to_string(iv.pattern[i]);
    return key;
}

inline SuiteTarget shuffle_target(const Dfa& left, const Dfa& right, const CheckConfig& cfg) {
    if (cfg.ceiling) throw Error("size ceiling applies to spec classes only");
    ShuffleSampler sampler(left, right);
    SuiteTarget target;
    target.descriptor = "shuffle";
    target.model = shuffle_model(sampler, cfg.x);
    target.enum_max = 6;
    target.keys_at = [left, right](int n) {
        std::vector<std::string> keys;
        for (int k = 0; k <= n; ++k) {
            std::vector<std::string> ls = enumerate_words(left, k);
            std::vector<std::string> rs = enumerate_words(right, n - k);
            if (ls.empty() || rs.empty()) continue;
            // every k-subset of the n merged positions is a valid pattern
            for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
                if (std::popcount(mask) != k) continue;
                Interleaving iv;
                iv.left = "";
                iv.right = "";
                for (int pos = 0; pos < n; ++pos)
                    if (mask & (1u << pos)) iv.pattern.push_back(pos);
                for (const auto& lw : ls)
                    for (const auto& rw : rs) {
                        iv.left = lw;
                        iv.right = rw;
                        keys.push_back(interleaving_key(iv));
                    }
            }
        }
        return keys;
    };
    target.exp_draw = [sampler](double t, RandomSource& rng) {
        Interleaving iv = sampler.draw(t, rng);
        return std::make_pair(static_cast<long>(iv.size()), interleaving_key(iv));
    };
    const double x = cfg.x;
    target.egf_routes = {
        {"product", [sampler, x] {
             double v = sampler.egf_value(x);
             return EvalResult{v, 1e-12 * (1.0 + v), EvalMethod::Series};
         }},
        {"series", [sampler, x] { return egf_eval_series(sampler.coeffs(64), x); }},
    };
    target.ogf_routes = {
        {"series", [model = target.model, x] {
             GrowthEstimate growth;
             SeriesCoeffs coeffs = coeffs_with_conclusive_growth(model, growth);
             return ogf_eval_series(coeffs, growth, x);
         }},
        {"laplace", [model = target.model, x] {
             GrowthEstimate growth;
             SeriesCoeffs coeffs = coeffs_with_conclusive_growth(model, growth);
             require_series_convergence(growth, x);
             EvalResult head = ogf_eval_series(coeffs, growth, x);
             return ogf_eval_laplace(model.egf, x, 1e-8 * (1.0 + head.value), coeffs, growth);
         }},
    };
    target.make_ord_draw = ord_draw_factory(
        std::move(sampler), target.model,
        [](const Interleaving& iv) { return static_cast<long>(iv.size()); },
        [](const Interleaving& iv) { return interleaving_key(iv); });
    return target;
}

} // namespace detail

inline CheckReport run_check_suite(const ValidatedSpec& spec, const std::string& class_name,
                                   const CheckConfig& cfg) {
    if (!spec.system().has_class(class_name)) throw UnknownName(class_name);
    return detail::run_suite(detail::spec_target(spec, class_name, cfg), cfg);
}

inline CheckReport run_check_suite(const Dfa& dfa, const CheckConfig& cfg) {
    return detail::run_suite(detail::word_target(dfa, cfg), cfg);
}

inline CheckReport run_check_suite(const Dfa& left, const Dfa& right, const CheckConfig& cfg) {
    return detail::run_suite(detail::shuffle_target(left, right, cfg), cfg);
}

} // namespace bz

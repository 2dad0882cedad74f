// Command-line surface: generating-function oracles, exponential/ordinary
// sampling, the check suite, size tuning, and regular-language word
// operations. Every output document echoes {seed, config, version}; all
// randomness flows from the one echoed seed, so identical invocations
// produce byte-identical output.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bz/check_suite.hpp"
#include "bz/exp_sampler.hpp"
#include "bz/objects.hpp"
#include "bz/oracle.hpp"
#include "bz/ord_transform.hpp"
#include "bz/rng.hpp"
#include "bz/series.hpp"
#include "bz/spec.hpp"
#include "bz/stats.hpp"
#include "bz/version.hpp"
#include "bz/words.hpp"

namespace {

constexpr const char* kVersion = bz::version_string;

// invalid inputs (unreadable files, contradictory flags) exit with 3,
// out-of-range sampling parameters with 4
struct InvalidInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct XOutOfRange : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bz::Dfa load_dfa(const std::string& path) {
    std::ifstream probe(path);
    if (!probe) throw InvalidInput("cannot open DFA file: " + path);
    return bz::Dfa::load(path);
}

std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// number rendering shared with the JSON output, so the hash input is
// exactly what the documents echo
std::string num(double v) { return nlohmann::json(v).dump(); }

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("BZ_SEED")) {
        try {
            size_t used = 0;
            std::string s(env);
            std::uint64_t v = std::stoull(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw InvalidInput(std::string("BZ_SEED is not a 64-bit integer: ") + env);
        }
    }
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

bz::UStrategyChoice parse_strategy(const std::string& s) {
    if (s == "mixture") return bz::UStrategyChoice::Mixture;
    if (s == "invcdf") return bz::UStrategyChoice::InverseCdf;
    throw InvalidInput("unknown strategy (want mixture|invcdf): " + s);
}

const char* method_name(bz::EvalMethod m) {
    switch (m) {
        case bz::EvalMethod::ClosedForm: return "closed-form";
        case bz::EvalMethod::FixedPoint: return "fixed-point";
        case bz::EvalMethod::Series: return "series";
        case bz::EvalMethod::Laplace: return "laplace";
        case bz::EvalMethod::Rational: return "rational";
    }
    return "?";
}

const char* verdict_name(bz::GrowthVerdict v) {
    switch (v) {
        case bz::GrowthVerdict::AtMostExponential: return "at-most-exponential";
        case bz::GrowthVerdict::Superexponential: return "superexponential";
        case bz::GrowthVerdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

nlohmann::json eval_json(const bz::EvalResult& r) {
    return {{"value", r.value}, {"err", r.err}, {"method", method_name(r.method)}};
}

nlohmann::json envelope(std::uint64_t seed, const std::string& config_hash) {
    return {{"seed", seed}, {"config", config_hash}, {"version", kVersion}};
}

// output sink: --output file or standard output
class Sink {
  public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw InvalidInput("cannot open output file: " + path);
        }
    }
    std::ostream& out() { return file_.is_open() ? file_ : std::cout; }

  private:
    std::ofstream file_;
};

struct SpecHandle {
    bz::ValidatedSpec spec;
    std::string cls;
};

SpecHandle open_spec(const std::string& path, const std::string& cls_flag) {
    SpecHandle h{bz::validate(bz::parse_spec(read_file(path))), cls_flag};
    if (h.cls.empty()) h.cls = h.spec.system().root();
    if (!h.spec.system().has_class(h.cls)) throw bz::UnknownName(h.cls);
    return h;
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

int cmd_oracle(const std::string& path, const std::string& cls_flag, double x,
               const std::string& format, const std::string& output, std::uint64_t seed,
               const std::string& config) {
    if (x < 0.0) throw XOutOfRange("x must be >= 0, got " + num(x));
    SpecHandle h = open_spec(path, cls_flag);

    bz::EvalResult egf = bz::egf_eval(h.spec, h.cls, x, 0.0);
    bz::OrdinaryModel model = bz::spec_model(h.spec, h.cls, x);
    bz::GrowthEstimate growth;
    bz::SeriesCoeffs coeffs = bz::detail::coeffs_with_conclusive_growth(model, growth);
    bz::EvalResult ogf = bz::ogf_eval_series(coeffs, growth, x);
    bz::EvalResult laplace =
        bz::ogf_eval_laplace(model.egf, x, 1e-8 * (1.0 + ogf.value), coeffs, growth);
    double budget = 4.0 * (ogf.err + laplace.err) + 1e-9 * (1.0 + std::fabs(ogf.value));
    if (std::fabs(ogf.value - laplace.value) > budget)
        throw bz::InconsistentOracle("series OGF " + num(ogf.value) + " vs Laplace OGF " +
                                     num(laplace.value) + " beyond the combined error budget");

    Sink sink(output);
    if (format == "text") {
        sink.out() << "# seed=" << seed << " config=" << config << " version=" << kVersion << "\n"
                   << "class " << h.cls << " at x=" << num(x) << "\n"
                   << "egf = " << num(egf.value) << " (err " << num(egf.err) << ", "
                   << method_name(egf.method) << ")\n"
                   << "ogf = " << num(ogf.value) << " (err " << num(ogf.err) << ", "
                   << method_name(ogf.method) << ")\n"
                   << "ogf check = " << num(laplace.value) << " (err " << num(laplace.err) << ", "
                   << method_name(laplace.method) << ")\n"
                   << "growth = " << verdict_name(growth.verdict) << " rate " << num(growth.rate)
                   << "\n";
    } else {
        nlohmann::json j{{"class", h.cls},
                         {"x", x},
                         {"egf", eval_json(egf)},
                         {"ogf", eval_json(ogf)},
                         {"ogf_laplace", eval_json(laplace)},
                         {"growth", {{"verdict", verdict_name(growth.verdict)},
                                     {"rate", growth.rate}}},
                         {"order", coeffs.order}};
        j.update(envelope(seed, config));
        sink.out() << j.dump() << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// sample (spec classes)
// ---------------------------------------------------------------------------

int cmd_sample(const std::string& path, const std::string& cls_flag, double x,
               const std::string& mode, std::uint64_t count, const std::string& strategy,
               std::optional<long> ceiling, const std::string& format, const std::string& output,
               std::uint64_t seed, const std::string& config) {
    if (!(x > 0.0)) throw XOutOfRange("sampling needs x > 0, got " + num(x));
    SpecHandle h = open_spec(path, cls_flag);
    bz::RandomSource rng(seed);
    Sink sink(output);
    std::ostream& out = sink.out();

    const bool json = format != "text";
    if (json) {
        nlohmann::json head = envelope(seed, config);
        head["class"] = h.cls;
        head["x"] = x;
        head["mode"] = mode;
        head["count"] = count;
        out << head.dump() << "\n";
    } else {
        out << "# seed=" << seed << " config=" << config << " version=" << kVersion << "\n";
    }

    if (mode == "exp") {
        bz::ExpSampler sampler(h.spec, h.cls);
        sampler.set_ceiling(ceiling);
        for (std::uint64_t i = 0; i < count; ++i) {
            bz::LabeledObject obj = sampler.draw(x, rng);
            if (json) {
                nlohmann::json j = bz::to_json(obj);
                j["mode"] = "exp";
                out << j.dump() << "\n";
            } else {
                out << obj.size() << "\t" << bz::to_term(obj) << "\n";
            }
        }
    } else if (mode == "ord") {
        auto sampler =
            bz::make_ordinary_spec_sampler(h.spec, h.cls, x, parse_strategy(strategy), rng, ceiling);
        for (std::uint64_t i = 0; i < count; ++i) {
            auto s = sampler.sample();
            if (json) {
                nlohmann::json j = bz::to_json(s.object);
                j["mode"] = "ord";
                j["u"] = s.u;
                j["x_effective"] = s.x_effective;
                out << j.dump() << "\n";
            } else {
                out << s.object.size() << "\t" << bz::to_term(s.object) << "\tu=" << num(s.u)
                    << "\n";
            }
        }
    } else {
        throw InvalidInput("unknown mode (want exp|ord): " + mode);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

int cmd_check(const std::string& spec_path, const std::string& dfa_path,
              const std::string& shuffle_path, const std::string& cls_flag,
              const bz::CheckConfig& cfg, const std::string& format, const std::string& output,
              const std::string& config) {
    if (spec_path.empty() == dfa_path.empty())
        throw InvalidInput("check needs either a spec file or --dfa");
    if (!shuffle_path.empty() && dfa_path.empty())
        throw InvalidInput("--shuffle needs --dfa");
    if (!(cfg.x > 0.0)) throw XOutOfRange("check needs x > 0, got " + num(cfg.x));
    if (cfg.ceiling && dfa_path.empty() == false)
        throw InvalidInput("--ceiling applies to spec classes only");

    bz::CheckReport report;
    if (!spec_path.empty()) {
        SpecHandle h = open_spec(spec_path, cls_flag);
        report = bz::run_check_suite(h.spec, h.cls, cfg);
    } else if (shuffle_path.empty()) {
        report = bz::run_check_suite(load_dfa(dfa_path), cfg);
    } else {
        report = bz::run_check_suite(load_dfa(dfa_path), load_dfa(shuffle_path), cfg);
    }

    Sink sink(output);
    if (format == "text") {
        sink.out() << "# seed=" << report.seed << " config=" << config << " version=" << kVersion
                   << "\n";
        for (const auto& c : report.checks)
            sink.out() << bz::to_string(c.status) << "\t" << c.name << "\t" << c.detail << "\n";
    } else {
        nlohmann::json j = report.to_json();
        j.update(envelope(report.seed, config));
        sink.out() << j.dump() << "\n";
    }
    return report.ok() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// tune
// ---------------------------------------------------------------------------

double expected_size_at(const bz::OrdinaryModel& model, double x) {
    int order = model.initial_order;
    for (;;) {
        bz::SeriesCoeffs coeffs = model.coeffs_at(order);
        bz::GrowthEstimate growth = bz::growth_estimate(coeffs);
        if (growth.verdict == bz::GrowthVerdict::Inconclusive && order < model.max_order) {
            order = std::min(order * 2, model.max_order);
            continue;
        }
        try {
            return bz::expected_size_ordinary(coeffs, growth, x);
        } catch (const bz::ToleranceNotReached&) {
            if (order >= model.max_order) throw;
            order = std::min(order * 2, model.max_order);
        }
    }
}

int cmd_tune(const std::string& path, const std::string& cls_flag, double target,
             std::optional<long> ceiling, const std::string& format, const std::string& output,
             std::uint64_t seed, const std::string& config) {
    if (target < 0.0) throw InvalidInput("target size must be >= 0");
    SpecHandle h = open_spec(path, cls_flag);
    bz::OrdinaryModel model = bz::spec_model(h.spec, h.cls, 0.0, ceiling);

    double x = 0.0, mean = 0.0;
    if (target > 0.0) {
        bz::GrowthEstimate growth;
        bz::SeriesCoeffs coeffs = bz::detail::coeffs_with_conclusive_growth(model, growth);
        bz::detail::require_series_convergence(growth, 0.0); // verdict gate only

        // upper end of the bisection bracket: the series safety margin for
        // geometric growth, or an expanding probe for finite support
        double hi;
        if (growth.rate > 0.0) {
            hi = 0.95 / growth.rate;
        } else {
            hi = 1.0;
            while (expected_size_at(model, hi) < target && hi < 1e12) hi *= 2.0;
        }
        double mean_hi = expected_size_at(model, hi);
        if (mean_hi < target * 0.99)
            throw bz::Unachievable("mean size at the boundary x=" + num(hi) + " is " +
                                   num(mean_hi) + "; target " + num(target) +
                                   " is out of reach");
        double lo = 0.0;
        x = hi;
        mean = mean_hi;
        for (int it = 0; it < 200 && std::fabs(mean - target) > 0.005 * target; ++it) {
            x = 0.5 * (lo + hi);
            mean = expected_size_at(model, x);
            (mean < target ? lo : hi) = x;
        }
        if (std::fabs(mean - target) > 0.01 * target)
            throw bz::Unachievable("bisection stalled at E[N]=" + num(mean) + " for target " +
                                   num(target));
    }

    Sink sink(output);
    if (format == "text") {
        sink.out() << "# seed=" << seed << " config=" << config << " version=" << kVersion << "\n"
                   << "x = " << num(x) << " (expected size " << num(mean) << ", target "
                   << num(target) << ")\n";
    } else {
        nlohmann::json j{{"class", h.cls}, {"x", x}, {"expected_size", mean}, {"target", target}};
        j.update(envelope(seed, config));
        sink.out() << j.dump() << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// words sample / words count
// ---------------------------------------------------------------------------

int cmd_words_sample(const std::string& dfa_path, const std::string& shuffle_path, double x,
                     const std::string& mode, std::uint64_t count, const std::string& strategy,
                     const std::string& format, const std::string& output, std::uint64_t seed,
                     const std::string& config) {
    if (!(x > 0.0)) throw XOutOfRange("sampling needs x > 0, got " + num(x));
    if (mode != "exp" && mode != "ord") throw InvalidInput("unknown mode (want exp|ord): " + mode);
    bz::Dfa left = load_dfa(dfa_path);
    bz::RandomSource rng(seed);
    Sink sink(output);
    std::ostream& out = sink.out();

    const bool json = format != "text";
    if (json) {
        nlohmann::json head = envelope(seed, config);
        head["x"] = x;
        head["mode"] = mode;
        head["count"] = count;
        head["shuffle"] = !shuffle_path.empty();
        out << head.dump() << "\n";
    } else {
        out << "# seed=" << seed << " config=" << config << " version=" << kVersion << "\n";
    }

    auto emit_word = [&](const std::string& w, const double* u, const double* xe) {
        if (json) {
            nlohmann::json j{{"size", w.size()}, {"word", w}, {"mode", mode}};
            if (u) {
                j["u"] = *u;
                j["x_effective"] = *xe;
            }
            out << j.dump() << "\n";
        } else {
            out << w.size() << "\t" << (w.empty() ? "(empty)" : w);
            if (u) out << "\tu=" << num(*u);
            out << "\n";
        }
    };
    auto emit_shuffle = [&](const bz::Interleaving& iv, const double* u, const double* xe) {
        if (json) {
            nlohmann::json j{{"size", iv.size()},     {"left", iv.left},
                             {"right", iv.right},     {"pattern", iv.pattern},
                             {"merged", iv.merged()}, {"mode", mode}};
            if (u) {
                j["u"] = *u;
                j["x_effective"] = *xe;
            }
            out << j.dump() << "\n";
        } else {
            std::string m = iv.merged();
            out << iv.size() << "\t" << (m.empty() ? "(empty)" : m);
            if (u) out << "\tu=" << num(*u);
            out << "\n";
        }
    };

    if (shuffle_path.empty()) {
        if (mode == "exp") {
            bz::WordSampler sampler(left);
            for (std::uint64_t i = 0; i < count; ++i)
                emit_word(sampler.draw(x, rng), nullptr, nullptr);
        } else {
            auto sampler = bz::make_ordinary_word_sampler(left, x, parse_strategy(strategy), rng);
            for (std::uint64_t i = 0; i < count; ++i) {
                auto s = sampler.sample();
                emit_word(s.object, &s.u, &s.x_effective);
            }
        }
    } else {
        bz::Dfa right = load_dfa(shuffle_path);
        if (mode == "exp") {
            bz::ShuffleSampler sampler(left, right);
            for (std::uint64_t i = 0; i < count; ++i)
                emit_shuffle(sampler.draw(x, rng), nullptr, nullptr);
        } else {
            auto sampler =
                bz::make_ordinary_shuffle_sampler(left, right, x, parse_strategy(strategy), rng);
            for (std::uint64_t i = 0; i < count; ++i) {
                auto s = sampler.sample();
                emit_shuffle(s.object, &s.u, &s.x_effective);
            }
        }
    }
    return 0;
}

int cmd_words_count(const std::string& dfa_path, const std::string& shuffle_path, int order,
                    std::optional<double> x, const std::string& format, const std::string& output,
                    std::uint64_t seed, const std::string& config) {
    if (order < 0) throw InvalidInput("order must be >= 0");
    bz::Dfa left = load_dfa(dfa_path);

    bz::SeriesCoeffs coeffs;
    std::optional<bz::EvalResult> ogf;
    int shortest = left.shortest_accepted();
    if (shuffle_path.empty()) {
        coeffs = bz::count_words(left, order);
        if (x) ogf = bz::ogf_rational_eval(left, *x);
    } else {
        bz::ShuffleSampler sampler(left, load_dfa(shuffle_path));
        coeffs = sampler.coeffs(order);
        // shortest interleaving = shortest left word + shortest right word
        shortest += sampler.right().dfa().shortest_accepted();
        if (x) {
            bz::OrdinaryModel model = bz::shuffle_model(sampler, *x);
            bz::GrowthEstimate growth;
            bz::SeriesCoeffs probe = bz::detail::coeffs_with_conclusive_growth(model, growth);
            ogf = bz::ogf_eval_series(probe, growth, *x);
        }
    }

    Sink sink(output);
    if (format == "text") {
        sink.out() << "# seed=" << seed << " config=" << config << " version=" << kVersion << "\n";
        for (int n = 0; n <= order; ++n)
            sink.out() << n << "\t" << coeffs.counts[static_cast<size_t>(n)].str() << "\n";
        if (ogf)
            sink.out() << "ogf = " << num(ogf->value) << " (err " << num(ogf->err) << ", "
                       << method_name(ogf->method) << ")\n";
    } else {
        nlohmann::json counts = nlohmann::json::array();
        for (int n = 0; n <= order; ++n)
            counts.push_back(coeffs.counts[static_cast<size_t>(n)].str());
        nlohmann::json j{{"name", coeffs.class_name},
                         {"order", order},
                         {"counts", std::move(counts)},
                         {"shortest_accepted", shortest}};
        if (ogf) j["ogf"] = eval_json(*ogf);
        j.update(envelope(seed, config));
        sink.out() << j.dump() << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boltzmann sampling toolkit for labeled specifications and regular languages"};
    app.require_subcommand(1);

    // shared option storage; each subcommand registers the flags it uses
    std::string spec_path, dfa_path, shuffle_path, cls, mode = "exp", strategy = "mixture";
    std::string format = "json", output;
    double x = 0.5, target = 0.0;
    std::uint64_t count = 1, trials = 100000;
    std::optional<std::uint64_t> seed_flag;
    long ceiling_value = 0;
    int order = 16;

    auto add_common = [&](CLI::App* cmd, bool with_output = true) {
        cmd->add_option("--seed", seed_flag, "64-bit seed (falls back to BZ_SEED, then entropy)");
        cmd->add_option("--format", format, "json|text")->default_str("json");
        if (with_output) cmd->add_option("--output", output, "write to a file instead of stdout");
    };

    CLI::App* oracle = app.add_subcommand("oracle", "evaluate EGF and OGF of a class");
    oracle->add_option("spec", spec_path, "specification file")->required();
    oracle->add_option("--class", cls, "class name (defaults to the root class)");
    oracle->add_option("--x", x, "evaluation point")->required();
    add_common(oracle);

    CLI::App* sample = app.add_subcommand("sample", "draw objects from a class");
    sample->add_option("spec", spec_path, "specification file")->required();
    sample->add_option("--class", cls, "class name (defaults to the root class)");
    sample->add_option("--x", x, "Boltzmann parameter")->required();
    sample->add_option("--mode", mode, "exp|ord")->default_str("exp");
    sample->add_option("--count", count, "number of draws")->check(CLI::PositiveNumber);
    sample->add_option("--strategy", strategy, "mixture|invcdf (ordinary mode)");
    CLI::Option* sample_ceiling =
        sample->add_option("--ceiling", ceiling_value, "condition on size <= ceiling")
            ->check(CLI::NonNegativeNumber);
    add_common(sample);

    CLI::App* check = app.add_subcommand("check", "run the verification suite");
    check->add_option("spec", spec_path, "specification file");
    check->add_option("--dfa", dfa_path, "DFA JSON file (word suite)");
    check->add_option("--shuffle", shuffle_path, "second DFA (shuffle suite)");
    check->add_option("--class", cls, "class name (defaults to the root class)");
    check->add_option("--x", x, "Boltzmann parameter");
    check->add_option("--trials", trials, "sampling trials per check (0 = analytic only)");
    check->add_option("--strategy", strategy, "mixture|invcdf for the ordinary-law check");
    CLI::Option* check_ceiling =
        check->add_option("--ceiling", ceiling_value, "condition on size <= ceiling")
            ->check(CLI::NonNegativeNumber);
    add_common(check);

    CLI::App* tune = app.add_subcommand("tune", "find x for a target mean size");
    tune->add_option("spec", spec_path, "specification file")->required();
    tune->add_option("--class", cls, "class name (defaults to the root class)");
    tune->add_option("--target-size", target, "target mean object size")->required();
    CLI::Option* tune_ceiling =
        tune->add_option("--ceiling", ceiling_value, "condition on size <= ceiling")
            ->check(CLI::NonNegativeNumber);
    add_common(tune);

    CLI::App* words = app.add_subcommand("words", "regular-language operations");
    words->require_subcommand(1);
    CLI::App* wsample = words->add_subcommand("sample", "draw accepted words or interleavings");
    wsample->add_option("--dfa", dfa_path, "DFA JSON file")->required();
    wsample->add_option("--shuffle", shuffle_path, "second DFA: sample the shuffle product");
    wsample->add_option("--x", x, "Boltzmann parameter")->required();
    wsample->add_option("--mode", mode, "exp|ord")->default_str("exp");
    wsample->add_option("--count", count, "number of draws")->check(CLI::PositiveNumber);
    wsample->add_option("--strategy", strategy, "mixture|invcdf (ordinary mode)");
    add_common(wsample);

    CLI::App* wcount = words->add_subcommand("count", "accepted-word counts by length");
    wcount->add_option("--dfa", dfa_path, "DFA JSON file")->required();
    wcount->add_option("--shuffle", shuffle_path, "second DFA: count the shuffle product");
    wcount->add_option("--order", order, "highest length to report")->required();
    CLI::Option* wcount_x = wcount->add_option("--x", x, "also evaluate the OGF at x");
    add_common(wcount);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    }

    try {
        std::uint64_t seed = resolve_seed(seed_flag);
        auto opt_ceiling = [&](CLI::Option* o) -> std::optional<long> {
            if (o->count() == 0) return std::nullopt;
            return ceiling_value;
        };

        if (app.got_subcommand(oracle)) {
            std::string config = fnv1a_hex("oracle|" + spec_path + "|" + cls + "|" + num(x));
            return cmd_oracle(spec_path, cls, x, format, output, seed, config);
        }
        if (app.got_subcommand(sample)) {
            std::optional<long> ceiling = opt_ceiling(sample_ceiling);
            std::string config =
                fnv1a_hex("sample|" + spec_path + "|" + cls + "|" + num(x) + "|" + mode + "|" +
                          std::to_string(count) + "|" + strategy + "|" +
                          (ceiling ? std::to_string(*ceiling) : "-"));
            return cmd_sample(spec_path, cls, x, mode, count, strategy, ceiling, format, output,
                              seed, config);
        }
        if (app.got_subcommand(check)) {
            bz::CheckConfig cfg;
            cfg.x = x;
            cfg.trials = trials;
            cfg.seed = seed;
            cfg.strategy = parse_strategy(strategy);
            cfg.ceiling = opt_ceiling(check_ceiling);
            std::string config =
                fnv1a_hex("check|" + spec_path + "|" + dfa_path + "|" + shuffle_path + "|" + cls +
                          "|" + num(x) + "|" + std::to_string(trials) + "|" + strategy + "|" +
                          (cfg.ceiling ? std::to_string(*cfg.ceiling) : "-"));
            return cmd_check(spec_path, dfa_path, shuffle_path, cls, cfg, format, output, config);
        }
        if (app.got_subcommand(tune)) {
            std::optional<long> ceiling = opt_ceiling(tune_ceiling);
            std::string config = fnv1a_hex("tune|" + spec_path + "|" + cls + "|" + num(target) +
                                           "|" + (ceiling ? std::to_string(*ceiling) : "-"));
            return cmd_tune(spec_path, cls, target, ceiling, format, output, seed, config);
        }
        if (words->got_subcommand(wsample)) {
            std::string config =
                fnv1a_hex("words-sample|" + dfa_path + "|" + shuffle_path + "|" + num(x) + "|" +
                          mode + "|" + std::to_string(count) + "|" + strategy);
            return cmd_words_sample(dfa_path, shuffle_path, x, mode, count, strategy, format,
                                    output, seed, config);
        }
        if (words->got_subcommand(wcount)) {
            std::optional<double> at;
            if (wcount_x->count() > 0) at = x;
            std::string config = fnv1a_hex("words-count|" + dfa_path + "|" + shuffle_path + "|" +
                                           std::to_string(order) + "|" + (at ? num(*at) : "-"));
            return cmd_words_count(dfa_path, shuffle_path, order, at, format, output, seed, config);
        }
        throw InvalidInput("no subcommand selected");
    } catch (const InvalidInput& e) {
        std::cerr << "bz: " << e.what() << "\n";
        return 3;
    } catch (const XOutOfRange& e) {
        std::cerr << "bz: " << e.what() << "\n";
        return 4;
    } catch (const bz::SyntaxError& e) {
        std::cerr << "bz: " << e.what() << "\n";
        return 3;
    } catch (const bz::UnknownName& e) {
        std::cerr << "bz: " << e.what() << "\n";
        return 3;
    } catch (const bz::IllFounded& e) {
        std::cerr << "bz: " << e.what() << "\n";
        return 3;
    } catch (const bz::TooLarge& e) {
        std::cerr << "bz: " << e.what() << "\n";
        return 3;
    } catch (const bz::EgfDivergent& e) {
        std::cerr << "bz: " << e.what() << "\n";
        return 4;
    } catch (const bz::DivergentOgf& e) {
        std::cerr << "bz: " << e.what() << "\n";
        return 2;
    } catch (const bz::InconclusiveGrowth& e) {
        std::cerr << "bz: " << e.what() << "\n";
        return 2;
    } catch (const bz::TailTooHeavy& e) {
        std::cerr << "bz: " << e.what() << "\n";
        return 2;
    } catch (const bz::EmptyLanguage& e) {
        std::cerr << "bz: " << e.what() << "\n";
        return 2;
    } catch (const bz::DegenerateLaw& e) {
        std::cerr << "bz: " << e.what() << "\n";
        return 2;
    } catch (const bz::Unachievable& e) {
        std::cerr << "bz: " << e.what() << "\n";
        return 2;
    } catch (const bz::SizeCeilingExceeded& e) {
        std::cerr << "bz: " << e.what() << "\n";
        return 2;
    } catch (const bz::Error& e) {
        std::cerr << "bz: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "bz: internal error: " << e.what() << "\n";
        return 1;
    }
}

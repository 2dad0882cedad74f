#pragma once

#include <cassert>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bz/bigint.hpp"
#include "bz/errors.hpp"
#include "bz/oracle.hpp"
#include "bz/ord_transform.hpp"
#include "bz/rng.hpp"
#include "bz/series.hpp"

namespace bz {

// ---------------------------------------------------------------------------
// Deterministic finite automaton over single-character letters. The JSON
// form is {"alphabet": ["a", ...], "states": K, "start": s0,
// "accept": [..], "delta": {"state,letter": state, ...}}; the transition
// table must be total. States unreachable from the start are pruned on
// load, so state_count() reflects the trimmed automaton.
// ---------------------------------------------------------------------------

class Dfa {
  public:
    static Dfa from_json(const nlohmann::json& j) {
        Dfa d;
        if (!j.contains("alphabet") || !j.contains("states") || !j.contains("start") ||
            !j.contains("accept") || !j.contains("delta"))
            throw SyntaxError("DFA JSON needs alphabet/states/start/accept/delta");
        for (const auto& l : j.at("alphabet")) {
            std::string s = l.get<std::string>();
            if (s.size() != 1) throw SyntaxError("DFA letters must be single characters: " + s);
            if (d.alphabet_.find(s[0]) != std::string::npos)
                throw SyntaxError(std::string("duplicate letter in alphabet: ") + s);
            d.alphabet_ += s[0];
        }
        if (d.alphabet_.empty()) throw SyntaxError("DFA alphabet is empty");
        int k = j.at("states").get<int>();
        if (k <= 0) throw SyntaxError("DFA state count must be positive");
        d.start_ = j.at("start").get<int>();
        if (d.start_ < 0 || d.start_ >= k) throw SyntaxError("DFA start state out of range");
        d.accept_.assign(static_cast<size_t>(k), 0);
        for (const auto& a : j.at("accept")) {
            int s = a.get<int>();
            if (s < 0 || s >= k) throw SyntaxError("DFA accept state out of range");
            d.accept_[static_cast<size_t>(s)] = 1;
        }
        d.delta_.assign(static_cast<size_t>(k) * d.alphabet_.size(), -1);
        for (const auto& [key, val] : j.at("delta").items()) {
            auto comma = key.find(',');
            if (comma == std::string::npos || comma + 2 != key.size())
                throw SyntaxError("DFA delta key must be \"state,letter\": " + key);
            int s = std::stoi(key.substr(0, comma));
            char letter = key[comma + 1];
            size_t li = d.alphabet_.find(letter);
            if (s < 0 || s >= k || li == std::string::npos)
                throw SyntaxError("DFA delta key out of range: " + key);
            int t = val.get<int>();
            if (t < 0 || t >= k) throw SyntaxError("DFA delta target out of range: " + key);
            d.delta_[static_cast<size_t>(s) * d.alphabet_.size() + li] = t;
        }
        for (int v : d.delta_)
            if (v < 0) throw SyntaxError("DFA transition table is not total");
        d.prune_unreachable(k);
        return d;
    }

    static Dfa load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error("cannot open DFA file: " + path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw SyntaxError("DFA JSON parse error in " + path + ": " + e.what());
        }
        return from_json(j);
    }

    const std::string& alphabet() const { return alphabet_; }
    int state_count() const { return static_cast<int>(accept_.size()); }
    int start() const { return start_; }
    bool accepting(int s) const { return accept_[static_cast<size_t>(s)] != 0; }
    int next(int s, size_t letter_idx) const {
        return delta_[static_cast<size_t>(s) * alphabet_.size() + letter_idx];
    }

    bool accepts(const std::string& word) const {
        int s = start_;
        for (char c : word) {
            size_t li = alphabet_.find(c);
            if (li == std::string::npos) return false;
            s = next(s, li);
        }
        return accepting(s);
    }

    // length of the shortest accepted word, or -1 if the language is empty
    int shortest_accepted() const {
        std::vector<int> dist(accept_.size(), -1);
        std::deque<int> queue{start_};
        dist[static_cast<size_t>(start_)] = 0;
        while (!queue.empty()) {
            int s = queue.front();
            queue.pop_front();
            if (accepting(s)) return dist[static_cast<size_t>(s)];
            for (size_t li = 0; li < alphabet_.size(); ++li) {
                int t = next(s, li);
                if (dist[static_cast<size_t>(t)] < 0) {
                    dist[static_cast<size_t>(t)] = dist[static_cast<size_t>(s)] + 1;
                    queue.push_back(t);
                }
            }
        }
        return -1;
    }

  private:
    void prune_unreachable(int k) {
        std::vector<int> remap(static_cast<size_t>(k), -1);
        std::deque<int> queue{start_};
        remap[static_cast<size_t>(start_)] = 0;
        int kept = 1;
        while (!queue.empty()) {
            int s = queue.front();
            queue.pop_front();
            for (size_t li = 0; li < alphabet_.size(); ++li) {
                int t = delta_[static_cast<size_t>(s) * alphabet_.size() + li];
                if (remap[static_cast<size_t>(t)] < 0) {
                    remap[static_cast<size_t>(t)] = kept++;
                    queue.push_back(t);
                }
            }
        }
        std::vector<char> accept(static_cast<size_t>(kept), 0);
        std::vector<int> delta(static_cast<size_t>(kept) * alphabet_.size(), -1);
        for (int s = 0; s < k; ++s) {
            int ns = remap[static_cast<size_t>(s)];
            if (ns < 0) continue;
            accept[static_cast<size_t>(ns)] = accept_[static_cast<size_t>(s)];
            for (size_t li = 0; li < alphabet_.size(); ++li)
                delta[static_cast<size_t>(ns) * alphabet_.size() + li] =
                    remap[static_cast<size_t>(delta_[static_cast<size_t>(s) * alphabet_.size() + li])];
        }
        start_ = 0;
        accept_ = std::move(accept);
        delta_ = std::move(delta);
    }

    std::string alphabet_;
    int start_ = 0;
    std::vector<char> accept_; // accept_[s]
    std::vector<int> delta_;   // delta_[s * |alphabet| + letter]
};

// Exact accepted-word counts a_0..a_order by the backward recurrence
// acc[m][s] = sum_l acc[m-1][delta(s,l)], acc[0][s] = [s accepting].
inline SeriesCoeffs count_words(const Dfa& dfa, int order, const std::string& name = "L") {
    SeriesCoeffs out;
    out.class_name = name;
    out.order = order;
    const size_t k = static_cast<size_t>(dfa.state_count());
    std::vector<BigInt> cur(k), prev(k);
    for (size_t s = 0; s < k; ++s) cur[s] = dfa.accepting(static_cast<int>(s)) ? 1 : 0;
    BigInt fact = 1;
    for (int m = 0; m <= order; ++m) {
        if (m > 0) {
            prev.swap(cur);
            for (size_t s = 0; s < k; ++s) {
                BigInt acc = 0;
                for (size_t li = 0; li < dfa.alphabet().size(); ++li)
                    acc += prev[static_cast<size_t>(dfa.next(static_cast<int>(s), li))];
                cur[s] = acc;
            }
            fact *= m;
        }
        out.counts.push_back(cur[static_cast<size_t>(dfa.start())]);
        out.egf.push_back(BigRat(cur[static_cast<size_t>(dfa.start())], fact));
    }
    return out;
}

namespace detail {

// Dense LU with partial pivoting; the systems are automaton-sized.
struct Lu {
    std::vector<double> a; // row-major factors
    std::vector<int> perm;
    size_t n = 0;

    void factor(std::vector<double> m, size_t dim) {
        a = std::move(m);
        n = dim;
        perm.resize(n);
        for (size_t i = 0; i < n; ++i) perm[i] = static_cast<int>(i);
        double scale = 0.0;
        for (double v : a) scale = std::max(scale, std::fabs(v));
        for (size_t col = 0; col < n; ++col) {
            size_t piv = col;
            for (size_t r = col + 1; r < n; ++r)
                if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
            if (std::fabs(a[piv * n + col]) < 1e-13 * std::max(scale, 1.0))
                throw SingularSystem("transfer-matrix system is singular at this x");
            if (piv != col) {
                for (size_t j = 0; j < n; ++j) std::swap(a[piv * n + j], a[col * n + j]);
                std::swap(perm[piv], perm[col]);
            }
            for (size_t r = col + 1; r < n; ++r) {
                double f = a[r * n + col] / a[col * n + col];
                a[r * n + col] = f;
                for (size_t j = col + 1; j < n; ++j) a[r * n + j] -= f * a[col * n + j];
            }
        }
    }

    std::vector<double> solve(const std::vector<double>& b) const {
        std::vector<double> y(n);
        for (size_t i = 0; i < n; ++i) {
            double acc = b[static_cast<size_t>(perm[i])];
            for (size_t j = 0; j < i; ++j) acc -= a[i * n + j] * y[j];
            y[i] = acc;
        }
        for (size_t i = n; i-- > 0;) {
            double acc = y[i];
            for (size_t j = i + 1; j < n; ++j) acc -= a[i * n + j] * y[j];
            y[i] = acc / a[i * n + i];
        }
        return y;
    }
};

} // namespace detail

// OGF of the accepted language at x from the linear system
// v = accept + x M v, M[s][t] = #letters with delta(s,l) = t; value v[start].
// Convergence is vouched for by the coefficient growth verdict before any
// linear algebra runs; the error bound comes from one refinement step.
inline EvalResult ogf_rational_eval(const Dfa& dfa, double x, int probe_order = 64) {
    if (x < 0.0) throw Error("ogf_rational_eval: x must be >= 0");
    SeriesCoeffs coeffs = count_words(dfa, probe_order);
    GrowthEstimate growth = growth_estimate(coeffs);
    detail::require_series_convergence(growth, x);

    const size_t k = static_cast<size_t>(dfa.state_count());
    std::vector<double> m(k * k, 0.0);
    for (size_t s = 0; s < k; ++s) {
        m[s * k + s] += 1.0;
        for (size_t li = 0; li < dfa.alphabet().size(); ++li)
            m[s * k + static_cast<size_t>(dfa.next(static_cast<int>(s), li))] -= x;
    }
    std::vector<double> rhs(k, 0.0);
    for (size_t s = 0; s < k; ++s) rhs[s] = dfa.accepting(static_cast<int>(s)) ? 1.0 : 0.0;

    detail::Lu lu;
    lu.factor(m, k);
    std::vector<double> v = lu.solve(rhs);

    // one step of iterative refinement bounds the solve error
    std::vector<double> residual(k, 0.0);
    for (size_t s = 0; s < k; ++s) {
        double acc = rhs[s];
        acc -= v[s];
        for (size_t li = 0; li < dfa.alphabet().size(); ++li)
            acc += x * v[static_cast<size_t>(dfa.next(static_cast<int>(s), li))];
        residual[s] = acc;
    }
    std::vector<double> corr = lu.solve(residual);
    double corr_norm = 0.0, v_norm = 0.0;
    for (size_t s = 0; s < k; ++s) {
        corr_norm = std::max(corr_norm, std::fabs(corr[s]));
        v_norm = std::max(v_norm, std::fabs(v[s]));
    }
    double value = v[static_cast<size_t>(dfa.start())] + corr[static_cast<size_t>(dfa.start())];
    return {value, 2.0 * corr_norm + 1e-14 * (1.0 + v_norm), EvalMethod::Rational};
}

// ---------------------------------------------------------------------------
// Size-biased word sampler: a length-n accepted word comes out with
// probability x^n / (n! C^(x)). Length by inversion on the law
// t_n = a_n x^n / n! (log-sum-exp normalized), then a uniform accepted word
// of that length by the backward count table with exact integer weights.
// ---------------------------------------------------------------------------

class WordSampler {
  public:
    explicit WordSampler(Dfa dfa, std::string name = "L")
        : dfa_(std::move(dfa)), name_(std::move(name)) {
        if (dfa_.shortest_accepted() < 0)
            throw EmptyLanguage("automaton accepts no word at all");
    }

    const Dfa& dfa() const { return dfa_; }
    const std::string& name() const { return name_; }

    SeriesCoeffs coeffs(int order) const {
        extend(order);
        SeriesCoeffs out;
        out.class_name = name_;
        out.order = order;
        BigInt fact = 1;
        for (int n = 0; n <= order; ++n) {
            if (n > 0) fact *= n;
            const BigInt& a = acc_[static_cast<size_t>(n)][static_cast<size_t>(dfa_.start())];
            out.counts.push_back(a);
            out.egf.push_back(BigRat(a, fact));
        }
        return out;
    }

    double egf_value(double x) const {
        auto [terms, offset, base] = length_law(x);
        (void)base;
        double s = 0.0;
        for (double t : terms) s += t;
        double v = s * std::exp(offset);
        if (!std::isfinite(v) || v > detail::egf_overflow_ceiling)
            throw EgfDivergent("EGF value exceeded the divergence ceiling");
        return v;
    }

    std::string draw(double x, RandomSource& rng) const {
        auto [terms, offset, base] = length_law(x);
        (void)offset;
        double total = 0.0;
        for (double t : terms) total += t;
        double target = rng.unit() * total;
        size_t pick = 0;
        double cum = 0.0;
        for (size_t i = 0; i < terms.size(); ++i) {
            cum += terms[i];
            if (terms[i] > 0.0) pick = i;
            if (cum > target) break;
        }
        long n = base + static_cast<long>(pick);
        // walk: uniform among the acc_[n][start] accepted words
        std::string word;
        int s = dfa_.start();
        for (long m = n; m >= 1; --m) {
            const auto& row = acc_[static_cast<size_t>(m - 1)];
            BigInt r = rng.below_big(acc_[static_cast<size_t>(m)][static_cast<size_t>(s)]);
            for (size_t li = 0; li < dfa_.alphabet().size(); ++li) {
                const BigInt& w = row[static_cast<size_t>(dfa_.next(s, li))];
                if (r < w) {
                    word += dfa_.alphabet()[li];
                    s = dfa_.next(s, li);
                    break;
                }
                r -= w;
            }
        }
        assert(dfa_.accepting(s));
        return word;
    }

  private:
    static constexpr int kMaxLength = 4096;

    void extend(int order) const {
        const size_t k = static_cast<size_t>(dfa_.state_count());
        if (acc_.empty()) {
            std::vector<BigInt> row(k);
            for (size_t s = 0; s < k; ++s) row[s] = dfa_.accepting(static_cast<int>(s)) ? 1 : 0;
            acc_.push_back(std::move(row));
        }
        while (static_cast<int>(acc_.size()) <= order) {
            const auto& prev = acc_.back();
            std::vector<BigInt> row(k);
            for (size_t s = 0; s < k; ++s) {
                BigInt acc = 0;
                for (size_t li = 0; li < dfa_.alphabet().size(); ++li)
                    acc += prev[static_cast<size_t>(dfa_.next(static_cast<int>(s), li))];
                row[s] = acc;
            }
            acc_.push_back(std::move(row));
        }
    }

    // Normalized length weights t_n = a_n x^n / n! for n in
    // [base, base+|terms|), scaled by e^{-offset} for stability. Truncation
    // stops once the entire-function tail bound (sigma x)^n / n! is
    // negligible against the accumulated mass.
    std::tuple<std::vector<double>, double, long> length_law(double x) const {
        if (x < 0.0) throw Error("word sampler parameter must be >= 0");
        const double sigma = static_cast<double>(dfa_.alphabet().size());
        const int shortest = dfa_.shortest_accepted();
        if (x == 0.0) {
            if (shortest != 0) throw EmptyLanguage("no accepted word has size 0 and x = 0");
            extend(0);
            return {{1.0}, 0.0, 0};
        }
        const double lx = std::log(x);
        const double lsx = std::log(sigma * x);
        std::vector<double> logs;
        double peak = -std::numeric_limits<double>::infinity();
        int n = shortest;
        for (;; ++n) {
            if (n > kMaxLength)
                throw TailTooHeavy("word length law still heavy at the length cap");
            extend(n);
            const BigInt& a = acc_[static_cast<size_t>(n)][static_cast<size_t>(dfa_.start())];
            double lt = (a == 0) ? -std::numeric_limits<double>::infinity()
                                 : big_log(a) + n * lx - std::lgamma(n + 1.0);
            logs.push_back(lt);
            peak = std::max(peak, lt);
            // bound on everything past n: 2 (sigma x)^{n+1}/(n+1)! once the
            // term ratio sigma x/(n+1) has fallen under 1/2
            if (n + 1 > 2.0 * sigma * x) {
                double log_bound =
                    std::log(2.0) + (n + 1) * lsx - std::lgamma(n + 2.0);
                if (log_bound < peak + std::log(1e-13)) break;
            }
        }
        std::vector<double> terms(logs.size());
        for (size_t i = 0; i < logs.size(); ++i)
            terms[i] = std::isfinite(logs[i]) ? std::exp(logs[i] - peak) : 0.0;
        return {terms, peak, shortest};
    }

    Dfa dfa_;
    std::string name_;
    mutable std::vector<std::vector<BigInt>> acc_; // acc_[m][s]
};

// ---------------------------------------------------------------------------
// Shuffle of two regular languages: objects are interleavings, i.e. a word
// from each language plus the sorted set of merged positions fed by the
// left word. Counts convolve binomially; the EGF is the plain product.
// ---------------------------------------------------------------------------

struct Interleaving {
    std::string left, right;
    std::vector<int> pattern; // positions of merged() drawn from left, ascending

    size_t size() const { return left.size() + right.size(); }

    std::string merged() const {
        std::string out(size(), '\0');
        size_t li = 0, ri = 0, pi = 0;
        for (size_t pos = 0; pos < out.size(); ++pos) {
            if (pi < pattern.size() && pattern[pi] == static_cast<int>(pos))
                out[pos] = left[li++], ++pi;
            else
                out[pos] = right[ri++];
        }
        return out;
    }
};

class ShuffleSampler {
  public:
    ShuffleSampler(Dfa left, Dfa right)
        : left_(std::move(left), "left"), right_(std::move(right), "right") {}

    const WordSampler& left() const { return left_; }
    const WordSampler& right() const { return right_; }

    double egf_value(double x) const { return left_.egf_value(x) * right_.egf_value(x); }

    SeriesCoeffs coeffs(int order) const {
        SeriesCoeffs a = left_.coeffs(order), b = right_.coeffs(order), out;
        out.class_name = "shuffle";
        out.order = order;
        BigInt fact = 1;
        for (int n = 0; n <= order; ++n) {
            if (n > 0) fact *= n;
            BigInt c = 0;
            for (int k = 0; k <= n; ++k)
                c += binomial(n, k) * a.counts[static_cast<size_t>(k)] *
                     b.counts[static_cast<size_t>(n - k)];
            out.counts.push_back(c);
            out.egf.push_back(BigRat(c, fact));
        }
        return out;
    }

    Interleaving draw(double x, RandomSource& rng) const {
        Interleaving iv;
        iv.left = left_.draw(x, rng);
        iv.right = right_.draw(x, rng);
        size_t need = iv.left.size();
        size_t remaining = iv.size();
        for (size_t pos = 0; pos < iv.size(); ++pos, --remaining) {
            if (need > 0 && rng.below(remaining) < need) {
                iv.pattern.push_back(static_cast<int>(pos));
                --need;
            }
        }
        return iv;
    }

  private:
    WordSampler left_;
    WordSampler right_;
};

// --- ordinary wrappers ------------------------------------------------------

inline OrdinaryModel word_model(const WordSampler& sampler, double x) {
    OrdinaryModel model;
    model.x = x;
    model.coeffs_at = [sampler](int order) { return sampler.coeffs(order); };
    model.egf = [sampler](double t) { return sampler.egf_value(t); };
    model.initial_order = std::max(64, 2 * sampler.dfa().shortest_accepted() + 16);
    return model;
}

inline OrdinaryModel shuffle_model(const ShuffleSampler& sampler, double x) {
    OrdinaryModel model;
    model.x = x;
    model.coeffs_at = [sampler](int order) { return sampler.coeffs(order); };
    model.egf = [sampler](double t) { return sampler.egf_value(t); };
    model.initial_order =
        std::max({64, 2 * sampler.left().dfa().shortest_accepted() + 16,
                  2 * sampler.right().dfa().shortest_accepted() + 16});
    return model;
}

inline OrdinarySampler<WordSampler> make_ordinary_word_sampler(const Dfa& dfa, double x,
                                                               UStrategyChoice choice,
                                                               RandomSource rng) {
    WordSampler ws(dfa);
    OrdinaryModel model = word_model(ws, x);
    return OrdinarySampler<WordSampler>(std::move(ws), model, choice, rng);
}

inline OrdinarySampler<ShuffleSampler> make_ordinary_shuffle_sampler(const Dfa& left,
                                                                     const Dfa& right, double x,
                                                                     UStrategyChoice choice,
                                                                     RandomSource rng) {
    ShuffleSampler ss(left, right);
    OrdinaryModel model = shuffle_model(ss, x);
    return OrdinarySampler<ShuffleSampler>(std::move(ss), model, choice, rng);
}

} // namespace bz

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <string>
#include <vector>

#include "bz/bigint.hpp"
#include "bz/errors.hpp"
#include "bz/objects.hpp"
#include "bz/oracle.hpp"
#include "bz/series.hpp"
#include "bz/spec.hpp"
#include "bz/specfun.hpp"
#include "bz/words.hpp"

namespace bz {

// ---------------------------------------------------------------------------
// Size histograms and the chi-square goodness-of-fit machinery shared by
// the check suite and the acceptance harness.
// ---------------------------------------------------------------------------

// Counts by size with a final ">= cutoff" overflow bucket. Seed and
// descriptor travel with the data so emitted histograms are auditable.
struct SizeHistogram {
    std::vector<std::uint64_t> counts; // counts[cutoff] collects sizes >= cutoff
    int cutoff = 0;
    std::uint64_t total = 0;
    std::uint64_t seed = 0;
    std::string descriptor;

    explicit SizeHistogram(int cutoff_)
        : counts(static_cast<size_t>(cutoff_) + 1, 0), cutoff(cutoff_) {}

    void add(long size) {
        ++total;
        ++counts[static_cast<size_t>(std::min<long>(size, cutoff))];
    }

    std::vector<double> frequencies() const {
        std::vector<double> f(counts.size());
        for (size_t i = 0; i < counts.size(); ++i)
            f[i] = total ? static_cast<double>(counts[i]) / static_cast<double>(total) : 0.0;
        return f;
    }
};

inline double tv_distance(const SizeHistogram& a, const SizeHistogram& b) {
    if (a.counts.size() != b.counts.size())
        throw Error("tv_distance: histograms have different bucket layouts");
    double acc = 0.0;
    auto fa = a.frequencies(), fb = b.frequencies();
    for (size_t i = 0; i < fa.size(); ++i) acc += std::fabs(fa[i] - fb[i]);
    return 0.5 * acc;
}

struct Chi2Result {
    double statistic = 0.0;
    long dof = 0;
    double p_value = 1.0;
    size_t merged_buckets = 0;          // buckets left after tail-inward merging
    std::vector<std::string> merge_log; // one line per merged group, head first
};

// Pearson chi-square of observed category counts against `probs` (one
// entry per category, summing to 1 within 1e-9). Categories with expected
// count < 5 are merged from the tail inward; a front remainder folds into
// the innermost merged group, so the grouping is deterministic.
inline Chi2Result chi_square_counts(const std::vector<std::uint64_t>& counts,
                                    const std::vector<double>& probs) {
    if (probs.size() != counts.size())
        throw Error("chi_square: law and histogram have different bucket counts");
    double psum = 0.0;
    std::uint64_t total = 0;
    for (double p : probs) {
        if (p < -1e-12) throw Error("chi_square: negative probability in the law");
        psum += p;
    }
    for (std::uint64_t c : counts) total += c;
    if (std::fabs(psum - 1.0) > 1e-9)
        throw Error("chi_square: law sums to " + std::to_string(psum));
    if (total == 0) throw DegenerateLaw("chi_square: empty histogram");

    const double n = static_cast<double>(total);
    struct Group {
        double obs, expd;
        size_t lo, hi; // bucket index range [lo, hi]
    };
    std::vector<Group> groups; // tail first
    double obs_acc = 0.0, exp_acc = 0.0;
    size_t hi = probs.size() - 1;
    for (size_t i = probs.size(); i-- > 0;) {
        obs_acc += static_cast<double>(counts[i]);
        exp_acc += probs[i] * n;
        if (exp_acc >= 5.0) {
            groups.push_back({obs_acc, exp_acc, i, hi});
            obs_acc = exp_acc = 0.0;
            hi = i == 0 ? 0 : i - 1;
        }
    }
    if (obs_acc > 0.0 || exp_acc > 0.0) {
        if (groups.empty())
            throw DegenerateLaw("chi_square: too little expected mass to form two buckets");
        groups.back().obs += obs_acc;
        groups.back().expd += exp_acc;
        groups.back().lo = 0;
    }
    if (groups.size() < 2)
        throw DegenerateLaw("chi_square: law is concentrated on a single merged bucket");

    Chi2Result r;
    r.merged_buckets = groups.size();
    r.dof = static_cast<long>(groups.size()) - 1;
    for (size_t g = groups.size(); g-- > 0;) {
        const Group& grp = groups[g];
        double d = grp.obs - grp.expd;
        r.statistic += d * d / grp.expd;
        r.merge_log.push_back("buckets " + std::to_string(grp.lo) + ".." + std::to_string(grp.hi) +
                              ": observed " + std::to_string(grp.obs) + ", expected " +
                              std::to_string(grp.expd));
    }
    r.p_value = chi2_sf(r.statistic, static_cast<int>(r.dof));
    return r;
}

inline Chi2Result chi_square(const SizeHistogram& hist, const std::vector<double>& probs) {
    return chi_square_counts(hist.counts, probs);
}

// Size law per histogram bucket for the size-biased sampler:
// p_n = a_n x^n / (n! normalizer); the overflow bucket absorbs the rest.
inline std::vector<double> exp_size_law(const SeriesCoeffs& coeffs, double x, double normalizer,
                                        int cutoff) {
    if (cutoff > coeffs.order)
        throw Error("exp_size_law: cutoff beyond the coefficient order");
    std::vector<double> law(static_cast<size_t>(cutoff) + 1, 0.0);
    BigRat xr = rat_from_double(x), xpow = 1;
    double head = 0.0;
    for (int i = 0; i < cutoff; ++i) {
        law[static_cast<size_t>(i)] =
            to_double(coeffs.egf[static_cast<size_t>(i)] * xpow) / normalizer;
        head += law[static_cast<size_t>(i)];
        xpow *= xr;
    }
    law[static_cast<size_t>(cutoff)] = std::max(0.0, 1.0 - head);
    return law;
}

// Same for the ordinary sampler: p_n = a_n x^n / normalizer.
inline std::vector<double> ord_size_law(const SeriesCoeffs& coeffs, double x, double normalizer,
                                        int cutoff) {
    if (cutoff > coeffs.order)
        throw Error("ord_size_law: cutoff beyond the coefficient order");
    std::vector<double> law(static_cast<size_t>(cutoff) + 1, 0.0);
    BigRat xr = rat_from_double(x), xpow = 1;
    double head = 0.0;
    for (int i = 0; i < cutoff; ++i) {
        law[static_cast<size_t>(i)] =
            to_double(BigRat(coeffs.counts[static_cast<size_t>(i)]) * xpow) / normalizer;
        head += law[static_cast<size_t>(i)];
        xpow *= xr;
    }
    law[static_cast<size_t>(cutoff)] = std::max(0.0, 1.0 - head);
    return law;
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration of the labeled objects of one size. This is the
// ground truth the sampling tests compare against, so it is written for
// transparency over speed and refuses sizes above 8.
// ---------------------------------------------------------------------------

inline constexpr int max_enumeration_size = 8;

namespace detail {

using LabelSet = std::vector<int>; // ascending

// All subsets of `labels`, optionally forced nonempty or forced to contain
// the minimum label (labels[0]).
inline std::vector<LabelSet> subsets_of(const LabelSet& labels, bool must_hold_min,
                                        bool allow_empty) {
    std::vector<LabelSet> out;
    const size_t n = labels.size();
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (!allow_empty && mask == 0) continue;
        if (must_hold_min && n > 0 && !(mask & 1u)) continue;
        LabelSet s;
        for (size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) s.push_back(labels[i]);
        out.push_back(std::move(s));
    }
    return out;
}

inline LabelSet set_minus(const LabelSet& all, const LabelSet& taken) {
    LabelSet rest;
    std::set_difference(all.begin(), all.end(), taken.begin(), taken.end(),
                        std::back_inserter(rest));
    return rest;
}

inline std::vector<LabeledObject> enum_expr(const ValidatedSpec& spec, ExprId id,
                                            const LabelSet& labels);

// Ordered tuples of >= min_left children jointly covering `labels`. Every
// child is nonempty (validation bars size-0 members), and the first child's
// label set determines the decomposition, so no tuple repeats.
inline std::vector<std::vector<LabeledObject>> enum_tuple(const ValidatedSpec& spec, ExprId inner,
                                                          const LabelSet& labels, int min_left) {
    std::vector<std::vector<LabeledObject>> out;
    if (labels.empty()) {
        if (min_left <= 0) out.emplace_back();
        return out;
    }
    for (const LabelSet& first : subsets_of(labels, false, false)) {
        std::vector<LabeledObject> heads = enum_expr(spec, inner, first);
        if (heads.empty()) continue;
        LabelSet rest = set_minus(labels, first);
        for (const auto& tail : enum_tuple(spec, inner, rest, min_left - 1))
            for (const auto& head : heads) {
                std::vector<LabeledObject> tuple;
                tuple.reserve(tail.size() + 1);
                tuple.push_back(head);
                tuple.insert(tuple.end(), tail.begin(), tail.end());
                out.push_back(std::move(tuple));
            }
    }
    return out;
}

// Canonical-order blocks of a set: the block holding the minimum label
// comes first, the rest splits recursively under the same rule.
inline std::vector<std::vector<LabeledObject>> enum_blocks(const ValidatedSpec& spec, ExprId inner,
                                                           const LabelSet& labels, int min_left) {
    std::vector<std::vector<LabeledObject>> out;
    if (labels.empty()) {
        if (min_left <= 0) out.emplace_back();
        return out;
    }
    for (const LabelSet& first : subsets_of(labels, true, false)) {
        std::vector<LabeledObject> heads = enum_expr(spec, inner, first);
        if (heads.empty()) continue;
        LabelSet rest = set_minus(labels, first);
        for (const auto& tail : enum_blocks(spec, inner, rest, min_left - 1))
            for (const auto& head : heads) {
                std::vector<LabeledObject> blocks;
                blocks.reserve(tail.size() + 1);
                blocks.push_back(head);
                blocks.insert(blocks.end(), tail.begin(), tail.end());
                out.push_back(std::move(blocks));
            }
    }
    return out;
}

inline std::vector<LabeledObject> enum_expr(const ValidatedSpec& spec, ExprId id,
                                            const LabelSet& labels) {
    const ExprNode& nd = spec.system().node(id);
    std::vector<LabeledObject> out;
    switch (nd.kind) {
        case ExprKind::Epsilon:
            if (labels.empty()) out.push_back(LabeledObject{});
            break;
        case ExprKind::Atom:
            if (labels.size() == 1) {
                LabeledObject o;
                o.kind = ObjKind::Atom;
                o.letter = nd.letter;
                o.label = labels[0];
                out.push_back(std::move(o));
            }
            break;
        case ExprKind::Union:
            for (int side = 0; side < 2; ++side)
                for (auto& c : enum_expr(spec, side == 0 ? nd.left : nd.right, labels)) {
                    LabeledObject o;
                    o.kind = side == 0 ? ObjKind::UnionL : ObjKind::UnionR;
                    o.children.push_back(std::move(c));
                    out.push_back(std::move(o));
                }
            break;
        case ExprKind::Product:
            for (const LabelSet& ls : subsets_of(labels, false, true)) {
                std::vector<LabeledObject> lefts = enum_expr(spec, nd.left, ls);
                if (lefts.empty()) continue;
                for (const auto& r : enum_expr(spec, nd.right, set_minus(labels, ls)))
                    for (const auto& l : lefts) {
                        LabeledObject o;
                        o.kind = ObjKind::Pair;
                        o.children = {l, r};
                        out.push_back(std::move(o));
                    }
            }
            break;
        case ExprKind::Seq:
            for (auto& tuple : enum_tuple(spec, nd.left, labels, nd.min_card)) {
                LabeledObject o;
                o.kind = ObjKind::Seq;
                o.children = std::move(tuple);
                out.push_back(std::move(o));
            }
            break;
        case ExprKind::Set:
            for (auto& blocks : enum_blocks(spec, nd.left, labels, nd.min_card)) {
                LabeledObject o;
                o.kind = ObjKind::Set;
                o.children = std::move(blocks);
                out.push_back(std::move(o));
            }
            break;
        case ExprKind::Cyc:
            // rotation-canonical: the minimum-label child leads, the rest is
            // an ordered tuple
            if (!labels.empty()) {
                for (const LabelSet& first : subsets_of(labels, true, false)) {
                    std::vector<LabeledObject> heads = enum_expr(spec, nd.left, first);
                    if (heads.empty()) continue;
                    LabelSet rest = set_minus(labels, first);
                    for (const auto& tail :
                         enum_tuple(spec, nd.left, rest, std::max(1, nd.min_card) - 1))
                        for (const auto& head : heads) {
                            LabeledObject o;
                            o.kind = ObjKind::Cyc;
                            o.children.reserve(tail.size() + 1);
                            o.children.push_back(head);
                            o.children.insert(o.children.end(), tail.begin(), tail.end());
                            out.push_back(std::move(o));
                        }
                }
            }
            break;
        case ExprKind::Ref:
            return enum_expr(spec, spec.system().class_expr(nd.ref), labels);
    }
    return out;
}

} // namespace detail

// Every object of size n in the class, in canonical storage order, each
// listed exactly once. The independent ground truth for the coefficient
// and uniformity tests; n is capped at max_enumeration_size.
inline std::vector<LabeledObject> enumerate_objects(const ValidatedSpec& spec,
                                                    const std::string& class_name, int n) {
    if (n < 0 || n > max_enumeration_size)
        throw TooLarge("enumeration supports sizes 0.." +
                       std::to_string(max_enumeration_size) + ", got " + std::to_string(n));
    detail::LabelSet labels(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) labels[static_cast<size_t>(i)] = i + 1;
    return detail::enum_expr(spec, spec.system().class_expr(class_name), labels);
}

// All accepted words of length n, lexicographic in alphabet order.
inline std::vector<std::string> enumerate_words(const Dfa& dfa, int n) {
    if (n < 0 || n > 24) throw TooLarge("word enumeration supports lengths 0..24");
    std::vector<std::string> out;
    std::string cur;
    auto dfs = [&](auto&& self, int state, int remaining) -> void {
        if (remaining == 0) {
            if (dfa.accepting(state)) out.push_back(cur);
            return;
        }
        for (size_t li = 0; li < dfa.alphabet().size(); ++li) {
            cur += dfa.alphabet()[li];
            self(self, dfa.next(state, li), remaining - 1);
            cur.pop_back();
        }
    };
    dfs(dfs, dfa.start(), n);
    return out;
}

} // namespace bz

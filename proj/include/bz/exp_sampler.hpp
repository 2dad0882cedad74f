#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "bz/distributions.hpp"
#include "bz/errors.hpp"
#include "bz/objects.hpp"
#include "bz/oracle.hpp"
#include "bz/ord_transform.hpp"
#include "bz/rng.hpp"
#include "bz/spec.hpp"

namespace bz {

// Size-biased sampler for a labeled class: a size-n object comes out with
// probability x^n / (n! A^(x)). Constructor choices follow the node EGF
// values at x: Bernoulli at unions, independent recursion at products,
// geometric / Poisson / log-law child counts (conditioned on the minimum
// cardinality) at Seq / Set / Cyc.
class ExpSampler {
  public:
    ExpSampler(ValidatedSpec spec, std::string cls)
        : spec_(std::move(spec)), cls_(std::move(cls)) {
        if (!spec_.system().has_class(cls_)) throw UnknownName(cls_);
    }

    const ValidatedSpec& spec() const { return spec_; }
    const std::string& class_name() const { return cls_; }

    // Resample-on-exceed size cap; disabled by default.
    void set_ceiling(std::optional<long> ceiling) { ceiling_ = ceiling; }
    std::optional<long> ceiling() const { return ceiling_; }

    double egf_value(double x) const {
        prepare(x);
        return values_[spec_.system().class_expr(cls_)];
    }

    LabeledObject draw(double x, RandomSource& rng) const {
        prepare(x);
        if (!(values_[spec_.system().class_expr(cls_)] > 0.0))
            throw DegenerateLaw("class " + cls_ + " has no mass at x = " + std::to_string(x));
        for (long attempt = 0; attempt < kMaxResamples; ++attempt) {
            long atoms = 0;
            LabeledObject obj;
            if (!draw_shape(spec_.system().class_expr(cls_), rng, atoms, obj)) continue;
            assign_labels(obj, rng);
            canonicalize(obj);
            return obj;
        }
        throw SizeCeilingExceeded("resample budget exhausted at size ceiling " +
                                  std::to_string(*ceiling_));
    }

  private:
    static constexpr long kMaxResamples = 1L << 20;

    void prepare(double x) const {
        if (x < 0) throw Error("sampler parameter must be nonnegative, got " + std::to_string(x));
        if (!(cached_x_ == x) || values_.empty()) {
            values_ = egf_node_values(spec_, x);
            cached_x_ = x;
        }
    }

    // Builds the shape into `out`; false means the size ceiling tripped and
    // the whole object must be redrawn.
    bool draw_shape(ExprId id, RandomSource& rng, long& atoms, LabeledObject& out) const {
        const ExprNode& n = spec_.system().node(id);
        switch (n.kind) {
            case ExprKind::Epsilon:
                out.kind = ObjKind::Eps;
                return true;
            case ExprKind::Atom:
                if (ceiling_ && ++atoms > *ceiling_) return false;
                out.kind = ObjKind::Atom;
                out.letter = n.letter;
                return true;
            case ExprKind::Union: {
                double a = values_[n.left];
                double b = values_[n.right];
                bool left = rng.unit() * (a + b) < a;
                out.kind = left ? ObjKind::UnionL : ObjKind::UnionR;
                out.children.emplace_back();
                return draw_shape(left ? n.left : n.right, rng, atoms, out.children.back());
            }
            case ExprKind::Product:
                out.kind = ObjKind::Pair;
                out.children.resize(2);
                return draw_shape(n.left, rng, atoms, out.children[0]) &&
                       draw_shape(n.right, rng, atoms, out.children[1]);
            case ExprKind::Seq:
            case ExprKind::Set:
            case ExprKind::Cyc: {
                double lambda = values_[n.left];
                long count = 0;
                if (n.kind == ExprKind::Seq) {
                    count = draw_geometric(lambda, rng, n.min_card);
                } else if (n.kind == ExprKind::Set) {
                    count = draw_poisson(lambda, rng, n.min_card);
                } else {
                    count = draw_loglaw(lambda, rng, n.min_card);
                }
                out.kind = n.kind == ExprKind::Seq   ? ObjKind::Seq
                           : n.kind == ExprKind::Set ? ObjKind::Set
                                                     : ObjKind::Cyc;
                out.children.resize(static_cast<size_t>(count));
                for (auto& c : out.children)
                    if (!draw_shape(n.left, rng, atoms, c)) return false;
                return true;
            }
            case ExprKind::Ref:
                return draw_shape(spec_.system().class_expr(n.ref), rng, atoms, out);
        }
        return false;
    }

    ValidatedSpec spec_;
    std::string cls_;
    std::optional<long> ceiling_;
    mutable double cached_x_ = -1;
    mutable std::vector<double> values_;
};

inline LabeledObject gamma_exp(const ExpSampler& sampler, double x, RandomSource& rng) {
    return sampler.draw(x, rng);
}

inline LabeledObject gamma_exp(const ValidatedSpec& spec, const std::string& class_name, double x,
                               RandomSource& rng) {
    return ExpSampler(spec, class_name).draw(x, rng);
}

// Coefficients with everything beyond the ceiling zeroed: the counting
// sequence of the class conditioned on size <= ceiling.
inline SeriesCoeffs truncate_at_ceiling(SeriesCoeffs coeffs, long ceiling) {
    for (int n = 0; n <= coeffs.order; ++n)
        if (n > ceiling) {
            coeffs.counts[static_cast<size_t>(n)] = 0;
            coeffs.egf[static_cast<size_t>(n)] = 0;
        }
    return coeffs;
}

// Transform inputs for a spec class. Without a ceiling the EGF callback is
// the fixed-point/closed-form evaluator; with one, the conditioned class
// has a polynomial EGF evaluated by Horner from the truncated coefficients,
// and the sampling side conditions by resampling, so the two stay in step.
inline OrdinaryModel spec_model(const ValidatedSpec& spec, const std::string& class_name, double x,
                                std::optional<long> ceiling = std::nullopt) {
    OrdinaryModel model;
    model.x = x;
    if (!ceiling) {
        model.coeffs_at = [spec, class_name](int order) {
            return egf_coeffs(spec, class_name, order);
        };
        model.egf = [sampler = ExpSampler(spec, class_name)](double t) {
            return sampler.egf_value(t);
        };
        return model;
    }
    const long c = *ceiling;
    model.coeffs_at = [spec, class_name, c](int order) {
        return truncate_at_ceiling(egf_coeffs(spec, class_name, order), c);
    };
    SeriesCoeffs head = egf_coeffs(spec, class_name, static_cast<int>(c));
    std::vector<double> poly(head.egf.size());
    for (size_t n = 0; n < poly.size(); ++n) poly[n] = to_double(head.egf[n]);
    model.egf = [poly](double t) {
        double acc = 0.0;
        for (size_t i = poly.size(); i-- > 0;) acc = acc * t + poly[i];
        return acc;
    };
    return model;
}

inline OrdinarySampler<ExpSampler> make_ordinary_spec_sampler(
    const ValidatedSpec& spec, const std::string& class_name, double x, UStrategyChoice choice,
    RandomSource rng, std::optional<long> ceiling = std::nullopt) {
    ExpSampler gen(spec, class_name);
    gen.set_ceiling(ceiling);
    return OrdinarySampler<ExpSampler>(std::move(gen), spec_model(spec, class_name, x, ceiling),
                                       choice, rng);
}

} // namespace bz

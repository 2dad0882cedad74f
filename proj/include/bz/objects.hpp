#pragma once

#include <algorithm>
#include <climits>
#include <string>
#include <vector>

#include <json.hpp>

#include "bz/rng.hpp"

namespace bz {

// A sampled labeled object: a shape tree over the constructors plus a
// labeling of its atoms. Set children are kept sorted by minimum label and
// Cyc children rotated so the minimum-label child comes first; the
// labeling carries all remaining distinction.
enum class ObjKind { Eps, Atom, UnionL, UnionR, Pair, Seq, Set, Cyc };

struct LabeledObject {
    ObjKind kind = ObjKind::Eps;
    char letter = 0; // Atom tag
    int label = 0;   // Atom label, 1..n once assigned
    std::vector<LabeledObject> children;

    int size() const {
        if (kind == ObjKind::Atom) return 1;
        int n = 0;
        for (const auto& c : children) n += c.size();
        return n;
    }
};

namespace detail {

inline void collect_atoms(LabeledObject& o, std::vector<LabeledObject*>& out) {
    if (o.kind == ObjKind::Atom) out.push_back(&o);
    for (auto& c : o.children) collect_atoms(c, out);
}

inline int min_label(const LabeledObject& o) {
    if (o.kind == ObjKind::Atom) return o.label;
    int m = INT_MAX;
    for (const auto& c : o.children) m = std::min(m, min_label(c));
    return m;
}

} // namespace detail

// Uniform random permutation of 1..size assigned to atoms in traversal order.
inline void assign_labels(LabeledObject& obj, RandomSource& rng) {
    std::vector<LabeledObject*> atoms;
    detail::collect_atoms(obj, atoms);
    const size_t n = atoms.size();
    std::vector<int> perm(n);
    for (size_t i = 0; i < n; ++i) perm[i] = static_cast<int>(i) + 1;
    for (size_t i = n; i > 1; --i) {
        size_t j = rng.below(i);
        std::swap(perm[i - 1], perm[j]);
    }
    for (size_t i = 0; i < n; ++i) atoms[i]->label = perm[i];
}

// Canonical storage order: Set children sorted by minimum label, Cyc
// children rotated so the minimum-label child is first.
inline void canonicalize(LabeledObject& obj) {
    for (auto& c : obj.children) canonicalize(c);
    if (obj.kind == ObjKind::Set) {
        std::sort(obj.children.begin(), obj.children.end(),
                  [](const LabeledObject& a, const LabeledObject& b) {
                      return detail::min_label(a) < detail::min_label(b);
                  });
    } else if (obj.kind == ObjKind::Cyc && obj.children.size() > 1) {
        size_t best = 0;
        int best_min = detail::min_label(obj.children[0]);
        for (size_t i = 1; i < obj.children.size(); ++i) {
            int m = detail::min_label(obj.children[i]);
            if (m < best_min) {
                best_min = m;
                best = i;
            }
        }
        std::rotate(obj.children.begin(), obj.children.begin() + static_cast<long>(best),
                    obj.children.end());
    }
}

// One-line term syntax; injective on canonicalized objects, so it doubles
// as a hash key in tests.
inline std::string to_term(const LabeledObject& o) {
    auto join = [](const std::vector<LabeledObject>& cs, const char* open, const char* close) {
        std::string s = open;
        for (size_t i = 0; i < cs.size(); ++i) {
            if (i) s += ", ";
            s += to_term(cs[i]);
        }
        s += close;
        return s;
    };
    switch (o.kind) {
        case ObjKind::Eps: return "1";
        case ObjKind::Atom: {
            std::string s = "Z";
            if (o.letter) {
                s += '<';
                s += o.letter;
                s += '>';
            }
            if (o.label) s += ":" + std::to_string(o.label);
            return s;
        }
        case ObjKind::UnionL: return "L(" + to_term(o.children[0]) + ")";
        case ObjKind::UnionR: return "R(" + to_term(o.children[0]) + ")";
        case ObjKind::Pair: return "(" + to_term(o.children[0]) + " * " + to_term(o.children[1]) + ")";
        case ObjKind::Seq: return "Seq" + join(o.children, "(", ")");
        case ObjKind::Set: return "Set" + join(o.children, "{", "}");
        case ObjKind::Cyc: return "Cyc" + join(o.children, "[", "]");
    }
    return "?";
}

inline nlohmann::json shape_json(const LabeledObject& o) {
    using nlohmann::json;
    switch (o.kind) {
        case ObjKind::Eps: return json{{"kind", "eps"}};
        case ObjKind::Atom: {
            json j{{"kind", "atom"}};
            if (o.letter) j["letter"] = std::string(1, o.letter);
            return j;
        }
        case ObjKind::UnionL:
        case ObjKind::UnionR: {
            json j{{"kind", o.kind == ObjKind::UnionL ? "left" : "right"}};
            j["child"] = shape_json(o.children[0]);
            return j;
        }
        case ObjKind::Pair: {
            json j{{"kind", "pair"}};
            j["children"] = {shape_json(o.children[0]), shape_json(o.children[1])};
            return j;
        }
        default: {
            json j{{"kind", o.kind == ObjKind::Seq ? "seq" : o.kind == ObjKind::Set ? "set" : "cyc"}};
            auto arr = nlohmann::json::array();
            for (const auto& c : o.children) arr.push_back(shape_json(c));
            j["children"] = arr;
            return j;
        }
    }
}

// {size, shape, labels}: labels listed in atom traversal order of the shape.
inline nlohmann::json to_json(const LabeledObject& o) {
    nlohmann::json j;
    j["size"] = o.size();
    j["shape"] = shape_json(o);
    std::vector<int> labels;
    std::vector<LabeledObject*> atoms;
    detail::collect_atoms(const_cast<LabeledObject&>(o), atoms);
    for (auto* a : atoms) labels.push_back(a->label);
    j["labels"] = labels;
    return j;
}

} // namespace bz

#pragma once

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bz/objects.hpp"
#include "bz/spec.hpp"

inline std::string data_path(const std::string& name) {
    return std::string(BZ_DATA_DIR) + "/" + name;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline bz::ValidatedSpec load_spec(const std::string& name) {
    return bz::validate(bz::parse_spec(read_text(data_path(name))));
}

inline void collect_labels(const bz::LabeledObject& o, std::vector<int>& out) {
    if (o.kind == bz::ObjKind::Atom) out.push_back(o.label);
    for (const auto& c : o.children) collect_labels(c, out);
}

// Labels form exactly {1..n} and the canonical storage order holds: Set
// children ascend by minimum label, Cyc puts the minimum-label child first.
inline bool well_formed(const bz::LabeledObject& o) {
    std::vector<int> labels;
    collect_labels(o, labels);
    std::sort(labels.begin(), labels.end());
    for (size_t i = 0; i < labels.size(); ++i)
        if (labels[i] != static_cast<int>(i) + 1) return false;

    struct Walk {
        bool ok = true;
        void visit(const bz::LabeledObject& node) {
            if (node.kind == bz::ObjKind::Set) {
                for (size_t i = 1; i < node.children.size(); ++i)
                    if (bz::detail::min_label(node.children[i - 1]) >=
                        bz::detail::min_label(node.children[i]))
                        ok = false;
            } else if (node.kind == bz::ObjKind::Cyc && node.children.size() > 1) {
                int head = bz::detail::min_label(node.children[0]);
                for (size_t i = 1; i < node.children.size(); ++i)
                    if (bz::detail::min_label(node.children[i]) < head) ok = false;
            }
            for (const auto& c : node.children) visit(c);
        }
    } walk;
    walk.visit(o);
    return walk.ok;
}

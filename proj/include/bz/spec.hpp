#pragma once

#include <cctype>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bz/errors.hpp"

namespace bz {

// ---------------------------------------------------------------------------
// Labeled combinatorial specifications.
//
// A system is a list of class definitions  NAME = expr  over the grammar
//
//   expr   := term ("+" term)*
//   term   := factor ("*" factor)*
//   factor := "1" | "Z" | "Z<letter>"
//           | ("SEQ"|"SET"|"CYC") [">=" INT] "(" expr ")"
//           | NAME | "(" expr ")"
//
// Expressions live in one arena per system; ExprId indexes into it.
// ---------------------------------------------------------------------------

using ExprId = int;
inline constexpr ExprId invalid_expr = -1;

enum class ExprKind {
    Epsilon,  // the neutral object of size 0
    Atom,     // size-1 atom, optionally letter-tagged
    Union,    // disjoint union, children left/right
    Product,  // labeled product, children left/right
    Seq,      // sequences of >= min_card inner objects
    Set,      // sets of >= min_card inner objects
    Cyc,      // cycles of >= max(1, min_card) inner objects
    Ref,      // reference to a named class
};

struct ExprNode {
    ExprKind kind = ExprKind::Epsilon;
    ExprId left = invalid_expr;   // Union/Product left; Seq/Set/Cyc inner
    ExprId right = invalid_expr;  // Union/Product right
    int min_card = 0;
    char letter = 0;              // Atom tag, 0 when untagged
    std::string ref;              // Ref target name
    int line = 0, col = 0;        // source position, retained for diagnostics
};

class SpecSystem {
  public:
    ExprId add(ExprNode n) {
        nodes_.push_back(std::move(n));
        return static_cast<ExprId>(nodes_.size()) - 1;
    }

    void define(const std::string& name, ExprId body) {
        if (index_.count(name))
            throw SyntaxError("class defined twice: " + name);
        index_[name] = static_cast<int>(classes_.size());
        classes_.emplace_back(name, body);
        if (classes_.size() == 1) root_ = name;
    }

    void set_root(const std::string& name) { root_ = name; }

    const ExprNode& node(ExprId id) const { return nodes_[static_cast<size_t>(id)]; }
    int node_count() const { return static_cast<int>(nodes_.size()); }

    const std::vector<std::pair<std::string, ExprId>>& classes() const { return classes_; }
    const std::string& root() const { return root_; }

    bool has_class(const std::string& name) const { return index_.count(name) != 0; }

    ExprId class_expr(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw UnknownName(name);
        return classes_[static_cast<size_t>(it->second)].second;
    }

  private:
    std::vector<ExprNode> nodes_;
    std::vector<std::pair<std::string, ExprId>> classes_; // definition order
    std::map<std::string, int> index_;
    std::string root_;
};

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace detail {

struct Lexer {
    enum class Tok { Ident, Int, Plus, Star, Eq, LParen, RParen, Ge, Lt, Gt, End };

    explicit Lexer(const std::string& text) : src_(text) { advance(); }

    Tok tok = Tok::End;
    std::string ident;
    long value = 0;
    int line = 1, col = 1;       // position of the current token

    void advance() {
        skip_space();
        line = cur_line_;
        col = cur_col_;
        if (pos_ >= src_.size()) {
            tok = Tok::End;
            return;
        }
        char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                bump();
            ident = src_.substr(start, pos_ - start);
            tok = Tok::Ident;
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            value = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                value = value * 10 + (src_[pos_] - '0');
                bump();
            }
            tok = Tok::Int;
            return;
        }
        bump();
        switch (c) {
            case '+': tok = Tok::Plus; return;
            case '*': tok = Tok::Star; return;
            case '=': tok = Tok::Eq; return;
            case '(': tok = Tok::LParen; return;
            case ')': tok = Tok::RParen; return;
            case '<': tok = Tok::Lt; return;
            case '>':
                if (pos_ < src_.size() && src_[pos_] == '=') {
                    bump();
                    tok = Tok::Ge;
                } else {
                    tok = Tok::Gt;
                }
                return;
            default:
                throw SyntaxError(std::string("unexpected character '") + c + "'", line, col);
        }
    }

    // true when the upcoming tokens are IDENT "=", i.e. a new definition
    bool at_defn_start() const {
        if (tok != Tok::Ident) return false;
        size_t p = pos_;
        // skip whitespace/comments without consuming
        while (p < src_.size()) {
            char c = src_[p];
            if (c == '#') {
                while (p < src_.size() && src_[p] != '\n') ++p;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++p;
            } else {
                break;
            }
        }
        return p < src_.size() && src_[p] == '=';
    }

  private:
    void bump() {
        if (src_[pos_] == '\n') {
            ++cur_line_;
            cur_col_ = 1;
        } else {
            ++cur_col_;
        }
        ++pos_;
    }

    void skip_space() {
        for (;;) {
            while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
                bump();
            if (pos_ < src_.size() && src_[pos_] == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') bump();
                continue;
            }
            return;
        }
    }

    const std::string& src_;
    size_t pos_ = 0;
    int cur_line_ = 1, cur_col_ = 1;
};

class SpecParser {
  public:
    explicit SpecParser(const std::string& text) : lex_(text) {}

    SpecSystem run() {
        SpecSystem sys;
        if (lex_.tok == Lexer::Tok::End)
            throw SyntaxError("empty specification", lex_.line, lex_.col);
        while (lex_.tok != Lexer::Tok::End) {
            if (lex_.tok != Lexer::Tok::Ident)
                throw SyntaxError("expected class name", lex_.line, lex_.col);
            std::string name = lex_.ident;
            if (is_keyword(name))
                throw SyntaxError("reserved word used as class name: " + name, lex_.line, lex_.col);
            lex_.advance();
            expect(Lexer::Tok::Eq, "'='");
            ExprId body = parse_expr(sys);
            sys.define(name, body);
        }
        // all names must resolve inside the system
        for (int i = 0; i < sys.node_count(); ++i) {
            const ExprNode& n = sys.node(i);
            if (n.kind == ExprKind::Ref && !sys.has_class(n.ref))
                throw UnknownName(n.ref);
        }
        return sys;
    }

  private:
    static bool is_keyword(const std::string& s) {
        return s == "SEQ" || s == "SET" || s == "CYC" || s == "Z";
    }

    void expect(Lexer::Tok t, const char* what) {
        if (lex_.tok != t)
            throw SyntaxError(std::string("expected ") + what, lex_.line, lex_.col);
        lex_.advance();
    }

    ExprId parse_expr(SpecSystem& sys) {
        ExprId acc = parse_term(sys);
        while (lex_.tok == Lexer::Tok::Plus) {
            int line = lex_.line, col = lex_.col;
            lex_.advance();
            ExprId rhs = parse_term(sys);
            ExprNode n;
            n.kind = ExprKind::Union;
            n.left = acc;
            n.right = rhs;
            n.line = line;
            n.col = col;
            acc = sys.add(n);
        }
        return acc;
    }

    ExprId parse_term(SpecSystem& sys) {
        ExprId acc = parse_factor(sys);
        while (lex_.tok == Lexer::Tok::Star) {
            int line = lex_.line, col = lex_.col;
            lex_.advance();
            ExprId rhs = parse_factor(sys);
            ExprNode n;
            n.kind = ExprKind::Product;
            n.left = acc;
            n.right = rhs;
            n.line = line;
            n.col = col;
            acc = sys.add(n);
        }
        return acc;
    }

    ExprId parse_factor(SpecSystem& sys) {
        int line = lex_.line, col = lex_.col;
        if (lex_.tok == Lexer::Tok::Int) {
            if (lex_.value != 1)
                throw SyntaxError("only '1' denotes the neutral class", line, col);
            lex_.advance();
            ExprNode n;
            n.kind = ExprKind::Epsilon;
            n.line = line;
            n.col = col;
            return sys.add(n);
        }
        if (lex_.tok == Lexer::Tok::LParen) {
            lex_.advance();
            ExprId inner = parse_expr(sys);
            expect(Lexer::Tok::RParen, "')'");
            return inner;
        }
        if (lex_.tok != Lexer::Tok::Ident)
            throw SyntaxError("expected a factor", line, col);

        std::string name = lex_.ident;
        lex_.advance();

        if (name == "Z") {
            ExprNode n;
            n.kind = ExprKind::Atom;
            n.line = line;
            n.col = col;
            if (lex_.tok == Lexer::Tok::Lt) {
                lex_.advance();
                if (lex_.tok != Lexer::Tok::Ident || lex_.ident.size() != 1 ||
                    !std::isalpha(static_cast<unsigned char>(lex_.ident[0])))
                    throw SyntaxError("expected a single letter tag after 'Z<'", lex_.line, lex_.col);
                n.letter = lex_.ident[0];
                lex_.advance();
                expect(Lexer::Tok::Gt, "'>'");
            }
            return sys.add(n);
        }

        if (name == "SEQ" || name == "SET" || name == "CYC") {
            ExprNode n;
            n.kind = (name == "SEQ") ? ExprKind::Seq
                   : (name == "SET") ? ExprKind::Set
                                     : ExprKind::Cyc;
            n.min_card = (n.kind == ExprKind::Cyc) ? 1 : 0;
            n.line = line;
            n.col = col;
            if (lex_.tok == Lexer::Tok::Ge) {
                lex_.advance();
                if (lex_.tok != Lexer::Tok::Int)
                    throw SyntaxError("expected an integer after '>='", lex_.line, lex_.col);
                if (lex_.value < 0 || (n.kind == ExprKind::Cyc && lex_.value < 1))
                    throw SyntaxError("cardinality constraint out of range", lex_.line, lex_.col);
                n.min_card = static_cast<int>(std::max(lex_.value, long(n.kind == ExprKind::Cyc ? 1 : 0)));
                lex_.advance();
            }
            expect(Lexer::Tok::LParen, "'('");
            n.left = parse_expr(sys);
            expect(Lexer::Tok::RParen, "')'");
            return sys.add(n);
        }

        ExprNode n;
        n.kind = ExprKind::Ref;
        n.ref = name;
        n.line = line;
        n.col = col;
        return sys.add(n);
    }

    Lexer lex_;
};

} // namespace detail

inline SpecSystem parse_spec(const std::string& text) {
    return detail::SpecParser(text).run();
}

// ---------------------------------------------------------------------------
// Pretty printer. parse(pretty_print(s)) reproduces s up to arena layout.
// ---------------------------------------------------------------------------

namespace detail {

inline void print_expr(const SpecSystem& sys, ExprId id, int parent_prec, std::string& out) {
    const ExprNode& n = sys.node(id);
    switch (n.kind) {
        case ExprKind::Epsilon:
            out += "1";
            return;
        case ExprKind::Atom:
            out += "Z";
            if (n.letter) {
                out += '<';
                out += n.letter;
                out += '>';
            }
            return;
        case ExprKind::Ref:
            out += n.ref;
            return;
        case ExprKind::Union: {
            bool paren = parent_prec > 0;
            if (paren) out += '(';
            print_expr(sys, n.left, 0, out);
            out += " + ";
            print_expr(sys, n.right, 1, out); // right-assoc rebuild is fine: union is flat
            if (paren) out += ')';
            return;
        }
        case ExprKind::Product: {
            bool paren = parent_prec > 1;
            if (paren) out += '(';
            print_expr(sys, n.left, 1, out);
            out += " * ";
            print_expr(sys, n.right, 2, out);
            if (paren) out += ')';
            return;
        }
        case ExprKind::Seq:
        case ExprKind::Set:
        case ExprKind::Cyc: {
            out += (n.kind == ExprKind::Seq) ? "SEQ" : (n.kind == ExprKind::Set) ? "SET" : "CYC";
            int deflt = (n.kind == ExprKind::Cyc) ? 1 : 0;
            if (n.min_card != deflt) {
                out += ">=";
                out += std::to_string(n.min_card);
            }
            out += '(';
            print_expr(sys, n.left, 0, out);
            out += ')';
            return;
        }
    }
}

} // namespace detail

inline std::string pretty_print(const SpecSystem& sys) {
    std::string out;
    for (const auto& [name, body] : sys.classes()) {
        out += name;
        out += " = ";
        detail::print_expr(sys, body, 0, out);
        out += '\n';
    }
    return out;
}

// Structural equality of two systems (class list in definition order plus
// expression shape). Arena ids are irrelevant.
inline bool expr_equal(const SpecSystem& a, ExprId ia, const SpecSystem& b, ExprId ib) {
    const ExprNode& na = a.node(ia);
    const ExprNode& nb = b.node(ib);
    if (na.kind != nb.kind || na.min_card != nb.min_card || na.letter != nb.letter ||
        na.ref != nb.ref)
        return false;
    switch (na.kind) {
        case ExprKind::Union:
        case ExprKind::Product:
            return expr_equal(a, na.left, b, nb.left) && expr_equal(a, na.right, b, nb.right);
        case ExprKind::Seq:
        case ExprKind::Set:
        case ExprKind::Cyc:
            return expr_equal(a, na.left, b, nb.left);
        default:
            return true;
    }
}

inline bool system_equal(const SpecSystem& a, const SpecSystem& b) {
    if (a.classes().size() != b.classes().size() || a.root() != b.root()) return false;
    for (size_t i = 0; i < a.classes().size(); ++i) {
        if (a.classes()[i].first != b.classes()[i].first) return false;
        if (!expr_equal(a, a.classes()[i].second, b, b.classes()[i].second)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Validation: well-foundedness.
//
// Three structural conditions together guarantee finitely many objects of
// every size and a terminating enumeration:
//   1. every class is productive (admits at least one object),
//   2. SEQ/SET/CYC arguments admit no size-0 object,
//   3. no class can re-derive itself through a size-preserving position
//      (union branches, product sides whose sibling admits size 0, and
//      single-child SEQ/SET/CYC wrappers).
// Flags are least fixed points of the obvious monotone recurrences.
// ---------------------------------------------------------------------------

class ValidatedSpec {
  public:
    const SpecSystem& system() const { return sys_; }
    bool admits_empty(ExprId id) const { return empty_[static_cast<size_t>(id)] != 0; }
    bool productive(ExprId id) const { return prod_[static_cast<size_t>(id)] != 0; }

    bool class_admits_empty(const std::string& name) const {
        return admits_empty(sys_.class_expr(name));
    }

  private:
    friend ValidatedSpec validate(SpecSystem sys);
    SpecSystem sys_;
    std::vector<char> empty_, prod_;
};

inline ValidatedSpec validate(SpecSystem sys) {
    const int n = sys.node_count();
    std::vector<char> empty(static_cast<size_t>(n), 0), prod(static_cast<size_t>(n), 0);

    auto fixpoint = [&](std::vector<char>& flag, auto&& rule) {
        bool changed = true;
        while (changed) {
            changed = false;
            for (int i = 0; i < n; ++i) {
                if (flag[static_cast<size_t>(i)]) continue;
                if (rule(sys.node(i))) {
                    flag[static_cast<size_t>(i)] = 1;
                    changed = true;
                }
            }
        }
    };

    fixpoint(empty, [&](const ExprNode& nd) -> bool {
        switch (nd.kind) {
            case ExprKind::Epsilon: return true;
            case ExprKind::Atom: return false;
            case ExprKind::Union:
                return empty[static_cast<size_t>(nd.left)] || empty[static_cast<size_t>(nd.right)];
            case ExprKind::Product:
                return empty[static_cast<size_t>(nd.left)] && empty[static_cast<size_t>(nd.right)];
            case ExprKind::Seq:
            case ExprKind::Set:
                return nd.min_card == 0 || empty[static_cast<size_t>(nd.left)];
            case ExprKind::Cyc:
                return empty[static_cast<size_t>(nd.left)];
            case ExprKind::Ref:
                return empty[static_cast<size_t>(sys.class_expr(nd.ref))];
        }
        return false;
    });

    fixpoint(prod, [&](const ExprNode& nd) -> bool {
        switch (nd.kind) {
            case ExprKind::Epsilon:
            case ExprKind::Atom: return true;
            case ExprKind::Union:
                return prod[static_cast<size_t>(nd.left)] || prod[static_cast<size_t>(nd.right)];
            case ExprKind::Product:
                return prod[static_cast<size_t>(nd.left)] && prod[static_cast<size_t>(nd.right)];
            case ExprKind::Seq:
            case ExprKind::Set:
                return nd.min_card == 0 || prod[static_cast<size_t>(nd.left)];
            case ExprKind::Cyc:
                return prod[static_cast<size_t>(nd.left)];
            case ExprKind::Ref:
                return prod[static_cast<size_t>(sys.class_expr(nd.ref))];
        }
        return false;
    });

    for (const auto& [name, body] : sys.classes()) {
        if (!prod[static_cast<size_t>(body)])
            throw IllFounded(name, "unproductive recursion (no finite object derivable)");
    }

    // condition 2, reported against the class whose definition contains the node
    for (const auto& [name, body] : sys.classes()) {
        std::vector<ExprId> stack{body};
        std::set<ExprId> seen;
        while (!stack.empty()) {
            ExprId id = stack.back();
            stack.pop_back();
            if (!seen.insert(id).second) continue;
            const ExprNode& nd = sys.node(id);
            switch (nd.kind) {
                case ExprKind::Seq:
                case ExprKind::Set:
                case ExprKind::Cyc:
                    if (empty[static_cast<size_t>(nd.left)])
                        throw IllFounded(name,
                            "SEQ/SET/CYC over an expression admitting a size-0 object");
                    stack.push_back(nd.left);
                    break;
                case ExprKind::Union:
                case ExprKind::Product:
                    stack.push_back(nd.left);
                    stack.push_back(nd.right);
                    break;
                default:
                    break;
            }
        }
    }

    // condition 3: size-preserving derivation cycles between classes
    std::map<std::string, std::set<std::string>> exposes;
    for (const auto& [name, body] : sys.classes()) {
        std::set<std::string>& out = exposes[name];
        std::vector<ExprId> stack{body};
        while (!stack.empty()) {
            ExprId id = stack.back();
            stack.pop_back();
            const ExprNode& nd = sys.node(id);
            switch (nd.kind) {
                case ExprKind::Union:
                    stack.push_back(nd.left);
                    stack.push_back(nd.right);
                    break;
                case ExprKind::Product:
                    if (empty[static_cast<size_t>(nd.right)]) stack.push_back(nd.left);
                    if (empty[static_cast<size_t>(nd.left)]) stack.push_back(nd.right);
                    break;
                case ExprKind::Seq:
                case ExprKind::Set:
                case ExprKind::Cyc:
                    // a single-child wrapper preserves the inner object's size;
                    // min >= 2 forces at least one extra size-1-or-more sibling
                    if (nd.min_card <= 1) stack.push_back(nd.left);
                    break;
                case ExprKind::Ref:
                    out.insert(nd.ref);
                    break;
                default:
                    break;
            }
        }
    }
    {
        // DFS cycle detection over the exposure graph
        std::map<std::string, int> color; // 0 unseen, 1 on stack, 2 done
        auto dfs = [&](auto&& self, const std::string& cls) -> void {
            color[cls] = 1;
            for (const std::string& next : exposes[cls]) {
                int c = color.count(next) ? color[next] : 0;
                if (c == 1)
                    throw IllFounded(next,
                        "size-preserving recursion (infinitely many objects of one size)");
                if (c == 0) self(self, next);
            }
            color[cls] = 2;
        };
        for (const auto& [name, body] : sys.classes()) {
            (void)body;
            if (!color.count(name)) dfs(dfs, name);
        }
    }

    ValidatedSpec v;
    v.sys_ = std::move(sys);
    v.empty_ = std::move(empty);
    v.prod_ = std::move(prod);
    return v;
}

} // namespace bz

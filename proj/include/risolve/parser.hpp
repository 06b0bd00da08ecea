#pragma once

#include "risolve/term.hpp"

#include <cctype>
#include <functional>
#include <sstream>

// Surface syntax -> term-core structures. Variables start uppercase,
// constants lowercase; pairs are [a,b]; extensional sets {a,b} / {a,b/R};
// RIS terms ris(Ctrl in Dom [, Filter [, Pattern]]) and the five-argument
// form ris(Ctrl in Dom, [Params], Filter, Pattern, FuncPreds).
//
// Parsing is two-phase: an untyped tree is built first, then variable sorts
// are inferred from their positions (set constraints are not added here; the
// solver does that) and the typed structures are produced.

namespace risolve {

struct parse_error : std::runtime_error {
    int line = 0, col = 0;
    parse_error(const std::string& m, int l, int c)
        : std::runtime_error(m + " (line " + std::to_string(l) + ", col " +
                             std::to_string(c) + ")"),
          line(l), col(c) {}
};

// RIS pattern is neither the control term nor [ctrl, t]
struct pattern_error : parse_error {
    using parse_error::parse_error;
};

struct parse_options {
    bool unsafe_patterns = false;
    int expansion_bound = 1024;  // int(m,n) with ground bounds expands up to this size
    std::set<std::string> funcpred_names = {"plus", "times", "absval", "pairfst", "pairsnd"};
};

namespace parsing {

// ---------------------------------------------------------------------------
// Lexer

enum class tok {
    ident, integer, lbrace, rbrace, lbrack, rbrack, lparen, rparen,
    comma, slash, amp, dot, eq, lt, gt, le, ge, plus, minus, star, end
};

struct token {
    tok k;
    std::string s;
    long long n = 0;
    int line = 1, col = 1;
};

inline std::vector<token> lex(const std::string& text, int line0 = 1) {
    std::vector<token> out;
    int line = line0, col = 1;
    size_t i = 0;
    auto push = [&](tok k, std::string s, long long n = 0) {
        out.push_back({k, std::move(s), n, line, col});
    };
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            ++line;
            col = 1;
            ++i;
            continue;
        }
        if (isspace(static_cast<unsigned char>(c))) {
            ++i;
            ++col;
            continue;
        }
        if (c == '%') {  // comment to end of line
            while (i < text.size() && text[i] != '\n')
                ++i;
            continue;
        }
        int startcol = col;
        auto adv = [&](size_t n) {
            i += n;
            col += static_cast<int>(n);
        };
        if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < text.size() &&
                   (isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
                ++j;
            out.push_back({tok::ident, text.substr(i, j - i), 0, line, startcol});
            col += static_cast<int>(j - i);
            i = j;
            continue;
        }
        if (isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < text.size() && isdigit(static_cast<unsigned char>(text[j])))
                ++j;
            long long v = std::stoll(text.substr(i, j - i));
            out.push_back({tok::integer, "", v, line, startcol});
            col += static_cast<int>(j - i);
            i = j;
            continue;
        }
        switch (c) {
        case '{': push(tok::lbrace, "{"); adv(1); break;
        case '}': push(tok::rbrace, "}"); adv(1); break;
        case '[': push(tok::lbrack, "["); adv(1); break;
        case ']': push(tok::rbrack, "]"); adv(1); break;
        case '(': push(tok::lparen, "("); adv(1); break;
        case ')': push(tok::rparen, ")"); adv(1); break;
        case ',': push(tok::comma, ","); adv(1); break;
        case '/': push(tok::slash, "/"); adv(1); break;
        case '&': push(tok::amp, "&"); adv(1); break;
        case '.': push(tok::dot, "."); adv(1); break;
        case '+': push(tok::plus, "+"); adv(1); break;
        case '-': push(tok::minus, "-"); adv(1); break;
        case '*': push(tok::star, "*"); adv(1); break;
        case '<': push(tok::lt, "<"); adv(1); break;
        case '=':
            if (i + 1 < text.size() && text[i + 1] == '<') {
                push(tok::le, "=<");
                adv(2);
            } else {
                push(tok::eq, "=");
                adv(1);
            }
            break;
        case '>':
            if (i + 1 < text.size() && text[i + 1] == '=') {
                push(tok::ge, ">=");
                adv(2);
            } else {
                push(tok::gt, ">");
                adv(1);
            }
            break;
        default:
            throw parse_error(std::string("unexpected character '") + c + "'", line, startcol);
        }
    }
    out.push_back({tok::end, "", 0, line, col});
    return out;
}

// ---------------------------------------------------------------------------
// Untyped trees

enum class pkind { var, cst, num, pairlit, arith, setlit, ris, interval };

struct pterm;
struct pformula;
using pt = std::shared_ptr<pterm>;
using pf = std::shared_ptr<pformula>;

struct pris {
    pt ctrl;
    std::vector<std::string> params;
    pt dom;
    pf filter;        // null = true
    pt pattern;       // null = ctrl
    pf funcpreds;     // null = true
};

struct pterm {
    pkind kind;
    std::string name;   // var | cst
    long long num = 0;
    arith_op op = arith_op::add;
    pt a, b;            // pairlit | arith | interval bounds
    std::vector<pt> elems;  // setlit
    pt tail;            // setlit tail (null = empty)
    std::shared_ptr<pris> ris;
    int line = 0, col = 0;
};

enum class rel { eq, neq, in, nin, is, lt, le, gt, ge };

struct pforeach {
    pt ctrl;
    std::vector<std::string> params;
    pt dom;
    pf body;
    pf funcpreds;  // null = true
};

struct patom {
    enum class kind { truth, rel, setop, funcpred, fe } k;
    bool truth = true;
    rel r = rel::eq;
    pt lhs, rhs;
    std::string op;            // setop / funcpred name
    std::vector<pt> args;
    std::shared_ptr<pforeach> fe;
    bool negated_fe = false;
    int line = 0, col = 0;
};

struct pformula {
    enum class kind { atom, conj, disj } k = kind::atom;
    patom at;
    std::vector<pf> sub;
};

inline const std::set<std::string>& keywords() {
    static const std::set<std::string> kw = {
        "or", "neq", "in", "nin", "is", "div", "mod", "true", "false",
        "un", "disj", "nun", "ndisj", "subset", "nsubset", "inters", "ninters",
        "diff", "ndiff", "foreach", "nforeach", "ris", "int"};
    return kw;
}

// ---------------------------------------------------------------------------
// Recursive-descent parser over the token stream

class parser {
  public:
    parser(std::vector<token> toks, const parse_options& opt)
        : toks_(std::move(toks)), opt_(opt) {}

    pf parse_formula_all() {
        pf f = parse_or();
        if (peek().k == tok::dot)
            next();
        expect(tok::end, "end of formula");
        return f;
    }

  private:
    std::vector<token> toks_;
    size_t pos_ = 0;
    const parse_options& opt_;

    const token& peek(size_t ahead = 0) const {
        size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    [[noreturn]] void fail(const std::string& m) const {
        throw parse_error(m, peek().line, peek().col);
    }
    void expect(tok k, const char* what) {
        if (peek().k != k)
            fail(std::string("expected ") + what);
        next();
    }
    bool accept_ident(const char* s) {
        if (peek().k == tok::ident && peek().s == s) {
            next();
            return true;
        }
        return false;
    }

    pf parse_or() {
        std::vector<pf> parts{parse_and()};
        while (accept_ident("or"))
            parts.push_back(parse_and());
        if (parts.size() == 1)
            return parts[0];
        auto f = std::make_shared<pformula>();
        f->k = pformula::kind::disj;
        f->sub = std::move(parts);
        return f;
    }

    pf parse_and() {
        std::vector<pf> parts{parse_atomf()};
        while (peek().k == tok::amp) {
            next();
            parts.push_back(parse_atomf());
        }
        if (parts.size() == 1)
            return parts[0];
        auto f = std::make_shared<pformula>();
        f->k = pformula::kind::conj;
        f->sub = std::move(parts);
        return f;
    }

    static pf atomf(patom a) {
        auto f = std::make_shared<pformula>();
        f->k = pformula::kind::atom;
        f->at = std::move(a);
        return f;
    }

    pf parse_atomf() {
        const token& t = peek();
        if (t.k == tok::ident) {
            if (t.s == "true" || t.s == "false") {
                patom a;
                a.k = patom::kind::truth;
                a.truth = t.s == "true";
                a.line = t.line;
                a.col = t.col;
                next();
                return atomf(std::move(a));
            }
            static const std::set<std::string> setops3 = {"un", "nun", "inters", "ninters",
                                                          "diff", "ndiff"};
            static const std::set<std::string> setops2 = {"disj", "ndisj", "subset",
                                                          "nsubset"};
            if (setops3.count(t.s) || setops2.count(t.s)) {
                patom a;
                a.k = patom::kind::setop;
                a.op = t.s;
                a.line = t.line;
                a.col = t.col;
                next();
                expect(tok::lparen, "'('");
                size_t n = setops3.count(a.op) ? 3 : 2;
                for (size_t i = 0; i < n; ++i) {
                    if (i)
                        expect(tok::comma, "','");
                    a.args.push_back(parse_term());
                }
                expect(tok::rparen, "')'");
                return atomf(std::move(a));
            }
            if (t.s == "foreach" || t.s == "nforeach") {
                patom a;
                a.k = patom::kind::fe;
                a.negated_fe = t.s == "nforeach";
                a.line = t.line;
                a.col = t.col;
                next();
                expect(tok::lparen, "'('");
                a.fe = std::make_shared<pforeach>();
                a.fe->ctrl = parse_term();
                if (!accept_ident("in"))
                    fail("expected 'in' after control term");
                a.fe->dom = parse_term();
                expect(tok::comma, "','");
                if (peek().k == tok::lbrack && !looks_like_pair()) {
                    a.fe->params = parse_param_list();
                    expect(tok::comma, "','");
                    a.fe->body = parse_or();
                    expect(tok::comma, "','");
                    a.fe->funcpreds = parse_or();
                } else {
                    a.fe->body = parse_or();
                }
                expect(tok::rparen, "')'");
                return atomf(std::move(a));
            }
            if (opt_.funcpred_names.count(t.s) && peek(1).k == tok::lparen) {
                patom a;
                a.k = patom::kind::funcpred;
                a.op = t.s;
                a.line = t.line;
                a.col = t.col;
                next();
                next();
                while (true) {
                    a.args.push_back(parse_term());
                    if (peek().k == tok::comma) {
                        next();
                        continue;
                    }
                    break;
                }
                expect(tok::rparen, "')'");
                return atomf(std::move(a));
            }
        }
        // relational atom, or a parenthesised sub-formula
        size_t save = pos_;
        try {
            return parse_rel_atom();
        } catch (const parse_error&) {
            if (peek().k != tok::lparen && toks_[save].k != tok::lparen)
                throw;
            pos_ = save;
        }
        expect(tok::lparen, "'('");
        pf f = parse_or();
        expect(tok::rparen, "')'");
        return f;
    }

    pf parse_rel_atom() {
        const token& t0 = peek();
        pt lhs = parse_term();
        patom a;
        a.k = patom::kind::rel;
        a.lhs = lhs;
        a.line = t0.line;
        a.col = t0.col;
        switch (peek().k) {
        case tok::eq: a.r = rel::eq; next(); break;
        case tok::lt: a.r = rel::lt; next(); break;
        case tok::le: a.r = rel::le; next(); break;
        case tok::gt: a.r = rel::gt; next(); break;
        case tok::ge: a.r = rel::ge; next(); break;
        case tok::ident:
            if (peek().s == "neq") { a.r = rel::neq; next(); break; }
            if (peek().s == "in") { a.r = rel::in; next(); break; }
            if (peek().s == "nin") { a.r = rel::nin; next(); break; }
            if (peek().s == "is") { a.r = rel::is; next(); break; }
            fail("expected a relational operator");
        default:
            fail("expected a relational operator");
        }
        a.rhs = parse_term();
        return atomf(std::move(a));
    }

    // '[' at the current position opens an ordered pair (not a param list)?
    bool looks_like_pair() const {
        // param lists hold only comma-separated uppercase identifiers (or
        // nothing); a '[' followed by anything else is a pair literal
        size_t i = pos_ + 1;
        if (toks_[i].k == tok::rbrack)
            return false;
        while (true) {
            if (toks_[i].k != tok::ident || !isupper(static_cast<unsigned char>(toks_[i].s[0])))
                return true;
            ++i;
            if (toks_[i].k == tok::rbrack)
                return false;
            if (toks_[i].k != tok::comma)
                return true;
            ++i;
        }
    }

    std::vector<std::string> parse_param_list() {
        expect(tok::lbrack, "'['");
        std::vector<std::string> out;
        if (peek().k == tok::rbrack) {
            next();
            return out;
        }
        while (true) {
            if (peek().k != tok::ident || !isupper(static_cast<unsigned char>(peek().s[0])))
                fail("expected a variable in parameter list");
            out.push_back(next().s);
            if (peek().k == tok::comma) {
                next();
                continue;
            }
            break;
        }
        expect(tok::rbrack, "']'");
        return out;
    }

    // ---- terms -------------------------------------------------------------

    pt parse_term() { return parse_additive(); }

    pt mk(pkind k) {
        auto p = std::make_shared<pterm>();
        p->kind = k;
        p->line = peek().line;
        p->col = peek().col;
        return p;
    }

    pt parse_additive() {
        pt a = parse_multiplicative();
        while (peek().k == tok::plus || peek().k == tok::minus) {
            arith_op op = peek().k == tok::plus ? arith_op::add : arith_op::sub;
            next();
            pt b = parse_multiplicative();
            auto t = mk(pkind::arith);
            t->op = op;
            t->a = a;
            t->b = b;
            a = t;
        }
        return a;
    }

    pt parse_multiplicative() {
        pt a = parse_unary();
        while (true) {
            arith_op op;
            if (peek().k == tok::star)
                op = arith_op::mul;
            else if (peek().k == tok::ident && peek().s == "div")
                op = arith_op::idiv;
            else if (peek().k == tok::ident && peek().s == "mod")
                op = arith_op::imod;
            else
                break;
            next();
            pt b = parse_unary();
            auto t = mk(pkind::arith);
            t->op = op;
            t->a = a;
            t->b = b;
            a = t;
        }
        return a;
    }

    pt parse_unary() {
        if (peek().k == tok::minus) {
            next();
            pt a = parse_unary();
            if (a->kind == pkind::num) {
                a->num = -a->num;
                return a;
            }
            auto z = mk(pkind::num);
            z->num = 0;
            auto t = mk(pkind::arith);
            t->op = arith_op::sub;
            t->a = z;
            t->b = a;
            return t;
        }
        return parse_primary();
    }

    pt parse_primary() {
        const token& t = peek();
        switch (t.k) {
        case tok::integer: {
            auto p = mk(pkind::num);
            p->num = t.n;
            next();
            return p;
        }
        case tok::lbrack: {  // ordered pair
            next();
            pt a = parse_term();
            expect(tok::comma, "','");
            pt b = parse_term();
            expect(tok::rbrack, "']'");
            auto p = mk(pkind::pairlit);
            p->a = a;
            p->b = b;
            return p;
        }
        case tok::lbrace: {
            next();
            auto p = mk(pkind::setlit);
            if (peek().k == tok::rbrace) {
                next();
                return p;
            }
            while (true) {
                p->elems.push_back(parse_term());
                if (peek().k == tok::comma) {
                    next();
                    continue;
                }
                break;
            }
            if (peek().k == tok::slash) {
                next();
                p->tail = parse_term();
            }
            expect(tok::rbrace, "'}'");
            return p;
        }
        case tok::lparen: {
            next();
            pt a = parse_term();
            expect(tok::rparen, "')'");
            return a;
        }
        case tok::ident: {
            if (t.s == "ris")
                return parse_ris();
            if (t.s == "int" && peek(1).k == tok::lparen) {
                next();
                next();
                auto p = mk(pkind::interval);
                p->a = parse_term();
                expect(tok::comma, "','");
                p->b = parse_term();
                expect(tok::rparen, "')'");
                return p;
            }
            if (keywords().count(t.s))
                fail("unexpected keyword '" + t.s + "' in term position");
            auto p = mk(isupper(static_cast<unsigned char>(t.s[0])) ? pkind::var : pkind::cst);
            p->name = t.s;
            next();
            if (peek().k == tok::lparen)
                fail("'" + t.s + "' is not a known function or predicate");
            return p;
        }
        default:
            fail("expected a term");
        }
        return nullptr;
    }

    pt parse_ris() {
        auto p = mk(pkind::ris);
        next();  // 'ris'
        expect(tok::lparen, "'('");
        p->ris = std::make_shared<pris>();
        p->ris->ctrl = parse_term();
        if (!accept_ident("in"))
            fail("expected 'in' after RIS control term");
        p->ris->dom = parse_term();
        if (peek().k == tok::comma) {
            next();
            if (peek().k == tok::lbrack && !looks_like_pair()) {
                // five-argument form
                p->ris->params = parse_param_list();
                expect(tok::comma, "','");
                p->ris->filter = parse_or();
                expect(tok::comma, "','");
                p->ris->pattern = parse_term();
                expect(tok::comma, "','");
                p->ris->funcpreds = parse_or();
            } else {
                p->ris->filter = parse_or();
                if (peek().k == tok::comma) {
                    next();
                    p->ris->pattern = parse_term();
                }
            }
        }
        expect(tok::rparen, "')'");
        return p;
    }
};

// ---------------------------------------------------------------------------
// Sort inference: each free variable name gets exactly one sort, derived
// from the positions it occurs in. Ambiguous names (only ever compared with
// other ambiguous names) default to Set at formula level and X in filters.

enum class vsort { unknown, set, x };

class sort_table {
  public:
    void force(const std::string& n, vsort s, int line, int col) {
        std::string r = find(n);
        vsort& cur = sort_[r];
        if (cur == vsort::unknown)
            cur = s;
        else if (cur != s)
            throw parse_error("variable " + n + " used with conflicting sorts", line, col);
    }

    void link(const std::string& a, const std::string& b, int line, int col) {
        std::string ra = find(a), rb = find(b);
        if (ra == rb)
            return;
        vsort sa = sort_[ra], sb = sort_[rb];
        if (sa != vsort::unknown && sb != vsort::unknown && sa != sb)
            throw parse_error("variables " + a + " and " + b + " used with conflicting sorts",
                              line, col);
        parent_[rb] = ra;
        if (sa == vsort::unknown)
            sort_[ra] = sb;
    }

    void hint_set(const std::string& n) { set_hint_.insert(find(n)); }

    vsort resolved(const std::string& n) {
        std::string r = find(n);
        vsort s = sort_[r];
        if (s != vsort::unknown)
            return s;
        return set_hint_.count(r) ? vsort::set : vsort::x;
    }

  private:
    std::map<std::string, std::string> parent_;
    std::map<std::string, vsort> sort_;
    std::set<std::string> set_hint_;

    std::string find(const std::string& n) {
        auto it = parent_.find(n);
        if (it == parent_.end()) {
            parent_[n] = n;
            sort_.emplace(n, vsort::unknown);
            return n;
        }
        if (it->second == n)
            return n;
        std::string r = find(it->second);
        parent_[n] = r;
        return r;
    }
};

class typer {
  public:
    typer(const parse_options& opt) : opt_(opt) {}

    formula run(const pf& f) {
        infer_f(f, {}, false);
        return build_f(f, {});
    }

  private:
    const parse_options& opt_;
    sort_table tab_;

    // structural sort of a term, if forced by its own shape
    static vsort shape_sort(const pt& t) {
        switch (t->kind) {
        case pkind::num:
        case pkind::pairlit:
        case pkind::arith:
            return vsort::x;
        case pkind::cst:
            return vsort::x;
        case pkind::setlit:
        case pkind::ris:
        case pkind::interval:
            return vsort::set;
        case pkind::var:
            return vsort::unknown;
        }
        return vsort::unknown;
    }

    void infer_t(const pt& t, vsort want, const std::set<std::string>& bound) {
        switch (t->kind) {
        case pkind::var:
            if (bound.count(t->name)) {
                if (want == vsort::set)
                    throw parse_error("bound variable " + t->name + " used as a set",
                                      t->line, t->col);
                return;
            }
            if (want != vsort::unknown)
                tab_.force(t->name, want, t->line, t->col);
            else
                tab_.force(t->name, vsort::x, t->line, t->col);  // callers pass set/x
            return;
        case pkind::cst:
        case pkind::num:
            if (want == vsort::set)
                throw parse_error("element term used where a set is required", t->line, t->col);
            return;
        case pkind::pairlit:
        case pkind::arith:
            if (want == vsort::set)
                throw parse_error("element term used where a set is required", t->line, t->col);
            infer_t(t->a, vsort::x, bound);
            infer_t(t->b, vsort::x, bound);
            return;
        case pkind::setlit:
            if (want == vsort::x)
                throw parse_error("set term used where an element is required", t->line, t->col);
            for (auto& e : t->elems)
                infer_t(e, vsort::x, bound);
            if (t->tail)
                infer_t(t->tail, vsort::set, bound);
            return;
        case pkind::interval:
            if (want == vsort::x)
                throw parse_error("set term used where an element is required", t->line, t->col);
            infer_t(t->a, vsort::x, bound);
            infer_t(t->b, vsort::x, bound);
            return;
        case pkind::ris: {
            if (want == vsort::x)
                throw parse_error("set term used where an element is required", t->line, t->col);
            const pris& r = *t->ris;
            infer_t(r.dom, vsort::set, bound);
            std::set<std::string> b2 = bound;
            collect_ctrl_names(r.ctrl, b2);
            for (auto& p : r.params)
                b2.insert(p);
            if (r.filter)
                infer_f(r.filter, b2, true);
            if (r.pattern)
                infer_t(r.pattern, vsort::x, b2);
            if (r.funcpreds)
                infer_f(r.funcpreds, b2, true);
            return;
        }
        }
    }

    static void collect_ctrl_names(const pt& c, std::set<std::string>& out) {
        if (c->kind == pkind::var)
            out.insert(c->name);
        else if (c->kind == pkind::pairlit) {
            collect_ctrl_names(c->a, out);
            collect_ctrl_names(c->b, out);
        } else
            throw parse_error("control term must be a variable or a pair of variables",
                              c->line, c->col);
    }

    void infer_eqish(const patom& a, const std::set<std::string>& bound, bool in_filter) {
        vsort sl = shape_sort(a.lhs), sr = shape_sort(a.rhs);
        bool bl = a.lhs->kind == pkind::var && bound.count(a.lhs->name);
        bool br = a.rhs->kind == pkind::var && bound.count(a.rhs->name);
        if (bl)
            sl = vsort::x;
        if (br)
            sr = vsort::x;
        vsort s = sl != vsort::unknown ? sl : sr;
        if (sl != vsort::unknown && sr != vsort::unknown && sl != sr)
            throw parse_error("equality between a set and an element", a.line, a.col);
        if (s != vsort::unknown) {
            infer_t(a.lhs, s, bound);
            infer_t(a.rhs, s, bound);
            return;
        }
        // two sortless variables: link; default depends on position
        tab_.link(a.lhs->name, a.rhs->name, a.line, a.col);
        if (!in_filter) {
            tab_.hint_set(a.lhs->name);
            tab_.hint_set(a.rhs->name);
        }
    }

    void infer_f(const pf& f, const std::set<std::string>& bound, bool in_filter) {
        if (f->k != pformula::kind::atom) {
            for (auto& g : f->sub)
                infer_f(g, bound, in_filter);
            return;
        }
        const patom& a = f->at;
        switch (a.k) {
        case patom::kind::truth:
            return;
        case patom::kind::rel:
            switch (a.r) {
            case rel::eq:
            case rel::neq:
                infer_eqish(a, bound, in_filter);
                return;
            case rel::in:
            case rel::nin:
                infer_t(a.lhs, vsort::x, bound);
                infer_t(a.rhs, vsort::set, bound);
                return;
            default:  // is, <, =<, >, >=
                infer_t(a.lhs, vsort::x, bound);
                infer_t(a.rhs, vsort::x, bound);
                return;
            }
        case patom::kind::setop:
            for (auto& t : a.args)
                infer_t(t, vsort::set, bound);
            return;
        case patom::kind::funcpred:
            for (auto& t : a.args)
                infer_t(t, vsort::x, bound);
            return;
        case patom::kind::fe: {
            infer_t(a.fe->dom, vsort::set, bound);
            std::set<std::string> b2 = bound;
            collect_ctrl_names(a.fe->ctrl, b2);
            for (auto& p : a.fe->params)
                b2.insert(p);
            infer_f(a.fe->body, b2, true);
            if (a.fe->funcpreds)
                infer_f(a.fe->funcpreds, b2, true);
            return;
        }
        }
    }

    // ---- typed construction ------------------------------------------------

    xref build_x(const pt& t, const std::set<std::string>& bound) {
        switch (t->kind) {
        case pkind::var:
            if (!bound.count(t->name) && tab_.resolved(t->name) == vsort::set)
                throw parse_error("set variable " + t->name + " used as an element",
                                  t->line, t->col);
            return mk_xvar(t->name);
        case pkind::cst:
            return mk_cst(t->name);
        case pkind::num:
            return mk_num(t->num);
        case pkind::pairlit:
            return mk_pair(build_x(t->a, bound), build_x(t->b, bound));
        case pkind::arith:
            return mk_arith(t->op, build_x(t->a, bound), build_x(t->b, bound));
        default:
            throw parse_error("set term used where an element is required", t->line, t->col);
        }
    }

    sref build_s(const pt& t, const std::set<std::string>& bound) {
        switch (t->kind) {
        case pkind::var:
            if (bound.count(t->name) || tab_.resolved(t->name) != vsort::set)
                throw parse_error("element variable " + t->name + " used as a set",
                                  t->line, t->col);
            return mk_svar(t->name);
        case pkind::setlit: {
            std::vector<xref> es;
            for (auto& e : t->elems)
                es.push_back(build_x(e, bound));
            sref tail = t->tail ? build_s(t->tail, bound) : mk_empty();
            return mk_set(es, tail);
        }
        case pkind::interval: {
            xref lo = build_x(t->a, bound), hi = build_x(t->b, bound);
            if (lo->kind == xkind::num && hi->kind == xkind::num) {
                long long m = lo->value, n = hi->value;
                if (n - m >= opt_.expansion_bound)
                    throw parse_error("interval int(" + std::to_string(m) + "," +
                                          std::to_string(n) + ") exceeds the expansion bound",
                                      t->line, t->col);
                std::vector<xref> es;
                for (long long v = m; v <= n; ++v)
                    es.push_back(mk_num(v));
                return mk_set(es, mk_empty());
            }
            return mk_interval(lo, hi);
        }
        case pkind::ris: {
            const pris& r = *t->ris;
            std::set<std::string> b2 = bound;
            std::set<std::string> ctrl_names;
            collect_ctrl_names(r.ctrl, ctrl_names);
            xref ctrl = build_x(r.ctrl, ctrl_names);
            check_ctrl_distinct(ctrl, t);
            b2.insert(ctrl_names.begin(), ctrl_names.end());
            for (auto& p : r.params) {
                if (b2.count(p))
                    throw parse_error("duplicate RIS parameter " + p, t->line, t->col);
                b2.insert(p);
            }
            sref dom = build_s(r.dom, bound);
            xformula filter = r.filter ? build_xf(r.filter, b2) : xf_true();
            xref pattern = r.pattern ? build_x(r.pattern, b2) : ctrl;
            xformula fps = r.funcpreds ? build_xf(r.funcpreds, b2) : xf_true();
            if (!opt_.unsafe_patterns && !pattern_ok(ctrl, pattern))
                throw pattern_error("RIS pattern must be the control term or [ctrl, t]",
                                    t->line, t->col);
            std::vector<xref> params;
            for (auto& p : r.params)
                params.push_back(mk_xvar(p));
            if (!xf_is_true(fps)) {
                check_funcpreds(fps, params, t);
            }
            return mk_ris(ctrl, dom, filter, pattern, params, fps);
        }
        default:
            throw parse_error("element term used where a set is required", t->line, t->col);
        }
    }

    static bool pattern_ok(const xref& ctrl, const xref& pattern) {
        if (xequal(pattern, ctrl))
            return true;
        return pattern->kind == xkind::pair && xequal(pattern->a, ctrl);
    }

    void check_ctrl_distinct(const xref& ctrl, const pt& t) {
        std::set<std::string> seen;
        std::function<void(const xref&)> walk = [&](const xref& c) {
            if (c->kind == xkind::var) {
                if (!seen.insert(c->name).second)
                    throw parse_error("control term variables must be pairwise distinct",
                                      t->line, t->col);
            } else if (c->kind == xkind::pair) {
                walk(c->a);
                walk(c->b);
            } else {
                throw parse_error("control term must be a variable or a pair of variables",
                                  t->line, t->col);
            }
        };
        walk(ctrl);
    }

    void check_funcpreds(const xformula& fps, const std::vector<xref>& params, const pt& t) {
        // the funcpred slot holds a conjunction of funcpred atoms (or true)
        std::function<void(const xformula&)> walk = [&](const xformula& f) {
            if (f.kind == xf_kind::atom) {
                if (f.at.kind == xatom_kind::truth && f.at.truth)
                    return;
                if (f.at.kind != xatom_kind::funcpred)
                    throw parse_error(
                        "only functional-predicate atoms may appear in the last RIS argument",
                        t->line, t->col);
                return;
            }
            if (f.kind == xf_kind::disj)
                throw parse_error("functional predicates cannot be disjoined", t->line, t->col);
            for (auto& g : f.sub)
                walk(g);
        };
        walk(fps);
        (void)params;
    }

    xformula build_xf(const pf& f, const std::set<std::string>& bound) {
        if (f->k == pformula::kind::conj) {
            std::vector<xformula> xs;
            for (auto& g : f->sub)
                xs.push_back(build_xf(g, bound));
            return xf_conj(std::move(xs));
        }
        if (f->k == pformula::kind::disj) {
            std::vector<xformula> xs;
            for (auto& g : f->sub)
                xs.push_back(build_xf(g, bound));
            return xf_disj(std::move(xs));
        }
        const patom& a = f->at;
        switch (a.k) {
        case patom::kind::truth:
            return xf_atom(mk_truth(a.truth));
        case patom::kind::funcpred: {
            std::vector<xref> args;
            for (auto& t : a.args)
                args.push_back(build_x(t, bound));
            return xf_atom(mk_funcpred(a.op, std::move(args)));
        }
        case patom::kind::rel: {
            switch (a.r) {
            case rel::in:
            case rel::nin:
                return xf_atom(mk_member(a.r == rel::in, build_x(a.lhs, bound),
                                         build_s(a.rhs, bound)));
            case rel::is:
                return xf_atom(mk_cmp(cmp_op::eq, build_x(a.lhs, bound),
                                      build_x(a.rhs, bound), true));
            case rel::eq:
            case rel::neq: {
                if (is_set_side(a.lhs, bound) || is_set_side(a.rhs, bound))
                    throw parse_error("set constraints are not allowed inside a RIS filter",
                                      a.line, a.col);
                cmp_op op = a.r == rel::eq ? cmp_op::eq : cmp_op::neq;
                return xf_atom(mk_cmp(op, build_x(a.lhs, bound), build_x(a.rhs, bound)));
            }
            case rel::lt:
                return xf_atom(mk_cmp(cmp_op::lt, build_x(a.lhs, bound), build_x(a.rhs, bound)));
            case rel::le:
                return xf_atom(mk_cmp(cmp_op::le, build_x(a.lhs, bound), build_x(a.rhs, bound)));
            case rel::gt:
                return xf_atom(mk_cmp(cmp_op::gt, build_x(a.lhs, bound), build_x(a.rhs, bound)));
            case rel::ge:
                return xf_atom(mk_cmp(cmp_op::ge, build_x(a.lhs, bound), build_x(a.rhs, bound)));
            }
            break;
        }
        case patom::kind::setop:
        case patom::kind::fe:
            throw parse_error("set constraints are not allowed inside a RIS filter", a.line,
                              a.col);
        }
        throw parse_error("malformed filter", a.line, a.col);
    }

    bool is_set_side(const pt& t, const std::set<std::string>& bound) {
        vsort s = shape_sort(t);
        if (s != vsort::unknown)
            return s == vsort::set;
        if (bound.count(t->name))
            return false;
        return tab_.resolved(t->name) == vsort::set;
    }

    formula build_f(const pf& f, const std::set<std::string>& bound) {
        if (f->k == pformula::kind::conj) {
            std::vector<formula> xs;
            for (auto& g : f->sub)
                xs.push_back(build_f(g, bound));
            return f_conj(std::move(xs));
        }
        if (f->k == pformula::kind::disj) {
            std::vector<formula> xs;
            for (auto& g : f->sub)
                xs.push_back(build_f(g, bound));
            return f_disj(std::move(xs));
        }
        const patom& a = f->at;
        switch (a.k) {
        case patom::kind::truth:
            return f_atom(a.truth ? mk_true_c() : mk_false_c());
        case patom::kind::funcpred: {
            std::vector<xref> args;
            for (auto& t : a.args)
                args.push_back(build_x(t, bound));
            return f_atom(mk_xc(mk_funcpred(a.op, std::move(args))));
        }
        case patom::kind::setop: {
            static const std::map<std::string, ckind> m = {
                {"un", ckind::un},         {"nun", ckind::nun},
                {"disj", ckind::disj},     {"ndisj", ckind::ndisj},
                {"subset", ckind::subset}, {"nsubset", ckind::nsubset},
                {"inters", ckind::inters}, {"ninters", ckind::ninters},
                {"diff", ckind::diff},     {"ndiff", ckind::ndiff}};
            ckind k = m.at(a.op);
            if (a.args.size() == 2)
                return f_atom(mk_c2(k, build_s(a.args[0], bound), build_s(a.args[1], bound)));
            return f_atom(mk_c3(k, build_s(a.args[0], bound), build_s(a.args[1], bound),
                                build_s(a.args[2], bound)));
        }
        case patom::kind::fe: {
            const pforeach& fe = *a.fe;
            std::set<std::string> ctrl_names;
            collect_ctrl_names(fe.ctrl, ctrl_names);
            xref ctrl = build_x(fe.ctrl, ctrl_names);
            std::set<std::string> b2 = bound;
            b2.insert(ctrl_names.begin(), ctrl_names.end());
            std::vector<xref> params;
            for (auto& p : fe.params) {
                b2.insert(p);
                params.push_back(mk_xvar(p));
            }
            sref dom = build_s(fe.dom, bound);
            xformula body = build_xf(fe.body, b2);
            xformula fps = fe.funcpreds ? build_xf(fe.funcpreds, b2) : xf_true();
            return f_atom(mk_foreach(a.negated_fe ? ckind::nforeach_c : ckind::foreach_c,
                                     ctrl, dom, body, params, fps));
        }
        case patom::kind::rel: {
            switch (a.r) {
            case rel::in:
                return f_atom(mk_mem_c(ckind::in, build_x(a.lhs, bound), build_s(a.rhs, bound)));
            case rel::nin:
                return f_atom(mk_mem_c(ckind::nin, build_x(a.lhs, bound), build_s(a.rhs, bound)));
            case rel::is:
                return f_atom(mk_xc(mk_cmp(cmp_op::eq, build_x(a.lhs, bound),
                                           build_x(a.rhs, bound), true)));
            case rel::eq:
            case rel::neq: {
                bool setl = is_set_side(a.lhs, bound);
                bool setr = is_set_side(a.rhs, bound);
                if (setl != setr)
                    throw parse_error("equality between a set and an element", a.line, a.col);
                if (setl)
                    return f_atom(mk_c2(a.r == rel::eq ? ckind::eq : ckind::neq,
                                        build_s(a.lhs, bound), build_s(a.rhs, bound)));
                cmp_op op = a.r == rel::eq ? cmp_op::eq : cmp_op::neq;
                return f_atom(mk_xc(mk_cmp(op, build_x(a.lhs, bound), build_x(a.rhs, bound))));
            }
            case rel::lt:
                return f_atom(mk_xc(mk_cmp(cmp_op::lt, build_x(a.lhs, bound),
                                           build_x(a.rhs, bound))));
            case rel::le:
                return f_atom(mk_xc(mk_cmp(cmp_op::le, build_x(a.lhs, bound),
                                           build_x(a.rhs, bound))));
            case rel::gt:
                return f_atom(mk_xc(mk_cmp(cmp_op::gt, build_x(a.lhs, bound),
                                           build_x(a.rhs, bound))));
            case rel::ge:
                return f_atom(mk_xc(mk_cmp(cmp_op::ge, build_x(a.lhs, bound),
                                           build_x(a.rhs, bound))));
            }
            break;
        }
        }
        throw parse_error("malformed formula", a.line, a.col);
    }
};

}  // namespace parsing

inline formula parse(const std::string& text, const parse_options& opt = {}, int line0 = 1) {
    parsing::parser p(parsing::lex(text, line0), opt);
    auto tree = p.parse_formula_all();
    parsing::typer t(opt);
    return t.run(tree);
}

// ---------------------------------------------------------------------------
// Input files: one formula per line (or '.'-terminated), '%' line comments;
// bracket-unbalanced lines continue onto the next line.

struct source_formula {
    std::string text;
    int line = 1;
};

inline std::vector<source_formula> split_formulas(const std::string& content) {
    std::vector<source_formula> out;
    std::istringstream in(content);
    std::string raw;
    std::string acc;
    int line = 0, start = 1;
    int depth = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s;
        for (char c : raw) {
            if (c == '%')
                break;
            s += c;
        }
        for (char c : s) {
            if (c == '(' || c == '{' || c == '[')
                ++depth;
            if (c == ')' || c == '}' || c == ']')
                --depth;
        }
        if (acc.empty()) {
            start = line;
            acc = s;
        } else {
            acc += "\n" + s;
        }
        std::string trimmed = acc;
        while (!trimmed.empty() && isspace(static_cast<unsigned char>(trimmed.back())))
            trimmed.pop_back();
        bool terminated = !trimmed.empty() && trimmed.back() == '.';
        if (depth > 0 && !terminated)
            continue;  // continuation
        size_t first = trimmed.find_first_not_of(" \t\r");
        if (first == std::string::npos) {
            acc.clear();
            continue;
        }
        out.push_back({trimmed, start});
        acc.clear();
        depth = 0;
    }
    if (!acc.empty()) {
        std::string trimmed = acc;
        size_t first = trimmed.find_first_not_of(" \t\r\n");
        if (first != std::string::npos)
            out.push_back({trimmed, start});
    }
    return out;
}

}  // namespace risolve

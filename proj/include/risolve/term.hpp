#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

// Core term language: X-sorted element terms, set terms (extensional sets,
// set variables, restricted intensional sets), filter formulas, constraints
// and their and/or combinations. Terms are immutable values with structural
// sharing; every "modifying" operation builds new nodes.

namespace risolve {

// ---------------------------------------------------------------------------
// X-sorted terms

enum class arith_op { add, sub, mul, idiv, imod };

struct xterm;
using xref = std::shared_ptr<const xterm>;

enum class xkind { var, cst, num, pair, arith };

struct xterm {
    xkind kind;
    std::string name;   // var | cst
    long long value = 0;  // num
    arith_op op = arith_op::add;
    xref a, b;          // pair components or arith operands
};

inline xref mk_xvar(std::string n) {
    auto t = std::make_shared<xterm>();
    t->kind = xkind::var;
    t->name = std::move(n);
    return t;
}

inline xref mk_cst(std::string n) {
    auto t = std::make_shared<xterm>();
    t->kind = xkind::cst;
    t->name = std::move(n);
    return t;
}

inline xref mk_num(long long v) {
    auto t = std::make_shared<xterm>();
    t->kind = xkind::num;
    t->value = v;
    return t;
}

inline xref mk_pair(xref a, xref b) {
    auto t = std::make_shared<xterm>();
    t->kind = xkind::pair;
    t->a = std::move(a);
    t->b = std::move(b);
    return t;
}

inline xref mk_arith(arith_op op, xref a, xref b) {
    auto t = std::make_shared<xterm>();
    t->kind = xkind::arith;
    t->op = op;
    t->a = std::move(a);
    t->b = std::move(b);
    return t;
}

inline bool xequal(const xref& s, const xref& t) {
    if (s == t)
        return true;
    if (!s || !t || s->kind != t->kind)
        return false;
    switch (s->kind) {
    case xkind::var:
    case xkind::cst:
        return s->name == t->name;
    case xkind::num:
        return s->value == t->value;
    case xkind::pair:
        return xequal(s->a, t->a) && xequal(s->b, t->b);
    case xkind::arith:
        return s->op == t->op && xequal(s->a, t->a) && xequal(s->b, t->b);
    }
    return false;
}

// ---------------------------------------------------------------------------
// Filter formulas (quantifier-free; the existential parameter block of a RIS
// is represented by the params list of the RIS itself)

struct sterm;
using sref = std::shared_ptr<const sterm>;

enum class cmp_op { eq, neq, lt, le, gt, ge };

inline cmp_op cmp_negate(cmp_op op) {
    switch (op) {
    case cmp_op::eq: return cmp_op::neq;
    case cmp_op::neq: return cmp_op::eq;
    case cmp_op::lt: return cmp_op::ge;
    case cmp_op::le: return cmp_op::gt;
    case cmp_op::gt: return cmp_op::le;
    case cmp_op::ge: return cmp_op::lt;
    }
    return cmp_op::eq;
}

enum class xatom_kind { truth, cmp, member, funcpred };

// One atom of the X side: a comparison, a membership literal (allowed inside
// filters; memberships between an element term and a set term), or a
// functional-predicate application. `is_spelling` records the surface `is`
// form for round-tripping; semantically it is an equality whose right-hand
// side is evaluated.
struct xatom {
    xatom_kind kind = xatom_kind::truth;
    bool truth = true;                // truth
    cmp_op op = cmp_op::eq;           // cmp
    bool is_spelling = false;
    xref a, b;                        // cmp operands
    bool positive = true;             // member: in (true) / nin (false)
    xref elem;                        // member element
    sref set;                         // member set
    std::string fp;                   // funcpred name
    std::vector<xref> args;           // funcpred arguments
};

inline xatom mk_truth(bool v) {
    xatom at;
    at.kind = xatom_kind::truth;
    at.truth = v;
    return at;
}

inline xatom mk_cmp(cmp_op op, xref a, xref b, bool is_spelling = false) {
    xatom at;
    at.kind = xatom_kind::cmp;
    at.op = op;
    at.a = std::move(a);
    at.b = std::move(b);
    at.is_spelling = is_spelling;
    return at;
}

inline xatom mk_member(bool positive, xref e, sref s) {
    xatom at;
    at.kind = xatom_kind::member;
    at.positive = positive;
    at.elem = std::move(e);
    at.set = std::move(s);
    return at;
}

inline xatom mk_funcpred(std::string name, std::vector<xref> args) {
    xatom at;
    at.kind = xatom_kind::funcpred;
    at.fp = std::move(name);
    at.args = std::move(args);
    return at;
}

enum class xf_kind { atom, conj, disj };

struct xformula {
    xf_kind kind = xf_kind::atom;
    xatom at = mk_truth(true);
    std::vector<xformula> sub;   // conj | disj
};

inline xformula xf_atom(xatom a) {
    xformula f;
    f.kind = xf_kind::atom;
    f.at = std::move(a);
    return f;
}

inline xformula xf_true() { return xf_atom(mk_truth(true)); }
inline xformula xf_false() { return xf_atom(mk_truth(false)); }

inline bool xf_is_true(const xformula& f) {
    return f.kind == xf_kind::atom && f.at.kind == xatom_kind::truth && f.at.truth;
}

inline xformula xf_conj(std::vector<xformula> fs) {
    std::vector<xformula> kept;
    for (auto& f : fs) {
        if (xf_is_true(f))
            continue;
        kept.push_back(std::move(f));
    }
    if (kept.empty())
        return xf_true();
    if (kept.size() == 1)
        return kept[0];
    xformula f;
    f.kind = xf_kind::conj;
    f.sub = std::move(kept);
    return f;
}

inline xformula xf_disj(std::vector<xformula> fs) {
    if (fs.size() == 1)
        return fs[0];
    xformula f;
    f.kind = xf_kind::disj;
    f.sub = std::move(fs);
    return f;
}

// ---------------------------------------------------------------------------
// Set terms

enum class skind { empty, cons, var, ris, interval };

// {ctrl : dom | filter @ pattern} with optional parameters (existentially
// quantified variables local to the RIS) and their functional predicates.
struct ris_term {
    xref ctrl;                 // variable or nested pair of distinct variables
    std::vector<xref> params;  // bound X variables
    sref dom;
    xformula filter;
    xref pattern;              // ctrl, or (ctrl, t); anything under unsafe patterns
    xformula funcpreds;        // conjunction of funcpred atoms, or true
};

struct sterm {
    skind kind;
    xref elem;  // cons head
    sref rest;  // cons tail
    std::string name;  // var
    std::shared_ptr<const ris_term> ris;
    xref lo, hi;  // interval bounds, X-terms (ground intervals expand eagerly)
};

inline sref mk_empty() {
    static const sref e = [] {
        auto t = std::make_shared<sterm>();
        t->kind = skind::empty;
        return t;
    }();
    return e;
}

inline sref mk_svar(std::string n) {
    auto t = std::make_shared<sterm>();
    t->kind = skind::var;
    t->name = std::move(n);
    return t;
}

inline sref mk_cons(xref e, sref rest) {
    auto t = std::make_shared<sterm>();
    t->kind = skind::cons;
    t->elem = std::move(e);
    t->rest = std::move(rest);
    return t;
}

inline sref mk_set(const std::vector<xref>& elems, sref tail) {
    sref s = tail ? tail : mk_empty();
    for (auto it = elems.rbegin(); it != elems.rend(); ++it)
        s = mk_cons(*it, s);
    return s;
}

inline sref mk_ris(xref ctrl, sref dom, xformula filter, xref pattern,
                   std::vector<xref> params = {}, xformula funcpreds = xf_true()) {
    auto r = std::make_shared<ris_term>();
    r->ctrl = std::move(ctrl);
    r->params = std::move(params);
    r->dom = std::move(dom);
    r->filter = std::move(filter);
    r->pattern = std::move(pattern);
    r->funcpreds = std::move(funcpreds);
    auto t = std::make_shared<sterm>();
    t->kind = skind::ris;
    t->ris = std::move(r);
    return t;
}

inline sref mk_interval(xref lo, xref hi) {
    auto t = std::make_shared<sterm>();
    t->kind = skind::interval;
    t->lo = std::move(lo);
    t->hi = std::move(hi);
    return t;
}

// ---------------------------------------------------------------------------
// Constraints and formulas

enum class ckind {
    truec, falsec,
    eq, neq,                 // set-sorted equality
    in, nin,
    un, disj,
    foreach_c,
    // derived operators; expanded before solving
    nun, ndisj, subset, nsubset, inters, ninters, diff, ndiff, nforeach_c,
    sort_set, sort_isx,
    xconstr                  // an X atom at formula level
};

struct foreach_data {
    xref ctrl;
    std::vector<xref> params;
    sref dom;
    xformula body;
    xformula funcpreds;
};

struct constraint {
    ckind k = ckind::truec;
    sref s1, s2, s3;
    xref x1;                 // element side of in/nin; term of sort atoms
    std::shared_ptr<const foreach_data> fe;
    xatom xa;                // xconstr payload
};

inline constraint mk_true_c() { return constraint{}; }
inline constraint mk_false_c() {
    constraint c;
    c.k = ckind::falsec;
    return c;
}

inline constraint mk_c2(ckind k, sref a, sref b) {
    constraint c;
    c.k = k;
    c.s1 = std::move(a);
    c.s2 = std::move(b);
    return c;
}

inline constraint mk_c3(ckind k, sref a, sref b, sref d) {
    constraint c;
    c.k = k;
    c.s1 = std::move(a);
    c.s2 = std::move(b);
    c.s3 = std::move(d);
    return c;
}

inline constraint mk_mem_c(ckind k, xref e, sref s) {
    constraint c;
    c.k = k;
    c.x1 = std::move(e);
    c.s1 = std::move(s);
    return c;
}

inline constraint mk_xc(xatom a) {
    constraint c;
    c.k = ckind::xconstr;
    c.xa = std::move(a);
    return c;
}

inline constraint mk_sort_c(ckind k, sref s, xref x = nullptr) {
    constraint c;
    c.k = k;
    c.s1 = std::move(s);
    c.x1 = std::move(x);
    return c;
}

inline constraint mk_foreach(ckind k, xref ctrl, sref dom, xformula body,
                             std::vector<xref> params = {},
                             xformula funcpreds = xf_true()) {
    auto fe = std::make_shared<foreach_data>();
    fe->ctrl = std::move(ctrl);
    fe->params = std::move(params);
    fe->dom = std::move(dom);
    fe->body = std::move(body);
    fe->funcpreds = std::move(funcpreds);
    constraint c;
    c.k = k;
    c.fe = std::move(fe);
    return c;
}

enum class f_kind { atom, conj, disj };

struct formula {
    f_kind kind = f_kind::atom;
    constraint c;
    std::vector<formula> sub;
};

inline formula f_atom(constraint c) {
    formula f;
    f.kind = f_kind::atom;
    f.c = std::move(c);
    return f;
}

inline formula f_conj(std::vector<formula> fs) {
    if (fs.size() == 1)
        return fs[0];
    formula f;
    f.kind = f_kind::conj;
    f.sub = std::move(fs);
    return f;
}

inline formula f_disj(std::vector<formula> fs) {
    if (fs.size() == 1)
        return fs[0];
    formula f;
    f.kind = f_kind::disj;
    f.sub = std::move(fs);
    return f;
}

// ---------------------------------------------------------------------------
// Classification helpers

// empty set, or a RIS whose (recursive) domain is empty
inline bool empty_like(const sref& s) {
    if (!s)
        return false;
    if (s->kind == skind::empty)
        return true;
    if (s->kind == skind::ris)
        return empty_like(s->ris->dom);
    return false;
}

// variable-RIS: the (recursively innermost) domain is a set variable
inline bool is_variable_ris(const sref& s) {
    if (!s || s->kind != skind::ris)
        return false;
    const sref& d = s->ris->dom;
    if (d->kind == skind::var)
        return true;
    return is_variable_ris(d);
}

inline bool is_var_or_varris(const sref& s) {
    return s && (s->kind == skind::var || is_variable_ris(s));
}

// innermost domain variable of a variable-RIS (or the variable itself)
inline std::string innermost_var(const sref& s) {
    if (s->kind == skind::var)
        return s->name;
    if (s->kind == skind::ris)
        return innermost_var(s->ris->dom);
    throw std::logic_error("innermost_var: not a variable chain");
}

struct cons_view {
    std::vector<xref> elems;
    sref tail;  // empty, var, ris or interval
};

inline cons_view decompose(sref s) {
    cons_view v;
    while (s->kind == skind::cons) {
        v.elems.push_back(s->elem);
        s = s->rest;
    }
    v.tail = s;
    return v;
}

// ---------------------------------------------------------------------------
// Free variables (RIS control variables and parameters are bound)

struct var_set {
    std::set<std::string> xvars;
    std::set<std::string> svars;
};

inline void ctrl_vars(const xref& c, std::set<std::string>& out) {
    if (c->kind == xkind::var)
        out.insert(c->name);
    else if (c->kind == xkind::pair) {
        ctrl_vars(c->a, out);
        ctrl_vars(c->b, out);
    }
}

namespace detail {

inline void fv_x(const xref& t, const std::set<std::string>& bound, var_set& out);
inline void fv_s(const sref& s, const std::set<std::string>& bound, var_set& out);

inline void fv_xf(const xformula& f, const std::set<std::string>& bound, var_set& out) {
    if (f.kind == xf_kind::atom) {
        const xatom& a = f.at;
        switch (a.kind) {
        case xatom_kind::truth:
            break;
        case xatom_kind::cmp:
            fv_x(a.a, bound, out);
            fv_x(a.b, bound, out);
            break;
        case xatom_kind::member:
            fv_x(a.elem, bound, out);
            fv_s(a.set, bound, out);
            break;
        case xatom_kind::funcpred:
            for (auto& t : a.args)
                fv_x(t, bound, out);
            break;
        }
        return;
    }
    for (auto& g : f.sub)
        fv_xf(g, bound, out);
}

inline void fv_x(const xref& t, const std::set<std::string>& bound, var_set& out) {
    if (!t)
        return;
    switch (t->kind) {
    case xkind::var:
        if (!bound.count(t->name))
            out.xvars.insert(t->name);
        break;
    case xkind::pair:
    case xkind::arith:
        fv_x(t->a, bound, out);
        fv_x(t->b, bound, out);
        break;
    default:
        break;
    }
}

inline void fv_s(const sref& s, const std::set<std::string>& bound, var_set& out) {
    if (!s)
        return;
    switch (s->kind) {
    case skind::empty:
        break;
    case skind::var:
        out.svars.insert(s->name);
        break;
    case skind::cons:
        fv_x(s->elem, bound, out);
        fv_s(s->rest, bound, out);
        break;
    case skind::interval:
        fv_x(s->lo, bound, out);
        fv_x(s->hi, bound, out);
        break;
    case skind::ris: {
        const ris_term& r = *s->ris;
        fv_s(r.dom, bound, out);
        std::set<std::string> b2 = bound;
        ctrl_vars(r.ctrl, b2);
        for (auto& p : r.params)
            b2.insert(p->name);
        fv_xf(r.filter, b2, out);
        fv_x(r.pattern, b2, out);
        fv_xf(r.funcpreds, b2, out);
        break;
    }
    }
}

}  // namespace detail

inline var_set free_vars(const sref& s) {
    var_set out;
    detail::fv_s(s, {}, out);
    return out;
}

inline var_set free_vars(const xref& t) {
    var_set out;
    detail::fv_x(t, {}, out);
    return out;
}

inline var_set free_vars(const xformula& f) {
    var_set out;
    detail::fv_xf(f, {}, out);
    return out;
}

inline void collect_free_vars(const constraint& c, var_set& out) {
    switch (c.k) {
    case ckind::truec:
    case ckind::falsec:
        break;
    case ckind::xconstr:
        detail::fv_xf(xf_atom(c.xa), {}, out);
        break;
    case ckind::foreach_c:
    case ckind::nforeach_c: {
        const foreach_data& fe = *c.fe;
        detail::fv_s(fe.dom, {}, out);
        std::set<std::string> b;
        ctrl_vars(fe.ctrl, b);
        for (auto& p : fe.params)
            b.insert(p->name);
        detail::fv_xf(fe.body, b, out);
        detail::fv_xf(fe.funcpreds, b, out);
        break;
    }
    default:
        detail::fv_s(c.s1, {}, out);
        detail::fv_s(c.s2, {}, out);
        detail::fv_s(c.s3, {}, out);
        detail::fv_x(c.x1, {}, out);
        break;
    }
}

inline var_set free_vars(const formula& f) {
    var_set out;
    if (f.kind == f_kind::atom) {
        collect_free_vars(f.c, out);
    } else {
        for (auto& g : f.sub) {
            var_set s = free_vars(g);
            out.xvars.insert(s.xvars.begin(), s.xvars.end());
            out.svars.insert(s.svars.begin(), s.svars.end());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fresh variable generation: one atomic monotone counter per solver session;
// the suffix is the global issue count.

class var_gen {
  public:
    std::string fresh(const std::string& hint) {
        return hint + "_" + std::to_string(++counter_);
    }
    xref fresh_x(const std::string& hint) { return mk_xvar(fresh(hint)); }
    sref fresh_s(const std::string& hint) { return mk_svar(fresh(hint)); }

    // make sure future fresh names cannot collide with names already in use
    void reserve(const std::string& name) {
        auto pos = name.rfind('_');
        if (pos == std::string::npos || pos + 1 == name.size())
            return;
        unsigned long long n = 0;
        for (size_t i = pos + 1; i < name.size(); ++i) {
            if (!isdigit(static_cast<unsigned char>(name[i])))
                return;
            n = n * 10 + static_cast<unsigned long long>(name[i] - '0');
        }
        auto cur = counter_.load();
        while (cur < n && !counter_.compare_exchange_weak(cur, n)) {
        }
    }

    void reserve_all(const var_set& vs) {
        for (auto& n : vs.xvars)
            reserve(n);
        for (auto& n : vs.svars)
            reserve(n);
    }

  private:
    std::atomic<unsigned long long> counter_{0};
};

}  // namespace risolve

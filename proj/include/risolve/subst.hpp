#pragma once

#include "risolve/term.hpp"

// Sort-respecting substitutions, applied structurally and capture-avoiding:
// substituting under a RIS whose bound variables collide with the binding
// keys or ranges first renames those binders fresh.

namespace risolve {

struct sort_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class substitution {
  public:
    bool empty() const { return xb_.empty() && sb_.empty(); }

    const std::map<std::string, xref>& xbinds() const { return xb_; }
    const std::map<std::string, sref>& sbinds() const { return sb_; }

    std::optional<xref> lookup_x(const std::string& n) const {
        auto it = xb_.find(n);
        if (it == xb_.end())
            return std::nullopt;
        return it->second;
    }

    std::optional<sref> lookup_s(const std::string& n) const {
        auto it = sb_.find(n);
        if (it == sb_.end())
            return std::nullopt;
        return it->second;
    }

    static substitution of_x(const std::string& n, xref t) {
        substitution s;
        s.xb_[n] = std::move(t);
        return s;
    }

    static substitution of_s(const std::string& n, sref t) {
        substitution s;
        s.sb_[n] = std::move(t);
        return s;
    }

    // compose a new binding in, keeping the map idempotent (applying the
    // result twice equals applying it once)
    void bind_x(const std::string& n, xref t, var_gen& vg);
    void bind_s(const std::string& n, sref t, var_gen& vg);

  private:
    std::map<std::string, xref> xb_;
    std::map<std::string, sref> sb_;
};

xref apply(const substitution& s, const xref& t, var_gen& vg);
sref apply(const substitution& s, const sref& t, var_gen& vg);
xformula apply(const substitution& s, const xformula& f, var_gen& vg);
constraint apply(const substitution& s, const constraint& c, var_gen& vg);
formula apply(const substitution& s, const formula& f, var_gen& vg);

inline xref apply(const substitution& s, const xref& t, var_gen& vg) {
    if (!t || s.empty())
        return t;
    switch (t->kind) {
    case xkind::var: {
        if (auto v = s.lookup_x(t->name))
            return *v;
        return t;
    }
    case xkind::cst:
    case xkind::num:
        return t;
    case xkind::pair: {
        xref a = apply(s, t->a, vg), b = apply(s, t->b, vg);
        if (a == t->a && b == t->b)
            return t;
        return mk_pair(a, b);
    }
    case xkind::arith: {
        xref a = apply(s, t->a, vg), b = apply(s, t->b, vg);
        if (a == t->a && b == t->b)
            return t;
        return mk_arith(t->op, a, b);
    }
    }
    return t;
}

inline xformula apply(const substitution& s, const xformula& f, var_gen& vg) {
    if (s.empty())
        return f;
    if (f.kind == xf_kind::atom) {
        xatom a = f.at;
        switch (a.kind) {
        case xatom_kind::truth:
            break;
        case xatom_kind::cmp:
            a.a = apply(s, a.a, vg);
            a.b = apply(s, a.b, vg);
            break;
        case xatom_kind::member:
            a.elem = apply(s, a.elem, vg);
            a.set = apply(s, a.set, vg);
            break;
        case xatom_kind::funcpred:
            for (auto& t : a.args)
                t = apply(s, t, vg);
            break;
        }
        return xf_atom(std::move(a));
    }
    xformula g;
    g.kind = f.kind;
    g.sub.reserve(f.sub.size());
    for (auto& h : f.sub)
        g.sub.push_back(apply(s, h, vg));
    return g;
}

namespace detail {

// does the substitution interfere with the given binder names, either by
// binding one of them (shadowing) or by mentioning one in a binding value
// (capture)?
inline bool binders_collide(const substitution& s, const std::set<std::string>& bound) {
    for (auto& b : bound)
        if (s.lookup_x(b))
            return true;
    for (auto& [k, v] : s.xbinds()) {
        (void)k;
        var_set fv = free_vars(v);
        for (auto& b : bound)
            if (fv.xvars.count(b))
                return true;
    }
    for (auto& [k, v] : s.sbinds()) {
        (void)k;
        var_set fv = free_vars(v);
        for (auto& b : bound)
            if (fv.xvars.count(b))
                return true;
    }
    return false;
}

inline substitution binder_renaming(const std::set<std::string>& bound, var_gen& vg) {
    substitution ren;
    for (auto& b : bound)
        ren.bind_x(b, vg.fresh_x(b), vg);
    return ren;
}

}  // namespace detail

inline sref apply(const substitution& s, const sref& t, var_gen& vg) {
    if (!t || s.empty())
        return t;
    switch (t->kind) {
    case skind::empty:
        return t;
    case skind::var: {
        if (auto v = s.lookup_s(t->name))
            return *v;
        return t;
    }
    case skind::cons: {
        xref e = apply(s, t->elem, vg);
        sref r = apply(s, t->rest, vg);
        if (e == t->elem && r == t->rest)
            return t;
        return mk_cons(e, r);
    }
    case skind::interval: {
        xref lo = apply(s, t->lo, vg), hi = apply(s, t->hi, vg);
        if (lo == t->lo && hi == t->hi)
            return t;
        return mk_interval(lo, hi);
    }
    case skind::ris: {
        const ris_term& r = *t->ris;
        std::set<std::string> bound;
        ctrl_vars(r.ctrl, bound);
        for (auto& p : r.params)
            bound.insert(p->name);

        xref ctrl = r.ctrl;
        std::vector<xref> params = r.params;
        xformula filter = r.filter;
        xref pattern = r.pattern;
        xformula funcpreds = r.funcpreds;

        if (detail::binders_collide(s, bound)) {
            substitution ren = detail::binder_renaming(bound, vg);
            ctrl = apply(ren, ctrl, vg);
            for (auto& p : params)
                p = apply(ren, p, vg);
            filter = apply(ren, filter, vg);
            pattern = apply(ren, pattern, vg);
            funcpreds = apply(ren, funcpreds, vg);
        }
        return mk_ris(ctrl, apply(s, r.dom, vg), apply(s, filter, vg),
                      apply(s, pattern, vg), params, apply(s, funcpreds, vg));
    }
    }
    return t;
}

inline constraint apply(const substitution& s, const constraint& c, var_gen& vg) {
    if (s.empty())
        return c;
    constraint d = c;
    d.s1 = apply(s, c.s1, vg);
    d.s2 = apply(s, c.s2, vg);
    d.s3 = apply(s, c.s3, vg);
    d.x1 = apply(s, c.x1, vg);
    if (c.k == ckind::xconstr)
        d.xa = apply(s, xf_atom(c.xa), vg).at;
    if (c.fe) {
        const foreach_data& fe = *c.fe;
        std::set<std::string> bound;
        ctrl_vars(fe.ctrl, bound);
        for (auto& p : fe.params)
            bound.insert(p->name);

        xref ctrl = fe.ctrl;
        std::vector<xref> params = fe.params;
        xformula body = fe.body;
        xformula fps = fe.funcpreds;
        if (detail::binders_collide(s, bound)) {
            substitution ren = detail::binder_renaming(bound, vg);
            ctrl = apply(ren, ctrl, vg);
            for (auto& p : params)
                p = apply(ren, p, vg);
            body = apply(ren, body, vg);
            fps = apply(ren, fps, vg);
        }
        auto fe2 = std::make_shared<foreach_data>();
        fe2->ctrl = ctrl;
        fe2->params = params;
        fe2->dom = apply(s, fe.dom, vg);
        fe2->body = apply(s, body, vg);
        fe2->funcpreds = apply(s, fps, vg);
        d.fe = fe2;
    }
    return d;
}

inline formula apply(const substitution& s, const formula& f, var_gen& vg) {
    if (s.empty())
        return f;
    if (f.kind == f_kind::atom)
        return f_atom(apply(s, f.c, vg));
    formula g;
    g.kind = f.kind;
    g.sub.reserve(f.sub.size());
    for (auto& h : f.sub)
        g.sub.push_back(apply(s, h, vg));
    return g;
}

inline void substitution::bind_x(const std::string& n, xref t, var_gen& vg) {
    substitution unit = substitution::of_x(n, t);
    for (auto& [k, v] : xb_) {
        (void)k;
        v = apply(unit, v, vg);
    }
    for (auto& [k, v] : sb_) {
        (void)k;
        v = apply(unit, v, vg);
    }
    xref img = apply(*this, t, vg);
    var_set fv = free_vars(img);
    if (fv.xvars.count(n))
        throw sort_error("substitution: binding " + n + " is not idempotent");
    xb_[n] = img;
}

inline void substitution::bind_s(const std::string& n, sref t, var_gen& vg) {
    substitution unit = substitution::of_s(n, t);
    for (auto& [k, v] : xb_) {
        (void)k;
        v = apply(unit, v, vg);
    }
    for (auto& [k, v] : sb_) {
        (void)k;
        v = apply(unit, v, vg);
    }
    sref img = apply(*this, t, vg);
    var_set fv = free_vars(img);
    if (fv.svars.count(n))
        throw sort_error("substitution: binding " + n + " is not idempotent");
    sb_[n] = img;
}

// ---------------------------------------------------------------------------
// Structural equality modulo alpha-renaming of RIS binders

namespace detail {

using rename_map = std::map<std::string, std::string>;

inline bool aeq_x(const xref& a, const xref& b, const rename_map& ra, const rename_map& rb);
inline bool aeq_s(const sref& a, const sref& b, rename_map ra, rename_map rb);

inline bool aeq_xf(const xformula& a, const xformula& b, const rename_map& ra,
                   const rename_map& rb) {
    if (a.kind != b.kind)
        return false;
    if (a.kind == xf_kind::atom) {
        const xatom& p = a.at;
        const xatom& q = b.at;
        if (p.kind != q.kind)
            return false;
        switch (p.kind) {
        case xatom_kind::truth:
            return p.truth == q.truth;
        case xatom_kind::cmp:
            return p.op == q.op && aeq_x(p.a, q.a, ra, rb) && aeq_x(p.b, q.b, ra, rb);
        case xatom_kind::member:
            return p.positive == q.positive && aeq_x(p.elem, q.elem, ra, rb) &&
                   aeq_s(p.set, q.set, ra, rb);
        case xatom_kind::funcpred:
            if (p.fp != q.fp || p.args.size() != q.args.size())
                return false;
            for (size_t i = 0; i < p.args.size(); ++i)
                if (!aeq_x(p.args[i], q.args[i], ra, rb))
                    return false;
            return true;
        }
    }
    if (a.sub.size() != b.sub.size())
        return false;
    for (size_t i = 0; i < a.sub.size(); ++i)
        if (!aeq_xf(a.sub[i], b.sub[i], ra, rb))
            return false;
    return true;
}

inline bool aeq_x(const xref& a, const xref& b, const rename_map& ra, const rename_map& rb) {
    if (!a || !b)
        return a == b;
    if (a->kind != b->kind)
        return false;
    switch (a->kind) {
    case xkind::var: {
        auto ia = ra.find(a->name);
        auto ib = rb.find(b->name);
        if ((ia == ra.end()) != (ib == rb.end()))
            return false;
        if (ia == ra.end())
            return a->name == b->name;
        return ia->second == ib->second;
    }
    case xkind::cst:
        return a->name == b->name;
    case xkind::num:
        return a->value == b->value;
    case xkind::pair:
        return aeq_x(a->a, b->a, ra, rb) && aeq_x(a->b, b->b, ra, rb);
    case xkind::arith:
        return a->op == b->op && aeq_x(a->a, b->a, ra, rb) && aeq_x(a->b, b->b, ra, rb);
    }
    return false;
}

inline void bind_binders(const xref& ca, const xref& cb, rename_map& ra, rename_map& rb,
                         int& n, bool& ok) {
    if (!ok)
        return;
    if (ca->kind == xkind::var && cb->kind == xkind::var) {
        std::string canon = "#b" + std::to_string(n++);
        ra[ca->name] = canon;
        rb[cb->name] = canon;
    } else if (ca->kind == xkind::pair && cb->kind == xkind::pair) {
        bind_binders(ca->a, cb->a, ra, rb, n, ok);
        bind_binders(ca->b, cb->b, ra, rb, n, ok);
    } else {
        ok = false;
    }
}

inline bool aeq_s(const sref& a, const sref& b, rename_map ra, rename_map rb) {
    if (!a || !b)
        return a == b;
    if (a->kind != b->kind)
        return false;
    switch (a->kind) {
    case skind::empty:
        return true;
    case skind::var:
        return a->name == b->name;
    case skind::cons:
        return aeq_x(a->elem, b->elem, ra, rb) && aeq_s(a->rest, b->rest, ra, rb);
    case skind::interval:
        return aeq_x(a->lo, b->lo, ra, rb) && aeq_x(a->hi, b->hi, ra, rb);
    case skind::ris: {
        const ris_term& p = *a->ris;
        const ris_term& q = *b->ris;
        if (p.params.size() != q.params.size())
            return false;
        if (!aeq_s(p.dom, q.dom, ra, rb))
            return false;
        int n = 0;
        bool ok = true;
        bind_binders(p.ctrl, q.ctrl, ra, rb, n, ok);
        if (!ok)
            return false;
        for (size_t i = 0; i < p.params.size(); ++i) {
            std::string canon = "#p" + std::to_string(n++);
            ra[p.params[i]->name] = canon;
            rb[q.params[i]->name] = canon;
        }
        return aeq_xf(p.filter, q.filter, ra, rb) && aeq_x(p.pattern, q.pattern, ra, rb) &&
               aeq_xf(p.funcpreds, q.funcpreds, ra, rb);
    }
    }
    return false;
}

}  // namespace detail

inline bool alpha_equal(const sref& a, const sref& b) {
    return detail::aeq_s(a, b, {}, {});
}

inline bool alpha_equal(const xref& a, const xref& b) {
    return detail::aeq_x(a, b, {}, {});
}

inline bool alpha_equal(const xformula& a, const xformula& b) {
    return detail::aeq_xf(a, b, {}, {});
}

inline bool alpha_equal(const constraint& a, const constraint& b) {
    if (a.k != b.k)
        return false;
    if (a.k == ckind::xconstr)
        return alpha_equal(xf_atom(a.xa), xf_atom(b.xa));
    if (a.fe || b.fe) {
        if (!a.fe || !b.fe)
            return false;
        sref ra = mk_ris(a.fe->ctrl, a.fe->dom, a.fe->body, a.fe->ctrl, a.fe->params,
                         a.fe->funcpreds);
        sref rb = mk_ris(b.fe->ctrl, b.fe->dom, b.fe->body, b.fe->ctrl, b.fe->params,
                         b.fe->funcpreds);
        return alpha_equal(ra, rb);
    }
    return detail::aeq_s(a.s1, b.s1, {}, {}) && detail::aeq_s(a.s2, b.s2, {}, {}) &&
           detail::aeq_s(a.s3, b.s3, {}, {}) && detail::aeq_x(a.x1, b.x1, {}, {});
}

}  // namespace risolve

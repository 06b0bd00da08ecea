#pragma once

#include "risolve/term.hpp"

// Concrete-syntax printer. Output re-parses to an alpha-equivalent structure.

namespace risolve {

std::string pretty(const xref& t);
std::string pretty(const sref& s);
std::string pretty(const xformula& f);
std::string pretty(const constraint& c);
std::string pretty(const formula& f);

namespace detail {

// precedence: 2 = additive, 3 = multiplicative, 4 = atomic
inline int xprec(const xref& t) {
    if (t->kind != xkind::arith)
        return 4;
    switch (t->op) {
    case arith_op::add:
    case arith_op::sub:
        return 2;
    default:
        return 3;
    }
}

inline std::string op_str(arith_op op) {
    switch (op) {
    case arith_op::add: return " + ";
    case arith_op::sub: return " - ";
    case arith_op::mul: return "*";
    case arith_op::idiv: return " div ";
    case arith_op::imod: return " mod ";
    }
    return "?";
}

inline std::string pp_x(const xref& t, int prec) {
    switch (t->kind) {
    case xkind::var:
    case xkind::cst:
        return t->name;
    case xkind::num: {
        std::string s = std::to_string(t->value);
        if (t->value < 0 && prec > 2)
            return "(" + s + ")";
        return s;
    }
    case xkind::pair:
        return "[" + pp_x(t->a, 0) + "," + pp_x(t->b, 0) + "]";
    case xkind::arith: {
        int p = xprec(t);
        std::string s = pp_x(t->a, p) + op_str(t->op) + pp_x(t->b, p + 1);
        if (p < prec)
            return "(" + s + ")";
        return s;
    }
    }
    return "?";
}

inline std::string cmp_str(cmp_op op) {
    switch (op) {
    case cmp_op::eq: return " = ";
    case cmp_op::neq: return " neq ";
    case cmp_op::lt: return " < ";
    case cmp_op::le: return " =< ";
    case cmp_op::gt: return " > ";
    case cmp_op::ge: return " >= ";
    }
    return "?";
}

inline std::string pp_xf(const xformula& f, bool parens_for_or);

inline std::string pp_xatom(const xatom& a) {
    switch (a.kind) {
    case xatom_kind::truth:
        return a.truth ? "true" : "false";
    case xatom_kind::cmp:
        if (a.is_spelling)
            return pp_x(a.a, 0) + " is " + pp_x(a.b, 0);
        return pp_x(a.a, 0) + cmp_str(a.op) + pp_x(a.b, 0);
    case xatom_kind::member:
        return pp_x(a.elem, 0) + (a.positive ? " in " : " nin ") + pretty(a.set);
    case xatom_kind::funcpred: {
        std::string s = a.fp + "(";
        for (size_t i = 0; i < a.args.size(); ++i) {
            if (i)
                s += ",";
            s += pp_x(a.args[i], 0);
        }
        return s + ")";
    }
    }
    return "?";
}

inline std::string pp_xf(const xformula& f, bool parens_for_or) {
    switch (f.kind) {
    case xf_kind::atom:
        return pp_xatom(f.at);
    case xf_kind::conj: {
        std::string s;
        for (size_t i = 0; i < f.sub.size(); ++i) {
            if (i)
                s += " & ";
            s += pp_xf(f.sub[i], true);
        }
        return s;
    }
    case xf_kind::disj: {
        std::string s;
        for (size_t i = 0; i < f.sub.size(); ++i) {
            if (i)
                s += " or ";
            s += pp_xf(f.sub[i], false);
        }
        if (parens_for_or)
            return "(" + s + ")";
        return s;
    }
    }
    return "?";
}

}  // namespace detail

inline std::string pretty(const xref& t) { return detail::pp_x(t, 0); }

inline std::string pretty(const xformula& f) { return detail::pp_xf(f, false); }

inline std::string pretty(const sref& s) {
    switch (s->kind) {
    case skind::empty:
        return "{}";
    case skind::var:
        return s->name;
    case skind::interval:
        return "int(" + pretty(s->lo) + "," + pretty(s->hi) + ")";
    case skind::cons: {
        cons_view v = decompose(s);
        std::string out = "{";
        for (size_t i = 0; i < v.elems.size(); ++i) {
            if (i)
                out += ",";
            out += pretty(v.elems[i]);
        }
        if (v.tail->kind != skind::empty)
            out += "/" + pretty(v.tail);
        return out + "}";
    }
    case skind::ris: {
        const ris_term& r = *s->ris;
        std::string head = pretty(r.ctrl) + " in " + pretty(r.dom);
        bool five = !r.params.empty() || !xf_is_true(r.funcpreds);
        if (five) {
            std::string ps = "[";
            for (size_t i = 0; i < r.params.size(); ++i) {
                if (i)
                    ps += ",";
                ps += r.params[i]->name;
            }
            ps += "]";
            return "ris(" + head + "," + ps + "," + pretty(r.filter) + "," +
                   pretty(r.pattern) + "," + pretty(r.funcpreds) + ")";
        }
        if (!xequal(r.pattern, r.ctrl))
            return "ris(" + head + "," + pretty(r.filter) + "," + pretty(r.pattern) + ")";
        if (xf_is_true(r.filter))
            return "ris(" + head + ")";
        return "ris(" + head + "," + pretty(r.filter) + ")";
    }
    }
    return "?";
}

inline std::string pretty(const constraint& c) {
    auto c3 = [&](const char* n) {
        return std::string(n) + "(" + pretty(c.s1) + "," + pretty(c.s2) + "," +
               pretty(c.s3) + ")";
    };
    auto c2 = [&](const char* n) {
        return std::string(n) + "(" + pretty(c.s1) + "," + pretty(c.s2) + ")";
    };
    auto fe_str = [&](const char* n) {
        const foreach_data& fe = *c.fe;
        std::string head = pretty(fe.ctrl) + " in " + pretty(fe.dom);
        if (fe.params.empty() && xf_is_true(fe.funcpreds))
            return std::string(n) + "(" + head + "," + pretty(fe.body) + ")";
        std::string ps = "[";
        for (size_t i = 0; i < fe.params.size(); ++i) {
            if (i)
                ps += ",";
            ps += fe.params[i]->name;
        }
        ps += "]";
        return std::string(n) + "(" + head + "," + ps + "," + pretty(fe.body) + "," +
               pretty(fe.funcpreds) + ")";
    };
    switch (c.k) {
    case ckind::truec: return "true";
    case ckind::falsec: return "false";
    case ckind::eq: return pretty(c.s1) + " = " + pretty(c.s2);
    case ckind::neq: return pretty(c.s1) + " neq " + pretty(c.s2);
    case ckind::in: return pretty(c.x1) + " in " + pretty(c.s1);
    case ckind::nin: return pretty(c.x1) + " nin " + pretty(c.s1);
    case ckind::un: return c3("un");
    case ckind::disj: return c2("disj");
    case ckind::nun: return c3("nun");
    case ckind::ndisj: return c2("ndisj");
    case ckind::subset: return c2("subset");
    case ckind::nsubset: return c2("nsubset");
    case ckind::inters: return c3("inters");
    case ckind::ninters: return c3("ninters");
    case ckind::diff: return c3("diff");
    case ckind::ndiff: return c3("ndiff");
    case ckind::foreach_c: return fe_str("foreach");
    case ckind::nforeach_c: return fe_str("nforeach");
    case ckind::sort_set: return "set(" + (c.s1 ? pretty(c.s1) : pretty(c.x1)) + ")";
    case ckind::sort_isx: return "isX(" + (c.s1 ? pretty(c.s1) : pretty(c.x1)) + ")";
    case ckind::xconstr: return detail::pp_xatom(c.xa);
    }
    return "?";
}

inline std::string pretty(const formula& f) {
    switch (f.kind) {
    case f_kind::atom:
        return pretty(f.c);
    case f_kind::conj: {
        std::string s;
        for (size_t i = 0; i < f.sub.size(); ++i) {
            if (i)
                s += " & ";
            bool parens = f.sub[i].kind == f_kind::disj;
            s += parens ? "(" + pretty(f.sub[i]) + ")" : pretty(f.sub[i]);
        }
        return s;
    }
    case f_kind::disj: {
        std::string s;
        for (size_t i = 0; i < f.sub.size(); ++i) {
            if (i)
                s += " or ";
            s += pretty(f.sub[i]);
        }
        return s;
    }
    }
    return "?";
}

}  // namespace risolve

#pragma once

#include "risolve/oracle.hpp"
#include "risolve/solver.hpp"

#include <random>

// Benchmark generation: every free set variable of a base formula is bound
// to a RIS drawn from the template tables (nine filter/parameter/funcpred
// templates, two patterns, three empty-set replacements), producing the
// negative collection; the positive collection additionally negates one
// constraint of the base formula and requires all RIS domains nonempty.

namespace risolve {

// negations of classical set-algebra theorems; all unsatisfiable
inline const std::vector<std::string>& builtin_theorems() {
    static const std::vector<std::string> v = {
        "un(A,A,B) & B neq A",
        "inters(A,A,B) & B neq A",
        "un(A,B,C) & un(B,A,D) & C neq D",
        "inters(A,B,C) & inters(B,A,D) & C neq D",
        "un(A,B,X1) & un(X1,C,L) & un(B,C,X2) & un(A,X2,R) & L neq R",
        "inters(A,B,X1) & inters(X1,C,L) & inters(B,C,X2) & inters(A,X2,R) & L neq R",
        "inters(A,B,X1) & un(A,X1,R) & R neq A",
        "un(A,B,X1) & inters(A,X1,R) & R neq A",
        "inters(B,C,X1) & un(A,X1,L) & un(A,B,Y1) & un(A,C,Y2) & inters(Y1,Y2,R) & L neq R",
        "un(B,C,X1) & inters(A,X1,L) & inters(A,B,Y1) & inters(A,C,Y2) & un(Y1,Y2,R) & L neq R",
        "diff(A,B,C) & nsubset(C,A)",
        "inters(A,B,C) & nsubset(C,A)",
        "un(A,B,C) & nsubset(A,C)",
        "diff(A,B,C) & inters(C,B,X1) & X1 neq {}",
        "diff(A,B,X1) & inters(A,B,X2) & un(X1,X2,R) & R neq A",
        "un(A,{},R) & R neq A",
        "inters(A,{},R) & R neq {}",
        "diff(A,{},R) & R neq A",
        "diff({},A,R) & R neq {}",
        "subset(A,B) & subset(B,A) & A neq B",
        "subset(A,B) & subset(B,C) & nsubset(A,C)",
        "disj(A,B) & inters(A,B,C) & C neq {}",
        "inters(A,B,C) & C = {} & ndisj(A,B)",
        "subset(A,B) & un(A,B,C) & C neq B",
        "subset(A,B) & inters(A,B,C) & C neq A",
        "inters(A,B,C) & X in C & X nin A",
        "un(A,B,C) & X in A & X nin C",
        "un(A,B,C) & disj(A,D) & disj(B,D) & ndisj(C,D)",
        "subset(A,B) & diff(A,C,X1) & diff(B,C,X2) & nsubset(X1,X2)",
        "subset(A,B) & diff(B,A,X1) & un(A,X1,R) & R neq B",
    };
    return v;
}

struct bench_stats {
    int bases = 0;
    int instances = 0;
    int trivial_skipped = 0;
};

namespace bdetail {

struct template_env {
    int counter = 0;
    std::string next(const std::string& base) {
        return base + std::to_string(++counter);
    }
};

// one of the nine filter/parameter/funcpred templates applied to a variable
struct vfc_instance {
    xformula filter = xf_true();
    std::vector<formula> side;
};

inline vfc_instance make_vfc(int tmpl, const xref& ctrl, template_env& te) {
    vfc_instance out;
    switch (tmpl) {
    case 0:
        break;  // true
    case 1:
        out.filter = xf_atom(mk_member(true, ctrl, mk_svar(te.next("B"))));
        break;
    case 2:
        out.filter = xf_atom(mk_member(false, ctrl, mk_svar(te.next("B"))));
        break;
    case 3: {
        sref B = mk_svar(te.next("B"));
        out.filter = xf_atom(mk_member(true, ctrl, B));
        out.side.push_back(f_atom(
            mk_c3(ckind::un, mk_svar(te.next("B")), mk_svar(te.next("B")), B)));
        break;
    }
    case 4: {
        sref B = mk_svar(te.next("B"));
        out.filter = xf_atom(mk_member(false, ctrl, B));
        out.side.push_back(f_atom(
            mk_c3(ckind::un, mk_svar(te.next("B")), mk_svar(te.next("B")), B)));
        break;
    }
    case 5:
        // set-sorted control positions are out of scope here; the template
        // keeps its disjointness content as a side constraint
        out.side.push_back(f_atom(
            mk_c2(ckind::disj, mk_svar(te.next("B")), mk_svar(te.next("B")))));
        break;
    case 6:
        out.side.push_back(f_atom(
            mk_c2(ckind::ndisj, mk_svar(te.next("B")), mk_svar(te.next("B")))));
        break;
    case 7:
        out.filter = xf_atom(mk_cmp(cmp_op::eq, ctrl, mk_xvar(te.next("B"))));
        break;
    case 8:
        out.filter = xf_atom(mk_cmp(cmp_op::neq, ctrl, mk_xvar(te.next("B"))));
        break;
    }
    return out;
}

inline sref make_empty_template(int tmpl, template_env& te) {
    xref x = mk_xvar(te.next("XE"));
    switch (tmpl) {
    case 0:
        return mk_ris(x, mk_empty(), xf_false(), x);
    case 1:
        return mk_ris(x, mk_empty(), xf_true(), x);
    default: {
        xref b1 = mk_xvar(te.next("B"));
        sref b2 = mk_svar(te.next("B"));
        xformula f = xf_conj({xf_atom(mk_cmp(cmp_op::neq, x, b1)),
                              xf_atom(mk_member(false, x, b2))});
        return mk_ris(x, mk_cons(b1, b2), f, x);
    }
    }
}

// replace stand-alone {} occurrences (constraint arguments and RIS domains);
// tails of nonempty extensional sets stay untouched
inline sref replace_empty_arg(const sref& s, int tmpl, template_env& te, bool& hit) {
    if (!s)
        return s;
    if (s->kind == skind::empty) {
        hit = true;
        return make_empty_template(tmpl, te);
    }
    if (s->kind == skind::ris) {
        const ris_term& r = *s->ris;
        sref d = replace_empty_arg(r.dom, tmpl, te, hit);
        if (d == r.dom)
            return s;
        return mk_ris(r.ctrl, d, r.filter, r.pattern, r.params, r.funcpreds);
    }
    return s;
}

inline bool formula_mentions_empty(const formula& f) {
    bool found = false;
    std::function<void(const sref&)> ws = [&](const sref& s) {
        if (s && s->kind == skind::empty)
            found = true;
        if (s && s->kind == skind::ris)
            ws(s->ris->dom);
    };
    std::function<void(const formula&)> wf = [&](const formula& g) {
        if (g.kind != f_kind::atom) {
            for (auto& h : g.sub)
                wf(h);
            return;
        }
        ws(g.c.s1);
        ws(g.c.s2);
        ws(g.c.s3);
        if (g.c.fe)
            ws(g.c.fe->dom);
    };
    wf(f);
    return found;
}

inline formula replace_empty(const formula& f, int tmpl, template_env& te) {
    if (f.kind != f_kind::atom) {
        formula g;
        g.kind = f.kind;
        for (auto& h : f.sub)
            g.sub.push_back(replace_empty(h, tmpl, te));
        return g;
    }
    bool hit = false;
    constraint c = f.c;
    c.s1 = replace_empty_arg(c.s1, tmpl, te, hit);
    c.s2 = replace_empty_arg(c.s2, tmpl, te, hit);
    c.s3 = replace_empty_arg(c.s3, tmpl, te, hit);
    (void)hit;
    return f_atom(std::move(c));
}

// positive mode: replace one constraint by its negated version
inline std::optional<constraint> negate_constraint(const constraint& c) {
    auto sw = [&](ckind k) {
        constraint d = c;
        d.k = k;
        return d;
    };
    switch (c.k) {
    case ckind::eq: return sw(ckind::neq);
    case ckind::neq: return sw(ckind::eq);
    case ckind::in: return sw(ckind::nin);
    case ckind::nin: return sw(ckind::in);
    case ckind::un: return sw(ckind::nun);
    case ckind::nun: return sw(ckind::un);
    case ckind::disj: return sw(ckind::ndisj);
    case ckind::ndisj: return sw(ckind::disj);
    case ckind::subset: return sw(ckind::nsubset);
    case ckind::nsubset: return sw(ckind::subset);
    case ckind::inters: return sw(ckind::ninters);
    case ckind::ninters: return sw(ckind::inters);
    case ckind::diff: return sw(ckind::ndiff);
    case ckind::ndiff: return sw(ckind::diff);
    case ckind::foreach_c: return sw(ckind::nforeach_c);
    case ckind::nforeach_c: return sw(ckind::foreach_c);
    case ckind::xconstr: {
        if (c.xa.kind == xatom_kind::cmp) {
            constraint d = c;
            d.xa.op = cmp_negate(c.xa.op);
            return d;
        }
        return std::nullopt;
    }
    default:
        return std::nullopt;
    }
}

inline formula negate_nth_atom(const formula& f, int& n, bool& done) {
    if (f.kind != f_kind::atom) {
        formula g;
        g.kind = f.kind;
        for (auto& h : f.sub)
            g.sub.push_back(negate_nth_atom(h, n, done));
        return g;
    }
    if (done)
        return f;
    if (n-- == 0) {
        if (auto d = negate_constraint(f.c)) {
            done = true;
            return f_atom(*d);
        }
        done = true;  // unnegatable atom: leave the formula unchanged
        return f;
    }
    return f;
}

inline int count_atoms(const formula& f) {
    if (f.kind == f_kind::atom)
        return 1;
    int n = 0;
    for (auto& g : f.sub)
        n += count_atoms(g);
    return n;
}

}  // namespace bdetail

// Instantiate one base formula over the template cross product and append
// the formulas, one per line, to the output. Deterministic for a fixed seed.
inline bench_stats bench_generate(const std::vector<source_formula>& bases, bool positive,
                                  unsigned seed, std::ostream& out,
                                  const parse_options& popt = {},
                                  const funcpred_registry& reg = funcpred_registry()) {
    bench_stats stats;
    std::mt19937 rng(seed);
    out << "% generated collection: " << (positive ? "positive" : "negative")
        << " seed=" << seed << "\n";
    for (auto& src : bases) {
        formula base = parse(src.text, popt);
        stats.bases++;
        if (positive) {
            int atoms = bdetail::count_atoms(base);
            std::uniform_int_distribution<int> pick(0, atoms - 1);
            int n = pick(rng);
            bool done = false;
            base = bdetail::negate_nth_atom(base, n, done);
            // a negation that is already satisfied by the all-empty
            // assignment carries no content: drop it
            env empty_env;
            var_set vs = free_vars(base);
            for (auto& v : vs.svars)
                empty_env.svals[v] = mk_vempty();
            for (auto& v : vs.xvars)
                empty_env.xvals[v] = mk_vcst("a");
            bool trivial = false;
            try {
                trivial = eval_formula(base, empty_env, reg);
            } catch (const std::exception&) {
            }
            if (trivial) {
                stats.trivial_skipped++;
                out << "% trivial after negation, skipped: " << src.text << "\n";
                continue;
            }
        }
        bool has_empty = bdetail::formula_mentions_empty(base);
        var_set vs = free_vars(base);
        for (int vf = 0; vf < 9; ++vf) {
            for (int pat = 0; pat < 2; ++pat) {
                for (int emp = 0; emp < (has_empty ? 3 : 1); ++emp) {
                    bdetail::template_env te;
                    formula inst = bdetail::replace_empty(base, emp, te);
                    std::vector<formula> conj{inst};
                    for (auto& a : vs.svars) {
                        xref ctrl = mk_xvar("X" + a);
                        bdetail::vfc_instance vfc = bdetail::make_vfc(vf, ctrl, te);
                        xref pattern =
                            pat == 0 ? ctrl
                                     : mk_pair(ctrl, mk_xvar(te.next("V")));
                        sref dom = mk_svar("D" + a);
                        sref r = mk_ris(ctrl, dom, vfc.filter, pattern);
                        conj.push_back(f_atom(mk_c2(ckind::eq, mk_svar(a), r)));
                        for (auto& s : vfc.side)
                            conj.push_back(s);
                        if (positive)
                            conj.push_back(
                                f_atom(mk_c2(ckind::neq, dom, mk_empty())));
                    }
                    out << pretty(f_conj(conj)) << "\n";
                    stats.instances++;
                }
            }
        }
    }
    return stats;
}

}  // namespace risolve

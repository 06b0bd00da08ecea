#pragma once

#include "risolve/theory_x.hpp"

#include <cmath>
#include <functional>

// Brute-force finite-model ground truth: evaluate formulas under total
// ground assignments, and decide satisfiability by exhaustive search over a
// bounded universe. Test and debugging support only; independent of the
// rewriting engine.

namespace risolve {

struct universe_too_large : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Ground evaluation

namespace odetail {

inline bool match_ctrl_value(const xref& ctrl, const vref& v, env& scratch) {
    if (ctrl->kind == xkind::var) {
        scratch.xvals[ctrl->name] = v;
        return true;
    }
    if (ctrl->kind == xkind::pair) {
        if (v->kind != vkind::pairv)
            return false;
        return match_ctrl_value(ctrl->a, v->a, scratch) &&
               match_ctrl_value(ctrl->b, v->b, scratch);
    }
    return false;
}

// derive parameter values through the functional predicates; false when some
// parameter has no image (the existential block is then unsatisfiable)
inline bool derive_params(const std::vector<xref>& params, const xformula& funcpreds, env& e,
                          const funcpred_registry& reg) {
    if (params.empty())
        return true;
    std::vector<xatom> fps;
    try {
        detail::flatten_conj(funcpreds, fps);
    } catch (const not_functional_form&) {
        return false;
    }
    bool progress = true;
    while (progress) {
        progress = false;
        for (auto& a : fps) {
            if (a.kind != xatom_kind::funcpred)
                continue;
            const funcpred_decl* d = reg.lookup(a.fp);
            if (!d || a.args.size() != d->arity)
                return false;
            if (a.args.back()->kind != xkind::var || e.xvals.count(a.args.back()->name))
                continue;
            std::vector<vref> pre;
            bool ok = true;
            for (size_t i = 0; i + 1 < a.args.size(); ++i) {
                try {
                    pre.push_back(eval_xterm(a.args[i], e));
                } catch (const eval_error&) {
                    ok = false;
                    break;
                }
            }
            if (!ok)
                continue;
            auto y = d->image(pre);
            if (!y)
                return false;
            e.xvals[a.args.back()->name] = *y;
            progress = true;
        }
    }
    for (auto& p : params)
        if (!e.xvals.count(p->name))
            return false;
    // residual check: every funcpred atom must actually hold
    for (auto& a : fps) {
        if (a.kind == xatom_kind::truth) {
            if (!a.truth)
                return false;
            continue;
        }
        std::vector<vref> args;
        for (auto& t : a.args) {
            try {
                args.push_back(eval_xterm(t, e));
            } catch (const eval_error&) {
                return false;
            }
        }
        if (!reg.lookup(a.fp)->holds(args))
            return false;
    }
    return true;
}

}  // namespace odetail

bool eval_filter(const xformula& f, const env& e, const funcpred_registry& reg);

inline vref eval_sterm(const sref& s, const env& e, const funcpred_registry& reg) {
    switch (s->kind) {
    case skind::empty:
        return mk_vempty();
    case skind::var: {
        auto it = e.svals.find(s->name);
        if (it == e.svals.end())
            throw eval_error("unbound set variable " + s->name);
        return it->second;
    }
    case skind::cons: {
        vref rest = eval_sterm(s->rest, e, reg);
        std::vector<vref> es = rest->elems;
        es.push_back(eval_xterm(s->elem, e));
        return mk_vset(std::move(es));
    }
    case skind::interval: {
        vref lo = eval_xterm(s->lo, e), hi = eval_xterm(s->hi, e);
        if (lo->kind != vkind::num || hi->kind != vkind::num)
            throw eval_error("interval bounds must be integers");
        std::vector<vref> es;
        for (long long v = lo->n; v <= hi->n; ++v)
            es.push_back(mk_vnum(v));
        return mk_vset(std::move(es));
    }
    case skind::ris: {
        const ris_term& r = *s->ris;
        vref dom = eval_sterm(r.dom, e, reg);
        std::vector<vref> out;
        for (auto& d : dom->elems) {
            env scratch = e;
            if (!odetail::match_ctrl_value(r.ctrl, d, scratch))
                continue;  // the element cannot instantiate the control term
            if (!odetail::derive_params(r.params, r.funcpreds, scratch, reg))
                continue;
            if (!eval_filter(r.filter, scratch, reg))
                continue;
            out.push_back(eval_xterm(r.pattern, scratch));
        }
        return mk_vset(std::move(out));
    }
    }
    throw eval_error("malformed set term");
}

inline bool eval_xatom_full(const xatom& a, const env& e, const funcpred_registry& reg) {
    if (a.kind == xatom_kind::member) {
        vref el, st;
        try {
            el = eval_xterm(a.elem, e);
            st = eval_sterm(a.set, e, reg);
        } catch (const eval_error& err) {
            if (std::string(err.what()).rfind("unbound", 0) == 0)
                throw;
            return false;
        }
        return set_contains(st, el) == a.positive;
    }
    return eval_ground(a, e, reg);
}

inline bool eval_filter(const xformula& f, const env& e, const funcpred_registry& reg) {
    switch (f.kind) {
    case xf_kind::atom:
        return eval_xatom_full(f.at, e, reg);
    case xf_kind::conj:
        for (auto& g : f.sub)
            if (!eval_filter(g, e, reg))
                return false;
        return true;
    case xf_kind::disj:
        for (auto& g : f.sub)
            if (eval_filter(g, e, reg))
                return true;
        return false;
    }
    return false;
}

inline bool eval_constraint(const constraint& c, const env& e, const funcpred_registry& reg) {
    auto S = [&](const sref& s) { return eval_sterm(s, e, reg); };
    switch (c.k) {
    case ckind::truec:
        return true;
    case ckind::falsec:
        return false;
    case ckind::eq:
        return value_eq(S(c.s1), S(c.s2));
    case ckind::neq:
        return !value_eq(S(c.s1), S(c.s2));
    case ckind::in:
        return set_contains(S(c.s1), eval_xterm(c.x1, e));
    case ckind::nin:
        return !set_contains(S(c.s1), eval_xterm(c.x1, e));
    case ckind::un:
        return value_eq(set_union(S(c.s1), S(c.s2)), S(c.s3));
    case ckind::nun:
        return !value_eq(set_union(S(c.s1), S(c.s2)), S(c.s3));
    case ckind::disj:
        return sets_disjoint(S(c.s1), S(c.s2));
    case ckind::ndisj:
        return !sets_disjoint(S(c.s1), S(c.s2));
    case ckind::subset:
        return set_subset(S(c.s1), S(c.s2));
    case ckind::nsubset:
        return !set_subset(S(c.s1), S(c.s2));
    case ckind::inters:
        return value_eq(set_inter(S(c.s1), S(c.s2)), S(c.s3));
    case ckind::ninters:
        return !value_eq(set_inter(S(c.s1), S(c.s2)), S(c.s3));
    case ckind::diff:
        return value_eq(set_diff(S(c.s1), S(c.s2)), S(c.s3));
    case ckind::ndiff:
        return !value_eq(set_diff(S(c.s1), S(c.s2)), S(c.s3));
    case ckind::foreach_c:
    case ckind::nforeach_c: {
        const foreach_data& fe = *c.fe;
        vref dom = eval_sterm(fe.dom, e, reg);
        bool all = true;
        for (auto& d : dom->elems) {
            env scratch = e;
            if (!odetail::match_ctrl_value(fe.ctrl, d, scratch)) {
                all = false;  // an element outside the control shape falsifies the RUQ
                break;
            }
            if (!odetail::derive_params(fe.params, fe.funcpreds, scratch, reg) ||
                !eval_filter(fe.body, scratch, reg)) {
                all = false;
                break;
            }
        }
        return c.k == ckind::foreach_c ? all : !all;
    }
    case ckind::sort_set: {
        if (c.s1)
            return true;
        return eval_xterm(c.x1, e)->kind == vkind::setv;
    }
    case ckind::sort_isx: {
        if (c.s1)
            return false;
        return eval_xterm(c.x1, e)->kind != vkind::setv;
    }
    case ckind::xconstr:
        return eval_xatom_full(c.xa, e, reg);
    }
    return false;
}

inline bool eval_formula(const formula& f, const env& e, const funcpred_registry& reg) {
    switch (f.kind) {
    case f_kind::atom:
        return eval_constraint(f.c, e, reg);
    case f_kind::conj:
        for (auto& g : f.sub)
            if (!eval_formula(g, e, reg))
                return false;
        return true;
    case f_kind::disj:
        for (auto& g : f.sub)
            if (eval_formula(g, e, reg))
                return true;
        return false;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Exhaustive search

struct oracle_options {
    std::vector<std::string> universe = {"a", "b", "c"};
    long long int_lo = -3, int_hi = 3;
    long long state_cap = 10000000;  // candidate-assignment budget
};

namespace odetail {

inline void collect_pattern_terms(const formula& f, std::vector<sref>& ris_terms) {
    std::function<void(const sref&)> walk_s = [&](const sref& s) {
        if (!s)
            return;
        if (s->kind == skind::cons) {
            walk_s(s->rest);
        } else if (s->kind == skind::ris) {
            ris_terms.push_back(s);
            walk_s(s->ris->dom);
        }
    };
    std::function<void(const formula&)> walk_f = [&](const formula& g) {
        if (g.kind != f_kind::atom) {
            for (auto& h : g.sub)
                walk_f(h);
            return;
        }
        const constraint& c = g.c;
        walk_s(c.s1);
        walk_s(c.s2);
        walk_s(c.s3);
        if (c.fe)
            walk_s(c.fe->dom);
    };
    walk_f(f);
}

inline void collect_ground_elements(const formula& f, std::vector<vref>& out) {
    std::function<void(const xref&)> walk_x = [&](const xref& t) {
        if (!t)
            return;
        var_set fv = free_vars(t);
        if (fv.xvars.empty() && t->kind != xkind::arith) {
            env e;
            try {
                out.push_back(eval_xterm(t, e));
            } catch (const eval_error&) {
            }
        }
        if (t->kind == xkind::pair || t->kind == xkind::arith) {
            walk_x(t->a);
            walk_x(t->b);
        }
    };
    std::function<void(const sref&)> walk_s = [&](const sref& s) {
        if (!s)
            return;
        if (s->kind == skind::cons) {
            walk_x(s->elem);
            walk_s(s->rest);
        } else if (s->kind == skind::ris) {
            walk_s(s->ris->dom);
        } else if (s->kind == skind::interval) {
            env e;
            try {
                vref lo = eval_xterm(s->lo, e), hi = eval_xterm(s->hi, e);
                for (long long v = lo->n; v <= hi->n && v - lo->n < 64; ++v)
                    out.push_back(mk_vnum(v));
            } catch (const eval_error&) {
            }
        }
    };
    std::function<void(const formula&)> walk_f = [&](const formula& g) {
        if (g.kind != f_kind::atom) {
            for (auto& h : g.sub)
                walk_f(h);
            return;
        }
        const constraint& c = g.c;
        walk_s(c.s1);
        walk_s(c.s2);
        walk_s(c.s3);
        walk_x(c.x1);
        if (c.k == ckind::xconstr && c.xa.kind == xatom_kind::cmp) {
            walk_x(c.xa.a);
            walk_x(c.xa.b);
        }
    };
    walk_f(f);
}

}  // namespace odetail

struct oracle_verdict {
    bool sat = false;
    env witness;
};

// exhaustive ground search: X variables range over the element universe,
// set variables over all subsets of the universe closed (one application
// round) under the pattern images occurring in the formula
inline oracle_verdict brute_force_sat(const formula& phi, const oracle_options& opt,
                                      const funcpred_registry& reg) {
    var_set vars = free_vars(phi);

    // base element universe
    std::vector<vref> base;
    for (auto& c : opt.universe)
        base.push_back(mk_vcst(c));
    for (long long v = opt.int_lo; v <= opt.int_hi; ++v)
        base.push_back(mk_vnum(v));
    odetail::collect_ground_elements(phi, base);
    {
        std::vector<vref> dedup;
        for (auto& v : base) {
            bool seen = false;
            for (auto& w : dedup)
                seen = seen || value_eq(v, w);
            if (!seen)
                dedup.push_back(v);
        }
        base = std::move(dedup);
    }

    // one round of pattern-image closure
    std::vector<sref> ris_terms;
    odetail::collect_pattern_terms(phi, ris_terms);
    std::vector<vref> closure = base;
    for (auto& rt : ris_terms) {
        const ris_term& r = *rt->ris;
        if (xequal(r.pattern, r.ctrl))
            continue;
        var_set pv = free_vars(phi);
        for (auto& u : base) {
            env scratch;
            if (!odetail::match_ctrl_value(r.ctrl, u, scratch))
                continue;
            // free variables of the pattern beyond the control also range
            // over the base universe (single instantiation round)
            var_set pfv;
            {
                std::set<std::string> bound;
                ctrl_vars(r.ctrl, bound);
                for (auto& p : r.params)
                    bound.insert(p->name);
                detail::fv_x(r.pattern, bound, pfv);
            }
            std::vector<std::string> fvs(pfv.xvars.begin(), pfv.xvars.end());
            std::function<void(size_t)> inst = [&](size_t i) {
                if (i == fvs.size()) {
                    try {
                        if (odetail::derive_params(r.params, r.funcpreds, scratch, reg))
                            closure.push_back(eval_xterm(r.pattern, scratch));
                    } catch (const eval_error&) {
                    }
                    return;
                }
                for (auto& w : base) {
                    scratch.xvals[fvs[i]] = w;
                    inst(i + 1);
                }
                scratch.xvals.erase(fvs[i]);
            };
            inst(0);
        }
    }
    {
        std::vector<vref> dedup;
        for (auto& v : closure) {
            bool seen = false;
            for (auto& w : dedup)
                seen = seen || value_eq(v, w);
            if (!seen)
                dedup.push_back(v);
        }
        closure = std::move(dedup);
    }

    // state-count guard
    long double states = 1;
    for (size_t i = 0; i < vars.xvars.size(); ++i)
        states *= static_cast<long double>(base.size());
    for (size_t i = 0; i < vars.svars.size(); ++i)
        states *= std::pow(2.0L, static_cast<long double>(closure.size()));
    if (states > static_cast<long double>(opt.state_cap))
        throw universe_too_large("oracle: " + std::to_string(static_cast<double>(states)) +
                                 " candidate assignments exceed the cap");

    std::vector<std::string> xv(vars.xvars.begin(), vars.xvars.end());
    std::vector<std::string> sv(vars.svars.begin(), vars.svars.end());

    // conjunct pruning: evaluate each top-level conjunct as soon as its
    // variables are assigned
    std::vector<formula> conjuncts;
    std::function<void(const formula&)> flat = [&](const formula& g) {
        if (g.kind == f_kind::conj) {
            for (auto& h : g.sub)
                flat(h);
        } else {
            conjuncts.push_back(g);
        }
    };
    flat(phi);
    struct cj {
        const formula* f;
        std::set<std::string> xs, ss;
    };
    std::vector<cj> cjs;
    for (auto& g : conjuncts) {
        var_set fv = free_vars(g);
        cjs.push_back({&g, fv.xvars, fv.svars});
    }

    env e;
    oracle_verdict out;
    size_t nsub = closure.size();

    std::function<bool(size_t)> assign_s;
    std::function<bool(size_t)> assign_x = [&](size_t i) -> bool {
        if (i == xv.size())
            return assign_s(0);
        for (auto& v : base) {
            e.xvals[xv[i]] = v;
            bool ok = true;
            for (auto& c : cjs) {
                if (!c.ss.empty() || c.xs.find(xv[i]) == c.xs.end())
                    continue;
                bool all = true;
                for (auto& n : c.xs)
                    all = all && e.xvals.count(n);
                if (all && !eval_formula(*c.f, e, reg)) {
                    ok = false;
                    break;
                }
            }
            if (ok && assign_x(i + 1))
                return true;
        }
        e.xvals.erase(xv[i]);
        return false;
    };

    assign_s = [&](size_t i) -> bool {
        if (i == sv.size()) {
            if (eval_formula(phi, e, reg)) {
                out.sat = true;
                out.witness = e;
                return true;
            }
            return false;
        }
        // enumerate subsets of the closed universe
        std::vector<unsigned> idx;
        unsigned long long limit = 1ULL << nsub;
        for (unsigned long long mask = 0; mask < limit; ++mask) {
            std::vector<vref> es;
            for (size_t b = 0; b < nsub; ++b)
                if (mask & (1ULL << b))
                    es.push_back(closure[b]);
            e.svals[sv[i]] = mk_vset(std::move(es));
            bool ok = true;
            for (auto& c : cjs) {
                bool all = true;
                for (auto& n : c.xs)
                    all = all && e.xvals.count(n);
                for (auto& n : c.ss)
                    all = all && e.svals.count(n);
                if (all && c.ss.count(sv[i]) && !eval_formula(*c.f, e, reg)) {
                    ok = false;
                    break;
                }
            }
            if (ok && assign_s(i + 1))
                return true;
        }
        e.svals.erase(sv[i]);
        return false;
    };

    assign_x(0);
    return out;
}

}  // namespace risolve

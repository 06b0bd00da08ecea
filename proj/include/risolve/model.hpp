#pragma once

#include "risolve/oracle.hpp"

// Solved-form recognition and constructive model extraction: solve a small
// integer system over nesting depths and emit the nested-empty-set valuation
// {{}, {{}}, ...}; every produced model is re-checked against the solved
// store by ground evaluation.

namespace risolve {

struct internal_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace mdetail {

inline bool var_occurs_elsewhere_raw(const std::vector<constraint>& store, size_t skip,
                                     const std::string& name) {
    for (size_t i = 0; i < store.size(); ++i) {
        if (i == skip)
            continue;
        if (store[i].k == ckind::sort_set || store[i].k == ckind::sort_isx)
            continue;
        var_set vs;
        collect_free_vars(store[i], vs);
        if (vs.svars.count(name))
            return true;
    }
    return false;
}

// equations that merely name a variable used nowhere else (X = S with X not
// occurring in any other atom); an occurrence inside such a right-hand side
// does not block the solved side conditions of other atoms
inline std::set<size_t> inert_bindings(const std::vector<constraint>& store) {
    std::set<size_t> out;
    for (size_t i = 0; i < store.size(); ++i) {
        const constraint& c = store[i];
        if (c.k != ckind::eq)
            continue;
        auto side = [&](const sref& x) {
            return x && x->kind == skind::var && !var_occurs_elsewhere_raw(store, i, x->name);
        };
        if (side(c.s1) || side(c.s2))
            out.insert(i);
    }
    return out;
}

inline bool var_occurs_elsewhere(const std::vector<constraint>& store, size_t skip,
                                 const std::string& name) {
    std::set<size_t> inert = inert_bindings(store);
    for (size_t i = 0; i < store.size(); ++i) {
        if (i == skip || inert.count(i))
            continue;
        if (store[i].k == ckind::sort_set || store[i].k == ckind::sort_isx)
            continue;
        var_set vs;
        collect_free_vars(store[i], vs);
        if (vs.svars.count(name))
            return true;
    }
    return false;
}

// is a variable named n the domain of a variable-RIS used as an argument of
// an =, nin or un constraint (the remove_neq trigger), or itself a un/foreach
// argument
inline bool neq_guarded(const std::vector<constraint>& store, const std::string& n) {
    auto dom_hit = [&](const sref& s) {
        return s && is_variable_ris(s) && innermost_var(s) == n;
    };
    auto var_hit = [&](const sref& s) { return s && s->kind == skind::var && s->name == n; };
    for (auto& c : store) {
        switch (c.k) {
        case ckind::un:
            if (var_hit(c.s1) || var_hit(c.s2) || var_hit(c.s3) || dom_hit(c.s1) ||
                dom_hit(c.s2) || dom_hit(c.s3))
                return true;
            break;
        case ckind::eq:
            if (dom_hit(c.s1) || dom_hit(c.s2))
                return true;
            break;
        case ckind::nin:
            if (dom_hit(c.s1))
                return true;
            break;
        case ckind::foreach_c:
            if (var_hit(c.fe->dom) || dom_hit(c.fe->dom))
                return true;
            break;
        default:
            break;
        }
    }
    return false;
}

}  // namespace mdetail

// one atom of Def-style solved form; the store-wide side conditions need the
// surrounding conjunction
inline bool is_solved_atom(const std::vector<constraint>& store, size_t i) {
    const constraint& c = store[i];
    switch (c.k) {
    case ckind::truec:
        return true;
    case ckind::eq: {
        bool vr1 = is_var_or_varris(c.s1), vr2 = is_var_or_varris(c.s2);
        bool el1 = empty_like(c.s1), el2 = empty_like(c.s2);
        // variable-RIS = empty, or two variable-RIS
        if ((is_variable_ris(c.s1) && (el2 || is_variable_ris(c.s2))) ||
            (is_variable_ris(c.s2) && el1))
            return true;
        // X = S with X not in S nor elsewhere (X may be the RIS's own
        // domain); S is a non-RIS term or a variable-RIS
        auto side_ok = [&](const sref& x, const sref& s) {
            if (!x || x->kind != skind::var)
                return false;
            if (s->kind == skind::ris && !is_variable_ris(s) && !empty_like(s))
                return false;
            var_set fv = free_vars(s);
            if (fv.svars.count(x->name)) {
                if (!(is_variable_ris(s) && innermost_var(s) == x->name))
                    return false;
            }
            return !mdetail::var_occurs_elsewhere(store, i, x->name);
        };
        if (side_ok(c.s1, c.s2) || side_ok(c.s2, c.s1))
            return true;
        (void)vr1;
        (void)vr2;
        return false;
    }
    case ckind::neq: {
        auto side_ok = [&](const sref& x, const sref& s) {
            if (!x || x->kind != skind::var)
                return false;
            var_set fv = free_vars(s);
            if (fv.svars.count(x->name))
                return false;
            if (s->kind == skind::ris)
                return false;
            return !mdetail::neq_guarded(store, x->name);
        };
        return side_ok(c.s1, c.s2) || side_ok(c.s2, c.s1);
    }
    case ckind::nin:
        return is_var_or_varris(c.s1);
    case ckind::un:
        return is_var_or_varris(c.s1) && is_var_or_varris(c.s2) && is_var_or_varris(c.s3) &&
               !(c.s1->kind == skind::var && c.s2->kind == skind::var &&
                 c.s1->name == c.s2->name);
    case ckind::disj:
        return is_var_or_varris(c.s1) && is_var_or_varris(c.s2) && !alpha_equal(c.s1, c.s2);
    case ckind::foreach_c:
        return is_var_or_varris(c.fe->dom);
    case ckind::sort_set: {
        if (!c.s1 || c.s1->kind != skind::var)
            return false;
        for (auto& d : store)
            if (d.k == ckind::sort_isx && d.x1 && d.x1->kind == xkind::var &&
                d.x1->name == c.s1->name)
                return false;
        return true;
    }
    case ckind::sort_isx:
        return c.x1 && c.x1->kind == xkind::var;
    default:
        return false;
    }
}

inline bool is_solved_form(const std::vector<constraint>& store) {
    for (size_t i = 0; i < store.size(); ++i)
        if (!is_solved_atom(store, i))
            return false;
    return true;
}

// ---------------------------------------------------------------------------
// Depth system: one natural number per set variable; domains of RIS terms
// are pinned to depth 0 and disequations are harvested from the neq and nin
// atoms through the find function (the set of depths at which a variable
// occurs in a term).

struct depth_system {
    std::map<std::string, long long> depth;
    std::set<std::string> fresh_witness;  // variables that needed the fallback
};

namespace mdetail {

inline void find_depths(const std::string& x, const sref& t, long long base,
                        std::set<long long>& out) {
    if (!t)
        return;
    switch (t->kind) {
    case skind::var:
        if (t->name == x)
            out.insert(base);
        return;
    case skind::cons:
        // elements are X-sorted and cannot contain set variables
        find_depths(x, t->rest, base, out);
        return;
    default:
        return;
    }
}

// is t literally a nested-empty chain {{}, ...}; returns its depth
inline std::optional<long long> empty_depth(const sref& t) {
    if (empty_like(t))
        return 0;
    return std::nullopt;
}

struct diseq {
    std::string var;
    std::optional<std::string> other;  // n_var != n_other + c
    long long c = 0;
};

}  // namespace mdetail

inline depth_system solve_depth_system(const std::vector<constraint>& store) {
    using namespace mdetail;
    depth_system out;

    // variables of the store, excluding left-hand sides of solved equations
    std::set<std::string> lhs;
    std::set<std::string> domvars;
    std::set<std::string> vars;
    for (size_t i = 0; i < store.size(); ++i) {
        const constraint& c = store[i];
        var_set vs;
        collect_free_vars(c, vs);
        vars.insert(vs.svars.begin(), vs.svars.end());
        if (c.k == ckind::eq) {
            auto lhs_side = [&](const sref& x, const sref& s) {
                if (x && x->kind == skind::var && !var_occurs_elsewhere(store, i, x->name)) {
                    var_set fv = free_vars(s);
                    if (!fv.svars.count(x->name) ||
                        (is_variable_ris(s) && innermost_var(s) == x->name))
                        lhs.insert(x->name);
                }
            };
            lhs_side(c.s1, c.s2);
            if (!lhs.count(c.s1 && c.s1->kind == skind::var ? c.s1->name : ""))
                lhs_side(c.s2, c.s1);
        }
    }
    std::function<void(const sref&)> domwalk = [&](const sref& s) {
        if (!s)
            return;
        if (s->kind == skind::ris) {
            if (is_variable_ris(s))
                domvars.insert(innermost_var(s));
            domwalk(s->ris->dom);
        } else if (s->kind == skind::cons) {
            domwalk(s->rest);
        }
    };
    for (auto& c : store) {
        domwalk(c.s1);
        domwalk(c.s2);
        domwalk(c.s3);
        if (c.fe)
            domwalk(c.fe->dom);
    }

    // disequations
    std::vector<diseq> ds;
    for (auto& c : store) {
        if (c.k != ckind::neq)
            continue;
        auto harvest = [&](const sref& xs, const sref& t) {
            if (!xs || xs->kind != skind::var || lhs.count(xs->name))
                return;
            if (auto d = empty_depth(t)) {
                ds.push_back({xs->name, std::nullopt, *d});
                return;
            }
            for (auto& y : vars) {
                std::set<long long> cs;
                find_depths(y, t, 0, cs);
                for (long long cc : cs)
                    ds.push_back({xs->name, y, cc});
            }
        };
        harvest(c.s1, c.s2);
        harvest(c.s2, c.s1);
    }

    // greedy minimal solution; domain variables are pinned to 0
    std::vector<std::string> order;
    for (auto& v : vars)
        if (!lhs.count(v))
            order.push_back(v);
    std::sort(order.begin(), order.end());

    auto assign = [&]() {
        for (auto& v : order) {
            if (domvars.count(v)) {
                out.depth[v] = 0;
                continue;
            }
            long long n = 0;
            bool again = true;
            while (again) {
                again = false;
                for (auto& d : ds) {
                    long long forbidden;
                    if (d.var == v && !d.other) {
                        forbidden = d.c;
                    } else if (d.var == v && d.other && out.depth.count(*d.other)) {
                        forbidden = out.depth[*d.other] + d.c;
                    } else if (d.other && *d.other == v && out.depth.count(d.var)) {
                        forbidden = out.depth[d.var] - d.c;
                    } else {
                        continue;
                    }
                    if (n == forbidden) {
                        ++n;
                        again = true;
                    }
                }
            }
            out.depth[v] = n;
        }
    };
    assign();
    // two passes settle mutual references
    assign();

    // a RIS domain pinned to 0 while some disequation forbids 0 needs the
    // fresh-constant fallback
    for (auto& v : order) {
        if (!domvars.count(v))
            continue;
        for (auto& d : ds) {
            if (d.var != v)
                continue;
            long long forbidden = !d.other ? d.c
                                  : out.depth.count(*d.other) ? out.depth[*d.other] + d.c
                                                              : -1;
            if (forbidden == 0)
                out.fresh_witness.insert(v);
        }
    }

    // disjointness between two nonempty singleton depth sets needs distinct
    // depths
    bool changed = true;
    int rounds = 0;
    while (changed && rounds++ < 64) {
        changed = false;
        for (auto& c : store) {
            if (c.k != ckind::disj)
                continue;
            auto eff = [&](const sref& s) -> std::optional<std::string> {
                if (s->kind == skind::var)
                    return s->name;
                if (is_variable_ris(s))
                    return std::nullopt;  // evaluates to {} anyway
                return std::nullopt;
            };
            auto a = eff(c.s1), b = eff(c.s2);
            if (!a || !b || *a == *b)
                continue;
            long long na = out.depth.count(*a) ? out.depth[*a] : 0;
            long long nb = out.depth.count(*b) ? out.depth[*b] : 0;
            if (na != 0 && na == nb) {
                ds.push_back({*a, *b, 0});
                assign();
                assign();
                changed = true;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model extraction

inline vref nested_empty(long long n) {
    vref v = mk_vempty();
    for (long long i = 0; i < n; ++i)
        v = mk_vset({v});
    return v;
}

// turn a solved store plus an X witness into a total ground assignment; the
// produced model is verified against the store (internal_error on failure)
inline env extract_model(const std::vector<constraint>& store, const env& xwitness,
                         const funcpred_registry& reg, var_gen& vg) {
    env model;
    model.xvals = xwitness.xvals;

    // default values for X variables no literal constrained
    var_set all;
    for (auto& c : store)
        collect_free_vars(c, all);
    for (auto& x : all.xvars)
        if (!model.xvals.count(x))
            model.xvals[x] = mk_vcst(vg.fresh("x"));

    depth_system sys = solve_depth_system(store);
    for (auto& [v, n] : sys.depth) {
        if (sys.fresh_witness.count(v))
            model.svals[v] = mk_vset({mk_vcst(vg.fresh("w"))});
        else
            model.svals[v] = nested_empty(n);
    }

    // left-hand sides of solved equations get the value induced by the
    // right-hand side; a variable that is its own RIS domain resolves to {}
    bool progress = true;
    int rounds = 0;
    while (progress && rounds++ < static_cast<int>(store.size()) + 2) {
        progress = false;
        for (size_t i = 0; i < store.size(); ++i) {
            const constraint& c = store[i];
            if (c.k != ckind::eq)
                continue;
            auto take = [&](const sref& x, const sref& rhs) {
                if (!x || x->kind != skind::var || model.svals.count(x->name))
                    return;
                var_set fv = free_vars(rhs);
                if (fv.svars.count(x->name))
                    model.svals[x->name] = mk_vempty();  // X = {c : X | F} style
                for (auto& y : fv.svars)
                    if (!model.svals.count(y))
                        return;
                try {
                    model.svals[x->name] = eval_sterm(rhs, model, reg);
                    progress = true;
                } catch (const eval_error&) {
                }
            };
            bool v1 = c.s1 && c.s1->kind == skind::var && !model.svals.count(c.s1->name) &&
                      !mdetail::var_occurs_elsewhere(store, i, c.s1->name);
            bool v2 = c.s2 && c.s2->kind == skind::var && !model.svals.count(c.s2->name) &&
                      !mdetail::var_occurs_elsewhere(store, i, c.s2->name);
            if (v1)
                take(c.s1, c.s2);
            else if (v2)
                take(c.s2, c.s1);
        }
    }
    for (auto& v : all.svars)
        if (!model.svals.count(v))
            model.svals[v] = mk_vempty();

    // the produced assignment must satisfy every solved atom
    for (auto& c : store) {
        bool ok = false;
        try {
            ok = eval_constraint(c, model, reg);
        } catch (const std::exception&) {
            ok = false;
        }
        if (!ok)
            throw internal_error("extracted model does not satisfy solved atom: " + pretty(c));
    }
    return model;
}

}  // namespace risolve

#pragma once

#include "risolve/engine.hpp"

// Static classification of input formulas as admissible or not: the tau
// transform keeps only union constraints, set terms are classified by the
// T function (S for ground chains, P(.) for RIS whose pattern differs from
// the control term, U(.,.) for union results), and the formula is
// non-admissible when the resulting equation system forces a variable to
// absorb a P-image of its own content. The dependency question is decided
// as a positive-net-weight cycle search over a variable flow graph, which
// reproduces the worked classification examples.

namespace risolve {

struct admissibility_result {
    bool admissible = true;
    std::string witness;       // offending equation, T-grammar notation
};

namespace adetail {

// classification term
struct tnode {
    enum class k { ground, var, p, u } kind = k::ground;
    std::string var;
    std::shared_ptr<tnode> a, b;
};
using tref = std::shared_ptr<tnode>;

inline tref t_ground() {
    auto n = std::make_shared<tnode>();
    n->kind = tnode::k::ground;
    return n;
}

inline tref t_var(std::string v) {
    auto n = std::make_shared<tnode>();
    n->kind = tnode::k::var;
    n->var = std::move(v);
    return n;
}

inline tref t_p(tref c) {
    auto n = std::make_shared<tnode>();
    n->kind = tnode::k::p;
    n->a = std::move(c);
    return n;
}

inline tref t_u(tref a, tref b) {
    auto n = std::make_shared<tnode>();
    n->kind = tnode::k::u;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

inline tref classify(const sref& s) {
    switch (s->kind) {
    case skind::empty:
        return t_ground();
    case skind::var:
        return t_var(s->name);
    case skind::cons:
        return classify(decompose(s).tail);
    case skind::interval:
        return t_ground();
    case skind::ris: {
        tref d = classify(s->ris->dom);
        if (alpha_equal(s->ris->pattern, s->ris->ctrl))
            return d;
        return t_p(std::move(d));
    }
    }
    return t_ground();
}

inline std::string t_str(const tref& t) {
    switch (t->kind) {
    case tnode::k::ground:
        return "S";
    case tnode::k::var:
        return "T(" + t->var + ")";
    case tnode::k::p:
        return "P(" + t_str(t->a) + ")";
    case tnode::k::u:
        return "U(" + t_str(t->a) + "," + t_str(t->b) + ")";
    }
    return "?";
}

inline void vars_with_depth(const tref& t, int depth,
                            std::vector<std::pair<std::string, int>>& out) {
    switch (t->kind) {
    case tnode::k::ground:
        return;
    case tnode::k::var:
        out.push_back({t->var, depth});
        return;
    case tnode::k::p:
        vars_with_depth(t->a, depth + 1, out);
        return;
    case tnode::k::u:
        vars_with_depth(t->a, depth, out);
        vars_with_depth(t->b, depth, out);
        return;
    }
}

struct uncon {
    sref a, b, c;
};

// occurrences of a set variable across a conjunction of constraints
inline std::map<std::string, std::vector<size_t>> occurrences(
    const std::vector<constraint>& atoms) {
    std::map<std::string, std::vector<size_t>> occ;
    for (size_t i = 0; i < atoms.size(); ++i) {
        var_set vs;
        collect_free_vars(atoms[i], vs);
        for (auto& v : vs.svars)
            occ[v].push_back(i);
    }
    return occ;
}

inline bool check_disjunct(const std::vector<constraint>& atoms, var_gen& vg,
                           std::string& witness) {
    // build the union-constraint list
    struct tagged_un {
        uncon u;
        size_t origin;     // atom index driving removability ("occurs elsewhere")
        bool from_eq;
    };
    std::vector<tagged_un> uns;
    for (size_t i = 0; i < atoms.size(); ++i) {
        const constraint& c = atoms[i];
        switch (c.k) {
        case ckind::un:
            uns.push_back({{c.s1, c.s2, c.s3}, i, false});
            break;
        case ckind::eq:
            if (!empty_like(c.s1) && !empty_like(c.s2)) {
                uns.push_back({{c.s1, c.s2, c.s2}, i, true});
                uns.push_back({{c.s2, c.s1, c.s1}, i, true});
            }
            break;
        case ckind::foreach_c: {
            const foreach_data& fe = *c.fe;
            sref r = mk_ris(fe.ctrl, fe.dom, fe.body, fe.ctrl, fe.params, fe.funcpreds);
            uns.push_back({{fe.dom, r, r}, i, false});
            break;
        }
        default:
            break;
        }
    }

    std::map<std::string, std::vector<size_t>> occ = occurrences(atoms);

    // drop removable union constraints: all three arguments variables or
    // variable-RIS whose innermost domain variables occur nowhere else
    {
        std::vector<tagged_un> kept;
        for (auto& tu : uns) {
            bool removable = !tu.from_eq;
            std::set<std::string> domvars;
            for (const sref& s : {tu.u.a, tu.u.b, tu.u.c}) {
                if (!is_var_or_varris(s)) {
                    removable = false;
                    break;
                }
                domvars.insert(innermost_var(s));
            }
            if (removable) {
                for (auto& v : domvars) {
                    auto& where = occ[v];
                    for (size_t w : where)
                        if (w != tu.origin)
                            removable = false;
                }
            }
            if (!removable)
                kept.push_back(tu);
        }
        uns = std::move(kept);
    }

    // flatten extensional arguments {x1..xn / B} (non-empty tail) into fresh
    // variables linked by an extra union constraint
    for (size_t i = 0; i < uns.size(); ++i) {
        auto flatten = [&](sref& arg) {
            if (!arg || arg->kind != skind::cons)
                return;
            cons_view v = decompose(arg);
            if (v.tail->kind == skind::empty)
                return;
            sref N = vg.fresh_s("N");
            uns.push_back({{mk_set(v.elems, mk_empty()), v.tail, N}, uns[i].origin, false});
            arg = N;
        };
        flatten(uns[i].u.a);
        flatten(uns[i].u.b);
        flatten(uns[i].u.c);
    }

    // equations and the flow graph: content of a right-hand variable flows
    // into each left-hand variable; the edge weight is the difference of the
    // P-depths on the two sides
    struct edge {
        int from, to;
        int w;
        size_t eqi;
    };
    std::vector<std::string> eq_strs;
    std::map<std::string, int> node_of;
    std::vector<std::string> node_names;
    auto node = [&](const std::string& v) {
        auto it = node_of.find(v);
        if (it != node_of.end())
            return it->second;
        int id = static_cast<int>(node_names.size());
        node_of[v] = id;
        node_names.push_back(v);
        return id;
    };
    std::vector<edge> edges;
    for (auto& tu : uns) {
        tref tc = classify(tu.u.c);
        tref ta = classify(tu.u.a);
        tref tb = classify(tu.u.b);
        size_t eqi = eq_strs.size();
        eq_strs.push_back(t_str(tc) + " = " + t_str(t_u(ta, tb)));
        std::vector<std::pair<std::string, int>> lhs, rhs;
        vars_with_depth(tc, 0, lhs);
        vars_with_depth(ta, 0, rhs);
        vars_with_depth(tb, 0, rhs);
        for (auto& [lv, lp] : lhs)
            for (auto& [rv, rp] : rhs)
                edges.push_back({node(rv), node(lv), rp - lp, eqi});
    }

    // positive-net-weight cycle detection (Bellman-Ford on negated weights)
    int n = static_cast<int>(node_names.size());
    if (n == 0)
        return true;
    std::vector<long long> dist(n, 0);
    std::vector<int> pre_edge(n, -1);
    int cycle_node = -1;
    for (int round = 0; round < n; ++round) {
        cycle_node = -1;
        for (size_t ei = 0; ei < edges.size(); ++ei) {
            const edge& e = edges[ei];
            if (dist[e.from] - e.w < dist[e.to]) {
                dist[e.to] = dist[e.from] - e.w;
                pre_edge[e.to] = static_cast<int>(ei);
                cycle_node = e.to;
            }
        }
        if (cycle_node == -1)
            break;
    }
    if (cycle_node == -1)
        return true;

    // walk predecessors to land inside the cycle, then report an equation
    // contributing a strictly positive edge
    int v = cycle_node;
    for (int i = 0; i < n; ++i)
        v = edges[static_cast<size_t>(pre_edge[v])].from;
    std::set<int> seen;
    int u = v;
    size_t report = edges[static_cast<size_t>(pre_edge[u])].eqi;
    while (!seen.count(u)) {
        seen.insert(u);
        const edge& e = edges[static_cast<size_t>(pre_edge[u])];
        if (e.w > 0)
            report = e.eqi;
        u = e.from;
    }
    witness = eq_strs[report];
    return false;
}

}  // namespace adetail

// tau transform to union constraints, per disjunct of the DNF
struct tau_form {
    std::vector<constraint> uns;
};

inline std::vector<tau_form> tau(const formula& phi, var_gen& vg) {
    formula expanded = expand_derived(phi, vg);
    std::vector<std::vector<constraint>> disjuncts;
    dnf(expanded, disjuncts);
    std::vector<tau_form> out;
    for (auto& d : disjuncts) {
        tau_form tf;
        for (auto& c : d) {
            if (c.k == ckind::un) {
                tf.uns.push_back(c);
            } else if (c.k == ckind::eq && !empty_like(c.s1) && !empty_like(c.s2)) {
                tf.uns.push_back(mk_c3(ckind::un, c.s1, c.s2, c.s2));
                tf.uns.push_back(mk_c3(ckind::un, c.s2, c.s1, c.s1));
            } else if (c.k == ckind::foreach_c) {
                const foreach_data& fe = *c.fe;
                sref r = mk_ris(fe.ctrl, fe.dom, fe.body, fe.ctrl, fe.params, fe.funcpreds);
                tf.uns.push_back(mk_c3(ckind::un, fe.dom, r, r));
            }
        }
        out.push_back(std::move(tf));
    }
    return out;
}

// a formula is non-admissible when any disjunct of its pure set part is
inline admissibility_result is_admissible(const formula& phi, var_gen& vg) {
    admissibility_result res;
    formula expanded = expand_derived(phi, vg);
    std::vector<std::vector<constraint>> disjuncts;
    dnf(expanded, disjuncts);
    for (auto& d : disjuncts) {
        std::string w;
        if (!adetail::check_disjunct(d, vg, w)) {
            res.admissible = false;
            res.witness = w;
            return res;
        }
    }
    return res;
}

}  // namespace risolve

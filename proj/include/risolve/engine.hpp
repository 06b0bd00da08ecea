#pragma once

#include "risolve/model.hpp"

#include <chrono>
#include <iostream>
#include <unordered_set>

// The rewriting system: sort inference and checking, the saturation loop
// over the rewriting procedures for =, neq, in, nin, un, disj and foreach,
// neq elimination, and depth-first search over the nondeterministic
// alternatives. Rule identifiers follow the catalog numbering and appear in
// --trace output.

namespace risolve {

struct timeout_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct solve_options {
    long long int_bound = 1000;
    long long depth_limit = 10000;   // rule applications per branch
    int timeout_ms = 0;              // 0 = none
    bool all_solutions = false;
    bool trace = false;
    std::ostream* trace_out = nullptr;
    int expansion_bound = 1024;
    long long x_node_cap = 2000000;
};

struct solution {
    std::vector<constraint> store;   // solved-form set constraints
    std::vector<xatom> xstore;       // residual X literals
    substitution sub;
    env xwitness;
    env model;
};

enum class solve_status { sat, unsat, timeout, nonadmissible, unknown };

struct solve_result {
    solve_status status = solve_status::unsat;
    std::vector<solution> solutions;
    bool bounded_warning = false;   // some branch died only by bound exhaustion
    bool depth_limit_hit = false;
    bool stuck = false;             // a branch reached no rule but is not solved
    std::string detail;
    long long rule_applications = 0;
    long long branches = 0;
};

namespace edetail {

struct goal {
    std::vector<constraint> store;
    std::vector<xatom> xstore;
    substitution sub;
    long long steps = 0;
    std::set<std::string> sorted;  // variables that already carry a sort atom
};

struct alt {
    std::vector<constraint> cons;
    std::vector<xatom> xlits;
    std::vector<std::pair<std::string, sref>> sbinds;
};

struct rewrite {
    std::string rule;
    std::vector<alt> alts;
};

// ---------------------------------------------------------------------------
// Shared rule helpers

struct ctrl_match_res {
    substitution bind;        // control variables -> matched pieces
    std::vector<xatom> lits;  // pair-split equalities for variable elements
};

inline std::optional<ctrl_match_res> ctrl_match(const xref& ctrl, const xref& d, var_gen& vg) {
    ctrl_match_res res;
    std::function<bool(const xref&, const xref&)> go = [&](const xref& c, const xref& t) {
        if (c->kind == xkind::var) {
            res.bind.bind_x(c->name, t, vg);
            return true;
        }
        // c is a pair of controls
        if (t->kind == xkind::pair)
            return go(c->a, t->a) && go(c->b, t->b);
        if (t->kind == xkind::var) {
            // split the variable element into a fresh instance of the control
            substitution ren;
            std::set<std::string> names;
            ctrl_vars(c, names);
            for (auto& n : names)
                ren.bind_x(n, vg.fresh_x(n), vg);
            xref inst = apply(ren, c, vg);
            res.lits.push_back(mk_cmp(cmp_op::eq, t, inst));
            for (auto& [n, v] : ren.xbinds())
                res.bind.bind_x(n, v, vg);
            return true;
        }
        return false;  // constants, integers and arithmetic never match a pair
    };
    if (!go(ctrl, d))
        return std::nullopt;
    return res;
}

// a conjunction piece produced by instantiating a filter
struct piece {
    std::vector<constraint> cons;
    std::vector<xatom> xlits;
    bool dead = false;
};

inline void dnf_xf(const xformula& f, std::vector<std::vector<xatom>>& out) {
    switch (f.kind) {
    case xf_kind::atom:
        out.push_back({f.at});
        return;
    case xf_kind::disj: {
        for (auto& g : f.sub) {
            std::vector<std::vector<xatom>> part;
            dnf_xf(g, part);
            for (auto& p : part)
                out.push_back(std::move(p));
        }
        return;
    }
    case xf_kind::conj: {
        std::vector<std::vector<xatom>> acc{{}};
        for (auto& g : f.sub) {
            std::vector<std::vector<xatom>> part;
            dnf_xf(g, part);
            std::vector<std::vector<xatom>> next;
            for (auto& base : acc)
                for (auto& p : part) {
                    std::vector<xatom> merged = base;
                    merged.insert(merged.end(), p.begin(), p.end());
                    next.push_back(std::move(merged));
                }
            acc = std::move(next);
        }
        for (auto& p : acc)
            out.push_back(std::move(p));
        return;
    }
    }
}

// split a DNF conjunct into store constraints (membership) and X literals
inline std::vector<piece> pieces_of(const xformula& f) {
    std::vector<std::vector<xatom>> dnf;
    dnf_xf(f, dnf);
    std::vector<piece> out;
    for (auto& conj : dnf) {
        piece p;
        for (auto& a : conj) {
            if (a.kind == xatom_kind::truth) {
                if (!a.truth)
                    p.dead = true;
                continue;
            }
            if (a.kind == xatom_kind::member) {
                p.cons.push_back(mk_mem_c(a.positive ? ckind::in : ckind::nin, a.elem, a.set));
                continue;
            }
            p.xlits.push_back(a);
        }
        if (!p.dead)
            out.push_back(std::move(p));
    }
    return out;
}

inline sref ris_rest(const ris_term& r, sref newdom) {
    return mk_ris(r.ctrl, std::move(newdom), r.filter, r.pattern, r.params, r.funcpreds);
}

// first element / remaining domain of a non-variable RIS; nested RIS domains
// produce a side equation dom = {n / N} with fresh n, N
struct dom_split {
    bool ok = false;
    xref d;
    sref rest;                      // remaining domain
    std::vector<constraint> side;
};

inline dom_split split_domain(const ris_term& r, var_gen& vg) {
    dom_split out;
    if (empty_like(r.dom))
        return out;
    if (r.dom->kind == skind::cons) {
        out.ok = true;
        out.d = r.dom->elem;
        out.rest = r.dom->rest;
        return out;
    }
    if (r.dom->kind == skind::ris && !is_variable_ris(r.dom)) {
        xref n = vg.fresh_x("n");
        sref N = vg.fresh_s("N");
        out.ok = true;
        out.d = n;
        out.rest = N;
        out.side.push_back(mk_c2(ckind::eq, r.dom, mk_cons(n, N)));
        return out;
    }
    return out;
}

inline bool splittable_nonvar_ris(const sref& s) {
    if (!s || s->kind != skind::ris || is_variable_ris(s) || empty_like(s))
        return false;
    return s->ris->dom->kind == skind::cons ||
           (s->ris->dom->kind == skind::ris && !is_variable_ris(s->ris->dom));
}

// reductions of the sort constraints set(t) / isX(t); nullopt = irreducible
struct sort_step {
    const char* rule;
    bool decided;       // reduces to true/false rather than another atom
    bool value;
    constraint next;
};

inline std::optional<sort_step> sort_reduce(const constraint& c) {
    if (c.k == ckind::sort_set) {
        if (c.x1)
            return sort_step{"set4", true, false, {}};
        switch (c.s1->kind) {
        case skind::empty:
            return sort_step{"set1", true, true, {}};
        case skind::cons:
            return sort_step{"set2", false, false, mk_sort_c(ckind::sort_set, c.s1->rest)};
        case skind::ris:
        case skind::interval:
            return sort_step{"set3", true, true, {}};
        case skind::var:
            return std::nullopt;
        }
    }
    if (c.k == ckind::sort_isx) {
        if (c.s1) {
            switch (c.s1->kind) {
            case skind::empty:
                return sort_step{"isx1", true, false, {}};
            case skind::cons:
                return sort_step{"isx2", true, false, {}};
            case skind::ris:
            case skind::interval:
                return sort_step{"isx3", true, false, {}};
            case skind::var:
                // an isX constraint over a set-sorted variable is a clash
                return sort_step{"isx2", true, false, {}};
            }
        }
        if (c.x1->kind == xkind::var)
            return std::nullopt;
        return sort_step{"isx4", true, true, {}};
    }
    return std::nullopt;
}

// one instantiation of a RIS at a domain element: positive and negative
// filter branches plus the pattern instance, all sharing a single control
// match so that the split variables stay connected
struct ris_inst {
    bool clash = false;               // the element cannot instantiate the control
    std::vector<piece> pos;           // F(d) branches
    std::vector<piece> neg;           // not F(d) branches
    xref pat;                         // pattern under the positive instance
};

class rules {
  public:
    rules(const funcpred_registry& reg, var_gen& vg) : reg_(reg), vg_(vg) {}

    ris_inst instantiate(const ris_term& r, const xref& d) {
        ris_inst out;
        auto m = ctrl_match(r.ctrl, d, vg_);
        if (!m) {
            out.clash = true;
            return out;
        }
        substitution pos_s = m->bind;
        for (auto& p : r.params)
            pos_s.bind_x(p->name, vg_.fresh_x(p->name), vg_);
        xformula posf = xf_conj({apply(pos_s, r.funcpreds, vg_), apply(pos_s, r.filter, vg_)});
        out.pos = pieces_of(posf);
        out.pat = apply(pos_s, r.pattern, vg_);

        xformula negf;
        if (r.params.empty()) {
            negf = negate_filter(apply(m->bind, r.filter, vg_));
        } else {
            negf = negate_exists_filter(r.params, apply(m->bind, r.funcpreds, vg_),
                                        apply(m->bind, r.filter, vg_), reg_, vg_);
        }
        out.neg = pieces_of(negf);
        for (auto& p : out.pos)
            p.xlits.insert(p.xlits.begin(), m->lits.begin(), m->lits.end());
        for (auto& p : out.neg)
            p.xlits.insert(p.xlits.begin(), m->lits.begin(), m->lits.end());
        return out;
    }

    // filter instance of a chain of pattern=ctrl RIS levels (used by the
    // shared-variable equality rules)
    std::vector<piece> chain_filter(const sref& s, const xref& d) {
        if (s->kind != skind::ris)
            return {piece{}};
        auto inner = chain_filter(s->ris->dom, d);
        ris_inst here = instantiate(*s->ris, d);
        std::vector<piece> out;
        if (here.clash)
            return out;  // clash: unsatisfiable membership chain
        for (auto& a : inner)
            for (auto& b : here.pos) {
                piece p = a;
                p.cons.insert(p.cons.end(), b.cons.begin(), b.cons.end());
                p.xlits.insert(p.xlits.end(), b.xlits.begin(), b.xlits.end());
                out.push_back(std::move(p));
            }
        return out;
    }

    const funcpred_registry& reg_;
    var_gen& vg_;
};

}  // namespace edetail

// ---------------------------------------------------------------------------
// Derived-constraint expansion

inline formula expand_derived(const formula& f, var_gen& vg);

namespace edetail {

inline formula expand_atom(const constraint& c, var_gen& vg) {
    switch (c.k) {
    case ckind::subset:
        return f_atom(mk_c3(ckind::un, c.s1, c.s2, c.s2));
    case ckind::nsubset: {
        xref n = vg.fresh_x("n");
        return f_conj({f_atom(mk_mem_c(ckind::in, n, c.s1)),
                       f_atom(mk_mem_c(ckind::nin, n, c.s2))});
    }
    case ckind::inters: {
        // A int B = C  as  C = {x : A | x in B}
        xref x = vg.fresh_x("x");
        sref r = mk_ris(x, c.s1, xf_atom(mk_member(true, x, c.s2)), x);
        return f_atom(mk_c2(ckind::eq, c.s3, r));
    }
    case ckind::diff: {
        xref x = vg.fresh_x("x");
        sref r = mk_ris(x, c.s1, xf_atom(mk_member(false, x, c.s2)), x);
        return f_atom(mk_c2(ckind::eq, c.s3, r));
    }
    case ckind::nun: {
        xref n = vg.fresh_x("n");
        auto inn = [&](const sref& s) { return f_atom(mk_mem_c(ckind::in, n, s)); };
        auto ninn = [&](const sref& s) { return f_atom(mk_mem_c(ckind::nin, n, s)); };
        return f_disj({f_conj({inn(c.s3), ninn(c.s1), ninn(c.s2)}),
                       f_conj({inn(c.s1), ninn(c.s3)}), f_conj({inn(c.s2), ninn(c.s3)})});
    }
    case ckind::ndisj: {
        xref n = vg.fresh_x("n");
        return f_conj({f_atom(mk_mem_c(ckind::in, n, c.s1)),
                       f_atom(mk_mem_c(ckind::in, n, c.s2))});
    }
    case ckind::ninters: {
        xref n = vg.fresh_x("n");
        auto inn = [&](const sref& s) { return f_atom(mk_mem_c(ckind::in, n, s)); };
        auto ninn = [&](const sref& s) { return f_atom(mk_mem_c(ckind::nin, n, s)); };
        return f_disj({f_conj({inn(c.s3), ninn(c.s1)}), f_conj({inn(c.s3), ninn(c.s2)}),
                       f_conj({inn(c.s1), inn(c.s2), ninn(c.s3)})});
    }
    case ckind::ndiff: {
        xref n = vg.fresh_x("n");
        auto inn = [&](const sref& s) { return f_atom(mk_mem_c(ckind::in, n, s)); };
        auto ninn = [&](const sref& s) { return f_atom(mk_mem_c(ckind::nin, n, s)); };
        return f_disj({f_conj({inn(c.s3), ninn(c.s1)}), f_conj({inn(c.s3), inn(c.s2)}),
                       f_conj({inn(c.s1), ninn(c.s2), ninn(c.s3)})});
    }
    case ckind::nforeach_c: {
        // not (A subseteq {c : A | F}): a witness element escapes the RIS
        const foreach_data& fe = *c.fe;
        xref n = vg.fresh_x("n");
        sref r = mk_ris(fe.ctrl, fe.dom, fe.body, fe.ctrl, fe.params, fe.funcpreds);
        return f_conj({f_atom(mk_mem_c(ckind::in, n, fe.dom)),
                       f_atom(mk_mem_c(ckind::nin, n, r))});
    }
    default:
        return f_atom(c);
    }
}

}  // namespace edetail

inline formula expand_derived(const formula& f, var_gen& vg) {
    if (f.kind == f_kind::atom)
        return edetail::expand_atom(f.c, vg);
    formula g;
    g.kind = f.kind;
    for (auto& h : f.sub)
        g.sub.push_back(expand_derived(h, vg));
    return g;
}

// disjunctive normal form of a formula: a list of constraint conjunctions
inline void dnf(const formula& f, std::vector<std::vector<constraint>>& out) {
    switch (f.kind) {
    case f_kind::atom:
        out.push_back({f.c});
        return;
    case f_kind::disj:
        for (auto& g : f.sub)
            dnf(g, out);
        return;
    case f_kind::conj: {
        std::vector<std::vector<constraint>> acc{{}};
        for (auto& g : f.sub) {
            std::vector<std::vector<constraint>> part;
            dnf(g, part);
            std::vector<std::vector<constraint>> next;
            for (auto& base : acc)
                for (auto& p : part) {
                    auto merged = base;
                    merged.insert(merged.end(), p.begin(), p.end());
                    next.push_back(std::move(merged));
                }
            acc = std::move(next);
        }
        for (auto& p : acc)
            out.push_back(std::move(p));
        return;
    }
    }
}

// ---------------------------------------------------------------------------
// The engine

class engine {
  public:
    engine(const solve_options& opt, const funcpred_registry& reg, var_gen& vg)
        : opt_(opt), reg_(reg), vg_(vg), rl_(reg, vg) {
        if (opt.timeout_ms > 0)
            deadline_ = std::chrono::steady_clock::now() +
                        std::chrono::milliseconds(opt.timeout_ms);
    }

    solve_result solve(const formula& input) {
        solve_result res;
        var_set vs = free_vars(input);
        vg_.reserve_all(vs);
        formula expanded = expand_derived(input, vg_);
        std::vector<std::vector<constraint>> disjuncts;
        dnf(expanded, disjuncts);
        result_ = &res;
        try {
            for (auto& d : disjuncts) {
                edetail::goal g;
                bool dead = false;
                for (auto& c : d)
                    if (!intake(g, c))
                        dead = true;
                if (dead)
                    continue;
                ensure_sorts(g);
                if (!propagate(g))
                    continue;
                run(std::move(g));
                if (stop_)
                    break;
            }
        } catch (const timeout_error&) {
            res.status = solve_status::timeout;
            return res;
        }
        if (!res.solutions.empty())
            res.status = solve_status::sat;
        else if (res.depth_limit_hit || res.stuck)
            res.status = solve_status::unknown;
        else
            res.status = solve_status::unsat;
        return res;
    }

  private:
    solve_options opt_;
    const funcpred_registry& reg_;
    var_gen& vg_;
    edetail::rules rl_;
    std::chrono::steady_clock::time_point deadline_{};
    solve_result* result_ = nullptr;
    bool stop_ = false;
    std::unordered_set<std::string> visited_;       // explored goals, canonicalized
    std::unordered_set<std::string> seen_answers_;  // solution dedup

    // canonical form of a goal: atoms sorted, fresh variable names numbered
    // by first occurrence, so that branches differing only in fresh names or
    // atom order collapse
    static std::string signature(const edetail::goal& g) {
        std::vector<std::string> parts;
        for (auto& c : g.store) {
            if (c.k == ckind::sort_set || c.k == ckind::sort_isx)
                continue;
            parts.push_back(pretty(c));
        }
        for (auto& a : g.xstore)
            parts.push_back(pretty(mk_xc(a)));
        std::sort(parts.begin(), parts.end());
        std::string joined;
        for (auto& p : parts) {
            joined += p;
            joined += ';';
        }
        // rename fresh names (suffix _<digits>) in encounter order
        std::string out;
        std::map<std::string, int> names;
        size_t i = 0;
        while (i < joined.size()) {
            char c = joined[i];
            if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
                size_t j = i;
                while (j < joined.size() &&
                       (isalnum(static_cast<unsigned char>(joined[j])) || joined[j] == '_'))
                    ++j;
                std::string id = joined.substr(i, j - i);
                size_t us = id.rfind('_');
                bool fresh = us != std::string::npos && us + 1 < id.size();
                if (fresh)
                    for (size_t k = us + 1; k < id.size(); ++k)
                        fresh = fresh && isdigit(static_cast<unsigned char>(id[k]));
                if (fresh) {
                    auto [it, inserted] = names.emplace(id, static_cast<int>(names.size()));
                    (void)inserted;
                    out += "$" + std::to_string(it->second);
                } else {
                    out += id;
                }
                i = j;
            } else {
                out += c;
                ++i;
            }
        }
        return out;
    }

    void check_deadline() {
        if (opt_.timeout_ms > 0 && std::chrono::steady_clock::now() > deadline_)
            throw timeout_error("timeout");
    }

    // ---- store intake ------------------------------------------------------

    // returns false when the conjunct is already false
    bool intake(edetail::goal& g, const constraint& c0) {
        constraint c = normalize(c0);
        switch (c.k) {
        case ckind::truec:
            return true;
        case ckind::falsec:
            return false;
        case ckind::xconstr:
            g.xstore.push_back(c.xa);
            return true;
        case ckind::sort_set:
            if (c.s1 && c.s1->kind == skind::var)
                g.sorted.insert("S:" + c.s1->name);
            g.store.push_back(std::move(c));
            return true;
        case ckind::sort_isx:
            if (c.x1 && c.x1->kind == xkind::var)
                g.sorted.insert("X:" + c.x1->name);
            g.store.push_back(std::move(c));
            return true;
        default:
            g.store.push_back(std::move(c));
            return true;
        }
    }

    // expand ground intervals wherever they occur
    sref normalize_s(const sref& s) {
        if (!s)
            return s;
        switch (s->kind) {
        case skind::cons: {
            sref r = normalize_s(s->rest);
            if (r == s->rest)
                return s;
            return mk_cons(s->elem, r);
        }
        case skind::interval: {
            if (s->lo->kind == xkind::num && s->hi->kind == xkind::num) {
                long long m = s->lo->value, n = s->hi->value;
                if (n - m >= opt_.expansion_bound)
                    throw std::runtime_error("interval exceeds the expansion bound");
                std::vector<xref> es;
                for (long long v = m; v <= n; ++v)
                    es.push_back(mk_num(v));
                return mk_set(es, mk_empty());
            }
            return s;
        }
        case skind::ris: {
            const ris_term& r = *s->ris;
            sref d = normalize_s(r.dom);
            if (d == r.dom)
                return s;
            return mk_ris(r.ctrl, d, r.filter, r.pattern, r.params, r.funcpreds);
        }
        default:
            return s;
        }
    }

    constraint normalize(const constraint& c0) {
        constraint c = c0;
        c.s1 = normalize_s(c.s1);
        c.s2 = normalize_s(c.s2);
        c.s3 = normalize_s(c.s3);
        if (c.fe && c.fe->dom) {
            sref d = normalize_s(c.fe->dom);
            if (d != c.fe->dom) {
                auto fe = std::make_shared<foreach_data>(*c.fe);
                fe->dom = d;
                c.fe = fe;
            }
        }
        return c;
    }

    void ensure_sorts(edetail::goal& g) {
        var_set vs;
        for (auto& c : g.store)
            collect_free_vars(c, vs);
        for (auto& a : g.xstore)
            collect_free_vars(mk_xc(a), vs);
        for (auto& v : vs.svars) {
            if (g.sorted.insert("S:" + v).second)
                g.store.push_back(mk_sort_c(ckind::sort_set, mk_svar(v)));
        }
        for (auto& v : vs.xvars) {
            if (g.sorted.insert("X:" + v).second)
                g.store.push_back(mk_sort_c(ckind::sort_isx, nullptr, mk_xvar(v)));
        }
    }

    // ---- search ------------------------------------------------------------

    void trace_rule(const std::string& id, const constraint& c, size_t branches) {
        if (opt_.trace && opt_.trace_out)
            (*opt_.trace_out) << "rule=" << id << " before=" << pretty(c)
                              << " branches=" << branches << "\n";
    }

    void run(edetail::goal g) {
        while (true) {
            check_deadline();
            if (g.steps > opt_.depth_limit) {
                result_->depth_limit_hit = true;
                return;
            }
            // one applicable rule at a time, procedures in fixed order,
            // leftmost-oldest constraint first
            std::optional<std::pair<size_t, edetail::rewrite>> hit = find_rule(g);
            if (!hit) {
                // inner fixpoint reached: neq elimination, then the final phase
                std::optional<std::pair<size_t, edetail::rewrite>> rn = find_remove_neq(g);
                if (!rn) {
                    finish(std::move(g));
                    return;
                }
                hit = rn;
            }
            auto& [idx, rw] = *hit;
            trace_rule(rw.rule, g.store[idx], rw.alts.size());
            result_->rule_applications++;
            g.steps++;
            if (rw.alts.size() == 1) {
                if (!apply_alt(g, idx, rw.alts[0]))
                    return;  // branch failed
                continue;
            }
            for (size_t i = 0; i < rw.alts.size(); ++i) {
                check_deadline();
                edetail::goal g2 = g;
                if (!apply_alt(g2, idx, rw.alts[i]))
                    continue;
                if (!visited_.insert(signature(g2)).second)
                    continue;  // an identical goal was already explored
                run(std::move(g2));
                if (stop_)
                    return;
            }
            return;
        }
    }

    // returns false when the branch is now failed
    bool apply_alt(edetail::goal& g, size_t idx, const edetail::alt& a) {
        g.store.erase(g.store.begin() + static_cast<long>(idx));
        if (!a.sbinds.empty()) {
            substitution u;
            for (auto& [n, t] : a.sbinds) {
                u.bind_s(n, t, vg_);
                g.sub.bind_s(n, t, vg_);
            }
            for (auto& c : g.store)
                c = normalize(apply(u, c, vg_));
        }
        bool touched_x = !a.xlits.empty();
        auto push_x = [&](const xatom& l) {
            for (auto& ex : g.xstore)
                if (alpha_equal(xf_atom(ex), xf_atom(l)))
                    return;
            g.xstore.push_back(l);
        };
        auto push_c = [&](constraint&& n) {
            for (auto& ex : g.store)
                if (alpha_equal(ex, n))
                    return;
            g.store.push_back(std::move(n));
        };
        for (auto& c : a.cons) {
            constraint n = normalize(c);
            if (n.k == ckind::falsec)
                return false;
            if (n.k == ckind::truec)
                continue;
            if (n.k == ckind::xconstr) {
                push_x(n.xa);
                touched_x = true;
                continue;
            }
            push_c(std::move(n));
        }
        for (auto& l : a.xlits)
            push_x(l);
        ensure_sorts(g);
        if (touched_x && !propagate(g))
            return false;
        return true;
    }

    // incremental X check: closure of the X store plus propagation of
    // entailed substitutions into the set constraints
    bool propagate(edetail::goal& g) {
        xprop_result pr = propagate_x(g.xstore, reg_, vg_);
        if (pr.contradiction)
            return false;
        g.xstore = pr.residual;
        if (!pr.bindings.empty()) {
            for (auto& [n, t] : pr.bindings.xbinds())
                g.sub.bind_x(n, t, vg_);
            bool renorm = false;
            for (auto& c : g.store) {
                constraint c2 = apply(pr.bindings, c, vg_);
                c2 = normalize(c2);
                c = std::move(c2);
                renorm = true;
            }
            (void)renorm;
        }
        return true;
    }

    // ---- rule dispatch -------------------------------------------------------

    std::optional<std::pair<size_t, edetail::rewrite>> find_rule(edetail::goal& g) {
        static const std::vector<ckind> order = {ckind::eq,   ckind::neq,  ckind::in,
                                                 ckind::nin,  ckind::un,   ckind::disj,
                                                 ckind::foreach_c, ckind::sort_set,
                                                 ckind::sort_isx};
        for (ckind k : order) {
            for (size_t i = 0; i < g.store.size(); ++i) {
                if (g.store[i].k != k)
                    continue;
                std::optional<edetail::rewrite> rw;
                switch (k) {
                case ckind::eq: rw = try_eq(g, i); break;
                case ckind::neq: rw = try_neq(g, i); break;
                case ckind::in: rw = try_in(g, i); break;
                case ckind::nin: rw = try_nin(g, i); break;
                case ckind::un: rw = try_un(g, i); break;
                case ckind::disj: rw = try_disj(g, i); break;
                case ckind::foreach_c: rw = try_foreach(g, i); break;
                case ckind::sort_set:
                case ckind::sort_isx: rw = try_sort(g, i); break;
                default: break;
                }
                if (rw)
                    return std::make_pair(i, std::move(*rw));
            }
        }
        return std::nullopt;
    }

    static edetail::rewrite one(std::string rule, edetail::alt a) {
        edetail::rewrite rw;
        rw.rule = std::move(rule);
        rw.alts.push_back(std::move(a));
        return rw;
    }

    static edetail::alt alt_false() {
        edetail::alt a;
        a.cons.push_back(mk_false_c());
        return a;
    }

    static edetail::alt alt_true() { return edetail::alt{}; }

    // alternatives from filter pieces plus a common template
    static void add_pieces(edetail::rewrite& rw, const std::vector<edetail::piece>& ps,
                           const std::vector<constraint>& common_cons,
                           const std::vector<xatom>& common_lits = {}) {
        for (auto& p : ps) {
            edetail::alt a;
            a.cons = p.cons;
            a.cons.insert(a.cons.end(), common_cons.begin(), common_cons.end());
            a.xlits = p.xlits;
            a.xlits.insert(a.xlits.end(), common_lits.begin(), common_lits.end());
            rw.alts.push_back(std::move(a));
        }
    }

    // ---- equality ------------------------------------------------------------

    std::optional<edetail::rewrite> try_eq(edetail::goal& g, size_t idx) {
        const constraint& c = g.store[idx];
        const sref& L = c.s1;
        const sref& R = c.s2;

        // =1: both empty-like
        if (empty_like(L) && empty_like(R))
            return one("=1", alt_true());
        // =2: identical variables
        if (L->kind == skind::var && R->kind == skind::var && L->name == R->name)
            return one("=2", alt_true());
        // =3: X = {t0..tk / S} where S ends in X with pattern = ctrl
        if (auto rw = eq_rule3(L, R))
            return rw;
        if (auto rw = eq_rule3(R, L))
            return rw;
        // =4: variable elimination; an equation whose variable side is
        // already clean is solved, so neither orientation may fire
        {
            auto clean = [&](const sref& x, const sref& s) {
                return x && x->kind == skind::var && !free_vars(s).svars.count(x->name) &&
                       !mdetail::var_occurs_elsewhere(g.store, idx, x->name);
            };
            bool solved_eq = (clean(L, R) && !edetail::splittable_nonvar_ris(R)) ||
                             (clean(R, L) && !edetail::splittable_nonvar_ris(L));
            if (!solved_eq) {
                if (auto rw = eq_rule4(g, idx, L, R))
                    return rw;
                if (auto rw = eq_rule4(g, idx, R, L))
                    return rw;
            }
        }
        // =5: empty = nonempty extensional
        if (empty_like(L) && R->kind == skind::cons)
            return one("=5", alt_false());
        if (empty_like(R) && L->kind == skind::cons)
            return one("=5", alt_false());
        // =6/=7/=8: both sides extensional with a shared tail variable
        if (L->kind == skind::cons && R->kind == skind::cons) {
            if (auto rw = eq_shared(L, R))
                return rw;
        }
        // =9: extensional set unification
        if (L->kind == skind::cons && R->kind == skind::cons)
            return eq_rule9(L, R);
        // =10/=11: a non-variable RIS on one side
        if (edetail::splittable_nonvar_ris(L))
            return eq_nonvar_ris(L, R);
        if (edetail::splittable_nonvar_ris(R))
            return eq_nonvar_ris(R, L);
        // =12/=13/=14: a variable-RIS against an extensional set
        if (is_variable_ris(L) && R->kind == skind::cons)
            return eq_varris(L, R);
        if (is_variable_ris(R) && L->kind == skind::cons)
            return eq_varris(R, L);
        return std::nullopt;
    }

    // does the chain end (through pattern=ctrl RIS domains and cons tails) in
    // the variable x?
    static bool chain_over(const sref& s, const std::string& x, bool require_ctrl_pattern) {
        if (!s)
            return false;
        if (s->kind == skind::var)
            return s->name == x;
        if (s->kind == skind::cons)
            return chain_over(s->rest, x, require_ctrl_pattern);
        if (s->kind == skind::ris) {
            if (require_ctrl_pattern && !xequal(s->ris->pattern, s->ris->ctrl))
                return false;
            return chain_over(s->ris->dom, x, require_ctrl_pattern);
        }
        return false;
    }

    // replace the innermost occurrence of variable x in a chain by N
    static sref chain_replace(const sref& s, const std::string& x, const sref& N) {
        if (s->kind == skind::var)
            return s->name == x ? N : s;
        if (s->kind == skind::cons)
            return mk_cons(s->elem, chain_replace(s->rest, x, N));
        if (s->kind == skind::ris) {
            const ris_term& r = *s->ris;
            return mk_ris(r.ctrl, chain_replace(r.dom, x, N), r.filter, r.pattern, r.params,
                          r.funcpreds);
        }
        return s;
    }

    std::optional<edetail::rewrite> eq_rule3(const sref& L, const sref& R) {
        if (!L || L->kind != skind::var || !R || R->kind != skind::cons)
            return std::nullopt;
        cons_view v = decompose(R);
        const sref& S = v.tail;
        bool hit = (S->kind == skind::var && S->name == L->name) ||
                   (S->kind == skind::ris && xequal(S->ris->pattern, S->ris->ctrl) &&
                    chain_over(S, L->name, true));
        if (!hit)
            return std::nullopt;
        sref S2 = chain_replace(S, L->name, vg_.fresh_s("N"));
        edetail::alt a;
        a.cons.push_back(mk_c2(ckind::eq, L, mk_set(v.elems, S2)));
        return one("=3", std::move(a));
    }

    std::optional<edetail::rewrite> eq_rule4(edetail::goal& g, size_t idx, const sref& L,
                                             const sref& R) {
        if (!L || L->kind != skind::var)
            return std::nullopt;
        if (R->kind == skind::var && R->name == L->name)
            return std::nullopt;
        if (edetail::splittable_nonvar_ris(R))
            return std::nullopt;  // handled by =11
        var_set fv = free_vars(R);
        if (fv.svars.count(L->name))
            return std::nullopt;  // occurs check (see ledger)
        if (!mdetail::var_occurs_elsewhere(g.store, idx, L->name))
            return std::nullopt;  // already solved
        edetail::alt a;
        a.cons.push_back(mk_c2(ckind::eq, L, R));
        a.sbinds.push_back({L->name, R});
        return one("=4", std::move(a));
    }

    // =6 (both tails over the same variable, patterns = ctrl), =7 (flip),
    // =8 (patterns != ctrl)
    std::optional<edetail::rewrite> eq_shared(const sref& L, const sref& R) {
        cons_view lv = decompose(L), rv = decompose(R);
        if (lv.elems.empty() || rv.elems.empty())
            return std::nullopt;
        const sref& Rt = lv.tail;
        const sref& St = rv.tail;

        auto tailvar = [](const sref& s) -> std::optional<std::string> {
            if (s->kind == skind::var)
                return s->name;
            if (s->kind == skind::ris && is_variable_ris(s))
                return innermost_var(s);
            return std::nullopt;
        };
        auto xl = tailvar(Rt), xr = tailvar(St);
        if (!xl || !xr || *xl != *xr)
            return std::nullopt;
        std::string X = *xl;

        bool l_var = Rt->kind == skind::var;
        bool r_var = St->kind == skind::var;
        bool l_ctrl = Rt->kind == skind::ris && xequal(Rt->ris->pattern, Rt->ris->ctrl) &&
                      chain_over(Rt, X, true);
        bool r_ctrl = St->kind == skind::ris && xequal(St->ris->pattern, St->ris->ctrl) &&
                      chain_over(St, X, true);
        bool l_pat = Rt->kind == skind::ris && !xequal(Rt->ris->pattern, Rt->ris->ctrl) &&
                     Rt->ris->dom->kind == skind::var;
        bool r_pat = St->kind == skind::ris && !xequal(St->ris->pattern, St->ris->ctrl) &&
                     St->ris->dom->kind == skind::var;

        // =7: variable tail on the left, RIS tail on the right: flip
        if (l_var && r_ctrl) {
            edetail::alt a;
            a.cons.push_back(mk_c2(ckind::eq, R, L));
            return one("=7", std::move(a));
        }
        if ((l_var && r_var) || (l_ctrl && r_var) || (l_ctrl && r_ctrl))
            return eq_shared_main(lv, rv, X, /*ctrl_patterns=*/true, "=6");
        if (l_pat && r_pat)
            return eq_shared_main(lv, rv, X, /*ctrl_patterns=*/false, "=8");
        return std::nullopt;
    }

    edetail::rewrite eq_shared_main(const cons_view& lv, const cons_view& rv,
                                    const std::string& X, bool ctrl_patterns,
                                    const char* rule) {
        edetail::rewrite rw;
        rw.rule = rule;
        const xref t0 = lv.elems[0];
        std::vector<xref> trest(lv.elems.begin() + 1, lv.elems.end());
        const sref& Rt = lv.tail;
        const sref& St = rv.tail;

        auto rhs_without = [&](size_t j, const sref& tail) {
            std::vector<xref> es;
            for (size_t i = 0; i < rv.elems.size(); ++i)
                if (i != j)
                    es.push_back(rv.elems[i]);
            return mk_set(es, tail);
        };

        auto lit_eq = [&](const xref& a, const xref& b) { return mk_cmp(cmp_op::eq, a, b); };

        // templates 1..6, each for every candidate j
        for (int tmpl = 1; tmpl <= 6; ++tmpl) {
            for (size_t j = 0; j < rv.elems.size(); ++j) {
                const xref& sj = rv.elems[j];
                edetail::alt a;
                a.xlits.push_back(lit_eq(t0, sj));
                switch (tmpl) {
                case 1: {
                    sref N1 = vg_.fresh_s("N"), N2 = vg_.fresh_s("N");
                    a.cons.push_back(mk_c2(ckind::eq, mk_cons(t0, N1), Rt));
                    a.cons.push_back(mk_mem_c(ckind::nin, t0, N1));
                    a.cons.push_back(mk_c2(ckind::eq, mk_cons(t0, N2), St));
                    a.cons.push_back(mk_mem_c(ckind::nin, t0, N2));
                    a.cons.push_back(
                        mk_c2(ckind::eq, mk_set(trest, N1), rhs_without(j, N2)));
                    break;
                }
                case 2:
                    a.cons.push_back(mk_mem_c(ckind::nin, t0, Rt));
                    a.cons.push_back(mk_mem_c(ckind::nin, t0, St));
                    a.cons.push_back(
                        mk_c2(ckind::eq, mk_set(trest, Rt), rhs_without(j, St)));
                    break;
                case 3: {
                    sref N = vg_.fresh_s("N");
                    a.cons.push_back(mk_c2(ckind::eq, mk_cons(t0, N), Rt));
                    a.cons.push_back(mk_mem_c(ckind::nin, t0, N));
                    a.cons.push_back(mk_mem_c(ckind::nin, t0, St));
                    a.cons.push_back(mk_c2(ckind::eq, mk_set(trest, N), rhs_without(j, St)));
                    break;
                }
                case 4: {
                    sref N = vg_.fresh_s("N");
                    a.cons.push_back(mk_mem_c(ckind::nin, t0, Rt));
                    a.cons.push_back(mk_c2(ckind::eq, mk_cons(sj, N), St));
                    a.cons.push_back(mk_mem_c(ckind::nin, sj, N));
                    a.cons.push_back(mk_c2(ckind::eq, mk_set(trest, Rt), rhs_without(j, N)));
                    break;
                }
                case 5:
                    a.cons.push_back(mk_c2(ckind::eq, mk_set(trest, Rt),
                                           mk_set(rv.elems, St)));
                    break;
                case 6:
                    a.cons.push_back(mk_c2(ckind::eq, mk_set(lv.elems, Rt),
                                           rhs_without(j, St)));
                    break;
                }
                rw.alts.push_back(std::move(a));
            }
        }

        if (ctrl_patterns) {
            // final template: t0 comes from the shared variable
            sref N = vg_.fresh_s("N");
            sref Rt2 = chain_replace(Rt, X, N);
            sref St2 = chain_replace(St, X, N);
            std::vector<constraint> common;
            common.push_back(mk_c2(ckind::eq, mk_svar(X), mk_cons(t0, N)));
            common.push_back(mk_c2(ckind::eq, mk_set(trest, Rt2), mk_set(rv.elems, St2)));
            if (St->kind == skind::ris) {
                auto ps = rl_.chain_filter(St, t0);
                add_pieces(rw, ps, common);
            } else {
                edetail::alt a;
                a.cons = common;
                rw.alts.push_back(std::move(a));
            }
        } else {
            // =8 templates 7 and 8: the first element is produced by the
            // right-hand RIS over a fresh domain element
            const ris_term& rR = *Rt->ris;  // patterns != ctrl on both sides
            const ris_term& rS = *St->ris;
            xref n = vg_.fresh_x("n");
            sref N = vg_.fresh_s("N");
            sref Rt2 = chain_replace(Rt, X, N);
            sref St2 = chain_replace(St, X, N);
            edetail::ris_inst gi = rl_.instantiate(rS, n);
            edetail::ris_inst fi = rl_.instantiate(rR, n);
            if (!gi.clash && !fi.clash) {
                xref vofn = gi.pat;
                xref pofn = fi.pat;
                auto common_head = [&](edetail::alt& a, const edetail::piece& gpiece) {
                    a.cons.push_back(mk_c2(ckind::eq, mk_svar(X), mk_cons(n, N)));
                    a.xlits = gpiece.xlits;
                    a.cons.insert(a.cons.end(), gpiece.cons.begin(), gpiece.cons.end());
                    a.xlits.push_back(mk_cmp(cmp_op::eq, t0, vofn));
                };
                // template 7a: not F(n)
                for (auto& gpiece : gi.pos)
                    for (auto& fpiece : fi.neg) {
                        edetail::alt a;
                        common_head(a, gpiece);
                        a.xlits.insert(a.xlits.end(), fpiece.xlits.begin(),
                                       fpiece.xlits.end());
                        a.cons.insert(a.cons.end(), fpiece.cons.begin(),
                                      fpiece.cons.end());
                        a.cons.push_back(mk_c2(ckind::eq, mk_set(trest, Rt2),
                                               mk_set(rv.elems, St2)));
                        rw.alts.push_back(std::move(a));
                    }
                // template 7b: F(n) and P(n) outside {s0..sk} and t0 = P(n)
                for (auto& gpiece : gi.pos)
                    for (auto& fpiece : fi.pos) {
                        edetail::alt a;
                        common_head(a, gpiece);
                        a.xlits.insert(a.xlits.end(), fpiece.xlits.begin(),
                                       fpiece.xlits.end());
                        a.cons.insert(a.cons.end(), fpiece.cons.begin(),
                                      fpiece.cons.end());
                        a.cons.push_back(
                            mk_mem_c(ckind::nin, pofn, mk_set(rv.elems, mk_empty())));
                        a.xlits.push_back(mk_cmp(cmp_op::eq, t0, pofn));
                        a.cons.push_back(mk_c2(ckind::eq, mk_set(trest, Rt2),
                                               mk_set(rv.elems, St2)));
                        rw.alts.push_back(std::move(a));
                    }
                // template 8: F(n) and P(n) = sj absorbed on the right
                for (size_t j = 0; j < rv.elems.size(); ++j) {
                    for (auto& gpiece : gi.pos)
                        for (auto& fpiece : fi.pos) {
                            edetail::alt a;
                            common_head(a, gpiece);
                            a.xlits.insert(a.xlits.end(), fpiece.xlits.begin(),
                                           fpiece.xlits.end());
                            a.cons.insert(a.cons.end(), fpiece.cons.begin(),
                                          fpiece.cons.end());
                            a.xlits.push_back(mk_cmp(cmp_op::eq, pofn, rv.elems[j]));
                            std::vector<xref> withp = trest;
                            withp.insert(withp.begin(), pofn);
                            a.cons.push_back(mk_c2(ckind::eq, mk_set(withp, Rt2),
                                                   mk_set(rv.elems, St2)));
                            rw.alts.push_back(std::move(a));
                        }
                }
            }
        }
        return rw;
    }

    edetail::rewrite eq_rule9(const sref& L, const sref& R) {
        edetail::rewrite rw;
        rw.rule = "=9";
        xref t = L->elem;
        sref A = L->rest;
        xref s = R->elem;
        sref B = R->rest;
        {
            edetail::alt a;  // t = s, A = {s / B}
            a.xlits.push_back(mk_cmp(cmp_op::eq, t, s));
            a.cons.push_back(mk_c2(ckind::eq, A, R));
            rw.alts.push_back(std::move(a));
        }
        {
            edetail::alt a;  // t = s, {s / A} = B
            a.xlits.push_back(mk_cmp(cmp_op::eq, t, s));
            a.cons.push_back(mk_c2(ckind::eq, mk_cons(s, A), B));
            rw.alts.push_back(std::move(a));
        }
        {
            edetail::alt a;  // t = s, A = B
            a.xlits.push_back(mk_cmp(cmp_op::eq, t, s));
            a.cons.push_back(mk_c2(ckind::eq, A, B));
            rw.alts.push_back(std::move(a));
        }
        {
            edetail::alt a;  // A = {s / N}, {t / N} = B
            sref N = vg_.fresh_s("N");
            a.cons.push_back(mk_c2(ckind::eq, A, mk_cons(s, N)));
            a.cons.push_back(mk_c2(ckind::eq, mk_cons(t, N), B));
            rw.alts.push_back(std::move(a));
        }
        return rw;
    }

    edetail::rewrite eq_nonvar_ris(const sref& L, const sref& R) {
        const ris_term& r = *L->ris;
        edetail::dom_split sp = edetail::split_domain(r, vg_);
        sref rest = edetail::ris_rest(r, sp.rest);
        edetail::ris_inst in = rl_.instantiate(r, sp.d);
        if (empty_like(R)) {
            // =10: the filter must fail for every domain element
            edetail::rewrite rw;
            rw.rule = "=10";
            std::vector<constraint> common = sp.side;
            common.push_back(mk_c2(ckind::eq, rest, mk_empty()));
            if (in.clash) {
                // the element cannot instantiate the control term: skip it
                edetail::alt a;
                a.cons = common;
                rw.alts.push_back(std::move(a));
                return rw;
            }
            add_pieces(rw, in.neg, common);
            return rw;
        }
        // =11: extract one element
        edetail::rewrite rw;
        rw.rule = "=11";
        if (in.clash) {
            edetail::alt a;  // control clash: the element is skipped
            a.cons = sp.side;
            a.cons.push_back(mk_c2(ckind::eq, rest, R));
            rw.alts.push_back(std::move(a));
            return rw;
        }
        {
            std::vector<constraint> common = sp.side;
            common.push_back(mk_c2(ckind::eq, mk_cons(in.pat, rest), R));
            add_pieces(rw, in.pos, common);
        }
        {
            std::vector<constraint> common = sp.side;
            common.push_back(mk_c2(ckind::eq, rest, R));
            add_pieces(rw, in.neg, common);
        }
        return rw;
    }

    std::optional<edetail::rewrite> eq_varris(const sref& L, const sref& R) {
        const ris_term& r = *L->ris;
        cons_view rv = decompose(R);
        if (rv.elems.empty())
            return std::nullopt;
        bool lhs_dom_is_var = r.dom->kind == skind::var;
        std::string X = innermost_var(L);
        bool shared = chain_over(rv.tail, X, false);

        if (shared && lhs_dom_is_var) {
            const sref& S = rv.tail;
            bool s_ok_ctrl = (S->kind == skind::var && S->name == X) ||
                             (S->kind == skind::ris && xequal(S->ris->pattern, S->ris->ctrl) &&
                              chain_over(S, X, true));
            bool lhs_ctrl = xequal(r.pattern, r.ctrl);
            if (lhs_ctrl && s_ok_ctrl) {
                // =12: X = {t0 / N} & G(t0) & {d:N|G@Q} = {t1.. / S[X->N]}
                edetail::rewrite rw;
                rw.rule = "=12";
                xref t0 = rv.elems[0];
                sref N = vg_.fresh_s("N");
                edetail::ris_inst gi = rl_.instantiate(r, t0);
                std::vector<xref> rest_elems(rv.elems.begin() + 1, rv.elems.end());
                std::vector<constraint> common;
                common.push_back(mk_c2(ckind::eq, mk_svar(X), mk_cons(t0, N)));
                common.push_back(mk_c2(ckind::eq, edetail::ris_rest(r, N),
                                       mk_set(rest_elems, chain_replace(S, X, N))));
                if (gi.clash) {
                    // t0 cannot instantiate the control term, so it cannot be
                    // produced by the RIS at all
                    edetail::rewrite rwf;
                    rwf.rule = "=12";
                    rwf.alts.push_back(alt_false());
                    return rwf;
                }
                add_pieces(rw, gi.pos, common);
                return rw;
            }
            bool s_pat = S->kind == skind::ris && !xequal(S->ris->pattern, S->ris->ctrl) &&
                         chain_over(S, X, false);
            if (!lhs_ctrl && s_pat) {
                // =13: X = {n / N} & G(n) & t0 = Q(n) & (not F(n) or t0 = P(n)) & rec
                edetail::rewrite rw;
                rw.rule = "=13";
                xref t0 = rv.elems[0];
                xref n = vg_.fresh_x("n");
                sref N = vg_.fresh_s("N");
                edetail::ris_inst gi = rl_.instantiate(r, n);
                if (gi.clash)
                    return std::nullopt;
                xref q_at_n = gi.pat;
                std::vector<xref> rest_elems(rv.elems.begin() + 1, rv.elems.end());
                std::vector<constraint> common;
                common.push_back(mk_c2(ckind::eq, mk_svar(X), mk_cons(n, N)));
                common.push_back(mk_c2(ckind::eq, edetail::ris_rest(r, N),
                                       mk_set(rest_elems, chain_replace(S, X, N))));
                const ris_term& rs = *S->ris;
                edetail::ris_inst fi = rl_.instantiate(rs, n);
                if (fi.clash)
                    return std::nullopt;
                for (auto& gp : gi.pos)
                    for (auto& fp : fi.neg) {
                        edetail::alt a;
                        a.cons = common;
                        a.xlits.push_back(mk_cmp(cmp_op::eq, t0, q_at_n));
                        a.cons.insert(a.cons.end(), gp.cons.begin(), gp.cons.end());
                        a.xlits.insert(a.xlits.end(), gp.xlits.begin(), gp.xlits.end());
                        a.cons.insert(a.cons.end(), fp.cons.begin(), fp.cons.end());
                        a.xlits.insert(a.xlits.end(), fp.xlits.begin(), fp.xlits.end());
                        rw.alts.push_back(std::move(a));
                    }
                for (auto& gp : gi.pos)
                    for (auto& fp : fi.pos) {
                        edetail::alt a;
                        a.cons = common;
                        a.xlits.push_back(mk_cmp(cmp_op::eq, t0, q_at_n));
                        a.xlits.push_back(mk_cmp(cmp_op::eq, t0, fi.pat));
                        a.cons.insert(a.cons.end(), gp.cons.begin(), gp.cons.end());
                        a.xlits.insert(a.xlits.end(), gp.xlits.begin(), gp.xlits.end());
                        a.cons.insert(a.cons.end(), fp.cons.begin(), fp.cons.end());
                        a.xlits.insert(a.xlits.end(), fp.xlits.begin(), fp.xlits.end());
                        rw.alts.push_back(std::move(a));
                    }
                return rw;
            }
            return std::nullopt;  // mixed shared case: outside the catalog
        }
        if (shared)
            return std::nullopt;

        // =14: D = {n / N} & F(n) & t = P(n) & {c:N|F@P} = A
        edetail::rewrite rw;
        rw.rule = "=14";
        xref t = R->elem;
        sref A = R->rest;
        xref n = vg_.fresh_x("n");
        sref N = vg_.fresh_s("N");
        edetail::ris_inst in = rl_.instantiate(r, n);
        if (in.clash)
            return std::nullopt;
        std::vector<constraint> common;
        common.push_back(mk_c2(ckind::eq, r.dom, mk_cons(n, N)));
        common.push_back(mk_c2(ckind::eq, edetail::ris_rest(r, N), A));
        std::vector<xatom> lits{mk_cmp(cmp_op::eq, t, in.pat)};
        add_pieces(rw, in.pos, common, lits);
        return rw;
    }

    // ---- disequality -----------------------------------------------------------

    std::optional<edetail::rewrite> try_neq(edetail::goal& g, size_t idx) {
        const constraint& c = g.store[idx];
        const sref& L = c.s1;
        const sref& R = c.s2;
        if (empty_like(L) && empty_like(R))
            return one("neq1", alt_false());
        if (L->kind == skind::var && R->kind == skind::var && L->name == R->name)
            return one("neq2", alt_false());
        // neq3: orient a variable to the left
        if (L->kind != skind::var && L->kind != skind::ris && R->kind == skind::var) {
            edetail::alt a;
            a.cons.push_back(mk_c2(ckind::neq, R, L));
            return one("neq3", std::move(a));
        }
        if ((empty_like(L) && R->kind == skind::cons) ||
            (empty_like(R) && L->kind == skind::cons))
            return one("neq4", alt_true());
        // neq5: X against an extensional set ending in X or in a RIS
        auto rule5 = [&](const sref& A, const sref& B) -> std::optional<edetail::rewrite> {
            if (A->kind != skind::var || B->kind != skind::cons)
                return std::nullopt;
            cons_view v = decompose(B);
            bool hit = (v.tail->kind == skind::var && v.tail->name == A->name) ||
                       v.tail->kind == skind::ris;
            if (!hit)
                return std::nullopt;
            return witness_split("neq5", A, B);
        };
        if (auto rw = rule5(L, R))
            return rw;
        if (auto rw = rule5(R, L))
            return rw;
        if (L->kind == skind::cons && R->kind == skind::cons)
            return witness_split("neq6", L, R);
        if (L->kind == skind::ris)
            return witness_split("neq7", L, R);
        if (R->kind == skind::ris)
            return witness_split("neq7", R, L);
        return std::nullopt;
    }

    edetail::rewrite witness_split(const char* rule, const sref& A, const sref& B) {
        edetail::rewrite rw;
        rw.rule = rule;
        xref n = vg_.fresh_x("n");
        {
            edetail::alt a;
            a.cons.push_back(mk_mem_c(ckind::in, n, A));
            a.cons.push_back(mk_mem_c(ckind::nin, n, B));
            rw.alts.push_back(std::move(a));
        }
        {
            edetail::alt a;
            a.cons.push_back(mk_mem_c(ckind::nin, n, A));
            a.cons.push_back(mk_mem_c(ckind::in, n, B));
            rw.alts.push_back(std::move(a));
        }
        return rw;
    }

    // ---- membership -----------------------------------------------------------

    std::optional<edetail::rewrite> try_in(edetail::goal& g, size_t idx) {
        const constraint& c = g.store[idx];
        const xref& t = c.x1;
        const sref& A = c.s1;
        if (empty_like(A))
            return one("in1", alt_false());
        if (A->kind == skind::cons) {
            edetail::rewrite rw;
            rw.rule = "in2";
            {
                edetail::alt a;
                a.xlits.push_back(mk_cmp(cmp_op::eq, t, A->elem));
                rw.alts.push_back(std::move(a));
            }
            {
                edetail::alt a;
                a.cons.push_back(mk_mem_c(ckind::in, t, A->rest));
                rw.alts.push_back(std::move(a));
            }
            return rw;
        }
        if (A->kind == skind::var) {
            edetail::alt a;
            a.cons.push_back(mk_c2(ckind::eq, A, mk_cons(t, vg_.fresh_s("N"))));
            return one("in3", std::move(a));
        }
        if (A->kind == skind::ris) {
            const ris_term& r = *A->ris;
            edetail::rewrite rw;
            rw.rule = "in4";
            xref n = vg_.fresh_x("n");
            edetail::ris_inst in = rl_.instantiate(r, n);
            if (in.clash)
                return one("in4", alt_false());
            std::vector<constraint> common{mk_mem_c(ckind::in, n, r.dom)};
            std::vector<xatom> lits{mk_cmp(cmp_op::eq, t, in.pat)};
            add_pieces(rw, in.pos, common, lits);
            return rw;
        }
        return std::nullopt;  // symbolic interval: wait for grounding
    }

    std::optional<edetail::rewrite> try_nin(edetail::goal& g, size_t idx) {
        const constraint& c = g.store[idx];
        const xref& t = c.x1;
        const sref& A = c.s1;
        if (empty_like(A))
            return one("nin1", alt_true());
        if (A->kind == skind::cons) {
            edetail::alt a;
            a.xlits.push_back(mk_cmp(cmp_op::neq, t, A->elem));
            a.cons.push_back(mk_mem_c(ckind::nin, t, A->rest));
            return one("nin2", std::move(a));
        }
        if (edetail::splittable_nonvar_ris(A)) {
            const ris_term& r = *A->ris;
            edetail::dom_split sp = edetail::split_domain(r, vg_);
            sref rest = edetail::ris_rest(r, sp.rest);
            edetail::rewrite rw;
            rw.rule = "nin3";
            edetail::ris_inst in = rl_.instantiate(r, sp.d);
            if (in.clash) {
                edetail::alt a;  // the element cannot instantiate the control
                a.cons = sp.side;
                a.cons.push_back(mk_mem_c(ckind::nin, t, rest));
                rw.alts.push_back(std::move(a));
                return rw;
            }
            {
                std::vector<constraint> common = sp.side;
                common.push_back(mk_mem_c(ckind::nin, t, rest));
                std::vector<xatom> lits{mk_cmp(cmp_op::neq, t, in.pat)};
                add_pieces(rw, in.pos, common, lits);
            }
            {
                std::vector<constraint> common = sp.side;
                common.push_back(mk_mem_c(ckind::nin, t, rest));
                add_pieces(rw, in.neg, common);
            }
            return rw;
        }
        return std::nullopt;  // var or variable-RIS: solved
    }

    // ---- union ------------------------------------------------------------------

    std::optional<edetail::rewrite> try_un(edetail::goal& g, size_t idx) {
        const constraint& c = g.store[idx];
        const sref &A = c.s1, &B = c.s2, &C = c.s3;
        // specialized rules for the restricted-universal-quantifier shape
        // un(A, {c:A|F}, {c:A|F}); they fire before the general rules
        if (B->kind == skind::ris && alpha_equal(B, C) &&
            xequal(B->ris->pattern, B->ris->ctrl) && alpha_equal(B->ris->dom, A)) {
            if (empty_like(A))
                return one("un:fe-empty", alt_true());
            if (is_var_or_varris(A))
                return std::nullopt;  // irreducible
            if (A->kind == skind::cons) {
                const ris_term& r = *B->ris;
                edetail::ris_inst in = rl_.instantiate(r, A->elem);
                edetail::rewrite rw;
                rw.rule = "un:fe-iter";
                if (in.clash) {
                    rw.alts.push_back(alt_false());
                    return rw;
                }
                sref rest_ris = edetail::ris_rest(r, A->rest);
                std::vector<constraint> common{
                    mk_c3(ckind::un, A->rest, rest_ris, rest_ris)};
                add_pieces(rw, in.pos, common);
                return rw;
            }
        }
        if (alpha_equal(A, B)) {
            edetail::alt a;
            a.cons.push_back(mk_c2(ckind::eq, A, C));
            return one("un:eqvars", std::move(a));
        }
        if (empty_like(C)) {
            edetail::alt a;
            a.cons.push_back(mk_c2(ckind::eq, A, mk_empty()));
            a.cons.push_back(mk_c2(ckind::eq, B, mk_empty()));
            return one("un:empty", std::move(a));
        }
        if (empty_like(A)) {
            edetail::alt a;
            a.cons.push_back(mk_c2(ckind::eq, C, B));
            return one("un:empty2", std::move(a));
        }
        if (empty_like(B)) {
            edetail::alt a;
            a.cons.push_back(mk_c2(ckind::eq, C, A));
            return one("un:empty3", std::move(a));
        }
        if (A->kind == skind::cons && is_var_or_varris(C))
            return un_ext12("un:ext1", A, B, C);
        if (B->kind == skind::cons && is_var_or_varris(C))
            return un_ext12("un:ext2", B, A, C);
        if (C->kind == skind::cons)
            return un_ext3(A, B, C);
        bool any_nonvar = edetail::splittable_nonvar_ris(A) || edetail::splittable_nonvar_ris(B) ||
                          edetail::splittable_nonvar_ris(C);
        if (any_nonvar)
            return un_ris(A, B, C);
        return std::nullopt;
    }

    // un with an extensional first (or second) argument and variable-ish C
    edetail::rewrite un_ext12(const char* rule, const sref& E, const sref& other,
                              const sref& C) {
        edetail::rewrite rw;
        rw.rule = rule;
        xref t = E->elem;
        sref N1 = vg_.fresh_s("N"), N = vg_.fresh_s("N");
        std::vector<constraint> common;
        common.push_back(mk_c2(ckind::eq, E, mk_cons(t, N1)));
        common.push_back(mk_mem_c(ckind::nin, t, N1));
        common.push_back(mk_c2(ckind::eq, C, mk_cons(t, N)));
        bool first = std::string(rule) == "un:ext1";
        {
            edetail::alt a;
            a.cons = common;
            a.cons.push_back(mk_mem_c(ckind::nin, t, other));
            a.cons.push_back(first ? mk_c3(ckind::un, N1, other, N)
                                   : mk_c3(ckind::un, other, N1, N));
            rw.alts.push_back(std::move(a));
        }
        {
            edetail::alt a;
            a.cons = common;
            sref N2 = vg_.fresh_s("N");
            a.cons.push_back(mk_c2(ckind::eq, other, mk_cons(t, N2)));
            a.cons.push_back(mk_mem_c(ckind::nin, t, N2));
            a.cons.push_back(first ? mk_c3(ckind::un, N1, N2, N)
                                   : mk_c3(ckind::un, N2, N1, N));
            rw.alts.push_back(std::move(a));
        }
        return rw;
    }

    edetail::rewrite un_ext3(const sref& A, const sref& B, const sref& C) {
        edetail::rewrite rw;
        rw.rule = "un:ext";
        xref t = C->elem;
        sref N = vg_.fresh_s("N");
        std::vector<constraint> common{mk_c2(ckind::eq, C, mk_cons(t, N))};
        {
            edetail::alt a;
            a.cons = common;
            sref N1 = vg_.fresh_s("N");
            a.cons.push_back(mk_c2(ckind::eq, A, mk_cons(t, N1)));
            a.cons.push_back(mk_mem_c(ckind::nin, t, N1));
            a.cons.push_back(mk_c3(ckind::un, N1, B, N));
            rw.alts.push_back(std::move(a));
        }
        {
            edetail::alt a;
            a.cons = common;
            sref N1 = vg_.fresh_s("N");
            a.cons.push_back(mk_c2(ckind::eq, B, mk_cons(t, N1)));
            a.cons.push_back(mk_mem_c(ckind::nin, t, N1));
            a.cons.push_back(mk_c3(ckind::un, A, N1, N));
            rw.alts.push_back(std::move(a));
        }
        {
            edetail::alt a;
            a.cons = common;
            sref N1 = vg_.fresh_s("N"), N2 = vg_.fresh_s("N");
            a.cons.push_back(mk_c2(ckind::eq, A, mk_cons(t, N1)));
            a.cons.push_back(mk_mem_c(ckind::nin, t, N1));
            a.cons.push_back(mk_c2(ckind::eq, B, mk_cons(t, N2)));
            a.cons.push_back(mk_mem_c(ckind::nin, t, N2));
            a.cons.push_back(mk_c3(ckind::un, N1, N2, N));
            rw.alts.push_back(std::move(a));
        }
        return rw;
    }

    // each non-variable RIS argument becomes either an extensional set or a
    // smaller RIS, with the filter asserted or denied
    edetail::rewrite un_ris(const sref& A, const sref& B, const sref& C) {
        edetail::rewrite rw;
        rw.rule = "un:ris";
        struct choice {
            sref repl;
            std::vector<edetail::piece> conds;  // one per branch of this argument
            std::vector<std::vector<constraint>> defs;
        };
        // memo so that identical arguments share one fresh variable
        std::vector<std::pair<sref, sref>> memo;
        auto replace = [&](const sref& s) -> sref {
            if (!edetail::splittable_nonvar_ris(s))
                return s;
            for (auto& [k, v] : memo)
                if (alpha_equal(k, s))
                    return v;
            sref N = vg_.fresh_s("N");
            memo.push_back({s, N});
            return N;
        };
        sref A2 = replace(A), B2 = replace(B), C2 = replace(C);
        // branch sets per distinct replaced argument
        struct argdef {
            sref N;
            std::vector<edetail::alt> branches;
        };
        std::vector<argdef> defs;
        for (auto& [orig, N] : memo) {
            const ris_term& r = *orig->ris;
            edetail::dom_split sp = edetail::split_domain(r, vg_);
            sref rest = edetail::ris_rest(r, sp.rest);
            argdef ad;
            ad.N = N;
            edetail::ris_inst in = rl_.instantiate(r, sp.d);
            if (in.clash) {
                edetail::alt a;
                a.cons = sp.side;
                a.cons.push_back(mk_c2(ckind::eq, N, rest));
                ad.branches.push_back(std::move(a));
            } else {
                for (auto& p : in.pos) {
                    edetail::alt a;
                    a.cons = sp.side;
                    a.cons.push_back(mk_c2(ckind::eq, N, mk_cons(in.pat, rest)));
                    a.cons.insert(a.cons.end(), p.cons.begin(), p.cons.end());
                    a.xlits = p.xlits;
                    ad.branches.push_back(std::move(a));
                }
                for (auto& p : in.neg) {
                    edetail::alt a;
                    a.cons = sp.side;
                    a.cons.push_back(mk_c2(ckind::eq, N, rest));
                    a.cons.insert(a.cons.end(), p.cons.begin(), p.cons.end());
                    a.xlits = p.xlits;
                    ad.branches.push_back(std::move(a));
                }
            }
            defs.push_back(std::move(ad));
        }
        // cross product of the per-argument branch choices
        std::vector<edetail::alt> acc{edetail::alt{}};
        for (auto& ad : defs) {
            std::vector<edetail::alt> next;
            for (auto& base : acc)
                for (auto& br : ad.branches) {
                    edetail::alt a = base;
                    a.cons.insert(a.cons.end(), br.cons.begin(), br.cons.end());
                    a.xlits.insert(a.xlits.end(), br.xlits.begin(), br.xlits.end());
                    next.push_back(std::move(a));
                }
            acc = std::move(next);
        }
        for (auto& a : acc) {
            a.cons.push_back(mk_c3(ckind::un, A2, B2, C2));
            rw.alts.push_back(std::move(a));
        }
        return rw;
    }

    // ---- disjointness -------------------------------------------------------------

    std::optional<edetail::rewrite> try_disj(edetail::goal& g, size_t idx) {
        const constraint& c = g.store[idx];
        const sref &A = c.s1, &B = c.s2;
        if (alpha_equal(A, B)) {
            edetail::alt a;
            a.cons.push_back(mk_c2(ckind::eq, A, mk_empty()));
            return one("disj:id", std::move(a));
        }
        if (empty_like(B))
            return one("disj:rempty", alt_true());
        if (empty_like(A))
            return one("disj:lempty", alt_true());
        if (B->kind == skind::cons) {
            edetail::alt a;
            a.cons.push_back(mk_mem_c(ckind::nin, B->elem, A));
            a.cons.push_back(mk_c2(ckind::disj, A, B->rest));
            return one("disj:risext", std::move(a));
        }
        if (A->kind == skind::cons) {
            edetail::alt a;
            a.cons.push_back(mk_mem_c(ckind::nin, A->elem, B));
            a.cons.push_back(mk_c2(ckind::disj, B, A->rest));
            return one("disj:extris", std::move(a));
        }
        if (edetail::splittable_nonvar_ris(B))
            return disj_ris("disj:rris", A, B, /*ris_right=*/true);
        if (edetail::splittable_nonvar_ris(A))
            return disj_ris("disj:rrisx", B, A, /*ris_right=*/false);
        return std::nullopt;
    }

    edetail::rewrite disj_ris(const char* rule, const sref& other, const sref& risArg,
                              bool ris_right) {
        const ris_term& r = *risArg->ris;
        edetail::dom_split sp = edetail::split_domain(r, vg_);
        sref rest = edetail::ris_rest(r, sp.rest);
        edetail::rewrite rw;
        rw.rule = rule;
        constraint recur = ris_right ? mk_c2(ckind::disj, other, rest)
                                     : mk_c2(ckind::disj, rest, other);
        edetail::ris_inst in = rl_.instantiate(r, sp.d);
        if (in.clash) {
            edetail::alt a;
            a.cons = sp.side;
            a.cons.push_back(recur);
            rw.alts.push_back(std::move(a));
            return rw;
        }
        {
            std::vector<constraint> common = sp.side;
            common.push_back(mk_mem_c(ckind::nin, in.pat, other));
            common.push_back(recur);
            add_pieces(rw, in.pos, common);
        }
        {
            std::vector<constraint> common = sp.side;
            common.push_back(recur);
            add_pieces(rw, in.neg, common);
        }
        return rw;
    }

    // ---- restricted universal quantifiers ------------------------------------------

    std::optional<edetail::rewrite> try_foreach(edetail::goal& g, size_t idx) {
        const constraint& c = g.store[idx];
        const foreach_data& fe = *c.fe;
        if (empty_like(fe.dom))
            return one("fe:empty", alt_true());
        if (is_var_or_varris(fe.dom))
            return std::nullopt;  // irreducible
        if (fe.dom->kind == skind::cons) {
            xref t = fe.dom->elem;
            sref rest = fe.dom->rest;
            edetail::rewrite rw;
            rw.rule = "fe:iter";
            ris_term shim;
            shim.ctrl = fe.ctrl;
            shim.params = fe.params;
            shim.dom = fe.dom;
            shim.filter = fe.body;
            shim.pattern = fe.ctrl;
            shim.funcpreds = fe.funcpreds;
            edetail::ris_inst in = rl_.instantiate(shim, t);
            if (in.clash) {
                // an element outside the control shape falsifies the RUQ
                rw.alts.push_back(alt_false());
                return rw;
            }
            std::vector<constraint> common{
                mk_foreach(ckind::foreach_c, fe.ctrl, rest, fe.body, fe.params, fe.funcpreds)};
            add_pieces(rw, in.pos, common);
            return rw;
        }
        if (fe.dom->kind == skind::ris && !is_variable_ris(fe.dom)) {
            // lower onto the union encoding
            edetail::alt a;
            sref r = mk_ris(fe.ctrl, fe.dom, fe.body, fe.ctrl, fe.params, fe.funcpreds);
            a.cons.push_back(mk_c3(ckind::un, fe.dom, r, r));
            return one("fe:lower", std::move(a));
        }
        return std::nullopt;  // symbolic interval
    }

    // ---- sort constraints ------------------------------------------------------------

    std::optional<edetail::rewrite> try_sort(edetail::goal& g, size_t idx) {
        const constraint& c = g.store[idx];
        if (auto st = edetail::sort_reduce(c)) {
            if (st->decided)
                return one(st->rule, st->value ? alt_true() : alt_false());
            edetail::alt a;
            a.cons.push_back(st->next);
            return one(st->rule, std::move(a));
        }
        // a variable carrying both sort constraints is a clash
        if (c.k == ckind::sort_set && c.s1 && c.s1->kind == skind::var) {
            for (auto& d : g.store)
                if (d.k == ckind::sort_isx && d.x1 && d.x1->kind == xkind::var &&
                    d.x1->name == c.s1->name)
                    return one("set:clash", alt_false());
        }
        return std::nullopt;
    }

    // ---- neq elimination ------------------------------------------------------------

    std::optional<std::pair<size_t, edetail::rewrite>> find_remove_neq(edetail::goal& g) {
        for (size_t i = 0; i < g.store.size(); ++i) {
            const constraint& c = g.store[i];
            if (c.k != ckind::neq)
                continue;
            auto qualify = [&](const sref& x) {
                return x && x->kind == skind::var && mdetail::neq_guarded(g.store, x->name);
            };
            if (qualify(c.s1))
                return std::make_pair(i, witness_split("rmneq", c.s1, c.s2));
            if (qualify(c.s2))
                return std::make_pair(i, witness_split("rmneq", c.s2, c.s1));
        }
        return std::nullopt;
    }

    // ---- final phase ------------------------------------------------------------------

    void finish(edetail::goal g) {
        result_->branches++;
        xsat_result xr = sat_x(g.xstore, opt_.int_bound, reg_, vg_, opt_.x_node_cap);
        if (xr.status == xsat_status::unsat)
            return;
        if (xr.status == xsat_status::bounded_unknown) {
            result_->bounded_warning = true;
            return;
        }
        if (!is_solved_form(g.store)) {
            result_->stuck = true;
            return;
        }
        solution sol;
        sol.store = g.store;
        sol.xstore = g.xstore;
        sol.sub = g.sub;
        sol.xwitness = xr.witness;
        // fold the X equalities discovered by the final decision into the
        // reported substitution
        for (auto& [n, t] : xr.equalities.xbinds()) {
            try {
                sol.sub.bind_x(n, t, vg_);
            } catch (const sort_error&) {
            }
        }
        sol.model = extract_model(g.store, xr.witness, reg_, vg_);
        if (!seen_answers_.insert(signature(g)).second)
            return;  // same answer reached along another path
        result_->solutions.push_back(std::move(sol));
        if (!opt_.all_solutions)
            stop_ = true;
    }
};

}  // namespace risolve

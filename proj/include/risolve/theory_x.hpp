#pragma once

#include "risolve/pretty.hpp"
#include "risolve/subst.hpp"
#include "risolve/value.hpp"

#include <climits>
#include <functional>
#include <sstream>

// The parameter theory X: equality and disequality over uninterpreted
// constants (unique-name assumption) and ordered pairs, plus bounded linear
// integer arithmetic with div/mod, plus registered functional predicates.
//
// sat_x decides conjunctions of X-literals by unification closure, interval
// reasoning over integer expressions, and bounded search. When neither a
// contradiction proof nor a witness is found within the bound it reports
// bounded_unknown, which callers treat as unsat-with-warning.

namespace risolve {

struct eval_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct non_negatable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct not_functional_form : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct unbounded_variable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Functional predicates (Def: given the first n-1 arguments there is at most
// one value for the last). All built-ins are total functions with
// precondition true.

struct funcpred_decl {
    std::string name;
    size_t arity = 0;
    // holds(args): all arguments ground
    std::function<bool(const std::vector<vref>&)> holds;
    // image(first n-1 args) -> the unique last argument, if any
    std::function<std::optional<vref>(const std::vector<vref>&)> image;
};

class funcpred_registry {
  public:
    funcpred_registry() { add_builtins(); }

    static funcpred_registry builtins() { return funcpred_registry(); }

    // config format: one [funcpred.NAME] section per predicate, keys
    // arity=<n> and pre="true"; evaluation bodies are built-in only
    static funcpred_registry from_config(const std::string& text) {
        funcpred_registry all;
        funcpred_registry out;
        out.map_.clear();
        std::istringstream in(text);
        std::string line;
        std::string current;
        size_t arity = 0;
        auto flush = [&]() {
            if (current.empty())
                return;
            auto it = all.map_.find(current);
            if (it == all.map_.end())
                throw std::runtime_error("funcpred config: unknown predicate " + current);
            if (arity != 0 && arity != it->second.arity)
                throw std::runtime_error("funcpred config: wrong arity for " + current);
            out.map_[current] = it->second;
            current.clear();
            arity = 0;
        };
        while (std::getline(in, line)) {
            size_t a = line.find_first_not_of(" \t\r");
            if (a == std::string::npos || line[a] == '#')
                continue;
            if (line[a] == '[') {
                flush();
                size_t close = line.find(']', a);
                std::string sec = line.substr(a + 1, close - a - 1);
                const std::string prefix = "funcpred.";
                if (sec.rfind(prefix, 0) != 0)
                    throw std::runtime_error("funcpred config: bad section [" + sec + "]");
                current = sec.substr(prefix.size());
                continue;
            }
            size_t eqp = line.find('=');
            if (eqp == std::string::npos)
                continue;
            std::string key = line.substr(a, line.find_last_not_of(" \t", eqp - 1) - a + 1);
            std::string val = line.substr(eqp + 1);
            size_t v0 = val.find_first_not_of(" \t\"");
            size_t v1 = val.find_last_not_of(" \t\r\"");
            val = v0 == std::string::npos ? "" : val.substr(v0, v1 - v0 + 1);
            if (key == "arity")
                arity = static_cast<size_t>(std::stoul(val));
            else if (key == "pre") {
                if (val != "true")
                    throw std::runtime_error("funcpred config: only pre=\"true\" is supported");
            }
        }
        flush();
        return out;
    }

    const funcpred_decl* lookup(const std::string& n) const {
        auto it = map_.find(n);
        return it == map_.end() ? nullptr : &it->second;
    }

    std::set<std::string> names() const {
        std::set<std::string> out;
        for (auto& [k, v] : map_) {
            (void)v;
            out.insert(k);
        }
        return out;
    }

  private:
    std::map<std::string, funcpred_decl> map_;

    void add(funcpred_decl d) { map_[d.name] = std::move(d); }

    void add_builtins() {
        add({"plus", 3,
             [](const std::vector<vref>& a) {
                 return a[0]->kind == vkind::num && a[1]->kind == vkind::num &&
                        a[2]->kind == vkind::num && a[2]->n == a[0]->n + a[1]->n;
             },
             [](const std::vector<vref>& a) -> std::optional<vref> {
                 if (a[0]->kind != vkind::num || a[1]->kind != vkind::num)
                     return std::nullopt;
                 return mk_vnum(a[0]->n + a[1]->n);
             }});
        add({"times", 3,
             [](const std::vector<vref>& a) {
                 return a[0]->kind == vkind::num && a[1]->kind == vkind::num &&
                        a[2]->kind == vkind::num && a[2]->n == a[0]->n * a[1]->n;
             },
             [](const std::vector<vref>& a) -> std::optional<vref> {
                 if (a[0]->kind != vkind::num || a[1]->kind != vkind::num)
                     return std::nullopt;
                 return mk_vnum(a[0]->n * a[1]->n);
             }});
        add({"absval", 2,
             [](const std::vector<vref>& a) {
                 return a[0]->kind == vkind::num && a[1]->kind == vkind::num &&
                        a[1]->n == (a[0]->n < 0 ? -a[0]->n : a[0]->n);
             },
             [](const std::vector<vref>& a) -> std::optional<vref> {
                 if (a[0]->kind != vkind::num)
                     return std::nullopt;
                 return mk_vnum(a[0]->n < 0 ? -a[0]->n : a[0]->n);
             }});
        add({"pairfst", 2,
             [](const std::vector<vref>& a) {
                 return a[0]->kind == vkind::pairv && value_eq(a[1], a[0]->a);
             },
             [](const std::vector<vref>& a) -> std::optional<vref> {
                 if (a[0]->kind != vkind::pairv)
                     return std::nullopt;
                 return a[0]->a;
             }});
        add({"pairsnd", 2,
             [](const std::vector<vref>& a) {
                 return a[0]->kind == vkind::pairv && value_eq(a[1], a[0]->b);
             },
             [](const std::vector<vref>& a) -> std::optional<vref> {
                 if (a[0]->kind != vkind::pairv)
                     return std::nullopt;
                 return a[0]->b;
             }});
    }
};

// ---------------------------------------------------------------------------
// Ground evaluation of X-terms and X-literals. Division by zero is an
// evaluation error; at atom level it makes the atom false.

// floored division/modulo (the sign of mod follows the divisor)
inline long long floordiv(long long a, long long b) {
    if (b == 0)
        throw eval_error("division by zero");
    long long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

inline long long floormod(long long a, long long b) {
    return a - floordiv(a, b) * b;
}

inline vref eval_xterm(const xref& t, const env& e) {
    switch (t->kind) {
    case xkind::var: {
        auto it = e.xvals.find(t->name);
        if (it == e.xvals.end())
            throw eval_error("unbound variable " + t->name);
        return it->second;
    }
    case xkind::cst:
        return mk_vcst(t->name);
    case xkind::num:
        return mk_vnum(t->value);
    case xkind::pair:
        return mk_vpair(eval_xterm(t->a, e), eval_xterm(t->b, e));
    case xkind::arith: {
        vref a = eval_xterm(t->a, e), b = eval_xterm(t->b, e);
        if (a->kind != vkind::num || b->kind != vkind::num)
            throw eval_error("arithmetic on a non-integer");
        switch (t->op) {
        case arith_op::add: return mk_vnum(a->n + b->n);
        case arith_op::sub: return mk_vnum(a->n - b->n);
        case arith_op::mul: return mk_vnum(a->n * b->n);
        case arith_op::idiv: return mk_vnum(floordiv(a->n, b->n));
        case arith_op::imod: return mk_vnum(floormod(a->n, b->n));
        }
    }
    }
    throw eval_error("malformed term");
}

// X-literals only (membership atoms are set constraints, not X-literals)
inline bool eval_ground(const xatom& a, const env& e, const funcpred_registry& reg) {
    switch (a.kind) {
    case xatom_kind::truth:
        return a.truth;
    case xatom_kind::member:
        throw std::logic_error("eval_ground: membership is a set constraint");
    case xatom_kind::funcpred: {
        const funcpred_decl* d = reg.lookup(a.fp);
        if (!d)
            throw std::runtime_error("unregistered functional predicate " + a.fp);
        std::vector<vref> args;
        try {
            for (auto& t : a.args)
                args.push_back(eval_xterm(t, e));
        } catch (const eval_error&) {
            return false;
        }
        return d->holds(args);
    }
    case xatom_kind::cmp: {
        vref x, y;
        try {
            x = eval_xterm(a.a, e);
            y = eval_xterm(a.b, e);
        } catch (const eval_error& err) {
            if (std::string(err.what()).rfind("unbound", 0) == 0)
                throw;
            return false;  // division by zero: the atom is false
        }
        int c = value_cmp(x, y);
        bool same_kind = x->kind == y->kind;
        switch (a.op) {
        case cmp_op::eq: return c == 0;
        case cmp_op::neq: return c != 0;
        case cmp_op::lt: return same_kind && x->kind == vkind::num && x->n < y->n;
        case cmp_op::le: return same_kind && x->kind == vkind::num && x->n <= y->n;
        case cmp_op::gt: return same_kind && x->kind == vkind::num && x->n > y->n;
        case cmp_op::ge: return same_kind && x->kind == vkind::num && x->n >= y->n;
        }
    }
    }
    return false;
}

inline bool eval_ground(const xformula& f, const env& e, const funcpred_registry& reg) {
    switch (f.kind) {
    case xf_kind::atom:
        return eval_ground(f.at, e, reg);
    case xf_kind::conj:
        for (auto& g : f.sub)
            if (!eval_ground(g, e, reg))
                return false;
        return true;
    case xf_kind::disj:
        for (auto& g : f.sub)
            if (eval_ground(g, e, reg))
                return true;
        return false;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Negation

// positive-form negation of an X-literal; membership and funcpred atoms are
// not X-negatable here
inline xformula negate_literal(const xatom& a) {
    switch (a.kind) {
    case xatom_kind::truth:
        return xf_atom(mk_truth(!a.truth));
    case xatom_kind::cmp:
        return xf_atom(mk_cmp(cmp_negate(a.op), a.a, a.b));
    case xatom_kind::member:
        throw non_negatable("membership is a set constraint, not an X-literal");
    case xatom_kind::funcpred:
        throw non_negatable("no negation form registered for " + a.fp);
    }
    return xf_false();
}

// formula-level negation used when instantiating RIS filters: membership
// literals flip between their positive and negative constraint forms,
// X-literals go through negate_literal, and De Morgan distributes the rest.
inline xformula negate_filter(const xformula& f) {
    switch (f.kind) {
    case xf_kind::atom:
        if (f.at.kind == xatom_kind::member) {
            xatom a = f.at;
            a.positive = !a.positive;
            return xf_atom(std::move(a));
        }
        return negate_literal(f.at);
    case xf_kind::conj: {
        std::vector<xformula> parts;
        for (auto& g : f.sub)
            parts.push_back(negate_filter(g));
        return xf_disj(std::move(parts));
    }
    case xf_kind::disj: {
        std::vector<xformula> parts;
        for (auto& g : f.sub)
            parts.push_back(negate_filter(g));
        return xf_conj(std::move(parts));
    }
    }
    return xf_false();
}

namespace detail {

inline void flatten_conj(const xformula& f, std::vector<xatom>& out) {
    if (f.kind == xf_kind::atom) {
        out.push_back(f.at);
        return;
    }
    if (f.kind == xf_kind::disj)
        throw not_functional_form("functional-predicate block must be a conjunction");
    for (auto& g : f.sub)
        flatten_conj(g, out);
}

}  // namespace detail

// Negation of an existential filter exists z. (fp(args,z) & r(z)): with the
// built-in preconditions (all true) the result is fp(args,z') & not r(z')
// for a fresh z'. Each parameter must be defined by exactly one registered
// functional predicate whose last argument is that parameter.
inline xformula negate_exists_filter(const std::vector<xref>& params, const xformula& funcpreds,
                                     const xformula& filter, const funcpred_registry& reg,
                                     var_gen& vg) {
    std::vector<xatom> fps;
    if (!xf_is_true(funcpreds))
        detail::flatten_conj(funcpreds, fps);
    std::map<std::string, int> defined;
    for (auto& a : fps) {
        if (a.kind != xatom_kind::funcpred || !reg.lookup(a.fp))
            throw not_functional_form("unregistered predicate in functional block");
        if (a.args.empty() || a.args.back()->kind != xkind::var)
            throw not_functional_form("functional predicate must end in a parameter variable");
        defined[a.args.back()->name]++;
    }
    for (auto& p : params) {
        auto it = defined.find(p->name);
        if (it == defined.end() || it->second != 1)
            throw not_functional_form("parameter " + p->name +
                                      " is not defined by exactly one functional predicate");
    }

    substitution ren;
    for (auto& p : params)
        ren.bind_x(p->name, vg.fresh_x(p->name), vg);

    std::vector<xformula> conj;
    for (auto& a : fps)
        conj.push_back(apply(ren, xf_atom(a), vg));
    conj.push_back(negate_filter(apply(ren, filter, vg)));
    // the precondition of every built-in is true, so the not-q disjunct drops
    return xf_conj(std::move(conj));
}

// ---------------------------------------------------------------------------
// sat_x: decide a conjunction of X-literals within the given integer bound

enum class xsat_status { sat, unsat, bounded_unknown };

struct xsat_result {
    xsat_status status = xsat_status::sat;
    env witness;
    substitution equalities;  // bindings entailed by the equality literals
};

struct xprop_result {
    bool contradiction = false;
    substitution bindings;
    std::vector<xatom> residual;  // literals not yet decided, bindings applied
};

namespace xdetail {

constexpr long long kInf = (1LL << 62);

struct ivl {
    long long lo = -kInf, hi = kInf;
    bool empty() const { return lo > hi; }
};

inline long long sat_add(long long a, long long b) {
    if (a >= kInf || b >= kInf)
        return kInf;
    if (a <= -kInf || b <= -kInf)
        return -kInf;
    long long r = a + b;
    if (r > kInf)
        return kInf;
    if (r < -kInf)
        return -kInf;
    return r;
}

inline long long sat_mul(long long a, long long b) {
    if (a == 0 || b == 0)
        return 0;
    __int128 r = static_cast<__int128>(a) * b;
    if (r > kInf)
        return kInf;
    if (r < -kInf)
        return -kInf;
    return static_cast<long long>(r);
}

inline ivl iv_add(ivl a, ivl b) { return {sat_add(a.lo, b.lo), sat_add(a.hi, b.hi)}; }
inline ivl iv_sub(ivl a, ivl b) { return {sat_add(a.lo, -b.hi), sat_add(a.hi, -b.lo)}; }

inline ivl iv_mul(ivl a, ivl b) {
    long long c[4] = {sat_mul(a.lo, b.lo), sat_mul(a.lo, b.hi), sat_mul(a.hi, b.lo),
                      sat_mul(a.hi, b.hi)};
    ivl r{c[0], c[0]};
    for (int i = 1; i < 4; ++i) {
        r.lo = std::min(r.lo, c[i]);
        r.hi = std::max(r.hi, c[i]);
    }
    return r;
}

struct lit_info {
    xatom at;
    std::set<std::string> vars;
};

enum class xsort { unknown, integer, pairish };

class xsolver {
  public:
    xsolver(std::vector<xatom> lits, long long bound, const funcpred_registry& reg,
            var_gen& vg, long long node_cap)
        : bound_(bound), reg_(reg), vg_(vg), node_cap_(node_cap) {
        for (auto& a : lits)
            pending_.push_back(std::move(a));
    }

    // closure over equality literals + evaluation of ground literals;
    // cheap enough to run after every rewriting step
    xprop_result propagate() {
        xprop_result out;
        if (!close()) {
            out.contradiction = true;
            return out;
        }
        out.bindings = sub_;
        out.residual = residual_;
        return out;
    }

    xsat_result solve() {
        xsat_result out;
        if (!close()) {
            out.status = xsat_status::unsat;
            return out;
        }
        out.equalities = sub_;
        infer_sorts();
        if (!intervals()) {
            out.status = xsat_status::unsat;
            return out;
        }
        // expression-interval contradiction proof per literal
        for (auto& l : residual_) {
            if (interval_refutes(l)) {
                out.status = xsat_status::unsat;
                return out;
            }
        }
        if (!enumerate()) {
            out.status = exhausted_clean_ ? xsat_status::unsat : xsat_status::bounded_unknown;
            return out;
        }
        out.status = xsat_status::sat;
        out.witness = witness_;
        return out;
    }

  private:
    long long bound_;
    const funcpred_registry& reg_;
    var_gen& vg_;
    long long node_cap_;
    std::vector<xatom> pending_;
    std::vector<xatom> residual_;
    substitution sub_;
    std::map<std::string, xsort> sorts_;
    std::map<std::string, ivl> iv_;
    std::map<std::string, bool> clipped_;
    bool exhausted_clean_ = true;
    env witness_;

    static bool ground(const xref& t) {
        var_set fv = free_vars(t);
        return fv.xvars.empty();
    }

    static bool ground_atom(const xatom& a) {
        var_set fv = free_vars(xf_atom(a));
        return fv.xvars.empty();
    }

    bool eval_ground_atom(const xatom& a) {
        env e;
        return eval_ground(a, e, reg_);
    }

    // occurs check through pair structure only; x inside an arithmetic term
    // is a residual constraint, not a structural cycle
    static bool occurs_in_pair(const std::string& n, const xref& t) {
        if (t->kind == xkind::var)
            return t->name == n;
        if (t->kind == xkind::pair)
            return occurs_in_pair(n, t->a) || occurs_in_pair(n, t->b);
        return false;
    }

    bool bind(const std::string& n, const xref& t) {
        try {
            sub_.bind_x(n, t, vg_);
        } catch (const sort_error&) {
            return false;
        }
        return true;
    }

    xref norm_ground(xref t) {
        if (t->kind == xkind::arith && ground(t)) {
            env e;
            try {
                return value_term(eval_xterm(t, e));
            } catch (const eval_error&) {
                return t;
            }
        }
        return t;
    }

    // returns false on clash
    bool unify(xref a, xref b, std::vector<xatom>& more) {
        a = norm_ground(apply(sub_, a, vg_));
        b = norm_ground(apply(sub_, b, vg_));
        if (xequal(a, b))
            return true;
        if (a->kind == xkind::arith || b->kind == xkind::arith) {
            if (ground(a) && ground(b)) {
                env e;
                try {
                    return value_eq(eval_xterm(a, e), eval_xterm(b, e));
                } catch (const eval_error&) {
                    return false;
                }
            }
            // v = arith(...v...) stays residual; anything else with a var side binds
            if (a->kind == xkind::var && !occurs_anywhere(a->name, b))
                return bind(a->name, b);
            if (b->kind == xkind::var && !occurs_anywhere(b->name, a))
                return bind(b->name, a);
            residual_.push_back(mk_cmp(cmp_op::eq, a, b));
            return true;
        }
        if (a->kind == xkind::var) {
            if (occurs_in_pair(a->name, b) && b->kind == xkind::pair)
                return false;
            return bind(a->name, b);
        }
        if (b->kind == xkind::var)
            return unify(b, a, more);
        if (a->kind != b->kind)
            return false;
        switch (a->kind) {
        case xkind::num:
            return a->value == b->value;
        case xkind::cst:
            return a->name == b->name;  // unique-name assumption
        case xkind::pair:
            more.push_back(mk_cmp(cmp_op::eq, a->a, b->a));
            more.push_back(mk_cmp(cmp_op::eq, a->b, b->b));
            return true;
        default:
            return false;
        }
    }

    static bool occurs_anywhere(const std::string& n, const xref& t) {
        var_set fv = free_vars(t);
        return fv.xvars.count(n) != 0;
    }

    bool close() {
        std::vector<xatom> work = std::move(pending_);
        pending_.clear();
        bool changed = true;
        while (changed) {
            changed = false;
            std::vector<xatom> next;
            for (auto& raw : work) {
                xatom a = apply(sub_, xf_atom(raw), vg_).at;
                if (a.kind == xatom_kind::truth) {
                    if (!a.truth)
                        return false;
                    continue;
                }
                if (a.kind == xatom_kind::cmp && a.op == cmp_op::eq) {
                    std::vector<xatom> more;
                    if (!unify(a.a, a.b, more))
                        return false;
                    for (auto& m : more)
                        next.push_back(m);
                    changed = changed || !more.empty();
                    continue;
                }
                if (ground_atom(a)) {
                    if (!eval_ground_atom(a))
                        return false;
                    continue;
                }
                if (a.kind == xatom_kind::funcpred) {
                    // image propagation: all but the last argument ground
                    const funcpred_decl* d = reg_.lookup(a.fp);
                    if (d && a.args.size() == d->arity) {
                        bool prefix_ground = true;
                        for (size_t i = 0; i + 1 < a.args.size(); ++i)
                            prefix_ground = prefix_ground && ground(a.args[i]);
                        if (prefix_ground) {
                            std::vector<vref> pre;
                            env e;
                            for (size_t i = 0; i + 1 < a.args.size(); ++i)
                                pre.push_back(eval_xterm(a.args[i], e));
                            auto y = d->image(pre);
                            if (!y)
                                return false;
                            next.push_back(mk_cmp(cmp_op::eq, a.args.back(), value_term(*y)));
                            changed = true;
                            continue;
                        }
                    }
                }
                next.push_back(std::move(a));
            }
            work = std::move(next);
        }
        // re-apply the final substitution and drop decided literals
        residual_late_apply(work);
        return consistent_;
    }

    bool consistent_ = true;

    void residual_late_apply(std::vector<xatom>& work) {
        std::vector<xatom> all = std::move(residual_);
        residual_.clear();
        for (auto& a : work)
            all.push_back(a);
        for (auto& raw : all) {
            xatom a = apply(sub_, xf_atom(raw), vg_).at;
            if (a.kind == xatom_kind::truth) {
                if (!a.truth)
                    consistent_ = false;
                continue;
            }
            if (ground_atom(a)) {
                if (!eval_ground_atom(a))
                    consistent_ = false;
                continue;
            }
            // syntactically identical sides decide a comparison outright
            if (a.kind == xatom_kind::cmp && xequal(a.a, a.b)) {
                if (a.op == cmp_op::neq || a.op == cmp_op::lt || a.op == cmp_op::gt)
                    consistent_ = false;
                continue;
            }
            residual_.push_back(std::move(a));
        }
    }

    static xref value_term(const vref& v) {
        switch (v->kind) {
        case vkind::num:
            return mk_num(v->n);
        case vkind::cst:
            return mk_cst(v->name);
        case vkind::pairv:
            return mk_pair(value_term(v->a), value_term(v->b));
        default:
            throw std::logic_error("set value in X term position");
        }
    }

    void mark_arith_vars(const xref& t) {
        if (t->kind == xkind::var)
            sorts_[t->name] = xsort::integer;
        else if (t->kind == xkind::arith) {
            mark_arith_vars(t->a);
            mark_arith_vars(t->b);
        } else if (t->kind == xkind::pair) {
            scan_term(t);
        }
    }

    void scan_term(const xref& t) {
        if (t->kind == xkind::arith)
            mark_arith_vars(t);
        else if (t->kind == xkind::pair) {
            scan_term(t->a);
            scan_term(t->b);
        } else if (t->kind == xkind::var) {
            sorts_.emplace(t->name, xsort::unknown);
        }
    }

    void infer_sorts() {
        for (auto& a : residual_) {
            if (a.kind == xatom_kind::cmp) {
                scan_term(a.a);
                scan_term(a.b);
                if (a.op != cmp_op::eq && a.op != cmp_op::neq) {
                    mark_arith_vars(a.a);
                    mark_arith_vars(a.b);
                }
                if (a.op == cmp_op::eq || a.op == cmp_op::neq) {
                    // an equality kept residual has an arithmetic side
                    if (a.a->kind == xkind::arith || a.b->kind == xkind::arith) {
                        mark_arith_vars(a.a);
                        mark_arith_vars(a.b);
                    }
                    // pairwise positions: var vs pair / var vs num propagate
                    if (a.op == cmp_op::neq) {
                        propagate_pos(a.a, a.b);
                        propagate_pos(a.b, a.a);
                    }
                }
            } else if (a.kind == xatom_kind::funcpred) {
                const funcpred_decl* d = reg_.lookup(a.fp);
                for (auto& t : a.args)
                    scan_term(t);
                if (!d)
                    continue;
                if (d->name == "plus" || d->name == "times" || d->name == "absval") {
                    for (auto& t : a.args)
                        mark_arith_vars(t);
                } else if (d->name == "pairfst" || d->name == "pairsnd") {
                    if (a.args[0]->kind == xkind::var)
                        sorts_[a.args[0]->name] = xsort::pairish;
                }
            }
        }
    }

    void propagate_pos(const xref& a, const xref& b) {
        if (a->kind != xkind::var)
            return;
        if (b->kind == xkind::num) {
            auto it = sorts_.find(a->name);
            if (it != sorts_.end() && it->second == xsort::unknown)
                it->second = xsort::integer;
        }
    }

    ivl interval_of(const xref& t) {
        switch (t->kind) {
        case xkind::num:
            return {t->value, t->value};
        case xkind::var: {
            auto it = iv_.find(t->name);
            if (it != iv_.end())
                return it->second;
            return {};
        }
        case xkind::cst:
        case xkind::pair:
            return {};
        case xkind::arith: {
            ivl a = interval_of(t->a), b = interval_of(t->b);
            switch (t->op) {
            case arith_op::add: return iv_add(a, b);
            case arith_op::sub: return iv_sub(a, b);
            case arith_op::mul: return iv_mul(a, b);
            case arith_op::idiv: {
                if (b.lo == b.hi && b.lo > 0) {
                    long long lo = a.lo <= -kInf ? -kInf : floordiv(a.lo, b.lo);
                    long long hi = a.hi >= kInf ? kInf : floordiv(a.hi, b.lo);
                    return {lo, hi};
                }
                return {};
            }
            case arith_op::imod: {
                if (b.lo == b.hi && b.lo != 0) {
                    long long d = b.lo;
                    if (d > 0)
                        return {0, d - 1};
                    return {d + 1, 0};
                }
                long long m = std::max(std::llabs(b.lo), std::llabs(b.hi));
                if (m >= kInf)
                    return {};
                return {-m, m};
            }
            }
            return {};
        }
        }
        return {};
    }

    bool intervals() {
        for (auto& [n, s] : sorts_)
            if (s == xsort::integer)
                iv_[n] = {};
        for (int round = 0; round < 8; ++round) {
            bool changed = false;
            for (auto& a : residual_) {
                if (a.kind != xatom_kind::cmp)
                    continue;
                changed |= tighten(a.a, a.op, a.b);
                changed |= tighten(a.b, flip(a.op), a.a);
            }
            if (!changed)
                break;
        }
        for (auto& [n, v] : iv_) {
            (void)n;
            if (v.empty())
                return false;
        }
        return true;
    }

    static cmp_op flip(cmp_op op) {
        switch (op) {
        case cmp_op::lt: return cmp_op::gt;
        case cmp_op::le: return cmp_op::ge;
        case cmp_op::gt: return cmp_op::lt;
        case cmp_op::ge: return cmp_op::le;
        default: return op;
        }
    }

    bool tighten(const xref& v, cmp_op op, const xref& other) {
        if (v->kind != xkind::var)
            return false;
        auto it = iv_.find(v->name);
        if (it == iv_.end())
            return false;
        ivl o = interval_of(other);
        ivl cur = it->second;
        ivl next = cur;
        switch (op) {
        case cmp_op::eq:
            next.lo = std::max(cur.lo, o.lo);
            next.hi = std::min(cur.hi, o.hi);
            break;
        case cmp_op::lt:
            next.hi = std::min(cur.hi, sat_add(o.hi, -1));
            break;
        case cmp_op::le:
            next.hi = std::min(cur.hi, o.hi);
            break;
        case cmp_op::gt:
            next.lo = std::max(cur.lo, sat_add(o.lo, 1));
            break;
        case cmp_op::ge:
            next.lo = std::max(cur.lo, o.lo);
            break;
        case cmp_op::neq:
            return false;
        }
        if (next.lo != cur.lo || next.hi != cur.hi) {
            it->second = next;
            return true;
        }
        return false;
    }

    bool interval_refutes(const xatom& a) {
        if (a.kind != xatom_kind::cmp)
            return false;
        ivl x = interval_of(a.a), y = interval_of(a.b);
        // only meaningful when both sides are integer-shaped
        if (!integer_shaped(a.a) || !integer_shaped(a.b))
            return false;
        switch (a.op) {
        case cmp_op::eq:
            return x.hi < y.lo || y.hi < x.lo;
        case cmp_op::lt:
            return x.lo >= y.hi;
        case cmp_op::le:
            return x.lo > y.hi;
        case cmp_op::gt:
            return x.hi <= y.lo;
        case cmp_op::ge:
            return x.hi < y.lo;
        case cmp_op::neq:
            return x.lo == x.hi && y.lo == y.hi && x.lo == y.lo;
        }
        return false;
    }

    bool integer_shaped(const xref& t) {
        switch (t->kind) {
        case xkind::num:
        case xkind::arith:
            return true;
        case xkind::var: {
            auto it = sorts_.find(t->name);
            return it != sorts_.end() && it->second == xsort::integer;
        }
        default:
            return false;
        }
    }

    bool enumerate() {
        // candidate domains
        std::vector<std::string> vars;
        for (auto& [n, s] : sorts_) {
            (void)s;
            vars.push_back(n);
        }
        std::map<std::string, std::vector<vref>> dom;
        std::set<std::string> csts;
        std::vector<vref> pair_ground;
        for (auto& a : residual_)
            collect_ground(a, csts, pair_ground);
        int fresh_idx = 0;
        for (auto& n : vars) {
            xsort s = sorts_[n];
            std::vector<vref> d;
            if (s == xsort::integer) {
                ivl v = iv_.count(n) ? iv_[n] : ivl{};
                long long lo = v.lo, hi = v.hi;
                if (lo < -bound_) {
                    lo = -bound_;
                    exhausted_clean_ = false;
                }
                if (hi > bound_) {
                    hi = bound_;
                    exhausted_clean_ = false;
                }
                // favour small magnitudes so minimal witnesses come first
                long long maxabs = std::max(std::llabs(lo), std::llabs(hi));
                for (long long k = 0; k <= maxabs; ++k) {
                    if (k >= lo && k <= hi)
                        d.push_back(mk_vnum(k));
                    if (k > 0 && -k >= lo && -k <= hi)
                        d.push_back(mk_vnum(-k));
                }
            } else if (s == xsort::pairish) {
                for (auto& p : pair_ground)
                    d.push_back(p);
                d.push_back(mk_vpair(mk_vcst(vg_.fresh("xp")), mk_vcst(vg_.fresh("xp"))));
            } else {
                for (auto& c : csts)
                    d.push_back(mk_vcst(c));
                d.push_back(mk_vcst(vg_.fresh("x")));
                // a small integer window keeps mixed-sort disequalities honest
                d.push_back(mk_vnum(0));
                d.push_back(mk_vnum(1));
            }
            if (d.empty())
                d.push_back(mk_vcst(vg_.fresh("x")));
            dom[n] = std::move(d);
        }
        std::sort(vars.begin(), vars.end(), [&](const std::string& a, const std::string& b) {
            return dom[a].size() < dom[b].size();
        });
        // literal -> variables it mentions
        std::vector<lit_info> lits;
        for (auto& a : residual_) {
            lit_info li;
            li.at = a;
            var_set fv = free_vars(xf_atom(a));
            li.vars = fv.xvars;
            lits.push_back(std::move(li));
        }
        env e;
        long long nodes = 0;
        if (dfs(vars, 0, dom, lits, e, nodes)) {
            witness_ = finish_witness(e);
            return true;
        }
        return false;
    }

    static void collect_ground(const xatom& a, std::set<std::string>& csts,
                               std::vector<vref>& pairs) {
        std::function<void(const xref&)> walk = [&](const xref& t) {
            if (!t)
                return;
            if (t->kind == xkind::cst)
                csts.insert(t->name);
            if (t->kind == xkind::pair) {
                var_set fv = free_vars(t);
                if (fv.xvars.empty()) {
                    env e;
                    pairs.push_back(eval_xterm(t, e));
                }
                walk(t->a);
                walk(t->b);
            }
            if (t->kind == xkind::arith) {
                walk(t->a);
                walk(t->b);
            }
        };
        if (a.kind == xatom_kind::cmp) {
            walk(a.a);
            walk(a.b);
        } else if (a.kind == xatom_kind::funcpred) {
            for (auto& t : a.args)
                walk(t);
        }
    }

    bool dfs(const std::vector<std::string>& vars, size_t i,
             const std::map<std::string, std::vector<vref>>& dom, const std::vector<lit_info>& lits,
             env& e, long long& nodes) {
        if (++nodes > node_cap_) {
            exhausted_clean_ = false;
            return false;
        }
        if (i == vars.size())
            return check(lits, e, vars.size());
        for (auto& v : dom.at(vars[i])) {
            e.xvals[vars[i]] = v;
            // early pruning: literals fully assigned by now
            bool ok = true;
            for (auto& l : lits) {
                bool all = true;
                bool uses = false;
                for (auto& n : l.vars) {
                    if (n == vars[i])
                        uses = true;
                    if (!e.xvals.count(n)) {
                        all = false;
                        break;
                    }
                }
                if (all && uses && !eval_lit(l.at, e)) {
                    ok = false;
                    break;
                }
            }
            if (ok && dfs(vars, i + 1, dom, lits, e, nodes))
                return true;
            e.xvals.erase(vars[i]);
        }
        return false;
    }

    bool check(const std::vector<lit_info>& lits, env& e, size_t) {
        for (auto& l : lits)
            if (!eval_lit(l.at, e))
                return false;
        return true;
    }

    bool eval_lit(const xatom& a, const env& e) {
        try {
            return eval_ground(a, e, reg_);
        } catch (const std::exception&) {
            return false;
        }
    }

    env finish_witness(env e) {
        // extend the witness to variables eliminated by unification
        for (auto& [n, t] : sub_.xbinds()) {
            try {
                e.xvals[n] = eval_xterm(t, e);
            } catch (const eval_error&) {
                // binding mentions a variable no literal constrains; default it
                var_set fv = free_vars(t);
                for (auto& m : fv.xvars)
                    if (!e.xvals.count(m))
                        e.xvals[m] = mk_vcst(vg_.fresh("x"));
                try {
                    e.xvals[n] = eval_xterm(t, e);
                } catch (const eval_error&) {
                    e.xvals[n] = mk_vcst(vg_.fresh("x"));
                }
            }
        }
        return e;
    }
};

}  // namespace xdetail

inline xsat_result sat_x(const std::vector<xatom>& lits, long long bound,
                         const funcpred_registry& reg, var_gen& vg,
                         long long node_cap = 2000000) {
    xdetail::xsolver s(lits, bound, reg, vg, node_cap);
    return s.solve();
}

inline xprop_result propagate_x(const std::vector<xatom>& lits, const funcpred_registry& reg,
                                var_gen& vg) {
    xdetail::xsolver s(lits, 0, reg, vg, 0);
    return s.propagate();
}

}  // namespace risolve

#pragma once

#include "risolve/admissibility.hpp"
#include "risolve/parser.hpp"

// Public entry point: admissibility guard + rewriting engine + result
// presentation (bindings, residual constraints, extracted model).

namespace risolve {

struct solver_options : solve_options {
    bool force = false;  // solve even when classified non-admissible
};

class solver {
  public:
    explicit solver(solver_options opt = {}, funcpred_registry reg = funcpred_registry())
        : opt_(opt), reg_(std::move(reg)) {}

    solve_result solve(const formula& f) {
        vg_.reserve_all(free_vars(f));
        if (!opt_.force) {
            admissibility_result adm = is_admissible(f, vg_);
            if (!adm.admissible) {
                solve_result res;
                res.status = solve_status::nonadmissible;
                res.detail = adm.witness;
                return res;
            }
        }
        engine eng(opt_, reg_, vg_);
        return eng.solve(f);
    }

    var_gen& vars() { return vg_; }
    const funcpred_registry& registry() const { return reg_; }
    const solver_options& options() const { return opt_; }

  private:
    solver_options opt_;
    funcpred_registry reg_;
    var_gen vg_;
};

// ---------------------------------------------------------------------------
// Result presentation

struct presented_solution {
    std::map<std::string, std::string> bindings;  // variable -> term
    std::vector<std::string> residual;
    std::map<std::string, std::string> model;     // variable -> ground value
};

inline presented_solution present(const solution& sol, const var_set& orig, var_gen& vg) {
    presented_solution out;
    for (auto& v : orig.svars) {
        if (auto t = sol.sub.lookup_s(v)) {
            out.bindings[v] = pretty(*t);
            continue;
        }
        // irreducible solved equations count as bindings too
        for (auto& c : sol.store) {
            if (c.k != ckind::eq)
                continue;
            if (c.s1 && c.s1->kind == skind::var && c.s1->name == v)
                out.bindings[v] = pretty(c.s2);
            else if (c.s2 && c.s2->kind == skind::var && c.s2->name == v)
                out.bindings[v] = pretty(c.s1);
        }
    }
    for (auto& v : orig.xvars)
        if (auto t = sol.sub.lookup_x(v))
            out.bindings[v] = pretty(*t);

    auto is_binding_eq = [&](const constraint& c) {
        if (c.k != ckind::eq)
            return false;
        return (c.s1 && c.s1->kind == skind::var) || (c.s2 && c.s2->kind == skind::var);
    };
    for (auto& c : sol.store) {
        if (c.k == ckind::truec || c.k == ckind::sort_set || c.k == ckind::sort_isx)
            continue;
        if (is_binding_eq(c))
            continue;
        out.residual.push_back(pretty(c));
    }
    for (auto& a : sol.xstore) {
        env empty;
        (void)vg;
        var_set fv = free_vars(xf_atom(a));
        if (fv.xvars.empty())
            continue;  // ground literals are part of no answer
        out.residual.push_back(pretty(mk_xc(a)));
    }
    for (auto& v : orig.svars) {
        auto it = sol.model.svals.find(v);
        if (it != sol.model.svals.end())
            out.model[v] = value_str(it->second);
    }
    for (auto& v : orig.xvars) {
        auto it = sol.model.xvals.find(v);
        if (it != sol.model.xvals.end())
            out.model[v] = value_str(it->second);
    }
    return out;
}

inline std::string format_solution(const presented_solution& p) {
    std::string out;
    bool first = true;
    for (auto& [v, t] : p.bindings) {
        if (!first)
            out += ", ";
        out += v + " = " + t;
        first = false;
    }
    if (p.bindings.empty())
        out += "true";
    for (auto& r : p.residual)
        out += "\nConstraint: " + r;
    return out;
}

}  // namespace risolve

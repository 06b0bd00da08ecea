#pragma once

#include "risolve/risolve.hpp"

// shared helpers for the test suites

namespace tu {

using namespace risolve;

inline solver_options quick_opts(bool all = false, int timeout_ms = 10000) {
    solver_options o;
    o.all_solutions = all;
    o.timeout_ms = timeout_ms;
    return o;
}

inline solve_result solve_text(const std::string& text, bool all = false,
                               solver_options base = quick_opts()) {
    base.all_solutions = all;
    solver s(base);
    return s.solve(parse(text));
}

inline solve_status status_of(const std::string& text) {
    return solve_text(text).status;
}

inline bool is_sat(const std::string& text) { return status_of(text) == solve_status::sat; }
inline bool is_unsat(const std::string& text) {
    return status_of(text) == solve_status::unsat;
}

// binding of an original variable in one solution, as concrete syntax
inline std::optional<std::string> binding(const solve_result& res, size_t branch,
                                          const std::string& var, const std::string& text) {
    formula f = parse(text);
    var_gen vg;
    presented_solution p = present(res.solutions.at(branch), free_vars(f), vg);
    auto it = p.bindings.find(var);
    if (it == p.bindings.end())
        return std::nullopt;
    return it->second;
}

// do the residual X literals of a solution entail the given X formula?
// checked by refutation: xstore and not(entailed) must be unsatisfiable
inline bool xstore_entails(const solution& sol, const xformula& goal) {
    var_gen vg;
    funcpred_registry reg;
    xformula neg = negate_filter(goal);
    std::vector<std::vector<xatom>> dnf;
    edetail::dnf_xf(neg, dnf);
    for (auto& conj : dnf) {
        std::vector<xatom> lits = sol.xstore;
        bool dead = false;
        for (auto& a : conj) {
            if (a.kind == xatom_kind::truth) {
                dead = !a.truth;
                continue;
            }
            lits.push_back(a);
        }
        if (dead)
            continue;
        // the discovered equalities take part in the entailment
        for (auto& [n, t] : sol.sub.xbinds())
            lits.push_back(mk_cmp(cmp_op::eq, mk_xvar(n), t));
        xsat_result r = sat_x(lits, 1000, reg, vg);
        if (r.status == xsat_status::sat)
            return false;
    }
    return true;
}

// random admissible formulas for the oracle-equivalence checks: small
// conjunctions over three set variables, constants a/b/c and small integers,
// with control-variable RIS only (single-variable controls, pattern = ctrl)
struct formula_gen {
    std::mt19937 gen;
    explicit formula_gen(unsigned seed) : gen(seed) {}

    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(gen); }

    std::string ground_elem() {
        const char* cs[] = {"a", "b", "c", "-1", "0", "1", "2"};
        return cs[pick(7)];
    }

    std::string ground_set() {
        int n = pick(3);
        std::string s = "{";
        for (int i = 0; i < n; ++i) {
            if (i)
                s += ",";
            s += ground_elem();
        }
        return s + "}";
    }

    std::string svar() {
        const char* vs[] = {"A", "B", "C"};
        return vs[pick(3)];
    }

    std::string filter(const std::string& ctrl) {
        switch (pick(5)) {
        case 0: return "true";
        case 1: return ctrl + " neq " + ground_elem();
        case 2: return ctrl + " = " + ground_elem();
        case 3: return ctrl + " in " + ground_set();
        default: return ctrl + " > 0";
        }
    }

    std::string set_term(int depth) {
        switch (pick(depth > 0 ? 4 : 3)) {
        case 0: return svar();
        case 1: return ground_set();
        case 2: {
            std::string tail = pick(2) ? svar() : "";
            std::string head = ground_elem();
            return tail.empty() ? "{" + head + "}" : "{" + head + "/" + tail + "}";
        }
        default: {
            std::string ctrl = "K" + std::to_string(pick(2) + 1);
            return "ris(" + ctrl + " in " + set_term(depth - 1) + ", " + filter(ctrl) + ")";
        }
        }
    }

    std::string elem_term() { return pick(4) == 0 ? "U1" : ground_elem(); }

    std::string atom() {
        switch (pick(10)) {
        case 0: return "un(" + set_term(1) + "," + set_term(1) + "," + set_term(1) + ")";
        case 1: return "disj(" + set_term(1) + "," + set_term(1) + ")";
        case 2: return set_term(1) + " = " + set_term(1);
        case 3: return set_term(1) + " neq " + set_term(1);
        case 4: return elem_term() + " in " + set_term(1);
        case 5: return elem_term() + " nin " + set_term(1);
        case 6: return "subset(" + set_term(1) + "," + set_term(1) + ")";
        case 7: return "inters(" + set_term(0) + "," + set_term(0) + "," + svar() + ")";
        case 8: return "ndisj(" + set_term(0) + "," + set_term(0) + ")";
        default: {
            std::string ctrl = "K3";
            return "foreach(" + ctrl + " in " + set_term(0) + ", " + filter(ctrl) + ")";
        }
        }
    }

    std::string formula_text(int max_atoms = 4) {
        int n = 1 + pick(max_atoms);
        std::string out = atom();
        for (int i = 1; i < n; ++i)
            out += " & " + atom();
        return out;
    }
};

}  // namespace tu

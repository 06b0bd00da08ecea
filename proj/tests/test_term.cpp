#include "risolve/parser.hpp"
#include "risolve/pretty.hpp"
#include "risolve/subst.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace risolve;

TEST_CASE("substitution replaces free occurrences only") {
    var_gen vg;

    SECTION("textual substitution in a filter") {
        formula f = parse("X mod 2 = 0");
        substitution s = substitution::of_x("X", mk_num(5));
        formula g = apply(s, f, vg);
        CHECK(pretty(g) == "5 mod 2 = 0");
    }

    SECTION("domain replacement turns a variable-RIS into an empty-domain RIS") {
        formula f = parse("ris(X in D, X neq 0) = {}");
        substitution s = substitution::of_s("D", mk_empty());
        formula g = apply(s, f, vg);
        CHECK(pretty(g) == "ris(X in {},X neq 0) = {}");
    }

    SECTION("bound control variables are untouched") {
        formula f = parse("ris(X in D, true, X) = A");
        substitution s = substitution::of_x("X", mk_cst("a"));
        formula g = apply(s, f, vg);
        CHECK(alpha_equal(g.c.s1, f.c.s1));
    }

    SECTION("capture is avoided by renaming the binder") {
        // binding D to a set mentioning X must not capture the control X
        sref r = parse("ris(X in D, X neq Y) = {}").c.s1;
        substitution s = substitution::of_x("Y", mk_xvar("X"));
        sref r2 = apply(s, r, vg);
        REQUIRE(r2->kind == skind::ris);
        // the new filter compares the renamed control against the free X
        var_set fv = free_vars(r2);
        CHECK(fv.xvars.count("X"));
        std::set<std::string> ctrl;
        ctrl_vars(r2->ris->ctrl, ctrl);
        CHECK(!ctrl.count("X"));
    }
}

TEST_CASE("fresh variables are session-unique with a monotone counter") {
    var_gen vg;
    CHECK(vg.fresh("N") == "N_1");
    CHECK(vg.fresh("N") == "N_2");
    for (int i = 0; i < 8; ++i)
        vg.fresh("M");
    CHECK(vg.fresh("n") == "n_11");
}

TEST_CASE("variable-RIS classification and free variables") {
    formula f1 = parse("ris(X in D, true) = {}");
    CHECK(is_variable_ris(f1.c.s1));
    formula f2 = parse("ris(X in {1/D}, true) = {}");
    CHECK(!is_variable_ris(f2.c.s1));

    formula f3 = parse("ris(X in D, X neq Y) = {}");
    var_set fv = free_vars(f3.c.s1);
    CHECK(fv.svars == std::set<std::string>{"D"});
    CHECK(fv.xvars == std::set<std::string>{"Y"});
}

namespace {

// small random formula generator for the property tests
struct rnd {
    std::mt19937 gen{20240817};
    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(gen); }

    xref rand_x(int depth) {
        switch (pick(depth > 0 ? 5 : 3)) {
        case 0:
            return mk_xvar("U" + std::to_string(pick(3) + 1));
        case 1:
            return mk_cst(pick(2) ? "a" : "b");
        case 2:
            return mk_num(pick(7) - 3);
        case 3:
            return mk_pair(rand_x(depth - 1), rand_x(depth - 1));
        default:
            return mk_arith(arith_op::add, rand_x(depth - 1), rand_x(depth - 1));
        }
    }

    sref rand_s(int depth) {
        switch (pick(depth > 0 ? 4 : 3)) {
        case 0:
            return mk_empty();
        case 1:
            return mk_svar("S" + std::to_string(pick(3) + 1));
        case 2: {
            sref tail = depth > 0 && pick(2) ? rand_s(depth - 1) : mk_empty();
            return mk_cons(rand_x(depth), tail);
        }
        default: {
            xref c = mk_xvar("C" + std::to_string(pick(2) + 90));
            xformula filt =
                pick(2) ? xf_true()
                        : xf_atom(mk_cmp(cmp_op::neq, c, rand_x(0)));
            return mk_ris(c, rand_s(depth - 1), filt, c);
        }
        }
    }

    constraint rand_c(int depth) {
        switch (pick(5)) {
        case 0:
            return mk_c2(ckind::eq, rand_s(depth), rand_s(depth));
        case 1:
            return mk_c2(ckind::neq, rand_s(depth), rand_s(depth));
        case 2:
            return mk_mem_c(ckind::in, rand_x(depth), rand_s(depth));
        case 3:
            return mk_c3(ckind::un, rand_s(depth), rand_s(depth), rand_s(depth));
        default:
            return mk_c2(ckind::disj, rand_s(depth), rand_s(depth));
        }
    }

    formula rand_f(int depth) {
        if (depth == 0 || pick(3) == 0)
            return f_atom(rand_c(1));
        std::vector<formula> parts;
        int n = 2 + pick(2);
        for (int i = 0; i < n; ++i)
            parts.push_back(rand_f(depth - 1));
        return pick(2) ? f_conj(parts) : f_disj(parts);
    }
};

}  // namespace

TEST_CASE("substitution is a homomorphism over conjunction") {
    rnd r;
    var_gen vg;
    for (int i = 0; i < 200; ++i) {
        formula a = r.rand_f(2);
        formula b = r.rand_f(2);
        substitution s;
        xref xv = r.rand_x(1);
        while (free_vars(xv).xvars.count("U1"))
            xv = r.rand_x(1);
        sref sv = r.rand_s(1);
        while (free_vars(sv).svars.count("S1"))
            sv = r.rand_s(1);
        s.bind_x("U1", xv, vg);
        s.bind_s("S1", sv, vg);
        formula both = apply(s, f_conj({a, b}), vg);
        formula split = f_conj({apply(s, a, vg), apply(s, b, vg)});
        CHECK(pretty(both) == pretty(split));
    }
}

TEST_CASE("parse of pretty is alpha-equal for random terms") {
    rnd r;
    for (int i = 0; i < 300; ++i) {
        sref s = r.rand_s(2);
        std::string text = pretty(s) + " = {}";
        formula f = parse(text);
        CHECK(alpha_equal(f.c.s1, s));
    }
}

TEST_CASE("alpha-equivalence of RIS binders") {
    formula a = parse("ris(X in D, X neq 0) = {}");
    formula b = parse("ris(Y in D, Y neq 0) = {}");
    formula c = parse("ris(Y in D, Y neq 1) = {}");
    CHECK(alpha_equal(a.c.s1, b.c.s1));
    CHECK(!alpha_equal(a.c.s1, c.c.s1));
}

#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

using namespace risolve;
using tu::is_sat;
using tu::is_unsat;
using tu::solve_text;

TEST_CASE("sort constraint reductions") {
    using edetail::sort_reduce;
    auto set_of = [](sref s) { return mk_sort_c(ckind::sort_set, std::move(s)); };
    auto isx_of_s = [](sref s) { return mk_sort_c(ckind::sort_isx, std::move(s)); };

    auto r1 = sort_reduce(set_of(mk_empty()));
    REQUIRE(r1);
    CHECK((r1->decided && r1->value));  // set({}) holds

    auto r2 = sort_reduce(isx_of_s(mk_empty()));
    REQUIRE(r2);
    CHECK((r2->decided && !r2->value));  // isX({}) fails

    auto r3 = sort_reduce(isx_of_s(mk_cons(mk_cst("a"), mk_empty())));
    REQUIRE(r3);
    CHECK((r3->decided && !r3->value));  // isX({t/A}) fails

    auto r4 = sort_reduce(set_of(mk_cons(mk_cst("a"), mk_svar("A"))));
    REQUIRE(r4);
    CHECK(!r4->decided);  // set({t/A}) reduces to set(A)
    CHECK(pretty(r4->next) == "set(A)");

    constraint isx_var = mk_sort_c(ckind::sort_isx, nullptr, mk_xvar("X"));
    CHECK(!sort_reduce(isx_var));  // irreducible

    constraint isx_num = mk_sort_c(ckind::sort_isx, nullptr, mk_num(3));
    auto r5 = sort_reduce(isx_num);
    REQUIRE(r5);
    CHECK((r5->decided && r5->value));
}

TEST_CASE("sort inference adds one sort constraint per variable") {
    solve_result res = solve_text("X = {Y1/A}", true);
    REQUIRE(res.status == solve_status::sat);
    bool set_x = false, isx_y = false, set_a = false;
    for (auto& c : res.solutions[0].store) {
        if (c.k == ckind::sort_set && c.s1 && c.s1->kind == skind::var) {
            set_x = set_x || c.s1->name == "X";
            set_a = set_a || c.s1->name == "A";
        }
        if (c.k == ckind::sort_isx && c.x1 && c.x1->kind == xkind::var)
            isx_y = isx_y || c.x1->name == "Y1";
    }
    CHECK(set_x);
    CHECK(isx_y);
    CHECK(set_a);
}

TEST_CASE("equality rules") {
    SECTION("absorption and left-commutativity hold semantically") {
        CHECK(is_sat("{1,2,1} = {2,1}"));
        CHECK(is_sat("{1,2} = {2,1}"));
        CHECK(is_unsat("{1,2} = {1,3}"));
    }

    SECTION("a RIS forced empty denies its filter on every element") {
        CHECK(is_sat("ris(X in {1/D}, X > 2) = {}"));
        CHECK(is_unsat("ris(X in {1/D}, X > 0) = {}"));
    }

    SECTION("shared domain variable between a RIS and an extensional set") {
        solve_result res = solve_text("ris(X in D, true, X) = {1/D}");
        REQUIRE(res.status == solve_status::sat);
        auto b = tu::binding(res, 0, "D", "ris(X in D, true, X) = {1/D}");
        REQUIRE(b);
        CHECK(b->rfind("{1/", 0) == 0);  // D = {1/N}
    }

    SECTION("domain renaming when the bound set variable recurs") {
        // X = {a,b / {y : X | true}} admits X = {a,b}
        solve_result res = solve_text("X = {a,b/ris(Y in X, true)}");
        CHECK(res.status == solve_status::sat);
    }

    SECTION("extensional set unification enumerates duplicate splits") {
        CHECK(is_sat("{X1,X2} = {1,2} & X1 = 2"));
        CHECK(is_unsat("{X1,X2} = {1,2} & X1 = 2 & X2 = 2"));
    }
}

TEST_CASE("disequality rules") {
    CHECK(is_unsat("{} neq {}"));
    CHECK(is_unsat("ris(X in {}, true) neq {}"));
    CHECK(is_sat("{} neq {a/A}"));
    SECTION("an irreducible disequality stays in the answer") {
        solve_result res = solve_text("X neq {1}");
        REQUIRE(res.status == solve_status::sat);
        bool found = false;
        for (auto& c : res.solutions[0].store)
            found = found || pretty(c) == "X neq {1}";
        CHECK(found);
    }
    CHECK(is_unsat("X neq X"));
    CHECK(is_sat("X neq {a/X}"));  // a fresh witness separates them
    CHECK(is_unsat("ris(X in D, true) neq ris(Y in D, true)"));
}

TEST_CASE("membership rules") {
    SECTION("membership in a RIS evaluates and inverts the pattern") {
        std::string text = "[5,Y] in ris(X in D, true, [X,X*X])";
        solve_result res = solve_text(text);
        REQUIRE(res.status == solve_status::sat);
        auto y = tu::binding(res, 0, "Y", text);
        REQUIRE(y);
        CHECK(*y == "25");
        auto d = tu::binding(res, 0, "D", text);
        REQUIRE(d);
        CHECK(d->rfind("{5/", 0) == 0);
    }

    SECTION("negated membership with a pair control term") {
        CHECK(is_sat("[5,0] nin ris([X,Y] in {Z1/Z2}, Y neq 0)"));
    }

    CHECK(is_unsat("zz in {}"));
    CHECK(is_unsat("zz in ris(X in {}, true)"));

    SECTION("function inversion: square roots") {
        solve_result res = solve_text("[X,36] in ris(X1 in D, true, [X1,X1*X1])", true);
        REQUIRE(res.status == solve_status::sat);
        std::set<std::string> roots;
        for (size_t i = 0; i < res.solutions.size(); ++i) {
            auto x = tu::binding(res, i, "X", "[X,36] in ris(X1 in D, true, [X1,X1*X1])");
            if (x)
                roots.insert(*x);
        }
        CHECK(roots.count("6"));
        CHECK(roots.count("-6"));
    }
}

TEST_CASE("union rules") {
    CHECK(is_unsat("A = ris(X in D, X neq 0) & un(A,B,C) & disj(A,C) & A neq {}"));

    SECTION("an empty first argument forces the result") {
        CHECK(is_unsat("un({},A,B) & B neq A"));
        CHECK(is_sat("un({},A,B)"));
    }

    SECTION("a variable-RIS triple is irreducible") {
        solve_result res =
            solve_text("un(ris(X in D,X>0), ris(Y in E,Y>0), ris(Z in H,Z>0))");
        REQUIRE(res.status == solve_status::sat);
        bool residual_un = false;
        for (auto& c : res.solutions[0].store)
            residual_un = residual_un || c.k == ckind::un;
        CHECK(residual_un);
    }

    SECTION("union against ground sets") {
        CHECK(is_sat("un({1},{2},{1,2})"));
        CHECK(is_unsat("un({1},{2},{1,3})"));
        CHECK(is_sat("un(A,{2},{1,2}) & 1 in A"));
        CHECK(is_unsat("un(A,{2},{1,2}) & 3 in A"));
    }
}

TEST_CASE("disjointness rules") {
    SECTION("self-disjointness forces emptiness") {
        solve_result res = solve_text("disj(X,X)", true);
        REQUIRE(res.status == solve_status::sat);
        CHECK(value_eq(res.solutions[0].model.svals.at("X"), mk_vempty()));
        CHECK(is_unsat("disj(X,X) & X neq {}"));
    }

    SECTION("the positive-filter branch removes the pattern instance") {
        CHECK(is_sat("disj(A, ris(X in {1/D}, true, X))"));
        CHECK(is_unsat("1 in A & disj(A, ris(X in {1/D}, true, X))"));
        CHECK(is_sat("1 in A & disj(A, ris(X in {1/D}, X neq 1, X))"));
    }

    SECTION("two variable-RIS are irreducible") {
        solve_result res = solve_text("disj(ris(X in D,X>0), ris(Y in E,Y>0))");
        REQUIRE(res.status == solve_status::sat);
        bool residual = false;
        for (auto& c : res.solutions[0].store)
            residual = residual || c.k == ckind::disj;
        CHECK(residual);
    }
}

TEST_CASE("restricted universal quantifier rules") {
    CHECK(is_sat("foreach(X in {2,4,1,6}, 1 =< X)"));
    CHECK(is_unsat("foreach(X in {2,4,1,6}, 2 =< X)"));
    CHECK(is_sat("foreach(X in {}, false)"));

    SECTION("a variable domain is irreducible") {
        solve_result res = solve_text("foreach(X in A, X > 0)");
        REQUIRE(res.status == solve_status::sat);
        bool residual = false;
        for (auto& c : res.solutions[0].store)
            residual = residual || c.k == ckind::foreach_c;
        CHECK(residual);
    }

    SECTION("iteration instantiates the body element by element") {
        std::string text = "foreach(X in {2,4,1,6}, Y =< X)";
        solve_result res = solve_text(text);
        REQUIRE(res.status == solve_status::sat);
        CHECK(tu::xstore_entails(res.solutions[0],
                                 xf_atom(mk_cmp(cmp_op::le, mk_xvar("Y"), mk_num(1)))));
    }

    SECTION("an element that cannot match a pair control fails the quantifier") {
        CHECK(is_unsat("foreach([X,Y] in {5}, true)"));
        CHECK(is_sat("foreach([X,Y] in {[a,1]}, Y > 0)"));
    }
}

TEST_CASE("neq elimination") {
    CHECK(is_unsat("D neq {} & ris(X in D, true) = {}"));
    CHECK(is_sat("X neq {} & Y1 in X"));

    SECTION("the witness split fires for union arguments") {
        std::ostringstream trace;
        solver_options opt = tu::quick_opts();
        opt.trace = true;
        opt.trace_out = &trace;
        solver s(opt);
        solve_result res = s.solve(parse("D neq {1} & un(D,E,F)"));
        REQUIRE(res.status == solve_status::sat);
        CHECK(trace.str().find("rule=rmneq") != std::string::npos);
    }

    SECTION("untouched disequalities survive") {
        std::ostringstream trace;
        solver_options opt = tu::quick_opts();
        opt.trace = true;
        opt.trace_out = &trace;
        solver s(opt);
        solve_result res = s.solve(parse("X neq {} & Y1 in X"));
        REQUIRE(res.status == solve_status::sat);
        CHECK(trace.str().find("rule=rmneq") == std::string::npos);
    }
}

TEST_CASE("the worked rewriting example yields exactly two branches") {
    std::string text = "ris([X,Y] in {[a,1]/S}, X in {a,b}) = {[a,1]}";
    solve_result res = solve_text(text, true);
    REQUIRE(res.status == solve_status::sat);
    REQUIRE(res.solutions.size() == 2);

    bool cons_branch = false, empty_branch = false;
    for (size_t i = 0; i < res.solutions.size(); ++i) {
        auto s = tu::binding(res, i, "S", text);
        if (s) {
            CHECK(s->rfind("{[a,1]/", 0) == 0);
            cons_branch = true;
        } else {
            // S stays free; its extracted value is the empty set
            CHECK(value_eq(res.solutions[i].model.svals.at("S"), mk_vempty()));
            empty_branch = true;
        }
    }
    CHECK(cons_branch);
    CHECK(empty_branch);
}

TEST_CASE("nested RIS domains unfold through the inner level") {
    // the inner RIS keeps odd numbers, the outer keeps those above 1
    CHECK(is_sat("ris(X in ris(Y in {1,2,3}, 1 = Y mod 2), X > 1) = {3}"));
    CHECK(is_unsat("ris(X in ris(Y in {1,2,3}, 1 = Y mod 2), X > 1) = {2}"));
    CHECK(is_sat("5 nin ris(X in ris(Y in {1,5}, Y > 0), X neq 1)"));
    CHECK(is_unsat("3 nin ris(X in ris(Y in {3}, Y > 0), X neq 1)"));
}

TEST_CASE("solver status mechanics") {
    SECTION("timeouts are reported") {
        solver_options opt;
        opt.timeout_ms = 1;
        solver s(opt);
        // adversarial: large unification product
        formula f = parse(
            "{X1,X2,X3,X4,X5,X6} = {Y1,Y2,Y3,Y4,Y5,Y6} & "
            "{X1,X2,X3,X4,X5,X6} = {Z1,Z2,Z3,Z4,Z5,Z6} & "
            "un(A1,B1,C1) & nun(A1,B1,C1)");
        solve_result res = s.solve(f);
        CHECK(res.status == solve_status::timeout);
    }

    SECTION("non-admissible inputs are rejected before solving") {
        solve_result res = solve_text("A = {1/ris(X in A, true, [X,Y])}");
        CHECK(res.status == solve_status::nonadmissible);
        CHECK(!res.detail.empty());
    }

    SECTION("decision mode stops at the first branch") {
        solve_result res = solve_text("{X1,X2} = {1,2}", false);
        CHECK(res.solutions.size() == 1);
    }
}

#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace risolve;

namespace {

std::vector<constraint> atoms_of(const std::string& text) {
    formula f = parse(text);
    std::vector<std::vector<constraint>> d;
    dnf(f, d);
    REQUIRE(d.size() == 1);
    return d[0];
}

}  // namespace

TEST_CASE("solved form recognition") {
    SECTION("a variable bound to a variable-RIS, not used elsewhere") {
        CHECK(is_solved_form(atoms_of("X = ris(Y in D, Y neq 0)")));
    }
    SECTION("negative membership in a variable-RIS") {
        CHECK(is_solved_form(atoms_of("1 nin ris(Y in D, Y neq 0)")));
    }
    SECTION("a RIS with an extensional domain is not solved") {
        CHECK(!is_solved_form(atoms_of("ris(X in {1/D}, X > 0) = {}")));
    }
    SECTION("the variable may be its own RIS domain") {
        CHECK(is_solved_form(atoms_of("X = ris(Y in X, Y neq 0)")));
    }
    SECTION("irreducible unions and disjointness") {
        CHECK(is_solved_form(atoms_of("un(A, ris(X in D1, X>0), ris(Y in D2, Y>0))")));
        CHECK(is_solved_form(atoms_of("disj(A,B)")));
        CHECK(!is_solved_form(atoms_of("disj(A,A)")));
    }
    SECTION("a guarded disequality is not solved") {
        CHECK(!is_solved_form(atoms_of("D neq {} & un(D,E,F)")));
        CHECK(is_solved_form(atoms_of("D neq {} & Y1 in X or false")));
    }
}

TEST_CASE("the depth system avoids the depths named by disequalities") {
    var_gen vg;
    funcpred_registry reg;
    env witness;

    SECTION("an empty store has an empty model") {
        env m = extract_model({}, witness, reg, vg);
        CHECK(m.svals.empty());
    }

    SECTION("X neq {} gets the singleton nest") {
        auto store = atoms_of("X neq {}");
        depth_system sys = solve_depth_system(store);
        CHECK(sys.depth.at("X") == 1);
        env m = extract_model(store, witness, reg, vg);
        CHECK(value_eq(m.svals.at("X"), mk_vset({mk_vempty()})));
        CHECK(eval_formula(parse("X neq {}"), m, reg));
    }

    SECTION("chained disequalities take successive depths") {
        auto store = atoms_of("X neq {} & X neq Y & Y neq {}");
        env m = extract_model(store, witness, reg, vg);
        CHECK(!value_eq(m.svals.at("X"), mk_vempty()));
        CHECK(!value_eq(m.svals.at("Y"), mk_vempty()));
        CHECK(!value_eq(m.svals.at("X"), m.svals.at("Y")));
    }

    SECTION("union arguments stay empty") {
        auto store = atoms_of("un(C,D,E)");
        env m = extract_model(store, witness, reg, vg);
        CHECK(value_eq(m.svals.at("C"), mk_vempty()));
        CHECK(value_eq(m.svals.at("D"), mk_vempty()));
        CHECK(value_eq(m.svals.at("E"), mk_vempty()));
    }

    SECTION("RIS domains are pinned to the empty set") {
        auto store = atoms_of("zz nin ris(X in D, X neq 0) & ris(Y in E, Y > 0) = {}");
        env m = extract_model(store, witness, reg, vg);
        CHECK(value_eq(m.svals.at("D"), mk_vempty()));
        CHECK(value_eq(m.svals.at("E"), mk_vempty()));
    }

    SECTION("disjoint nonempty variables get distinct depths") {
        auto store = atoms_of("disj(A,B) & A neq {} & B neq {}");
        env m = extract_model(store, witness, reg, vg);
        CHECK(sets_disjoint(m.svals.at("A"), m.svals.at("B")));
        CHECK(!value_eq(m.svals.at("A"), mk_vempty()));
        CHECK(!value_eq(m.svals.at("B"), mk_vempty()));
    }

    SECTION("bound variables are induced from their right-hand sides") {
        auto store = atoms_of("X = {1,2} & D neq {}");
        env m = extract_model(store, witness, reg, vg);
        CHECK(value_str(m.svals.at("X")) == "{1,2}");
    }
}

TEST_CASE("every sat branch of the regression formulas passes the model check") {
    // extract_model already asserts each solved atom; solving these exercises
    // the assertion path end to end
    const std::vector<std::string> sats = {
        "ris(X in int(-2,2), 0 is X mod 2) = {-2,0,2}",
        "[5,Y] in ris(X in D, true, [X,X*X])",
        "[5,0] nin ris([X,Y] in {Z1/Z2}, Y neq 0)",
        "ris([X,Y] in {[a,1]/S}, X in {a,b}) = {[a,1]}",
        "Y in S & S = {2,4,1,6} & subset(S, ris(X in S, Y =< X))",
        "X neq {} & Y1 in X",
        "un(A,{2},{1,2}) & 1 in A",
        "foreach(X in A, X > 0) & 3 in A",
    };
    funcpred_registry reg;
    for (auto& text : sats) {
        INFO(text);
        solve_result res = tu::solve_text(text, true);
        REQUIRE(res.status == solve_status::sat);
        formula f = parse(text);
        for (auto& sol : res.solutions) {
            env m = sol.model;
            // residual-free evaluation of the original formula
            var_set vs = free_vars(f);
            for (auto& v : vs.svars)
                REQUIRE(m.svals.count(v));
            CHECK(eval_formula(f, m, reg));
        }
    }
}

#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace risolve;

namespace {

xatom parse_lit(const std::string& text) {
    formula f = parse(text);
    REQUIRE(f.kind == f_kind::atom);
    REQUIRE(f.c.k == ckind::xconstr);
    return f.c.xa;
}

std::vector<xatom> parse_lits(const std::string& text) {
    formula f = parse(text);
    std::vector<xatom> out;
    if (f.kind == f_kind::atom) {
        out.push_back(f.c.xa);
        return out;
    }
    for (auto& g : f.sub) {
        REQUIRE(g.c.k == ckind::xconstr);
        out.push_back(g.c.xa);
    }
    return out;
}

}  // namespace

TEST_CASE("sat_x decides conjunctions of X literals") {
    funcpred_registry reg;
    var_gen vg;

    SECTION("a direct contradiction") {
        auto r = sat_x(parse_lits("X = a & X neq a"), 1000, reg, vg);
        CHECK(r.status == xsat_status::unsat);
    }

    SECTION("impossible residue of a modulo expression") {
        // independent oracle: exhaustive evaluation over x in [-100,100]
        bool any = false;
        for (long long x = -100; x <= 100 && !any; ++x)
            any = (((x % 2) + 2) % 2 == 5);
        REQUIRE(!any);
        auto r = sat_x(parse_lits("5 = X mod 2"), 100, reg, vg);
        CHECK(r.status == xsat_status::unsat);
    }

    SECTION("arithmetic witness through is") {
        auto r = sat_x(parse_lits("Y = 25 & Y is 5*5"), 1000, reg, vg);
        REQUIRE(r.status == xsat_status::sat);
        CHECK(value_eq(r.witness.xvals.at("Y"), mk_vnum(25)));
    }

    SECTION("pair structure decomposes") {
        auto r = sat_x(parse_lits("[X,Y] = [a,1] & Y < 4"), 1000, reg, vg);
        REQUIRE(r.status == xsat_status::sat);
        CHECK(value_eq(r.witness.xvals.at("X"), mk_vcst("a")));
        CHECK(value_eq(r.witness.xvals.at("Y"), mk_vnum(1)));
    }

    SECTION("distinct constants never unify") {
        CHECK(sat_x(parse_lits("a = b"), 10, reg, vg).status == xsat_status::unsat);
        CHECK(sat_x(parse_lits("X = a & X = b"), 10, reg, vg).status ==
              xsat_status::unsat);
    }

    SECTION("interval reasoning proves arithmetic emptiness") {
        CHECK(sat_x(parse_lits("X > 5 & X < 3"), 1000, reg, vg).status ==
              xsat_status::unsat);
    }
}

TEST_CASE("negate_literal produces the positive-form negation") {
    SECTION("membership is a set constraint, not an X literal") {
        formula f = parse("ris(D1 in D, D1 in {a,b}) = {}");
        const xformula& filt = f.c.s1->ris->filter;
        REQUIRE(filt.at.kind == xatom_kind::member);
        CHECK_THROWS_AS(negate_literal(filt.at), non_negatable);
    }

    SECTION("a comparison flips") {
        xformula n = negate_literal(parse_lit("X mod 2 = 0"));
        CHECK(pretty(n) == "X mod 2 neq 0");
    }

    SECTION("conjunctions distribute") {
        formula f = parse("A1 = 1 & B1 = 2");
        xformula conj = xf_conj({xf_atom(f.sub[0].c.xa), xf_atom(f.sub[1].c.xa)});
        xformula n = negate_filter(conj);
        CHECK(pretty(n) == "A1 neq 1 or B1 neq 2");
    }
}

TEST_CASE("negate_exists_filter eliminates functional parameters") {
    funcpred_registry reg;
    var_gen vg;
    xref x = mk_xvar("X");
    xref z = mk_xvar("Z");

    SECTION("plus with a comparison body") {
        // exists Z (plus(X,1,Z) and Z > 3)
        xformula fps = xf_atom(mk_funcpred("plus", {x, mk_num(1), z}));
        xformula r = xf_atom(mk_cmp(cmp_op::gt, z, mk_num(3)));
        xformula neg = negate_exists_filter({z}, fps, r, reg, vg);

        // independent oracle: for every x in [-10,10], not exists z must
        // match brute-force evaluation of the negation over z in [-30,30]
        for (long long xv = -10; xv <= 10; ++xv) {
            bool exists = false;
            for (long long zv = -30; zv <= 30; ++zv)
                exists = exists || (zv == xv + 1 && zv > 3);
            env e;
            e.xvals["X"] = mk_vnum(xv);
            // the fresh parameter copy is existential: search for it
            var_set fv = free_vars(neg);
            std::string zp;
            for (auto& n : fv.xvars)
                if (n != "X")
                    zp = n;
            bool neg_holds = false;
            for (long long zv = -30; zv <= 30 && !neg_holds; ++zv) {
                e.xvals[zp] = mk_vnum(zv);
                neg_holds = eval_ground(neg, e, reg);
            }
            INFO("x = " << xv);
            CHECK(neg_holds == !exists);
        }
    }

    SECTION("an unregistered predicate is rejected") {
        xformula fps = xf_atom(mk_funcpred("mystery", {x, z}));
        funcpred_registry only_plus = funcpred_registry::from_config(
            "[funcpred.plus]\narity=3\npre=\"true\"\n");
        CHECK_THROWS_AS(negate_exists_filter({z}, fps, xf_true(), only_plus, vg),
                        not_functional_form);
    }

    SECTION("a trivially true body negates to false") {
        xformula fps = xf_atom(mk_funcpred("plus", {x, mk_num(1), z}));
        xformula neg = negate_exists_filter({z}, fps, xf_true(), reg, vg);
        env e;
        e.xvals["X"] = mk_vnum(0);
        var_set fv = free_vars(neg);
        bool holds = false;
        for (long long zv = -5; zv <= 5 && !holds; ++zv) {
            for (auto& n : fv.xvars)
                if (n != "X")
                    e.xvals[n] = mk_vnum(zv);
            holds = eval_ground(neg, e, reg);
        }
        CHECK(!holds);
    }
}

TEST_CASE("eval_ground follows integer and identity semantics") {
    funcpred_registry reg;
    env e;
    CHECK(eval_ground(parse_lit("0 is 4 mod 2"), e, reg));
    e.xvals["X"] = mk_vnum(0);
    CHECK(!eval_ground(parse_lit("X neq 0"), e, reg));
    e.xvals["X"] = mk_vnum(1);
    e.xvals["Y"] = mk_vnum(2);
    CHECK(!eval_ground(parse_lit("Y =< X"), e, reg));
    // division by zero makes the atom false
    e.xvals["Z"] = mk_vnum(0);
    CHECK(!eval_ground(parse_lit("1 = 4 div Z"), e, reg));
}

TEST_CASE("negation of a literal is sound on ground assignments") {
    funcpred_registry reg;
    std::mt19937 gen(7);
    auto num = [&](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(gen);
    };
    for (int i = 0; i < 500; ++i) {
        cmp_op ops[] = {cmp_op::eq, cmp_op::neq, cmp_op::lt, cmp_op::le, cmp_op::gt,
                        cmp_op::ge};
        cmp_op op = ops[num(0, 5)];
        xref a = num(0, 1) ? mk_xvar("U") : mk_num(num(-5, 5));
        xref b = num(0, 1) ? mk_xvar("V")
                           : mk_arith(arith_op::add, mk_xvar("U"), mk_num(num(-3, 3)));
        xatom lit = mk_cmp(op, a, b);
        xformula neg = negate_literal(lit);
        env e;
        e.xvals["U"] = mk_vnum(num(-5, 5));
        e.xvals["V"] = mk_vnum(num(-5, 5));
        CHECK(eval_ground(lit, e, reg) != eval_ground(neg, e, reg));
    }
}

TEST_CASE("sat witnesses satisfy the literals they came from") {
    funcpred_registry reg;
    var_gen vg;
    const std::vector<std::string> cases = {
        "X + 2 = Y & Y < 10 & X > 0",
        "X mod 3 = 1 & X > 10 & X < 20",
        "plus(X,5,Y) & Y = 7",
        "times(X,X,Y) & Y = 49 & X < 0",
        "absval(X,Y) & X = -3",
        "pairfst(P,F1) & P = [a,2] & pairsnd(P,S1)",
        "[X,Y] neq [a,b] & X = a",
    };
    for (auto& c : cases) {
        INFO(c);
        auto lits = parse_lits(c);
        auto r = sat_x(lits, 1000, reg, vg);
        REQUIRE(r.status == xsat_status::sat);
        for (auto& l : lits)
            CHECK(eval_ground(l, r.witness, reg));
    }
}

TEST_CASE("functional predicate registry from a config") {
    auto reg = funcpred_registry::from_config(
        "# only two predicates\n"
        "[funcpred.plus]\narity = 3\npre = \"true\"\n"
        "[funcpred.absval]\narity = 2\npre = \"true\"\n");
    CHECK(reg.lookup("plus"));
    CHECK(reg.lookup("absval"));
    CHECK(!reg.lookup("times"));
    CHECK_THROWS(funcpred_registry::from_config("[funcpred.unknownpred]\narity=2\n"));
}

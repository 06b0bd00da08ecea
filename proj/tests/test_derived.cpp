#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace risolve;
using tu::is_sat;
using tu::is_unsat;

TEST_CASE("derived constraints expand to their defining formulas") {
    var_gen vg;

    SECTION("subset is a union") {
        formula f = expand_derived(parse("subset({1},{1,2})"), vg);
        REQUIRE(f.kind == f_kind::atom);
        CHECK(f.c.k == ckind::un);
        CHECK(pretty(f) == "un({1},{1,2},{1,2})");
    }

    SECTION("negated union is the three-way witness split") {
        formula f = expand_derived(parse("nun(A,B,C)"), vg);
        REQUIRE(f.kind == f_kind::disj);
        CHECK(f.sub.size() == 3);
        // first disjunct: n in C & n nin A & n nin B
        REQUIRE(f.sub[0].kind == f_kind::conj);
        CHECK(f.sub[0].sub[0].c.k == ckind::in);
        CHECK(f.sub[0].sub[1].c.k == ckind::nin);
        CHECK(f.sub[0].sub[2].c.k == ckind::nin);
    }

    SECTION("negated disjointness is a shared witness") {
        formula f = expand_derived(parse("ndisj(A,B)"), vg);
        REQUIRE(f.kind == f_kind::conj);
        CHECK(f.sub[0].c.k == ckind::in);
        CHECK(f.sub[1].c.k == ckind::in);
        CHECK(xequal(f.sub[0].c.x1, f.sub[1].c.x1));
    }

    SECTION("intersection and difference become filtered RIS equations") {
        formula f = expand_derived(parse("inters(A,B,C)"), vg);
        REQUIRE(f.c.k == ckind::eq);
        REQUIRE(f.c.s2->kind == skind::ris);
        CHECK(f.c.s2->ris->filter.at.kind == xatom_kind::member);
        CHECK(f.c.s2->ris->filter.at.positive);
        formula g = expand_derived(parse("diff(A,B,C)"), vg);
        CHECK(!g.c.s2->ris->filter.at.positive);
    }
}

TEST_CASE("negated disjointness matches complement semantics on a small universe") {
    // independent oracle: ndisj(A,B) must equal "the intersection is nonempty"
    // for every pair of subsets of a three-element universe
    funcpred_registry reg;
    std::vector<vref> u = {mk_vcst("a"), mk_vcst("b"), mk_vcst("c")};
    formula nd = parse("ndisj(A,B)");
    formula d = parse("disj(A,B)");
    for (int ma = 0; ma < 8; ++ma) {
        for (int mb = 0; mb < 8; ++mb) {
            std::vector<vref> ea, eb;
            for (int i = 0; i < 3; ++i) {
                if (ma & (1 << i))
                    ea.push_back(u[i]);
                if (mb & (1 << i))
                    eb.push_back(u[i]);
            }
            env e;
            e.svals["A"] = mk_vset(ea);
            e.svals["B"] = mk_vset(eb);
            bool inter_nonempty = !sets_disjoint(e.svals["A"], e.svals["B"]);
            CHECK(eval_formula(nd, e, reg) == inter_nonempty);
            CHECK(eval_formula(d, e, reg) == !inter_nonempty);
        }
    }
}

TEST_CASE("derived constraints behave through the solver") {
    CHECK(is_sat("subset({1},{1,2})"));
    CHECK(is_unsat("subset({1,3},{1,2})"));
    CHECK(is_unsat("subset(A,B) & 1 in A & 1 nin B"));
    CHECK(is_sat("inters({1,2},{2,3},R) & 2 in R"));
    CHECK(is_unsat("inters({1,2},{2,3},R) & 1 in R"));
    CHECK(is_sat("diff({1,2},{2},R) & 1 in R"));
    CHECK(is_unsat("diff({1,2},{2},R) & 2 in R"));
    CHECK(is_sat("nsubset({1,3},{1,2})"));
    CHECK(is_unsat("nsubset({1},{1,2})"));
    CHECK(is_sat("ninters({1,2},{2,3},{3})"));
    CHECK(is_unsat("ninters({1,2},{2,3},{2})"));
    CHECK(is_sat("ndiff({1,2},{2},{})"));
    CHECK(is_unsat("ndiff({1,2},{2},{1})"));
    CHECK(is_sat("nforeach(X in {1,2}, X > 1)"));
    CHECK(is_unsat("nforeach(X in {1,2}, X > 0)"));
}

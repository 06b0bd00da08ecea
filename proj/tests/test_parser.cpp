#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace risolve;

TEST_CASE("interval domains with ground bounds expand at parse time") {
    formula f = parse("ris(X in int(-2,2), 0 is X mod 2) = {-2,0,2}");
    REQUIRE(f.kind == f_kind::atom);
    REQUIRE(f.c.k == ckind::eq);
    REQUIRE(f.c.s1->kind == skind::ris);
    cons_view dom = decompose(f.c.s1->ris->dom);
    REQUIRE(dom.elems.size() == 5);
    CHECK(dom.elems[0]->value == -2);
    CHECK(dom.elems[4]->value == 2);
    CHECK(dom.tail->kind == skind::empty);
}

TEST_CASE("empty set literal") {
    formula f = parse("{} = {}");
    CHECK(f.c.s1->kind == skind::empty);
    CHECK(f.c.s2->kind == skind::empty);
}

TEST_CASE("unsafe patterns are rejected by default") {
    CHECK_THROWS_AS(parse("ris(X in D, true, 2*X) = {2,4,6,8}"), pattern_error);
    parse_options unsafe;
    unsafe.unsafe_patterns = true;
    CHECK_NOTHROW(parse("ris(X in D, true, 2*X) = {2,4,6,8}", unsafe));
}

TEST_CASE("pattern forms: the control term or [ctrl, t]") {
    CHECK_NOTHROW(parse("ris(X in D, true, [X, X*X]) = A"));
    CHECK_NOTHROW(parse("ris([X,Y] in D, true, [[X,Y], 3]) = A"));
    CHECK_THROWS_AS(parse("ris([X,Y] in D, true, [Y,X]) = A"), pattern_error);
}

TEST_CASE("syntax errors carry a position") {
    try {
        parse("un(A,B,");
        FAIL("expected a parse error");
    } catch (const parse_error& e) {
        CHECK(e.line == 1);
        CHECK(e.col >= 7);
    }
}

TEST_CASE("the paper corpus parses") {
    parse_options unsafe;
    unsafe.unsafe_patterns = true;
    const std::vector<std::string> corpus = {
        // basic RIS formulas
        "ris(X in int(-2,2), 0 is X mod 2) = {-2,0,2}",
        "ris(X in int(-2,2), 0 is X mod 2, X) = {-2,0,2}",
        "[5,Y] in ris(X in D, true, [X,X*X])",
        "[5,0] nin ris([X,Y] in {Z1/Z2}, Y neq 0)",
        "A = ris(X in D, X neq 0) & un(A,B,C) & disj(A,C) & A neq {}",
        // the worked rewriting example and the minimum-of-a-set formula
        "ris([X,Y] in {[a,1]/S}, X in {a,b}) = {[a,1]}",
        "Y in S & subset(S, ris(X in S, Y =< X))",
        // concrete-syntax examples: multiples, squares, intervals, primality
        "R = ris(X in D, 0 is X mod N)",
        "F = ris([X,Y] in D, Y is X*X)",
        "Even is ris(X in int(1,100), true, 2*X)",
        "N > 1 & MD is N div 2 & ris(X in int(2,MD), 0 is N mod X) = {}",
        // function evaluation and composition through membership
        "[5,Y] in ris(X in D, true, [X,X*X]) & [Y,Z] in ris(E in E1, true, [E,E+8])",
        "[X,36] in ris(X1 in D, true, [X1,X1*X1])",
    };
    for (auto& s : corpus) {
        INFO(s);
        CHECK_NOTHROW(parse(s, unsafe));
    }
    // the 2*X pattern needs the unsafe flag; the default must reject it
    CHECK_THROWS_AS(parse("ris(X in int(1,4), true, 2*X) = {2,4,6,8}"), pattern_error);
    CHECK_NOTHROW(parse("ris(X in int(1,4), true, 2*X) = {2,4,6,8}", unsafe));
}

TEST_CASE("pretty then parse is the identity up to alpha renaming") {
    const std::vector<std::string> corpus = {
        "ris(X in int(-2,2), 0 is X mod 2) = {-2,0,2}",
        "[5,Y] in ris(X in D, true, [X,X*X])",
        "[5,0] nin ris([X,Y] in {Z1/Z2}, Y neq 0)",
        "A = ris(X in D, X neq 0) & un(A,B,C) & disj(A,C) & A neq {}",
        "ris([X,Y] in {[a,1]/S}, X in {a,b}) = {[a,1]}",
        "Y in S & subset(S, ris(X in S, Y =< X))",
        "un(A,B,C) & nun(A,B,C) or disj(A,B)",
        "foreach(X in {2,4,1,6}, 1 =< X)",
        "nforeach([P,F] in T, [L1,C1], L1 =< C1, plus(P,F,L1) & plus(L1,F,C1))",
        "inters({1,2},{2,3},R) & diff(A,B,C) & nsubset(A,C)",
        "X = {a,b/T} & [a,[b,c]] in T & 3 - 4 * 2 = Z & Y = (3 - 4) * 2",
        "ris(S in D, [C], C > 1, [S,C], plus(S,S,C)) = E",
    };
    for (auto& s : corpus) {
        INFO(s);
        formula f = parse(s);
        formula g = parse(pretty(f));
        CHECK(pretty(g) == pretty(f));
    }
}

TEST_CASE("omitted filter is true, omitted pattern is the control term") {
    formula f = parse("ris(X in D) = A");
    REQUIRE(f.c.s1->kind == skind::ris);
    CHECK(xf_is_true(f.c.s1->ris->filter));
    CHECK(xequal(f.c.s1->ris->pattern, f.c.s1->ris->ctrl));
}

TEST_CASE("conjunction binds tighter than disjunction") {
    formula f = parse("a in A & b in A or c in A");
    REQUIRE(f.kind == f_kind::disj);
    REQUIRE(f.sub.size() == 2);
    CHECK(f.sub[0].kind == f_kind::conj);
}

TEST_CASE("residual constraints print in concrete syntax") {
    constraint c = mk_mem_c(ckind::nin, mk_pair(mk_cst("a"), mk_num(1)), mk_svar("N"));
    CHECK(pretty(c) == "[a,1] nin N");
}

TEST_CASE("models print as binding lists") {
    presented_solution p;
    p.bindings["S"] = "{}";
    p.bindings["x"] = "a";
    CHECK(format_solution(p) == "S = {}, x = a");
}

TEST_CASE("formula files split on lines with comments and terminators") {
    std::string content =
        "% a comment\n"
        "a in A & b in A.\n"
        "\n"
        "un(A,B,\n"
        "   C)\n"
        "{} = {}\n";
    auto fms = split_formulas(content);
    REQUIRE(fms.size() == 3);
    CHECK(fms[0].text == "a in A & b in A.");
    CHECK(fms[1].line == 4);
    CHECK_NOTHROW(parse(fms[1].text));
}

TEST_CASE("control terms must be pairwise distinct variables") {
    CHECK_THROWS_AS(parse("ris([X,X] in D, true) = A"), parse_error);
    CHECK_THROWS_AS(parse("ris(5 in D, true) = A"), parse_error);
}

TEST_CASE("set constraints cannot appear inside filters") {
    CHECK_THROWS_AS(parse("ris(X in D, un(A,B,C)) = E"), parse_error);
    CHECK_NOTHROW(parse("ris(X in D, X in B) = E"));
}

#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace risolve;

namespace {

bool admissible(const std::string& text) {
    var_gen vg;
    return is_admissible(parse(text), vg).admissible;
}

}  // namespace

TEST_CASE("tau keeps only union constraints") {
    var_gen vg;
    auto tf = tau(parse("subset(ris(X in D, X > 0, [X,Y]), D) & D neq {}"), vg);
    REQUIRE(tf.size() == 1);
    REQUIRE(tf[0].uns.size() == 1);
    const constraint& u = tf[0].uns[0];
    CHECK(u.s1->kind == skind::ris);
    CHECK(u.s2->kind == skind::var);
    CHECK(u.s3->kind == skind::var);
}

TEST_CASE("equalities become a pair of unions") {
    var_gen vg;
    auto tf = tau(parse("A = B"), vg);
    REQUIRE(tf.size() == 1);
    CHECK(tf[0].uns.size() == 2);
}

TEST_CASE("classification of the worked examples") {
    // a function compared with its own domain, domain constrained elsewhere
    CHECK(!admissible("subset(ris(X in D, X > 0, [X,Y]), D) & D neq {}"));
    // the same subset alone: the union constraint is removable
    CHECK(admissible("subset(ris(X in D, X > 0, [X,Y]), D)"));
    // chained domains with a plain RIS upper bound
    CHECK(!admissible(
        "subset(ris(X in D, X > 0, [X,Y]), ris(H in A, H > 0)) & subset(A,D) & D neq {}"));
    // both sides pair-patterned: admissible
    CHECK(admissible(
        "subset(ris(X in D, X > 0, [X,Y]), ris(H in A, H > 0, [H,W])) & subset(A,D) & D "
        "neq {}"));
    // self-feeding extensional equation
    CHECK(!admissible("A = {1/ris(X in A, true, [X,Y])}"));
    // the same with pattern = control term is fine
    CHECK(admissible("A = {1/ris(X in A, true)}"));
}

TEST_CASE("a non-admissible disjunct poisons the formula") {
    CHECK(!admissible(
        "a in B or (subset(ris(X in D, X > 0, [X,Y]), D) & D neq {})"));
}

TEST_CASE("the classifier is filter-insensitive") {
    // a false filter would make this satisfiable, but the classification
    // ignores filters by design
    CHECK(!admissible("subset(ris(X in A, false, [X,Y]), A) & Y1 in A"));
}

TEST_CASE("formulas without patterns are always admissible") {
    std::mt19937 gen(99);
    auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(gen); };
    auto var = [&]() { return std::string(1, static_cast<char>('A' + pick(4))); };
    for (int i = 0; i < 200; ++i) {
        std::vector<std::string> atoms;
        int n = 1 + pick(4);
        for (int k = 0; k < n; ++k) {
            switch (pick(6)) {
            case 0: atoms.push_back("un(" + var() + "," + var() + "," + var() + ")"); break;
            case 1: atoms.push_back("subset(" + var() + "," + var() + ")"); break;
            case 2: atoms.push_back(var() + " = " + var()); break;
            case 3: atoms.push_back(var() + " neq {}"); break;
            case 4:
                atoms.push_back("subset(ris(X in " + var() + ", X > 0), " + var() + ")");
                break;
            default:
                atoms.push_back(var() + " = ris(X in " + var() + ", X neq 0)");
                break;
            }
        }
        std::string text = atoms[0];
        for (size_t k = 1; k < atoms.size(); ++k)
            text += " & " + atoms[k];
        INFO(text);
        CHECK(admissible(text));
    }
}

TEST_CASE("the explanation names an offending equation") {
    var_gen vg;
    auto res = is_admissible(parse("subset(ris(X in D, X > 0, [X,Y]), D) & D neq {}"), vg);
    REQUIRE(!res.admissible);
    CHECK(res.witness.find("U(") != std::string::npos);
    CHECK(res.witness.find("P(") != std::string::npos);
}

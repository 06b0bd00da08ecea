#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

using namespace risolve;

namespace {

std::vector<source_formula> one_base(const std::string& s) {
    return {{s, 1}};
}

std::string generate(const std::vector<source_formula>& bases, bool positive,
                     unsigned seed, bench_stats* stats = nullptr) {
    std::ostringstream out;
    bench_stats st = bench_generate(bases, positive, seed, out);
    if (stats)
        *stats = st;
    return out.str();
}

}  // namespace

TEST_CASE("generation is deterministic per seed") {
    auto bases = one_base("un(A,B,C) & C neq {}");
    CHECK(generate(bases, true, 7) == generate(bases, true, 7));
    CHECK(generate(bases, false, 1) == generate(bases, false, 1));
}

TEST_CASE("instance counts follow the template cross product") {
    // enumerate the template product by hand first:
    //   9 filter templates x 2 patterns x (3 empty-set replacements when {}
    //   occurs, else 1)
    bench_stats st;
    generate(one_base("un(A,B,C) & C neq {}"), false, 0, &st);
    CHECK(st.instances == 9 * 2 * 3);

    generate(one_base("un(A,B,C) & C neq D"), false, 0, &st);
    CHECK(st.instances == 9 * 2);
}

TEST_CASE("every generated formula parses and is admissible") {
    auto& thms = builtin_theorems();
    std::vector<source_formula> bases;
    int line = 1;
    for (size_t i = 0; i < 6; ++i)
        bases.push_back({thms[i * 5], line++});
    for (bool positive : {false, true}) {
        std::string text = generate(bases, positive, 42);
        auto fms = split_formulas(text);
        REQUIRE(!fms.empty());
        var_gen vg;
        for (auto& f : fms) {
            INFO(f.text);
            formula phi = parse(f.text);
            CHECK(is_admissible(phi, vg).admissible);
        }
    }
}

TEST_CASE("the empty-set replacement templates have the documented shapes") {
    std::string text = generate(one_base("A neq {}"), false, 0);
    auto fms = split_formulas(text);
    REQUIRE(fms.size() == 9 * 2 * 3);
    bool false_filter = false, true_filter = false, guarded = false;
    for (auto& f : fms) {
        formula phi = parse(f.text);
        // find the replacement RIS on the right of the disequality
        std::function<void(const sref&)> scan = [&](const sref& s) {
            if (!s || s->kind != skind::ris)
                return;
            const ris_term& r = *s->ris;
            if (empty_like(r.dom)) {
                if (r.filter.at.kind == xatom_kind::truth)
                    (r.filter.at.truth ? true_filter : false_filter) = true;
            } else if (r.dom->kind == skind::cons) {
                // ris(X in {B1/B2}, X neq B1 & X nin B2)
                REQUIRE(r.filter.kind == xf_kind::conj);
                CHECK(r.filter.sub[0].at.kind == xatom_kind::cmp);
                CHECK(r.filter.sub[1].at.kind == xatom_kind::member);
                CHECK(!r.filter.sub[1].at.positive);
                guarded = true;
            }
        };
        if (phi.kind == f_kind::conj)
            scan(phi.sub[0].c.s2);
        else
            scan(phi.c.s2);
    }
    CHECK(false_filter);
    CHECK(true_filter);
    CHECK(guarded);
}

TEST_CASE("positive mode negates one constraint and guards the domains") {
    bench_stats st;
    std::string text = generate(one_base("un(A,B,C) & subset(A,C)"), true, 3, &st);
    auto fms = split_formulas(text);
    REQUIRE(st.instances > 0);
    for (auto& f : fms) {
        INFO(f.text);
        CHECK(f.text.find("neq {}") != std::string::npos);  // D_A neq {} guards
        bool negated = f.text.find("nun(") != std::string::npos ||
                       f.text.find("nsubset(") != std::string::npos;
        CHECK(negated);
    }
}

TEST_CASE("trivially satisfied negations are dropped and logged") {
    // negating the only atom of this theorem gives a formula satisfied by the
    // all-empty assignment
    bench_stats st;
    std::string text = generate(one_base("A neq A"), true, 0, &st);
    CHECK(st.trivial_skipped == 1);
    CHECK(st.instances == 0);
    CHECK(text.find("trivial") != std::string::npos);
}

TEST_CASE("the builtin theorems are unsatisfiable as written") {
    // spot-check a sample against the solver itself
    for (size_t i : {0u, 2u, 10u, 15u, 19u, 22u, 27u}) {
        INFO(builtin_theorems()[i]);
        CHECK(tu::is_unsat(builtin_theorems()[i]));
    }
}

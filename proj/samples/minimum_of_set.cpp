#include "risolve/risolve.hpp"

#include <iostream>

// y in S & subset(S, ris(X in S, Y =< X)) states that Y is the minimum of S.

int main() {
    using namespace risolve;
    formula f = parse("Y in S & S = {2,4,1,6} & subset(S, ris(X in S, Y =< X))");
    solver s;
    solve_result res = s.solve(f);
    if (res.status != solve_status::sat) {
        std::cout << "unsat\n";
        return 1;
    }
    var_set orig = free_vars(f);
    presented_solution p = present(res.solutions.front(), orig, s.vars());
    std::cout << format_solution(p) << "\n";
    return 0;
}

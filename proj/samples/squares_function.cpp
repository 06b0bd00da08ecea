#include "risolve/risolve.hpp"

#include <iostream>

// A RIS with pattern [X, X*X] behaves as the squaring function: membership
// queries evaluate it and invert it.

int main() {
    using namespace risolve;
    solver s;
    formula f = parse("[5,Y] in ris(X in D, true, [X,X*X])");
    solve_result res = s.solve(f);
    if (res.status == solve_status::sat) {
        presented_solution p = present(res.solutions.front(), free_vars(f), s.vars());
        std::cout << format_solution(p) << "\n";
    }
    return 0;
}

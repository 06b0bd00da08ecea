#include "risolve/risolve.hpp"

#include <iostream>

// N is prime iff the set of its proper divisors is empty.

int main(int argc, char** argv) {
    using namespace risolve;
    long long n = argc > 1 ? std::atoll(argv[1]) : 101;
    std::string text = "N = " + std::to_string(n) +
                       " & N > 1 & MD is N div 2 & ris(X in int(2,MD), 0 is N mod X) = {}";
    solver s;
    solve_result res = s.solve(parse(text));
    std::cout << n << (res.status == solve_status::sat ? " is prime" : " is not prime")
              << "\n";
    return res.status == solve_status::sat ? 0 : 1;
}

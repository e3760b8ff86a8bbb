// Acceptance suite: runs every numbered criterion at its pinned tolerance
// and prints one pass/fail line per criterion. Exit code 0 iff all pass.
//
// Usage: pparab_acceptance [--criterion N] [--details]

#include <cstring>
#include <iostream>
#include <string>
#include <vector>

#include "pparab/verify.hpp"

int main(int argc, char** argv) {
    int only = 0;
    bool details = false;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else if (std::strcmp(argv[i], "--details") == 0) {
            details = true;
        } else {
            std::cerr << "usage: pparab_acceptance [--criterion N] [--details]\n";
            return 2;
        }
    }

    const std::vector<pparab::verify::CriterionResult> results = pparab::verify::run_all();
    bool all = true;
    for (const auto& r : results) {
        if (only != 0 && r.number != only)
            continue;
        std::cout << (r.pass ? "[PASS]" : "[FAIL]") << " criterion " << r.number << ": "
                  << r.title << " (" << r.wall_seconds << " s)\n";
        if (details || !r.pass)
            for (const std::string& d : r.details)
                std::cout << "       " << d << '\n';
        all = all && r.pass;
    }
    std::cout << (all ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL") << '\n';
    return all ? 0 : 1;
}

#ifndef PPARAB_VERIFY_HPP
#define PPARAB_VERIFY_HPP

#include <string>
#include <vector>

/// The acceptance gate: seven numbered criteria with pinned tolerances,
/// shared by the `pparab verify` subcommand and the acceptance test binary.
namespace pparab::verify {

struct CriterionResult {
    int number = 0;
    std::string title;
    bool pass = false;
    std::vector<std::string> details;
    double wall_seconds = 0.0;
};

CriterionResult criterion1_closed_forms();

/// Runs every criterion in order (the flagship solves are shared between
/// criteria 2, 3, 5 and 6).
std::vector<CriterionResult> run_all();

} // namespace pparab::verify

#endif

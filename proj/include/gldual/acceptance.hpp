#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gldual {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;  // the worst margin or count behind the outcome
    double seconds = 0.0;
};

/// Runs the built-in acceptance criteria, printing one line per criterion.
std::vector<CriterionResult> run_acceptance(std::ostream& out);

}  // namespace gldual

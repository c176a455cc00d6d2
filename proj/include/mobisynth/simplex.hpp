#pragma once

#include <string>
#include <vector>

namespace mobisynth {

// maximize c.x subject to eq_lhs x = eq_rhs, ub_lhs x <= ub_rhs,
// lower <= x <= upper. Row names feed infeasibility reports.
struct LinearProgram {
    std::vector<double> objective;
    std::vector<std::vector<double>> eq_lhs;
    std::vector<double> eq_rhs;
    std::vector<std::string> eq_names;
    std::vector<std::vector<double>> ub_lhs;
    std::vector<double> ub_rhs;
    std::vector<std::string> ub_names;
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t n_vars() const { return objective.size(); }
};

struct LpSolution {
    std::vector<double> x;
    double objective = 0.0;
};

// Two-phase dense simplex with Bland's rule; returns an optimal basic
// feasible solution (a vertex of the feasible polytope). Throws
// InfeasibleError carrying a violated constraint subset, ContractError on
// malformed input or an unbounded problem.
LpSolution solve_lp(const LinearProgram& lp);

}  // namespace mobisynth

#include "mobisynth/simplex.hpp"

#include <cmath>
#include <limits>

#include "mobisynth/errors.hpp"

namespace mobisynth {

namespace {

constexpr double kPivotTol = 1e-9;

// Dense tableau over shifted variables x' = x - lower, all >= 0. Upper
// bounds are explicit rows; every <= row carries a slack, every row an
// artificial basis candidate for phase 1.
struct Tableau {
    std::vector<std::vector<double>> rows;  // m x (width + 1), rhs last
    std::vector<int> basis;                 // variable index per row
    std::vector<double> z;                  // reduced-cost row, value in z[width]
    std::vector<std::string> row_names;
    std::size_t width = 0;   // columns excluding rhs
    std::size_t n_real = 0;  // structural + slack columns (phase-2 eligible)

    void pivot(std::size_t r, std::size_t c) {
        std::vector<double>& prow = rows[r];
        double inv = 1.0 / prow[c];
        for (double& v : prow) v *= inv;
        prow[c] = 1.0;  // kill roundoff on the pivot itself
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == r) continue;
            double f = rows[i][c];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= width; ++j) rows[i][j] -= f * prow[j];
            rows[i][c] = 0.0;
        }
        double f = z[c];
        if (f != 0.0) {
            for (std::size_t j = 0; j <= width; ++j) z[j] -= f * prow[j];
            z[c] = 0.0;
        }
        basis[r] = static_cast<int>(c);
    }

    // Bland: lowest eligible entering index, then the minimum-ratio row with
    // the lowest basic variable index. Returns false at optimality.
    bool step(std::size_t eligible) {
        std::size_t enter = width;
        for (std::size_t j = 0; j < eligible; ++j) {
            if (z[j] < -kPivotTol) {
                enter = j;
                break;
            }
        }
        if (enter == width) return false;

        std::size_t leave = rows.size();
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < rows.size(); ++i) {
            double a = rows[i][enter];
            if (a <= kPivotTol) continue;
            double ratio = rows[i][width] / a;
            if (ratio < best - kPivotTol ||
                (ratio < best + kPivotTol &&
                 (leave == rows.size() || basis[i] < basis[leave]))) {
                best = ratio;
                leave = i;
            }
        }
        if (leave == rows.size())
            throw ContractError("LP is unbounded; day-limit bounds are missing");
        pivot(leave, enter);
        return true;
    }
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
    const std::size_t n = lp.n_vars();
    if (lp.lower.size() != n || lp.upper.size() != n)
        throw ContractError("LP bounds do not match the variable count");
    if (lp.eq_lhs.size() != lp.eq_rhs.size() || lp.ub_lhs.size() != lp.ub_rhs.size())
        throw ContractError("LP constraint sides do not match");

    for (std::size_t i = 0; i < n; ++i) {
        if (lp.lower[i] > lp.upper[i]) {
            throw InfeasibleError(
                "empty variable range",
                {"variable " + std::to_string(i) + " has lower bound above upper"});
        }
    }

    auto row_name = [](const std::vector<std::string>& names, std::size_t i,
                       const char* fallback) {
        return i < names.size() ? names[i]
                                : std::string(fallback) + " " + std::to_string(i);
    };

    // Assemble rows over shifted variables: equalities, then <= rows and
    // upper bounds, each with a slack column.
    std::size_t n_ub = lp.ub_lhs.size() + n;
    std::size_t width = n + n_ub;  // structural + slacks
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    std::vector<std::string> names;

    for (std::size_t i = 0; i < lp.eq_lhs.size(); ++i) {
        if (lp.eq_lhs[i].size() != n) throw ContractError("equality row width mismatch");
        std::vector<double> row(width, 0.0);
        double b = lp.eq_rhs[i];
        for (std::size_t j = 0; j < n; ++j) {
            row[j] = lp.eq_lhs[i][j];
            b -= lp.eq_lhs[i][j] * lp.lower[j];
        }
        rows.push_back(std::move(row));
        rhs.push_back(b);
        names.push_back(row_name(lp.eq_names, i, "equality"));
    }
    std::size_t slack = n;
    for (std::size_t i = 0; i < lp.ub_lhs.size(); ++i) {
        if (lp.ub_lhs[i].size() != n) throw ContractError("inequality row width mismatch");
        std::vector<double> row(width, 0.0);
        double b = lp.ub_rhs[i];
        for (std::size_t j = 0; j < n; ++j) {
            row[j] = lp.ub_lhs[i][j];
            b -= lp.ub_lhs[i][j] * lp.lower[j];
        }
        row[slack++] = 1.0;
        rows.push_back(std::move(row));
        rhs.push_back(b);
        names.push_back(row_name(lp.ub_names, i, "inequality"));
    }
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> row(width, 0.0);
        row[j] = 1.0;
        row[slack++] = 1.0;
        rows.push_back(std::move(row));
        rhs.push_back(lp.upper[j] - lp.lower[j]);
        names.push_back("upper bound of variable " + std::to_string(j));
    }

    // Phase 1 tableau: one artificial per row, rhs made nonnegative.
    const std::size_t m = rows.size();
    Tableau t;
    t.n_real = width;
    t.width = width + m;
    t.rows.assign(m, std::vector<double>(t.width + 1, 0.0));
    t.basis.resize(m);
    t.row_names = names;
    for (std::size_t i = 0; i < m; ++i) {
        double sign = rhs[i] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < width; ++j) t.rows[i][j] = sign * rows[i][j];
        t.rows[i][width + i] = 1.0;
        t.rows[i][t.width] = sign * rhs[i];
        t.basis[i] = static_cast<int>(width + i);
    }

    // Phase 1: maximize -(sum of artificials). z starts at -c with the basic
    // artificial rows folded in.
    t.z.assign(t.width + 1, 0.0);
    for (std::size_t j = width; j < t.width; ++j) t.z[j] = 1.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j <= t.width; ++j) t.z[j] -= t.rows[i][j];
    while (t.step(t.width)) {
    }

    if (t.z[t.width] < -1e-7) {
        std::vector<std::string> violated;
        for (std::size_t i = 0; i < m; ++i)
            if (t.basis[i] >= static_cast<int>(width) && t.rows[i][t.width] > 1e-9)
                violated.push_back(t.row_names[i]);
        if (violated.empty()) violated.push_back("constraint system (degenerate)");
        throw InfeasibleError("no feasible schedule point exists", violated);
    }

    // Drive leftover artificials out of the basis; rows that offer no real
    // pivot are redundant and dropped.
    for (std::size_t i = m; i-- > 0;) {
        if (t.basis[i] < static_cast<int>(width)) continue;
        std::size_t piv = t.width;
        for (std::size_t j = 0; j < width; ++j) {
            if (std::fabs(t.rows[i][j]) > kPivotTol) {
                piv = j;
                break;
            }
        }
        if (piv < t.width) {
            t.pivot(i, piv);
        } else {
            t.rows.erase(t.rows.begin() + static_cast<std::ptrdiff_t>(i));
            t.basis.erase(t.basis.begin() + static_cast<std::ptrdiff_t>(i));
            t.row_names.erase(t.row_names.begin() + static_cast<std::ptrdiff_t>(i));
        }
    }

    // Phase 2 over the real objective; artificial columns stay ineligible.
    t.z.assign(t.width + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) t.z[j] = -lp.objective[j];
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        int b = t.basis[i];
        if (b < static_cast<int>(n)) {
            double c = lp.objective[static_cast<std::size_t>(b)];
            if (c != 0.0)
                for (std::size_t j = 0; j <= t.width; ++j) t.z[j] += c * t.rows[i][j];
        }
    }
    while (t.step(t.n_real)) {
    }

    LpSolution sol;
    sol.x.assign(n, 0.0);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        int b = t.basis[i];
        if (b < static_cast<int>(n))
            sol.x[static_cast<std::size_t>(b)] = t.rows[i][t.width];
    }
    for (std::size_t j = 0; j < n; ++j) {
        sol.x[j] += lp.lower[j];
        // Clip the basic-solution roundoff that pivoting leaves behind.
        if (sol.x[j] < lp.lower[j]) sol.x[j] = lp.lower[j];
        if (sol.x[j] > lp.upper[j]) sol.x[j] = lp.upper[j];
        sol.objective += lp.objective[j] * sol.x[j];
    }
    return sol;
}

}  // namespace mobisynth

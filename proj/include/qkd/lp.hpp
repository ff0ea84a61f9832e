#pragma once

#include <cstddef>
#include <vector>

namespace qkd {

enum class Rel { LE, GE, EQ };
enum class Sense { Minimize, Maximize };
enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(LpStatus status);

struct LpRow {
    std::vector<double> coeffs;
    Rel rel = Rel::LE;
    double rhs = 0.0;
};

/// Dense linear program over box-bounded variables.  Empty `lower` means
/// all zeros, empty `upper` means unbounded above; otherwise both must have
/// one entry per variable (infinities allowed).
struct LinearProgram {
    Sense sense = Sense::Minimize;
    std::vector<double> objective;
    std::vector<LpRow> rows;
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t num_vars() const { return objective.size(); }
};

struct LpOptions {
    double tol = 1e-9;
    long long max_iterations = 0;  // 0: scale with problem size
};

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> x;  // empty unless status == Optimal
    double objective = 0.0;
    long long iterations = 0;
};

/// Two-phase primal simplex on the full tableau, anti-cycling via Bland's
/// rule.  Intended for small, dense problems (tens of variables); throws
/// std::invalid_argument on malformed input.
LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options = {});

}  // namespace qkd

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qkd/lp.hpp"
#include "qkd/params.hpp"

namespace qkd {

struct SelftestOutcome {
    int cases = 0;
    int failures = 0;
    std::vector<std::string> notes;  // one line per failure, capped

    bool passed() const { return failures == 0; }
};

/// Reference solver: enumerate every candidate vertex (each choice of
/// n active constraints among rows and finite bounds), keep the best
/// feasible one.  Exponential, so only usable for a handful of variables;
/// meant as an independent check of the simplex implementation.  Programs
/// must have finite boxes on every variable so that a feasible program is
/// guaranteed a vertex optimum.
LpSolution solve_lp_by_vertex_enumeration(const LinearProgram& lp, double tol = 1e-7);

/// Random small boxed programs through both solvers; a case fails when the
/// statuses differ, the objectives drift apart, or the simplex point
/// violates a constraint.
SelftestOutcome lp_cross_check(int cases, std::uint64_t seed);

/// Sampled sessions against both photon-number estimators; a case fails
/// when an estimated bound fails to bracket the simulator's hidden
/// photon-number-resolved counts.
SelftestOutcome bounds_sandwich_check(int cases, std::uint64_t seed,
                                      const ProtocolParams& params);

}  // namespace qkd

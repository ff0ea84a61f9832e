#pragma once

#include "qkd/channel.hpp"
#include "qkd/finitekey.hpp"
#include "qkd/lp.hpp"
#include "qkd/params.hpp"

namespace qkd {

/// What the photon-number LP should optimize.
enum class DecoyTarget {
    MinY0,     // smallest vacuum yield consistent with the observed gains
    MinY1,     // smallest single-photon yield
    MaxY1,     // largest single-photon yield
    MaxE1Y1,   // largest error-weighted single-photon yield
};

/// A photon-number estimation program plus the bookkeeping needed to read
/// its solution.  Variables are yields (or error-weighted yields) divided by
/// yield_scale so that the solver sees O(1) numbers even when the raw gains
/// sit near 1e-8.
struct DecoyLp {
    LinearProgram lp;
    double yield_scale = 1.0;
    int n_cut = 9;

    int yield_index(int n) const { return n; }
    int slack_index(int k) const { return n_cut + 1 + k; }
    std::size_t num_vars() const { return static_cast<std::size_t>(n_cut) + 4; }
};

/// Build the estimation program for one basis.  Yield targets bracket the
/// per-intensity gains, the error target brackets the per-intensity error
/// rates; each bracket gets its own statistical deviation plus half a count
/// of integer-rounding allowance.
DecoyLp build_decoy_lp(const SessionCounts& counts, const ProtocolParams& params,
                       Basis basis, DecoyTarget target,
                       const BoundsOptions& options = {});

/// Solve one target and return the optimum in unscaled units.
/// Throws std::runtime_error when the program cannot be solved.
double solve_decoy_target(const SessionCounts& counts, const ProtocolParams& params,
                          Basis basis, DecoyTarget target,
                          const BoundsOptions& options = {});

/// Solver-based counterpart of decoy_bounds_analytic.  The result refers to
/// the strongest intensity only.  Throws std::runtime_error when a cell saw
/// no pulses or a program cannot be solved.
DecoyBounds decoy_bounds_lp(const SessionCounts& counts, const ProtocolParams& params,
                            const BoundsOptions& options = {});

}  // namespace qkd

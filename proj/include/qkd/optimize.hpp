#pragma once

#include "qkd/params.hpp"

namespace qkd {

/// Search region for the tunable protocol knobs.  The weakest intensity and
/// everything outside these five coordinates stay fixed.
struct OptimizeBox {
    double u_min = 0.2, u_max = 0.9;
    double v_min = 0.02, v_max = 0.2;
    double p_u_min = 0.2, p_u_max = 0.9;
    double p_v_min = 0.05, p_v_max = 0.7;
    double qz_min = 0.1, qz_max = 0.9;
};

struct OptimizeOptions {
    int max_passes = 50;
    double min_gain_per_pass = 1e-3;  // stop once a pass improves less than 0.1%
    int golden_iterations = 24;
};

struct OptimizeResult {
    ProtocolParams params;
    double key_rate_bps = 0.0;  // solver-variant rate at the optimum
    int passes = 0;
    long long evaluations = 0;
};

/// Maximize the solver-variant key rate by cyclic line searches over
/// (u, v, p_u, p_v, qz), one golden-section search per coordinate, from
/// three deterministic starting points.  The basis bias is applied to both
/// sides symmetrically.  Throws std::runtime_error when the box admits no
/// valid parameter set.
OptimizeResult optimize_params(const ProtocolParams& base, const OptimizeBox& box = {},
                               const OptimizeOptions& options = {});

}  // namespace qkd

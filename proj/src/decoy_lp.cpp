#include "qkd/decoy_lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qkd {

namespace {

constexpr double kEpsSplit = 21.0;

struct Bracket {
    double lo = 0.0;
    double hi = 1.0;
};

/// Per-intensity bracket on the gain (or error rate): observed frequency
/// plus/minus its own Hoeffding deviation and half a count of rounding
/// allowance, clamped to [0, 1].
Bracket cell_bracket(const CellCounts& cell, double eps, bool use_errors,
                     bool zero_deviations) {
    const double sent = static_cast<double>(cell.sent);
    const double seen = static_cast<double>(use_errors ? cell.errors : cell.detected);
    const double delta =
        (zero_deviations ? 0.0 : hoeffding_delta(seen, eps)) + 0.5;
    Bracket b;
    b.lo = std::clamp((seen - delta) / sent, 0.0, 1.0);
    b.hi = std::clamp((seen + delta) / sent, 0.0, 1.0);
    return b;
}

}  // namespace

DecoyLp build_decoy_lp(const SessionCounts& counts, const ProtocolParams& params,
                       Basis basis, DecoyTarget target, const BoundsOptions& options) {
    const bool error_target = target == DecoyTarget::MaxE1Y1;
    const double mu[kIntensityCount] = {params.intensity.u, params.intensity.v,
                                        params.intensity.w};
    const double eps = params.security.eps_sec / kEpsSplit;
    const int bi = static_cast<int>(basis);

    Bracket brackets[kIntensityCount];
    double scale = 0.0;
    for (int k = 0; k < kIntensityCount; ++k) {
        brackets[k] = cell_bracket(counts.cell[bi][k], eps, error_target,
                                   options.zero_deviations);
        scale = std::max(scale, brackets[k].hi);
    }
    if (scale <= 0.0) scale = 1.0;

    DecoyLp prog;
    prog.n_cut = options.n_cut;
    prog.yield_scale = scale;

    const std::size_t n_vars = prog.num_vars();
    LinearProgram& lp = prog.lp;
    lp.objective.assign(n_vars, 0.0);
    lp.lower.assign(n_vars, 0.0);
    lp.upper.assign(n_vars, 0.0);
    for (int n = 0; n <= prog.n_cut; ++n) lp.upper[prog.yield_index(n)] = 1.0 / scale;

    switch (target) {
        case DecoyTarget::MinY0:
            lp.sense = Sense::Minimize;
            lp.objective[prog.yield_index(0)] = 1.0;
            break;
        case DecoyTarget::MinY1:
            lp.sense = Sense::Minimize;
            lp.objective[prog.yield_index(1)] = 1.0;
            break;
        case DecoyTarget::MaxY1:
        case DecoyTarget::MaxE1Y1:
            lp.sense = Sense::Maximize;
            lp.objective[prog.yield_index(1)] = 1.0;
            break;
    }

    for (int k = 0; k < kIntensityCount; ++k) {
        // Photon numbers beyond the cutoff can contribute anywhere between
        // nothing and the whole leftover probability mass; the slack
        // variable carries that freedom.
        double tail = 1.0;
        std::vector<double> coeffs(n_vars, 0.0);
        for (int n = 0; n <= prog.n_cut; ++n) {
            const double p_n = poisson_pn(n, mu[k]);
            coeffs[prog.yield_index(n)] = p_n;
            tail -= p_n;
        }
        tail = std::max(tail, 0.0);
        coeffs[prog.slack_index(k)] = 1.0;
        lp.upper[prog.slack_index(k)] = tail / scale;

        lp.rows.push_back({coeffs, Rel::GE, brackets[k].lo / scale});
        lp.rows.push_back({std::move(coeffs), Rel::LE, brackets[k].hi / scale});
    }
    return prog;
}

double solve_decoy_target(const SessionCounts& counts, const ProtocolParams& params,
                          Basis basis, DecoyTarget target,
                          const BoundsOptions& options) {
    const DecoyLp prog = build_decoy_lp(counts, params, basis, target, options);
    const LpSolution sol = solve_lp(prog.lp);
    if (sol.status != LpStatus::Optimal) {
        throw std::runtime_error(std::string("photon-number estimation failed: ") +
                                 to_string(sol.status));
    }
    return sol.objective * prog.yield_scale;
}

DecoyBounds decoy_bounds_lp(const SessionCounts& counts, const ProtocolParams& params,
                            const BoundsOptions& options) {
    for (int b = 0; b < 2; ++b) {
        for (int k = 0; k < kIntensityCount; ++k) {
            if (counts.cell[b][k].sent == 0) {
                throw std::runtime_error(
                    "insufficient statistics: a basis/intensity cell saw no pulses");
            }
        }
    }

    DecoyBounds out;
    out.method = BoundsMethod::LinearProgram;
    out.scope = BoundsScope::SignalOnly;

    if (counts.total_detected(Basis::Z) == 0 && counts.total_detected(Basis::X) == 0) {
        return out;  // nothing clicked: zero counts, phase error pinned at 1/2
    }

    const double sent_zu = static_cast<double>(counts.cell[0][0].sent);
    const double sent_xu = static_cast<double>(counts.cell[1][0].sent);
    const double p0u = poisson_pn(0, params.intensity.u);
    const double p1u = poisson_pn(1, params.intensity.u);

    const double y0_min =
        solve_decoy_target(counts, params, Basis::Z, DecoyTarget::MinY0, options);
    const double y1_min =
        solve_decoy_target(counts, params, Basis::Z, DecoyTarget::MinY1, options);
    const double y1_max =
        solve_decoy_target(counts, params, Basis::Z, DecoyTarget::MaxY1, options);
    const double b1_max =
        solve_decoy_target(counts, params, Basis::X, DecoyTarget::MaxE1Y1, options);

    out.n0_low = y0_min * sent_zu * p0u;
    out.n1_low = y1_min * sent_zu * p1u;
    out.n1_up = std::clamp(y1_max * sent_zu * p1u, out.n1_low,
                           static_cast<double>(counts.cell[0][0].detected));
    out.s_x1_low = y1_min * sent_xu * p1u;
    out.v_x1_up = b1_max * sent_xu * p1u;

    if (out.s_x1_low <= 0.0) {
        out.eph_up = 0.5;
    } else {
        const double ratio = b1_max / y1_min;
        out.eph_up = std::clamp(
            ratio + gamma_correction(params.security.eps_sec, ratio, out.s_x1_low,
                                     out.n1_low),
            0.0, 0.5);
    }
    return out;
}

}  // namespace qkd

#include "qkd/finitekey.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace qkd {

namespace {

// The overall failure budget is split across the individual estimates this
// many ways; the same constant appears inside the fixed cost of variant 1.
constexpr double kEpsSplit = 21.0;

}  // namespace

double binary_entropy(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double hoeffding_delta(double n, double eps) {
    if (n <= 0.0) return 0.0;
    return std::sqrt(n / 2.0 * std::log(1.0 / eps));
}

double gamma_correction(double eps, double ratio, double c, double d) {
    if (c <= 0.0 || d <= 0.0) return 0.5;       // no data to estimate from
    if (ratio <= 0.0 || ratio >= 1.0) return 0.0;
    const double spread = ratio * (1.0 - ratio);
    const double scale = (c + d) * spread / (c * d * std::log(2.0));
    const double log_arg =
        (c + d) / (c * d * spread) * std::pow(kEpsSplit / eps, 2.0);
    if (log_arg <= 1.0) return 0.5;             // bound carries no information
    return std::sqrt(scale * std::log2(log_arg));
}

double lambda_ec(double n_bits, double qber, double f_ec) {
    return f_ec * n_bits * binary_entropy(qber);
}

double fixed_cost_v1(const SecurityParams& security) {
    return 6.0 * std::log2(21.0 / security.eps_sec) +
           std::log2(2.0 / security.eps_cor);
}

double fixed_cost_v2(const SecurityParams& security) {
    return 6.0 * std::log2(46.0 / security.eps_sec) +
           std::log2(2.0 / security.eps_cor);
}

namespace {

struct ScaledCounts {
    std::array<double, kIntensityCount> low;
    std::array<double, kIntensityCount> up;
};

/// Rescale the observed counts of one basis to "per emitted pulse of that
/// photon statistics" units, with a shared deviation allowance: the same
/// total-count Hoeffding term is applied to every intensity.
ScaledCounts scale_counts(const SessionCounts& counts, const ProtocolParams& params,
                          Basis basis, bool use_errors, bool zero_deviations) {
    const double mu[kIntensityCount] = {params.intensity.u, params.intensity.v,
                                        params.intensity.w};
    const double p_k[kIntensityCount] = {params.prob.p_u, params.prob.p_v,
                                         params.prob.p_w};
    const long long total =
        use_errors ? counts.total_errors(basis) : counts.total_detected(basis);
    const double delta =
        zero_deviations
            ? 0.0
            : hoeffding_delta(static_cast<double>(total),
                              params.security.eps_sec / kEpsSplit);

    ScaledCounts scaled;
    for (int k = 0; k < kIntensityCount; ++k) {
        const CellCounts& cell = counts.cell[static_cast<int>(basis)][k];
        const double raw =
            static_cast<double>(use_errors ? cell.errors : cell.detected);
        const double factor = std::exp(mu[k]) / p_k[k];
        scaled.low[k] = factor * std::max(raw - delta, 0.0);
        scaled.up[k] = factor * (raw + delta);
    }
    return scaled;
}

struct CountBounds {
    double zero_low = 0.0;
    double one_low = 0.0;
    double one_up = 0.0;
};

/// Vacuum and single-photon count bounds for one basis from the three
/// scaled per-intensity counts.
CountBounds count_bounds(const ScaledCounts& s, const ProtocolParams& params,
                         double total_detected) {
    const double u = params.intensity.u;
    const double v = params.intensity.v;
    const double w = params.intensity.w;
    const double tau0 = tau_n(0, params.intensity, params.prob);
    const double tau1 = tau_n(1, params.intensity, params.prob);

    CountBounds out;
    // Vacuum term: the two weak intensities pin the zero-photon yield.
    out.zero_low = std::max(tau0 * (v * s.low[2] - w * s.up[1]) / (v - w), 0.0);

    // Single-photon lower bound: the v-w difference isolates the one-photon
    // term; the strongest intensity corrects for multi-photon leakage.
    const double inner = s.low[1] - s.up[2] -
                         (v * v - w * w) / (u * u) * (s.up[0] - out.zero_low / tau0);
    const double denom = u * (v - w) - v * v + w * w;
    out.one_low = std::max(tau1 * u * inner / denom, 0.0);

    // Single-photon upper bound: the divided difference of the two weak
    // intensities overestimates the one-photon yield because every
    // higher-order term it picks up enters with positive weight.
    out.one_up = tau1 * (s.up[1] - s.low[2]) / (v - w);
    out.one_up = std::clamp(out.one_up, out.one_low, total_detected);
    return out;
}

}  // namespace

DecoyBounds decoy_bounds_analytic(const SessionCounts& counts,
                                  const ProtocolParams& params,
                                  const BoundsOptions& options) {
    for (int b = 0; b < 2; ++b) {
        for (int k = 0; k < kIntensityCount; ++k) {
            if (counts.cell[b][k].sent == 0) {
                throw std::runtime_error(
                    "insufficient statistics: a basis/intensity cell saw no pulses");
            }
        }
    }

    const double v = params.intensity.v;
    const double w = params.intensity.w;
    const double tau1 = tau_n(1, params.intensity, params.prob);

    const ScaledCounts z_counts =
        scale_counts(counts, params, Basis::Z, false, options.zero_deviations);
    const ScaledCounts x_counts =
        scale_counts(counts, params, Basis::X, false, options.zero_deviations);
    const ScaledCounts x_errors =
        scale_counts(counts, params, Basis::X, true, options.zero_deviations);

    const CountBounds z_bounds = count_bounds(
        z_counts, params, static_cast<double>(counts.total_detected(Basis::Z)));
    const CountBounds x_bounds = count_bounds(
        x_counts, params, static_cast<double>(counts.total_detected(Basis::X)));

    DecoyBounds out;
    out.method = BoundsMethod::Analytic;
    out.scope = BoundsScope::AllIntensities;
    out.n0_low = z_bounds.zero_low;
    out.n1_low = z_bounds.one_low;
    out.n1_up = z_bounds.one_up;
    out.s_x1_low = x_bounds.one_low;
    out.v_x1_up = std::max(tau1 * (x_errors.up[1] - x_errors.low[2]) / (v - w), 0.0);

    if (out.s_x1_low <= 0.0) {
        out.eph_up = 0.5;
    } else {
        const double ratio = out.v_x1_up / out.s_x1_low;
        out.eph_up = std::clamp(
            ratio + gamma_correction(params.security.eps_sec, ratio, out.s_x1_low,
                                     out.n1_low),
            0.0, 0.5);
    }
    return out;
}

double signal_fraction(int n, const ProtocolParams& params) {
    const double tau = tau_n(n, params.intensity, params.prob);
    if (tau <= 0.0) return 0.0;
    return params.prob.p_u * poisson_pn(n, params.intensity.u) / tau;
}

DecoyBounds to_signal_only(const DecoyBounds& bounds, const ProtocolParams& params) {
    const double r0 = signal_fraction(0, params);
    const double r1 = signal_fraction(1, params);
    DecoyBounds out = bounds;
    out.n0_low *= r0;
    out.n1_low *= r1;
    out.n1_up *= r1;
    out.s_x1_low *= r1;
    out.v_x1_up *= r1;
    out.scope = BoundsScope::SignalOnly;
    return out;
}

double secure_length_v1(const DecoyBounds& bounds, double lambda,
                        const SecurityParams& security) {
    const double raw = bounds.n0_low +
                       bounds.n1_low * (1.0 - binary_entropy(bounds.eph_up)) -
                       lambda - fixed_cost_v1(security);
    return std::floor(raw);
}

double secure_length_v2(const DecoyBounds& bounds, double lambda,
                        const SecurityParams& security) {
    const double raw = bounds.n0_low + bounds.n1_low -
                       bounds.n1_up * binary_entropy(bounds.eph_up) - lambda -
                       fixed_cost_v2(security);
    return std::floor(raw);
}

}  // namespace qkd

#pragma once

#include "qkd/channel.hpp"
#include "qkd/params.hpp"

namespace qkd {

/// Binary entropy in bits; h(0) = h(1) = 0.
double binary_entropy(double x);

/// One-sided Hoeffding deviation for n trials at failure probability eps:
/// sqrt(n/2 * ln(1/eps)).
double hoeffding_delta(double n, double eps);

/// Finite-sample penalty added to a phase-error ratio estimated on one
/// sample of size c and applied to another of size d; grows as the samples
/// shrink and saturates at 0.5 when they carry no information at all.
double gamma_correction(double eps, double ratio, double c, double d);

/// Bits consumed by error correction for n_bits at the given error rate.
double lambda_ec(double n_bits, double qber, double f_ec);

enum class BoundsMethod { Analytic, LinearProgram };

/// Which pool of pulses the photon-number bounds refer to: every intensity
/// pooled together, or the strongest intensity alone.
enum class BoundsScope { AllIntensities, SignalOnly };

/// Bounds on the unobservable photon-number-resolved counts, estimated from
/// the per-intensity totals.  Z-basis counts feed the key, X-basis counts
/// feed the phase-error estimate.
struct DecoyBounds {
    double n0_low = 0.0;    // Z detections from vacuum pulses, lower bound
    double n1_low = 0.0;    // Z detections from single photons, lower bound
    double n1_up = 0.0;     // same quantity, upper bound
    double s_x1_low = 0.0;  // X detections from single photons, lower bound
    double v_x1_up = 0.0;   // X errors from single photons, upper bound
    double eph_up = 0.5;    // phase error rate among Z single photons, upper bound
    BoundsMethod method = BoundsMethod::Analytic;
    BoundsScope scope = BoundsScope::AllIntensities;
};

struct BoundsOptions {
    /// Replace every statistical deviation term with zero.  Useful for
    /// checking that the estimators bracket the true counts exactly when
    /// sampling noise is switched off.
    bool zero_deviations = false;
    int n_cut = 9;  // photon-number cutoff for the solver-based bounds
};

/// Closed-form bounds built from weighted differences of the per-intensity
/// counts.  The result refers to the pooled pulses of all three intensities.
/// Throws std::runtime_error when any basis/intensity cell saw no pulses.
DecoyBounds decoy_bounds_analytic(const SessionCounts& counts,
                                  const ProtocolParams& params,
                                  const BoundsOptions& options = {});

/// Expected number of n-photon pulses of intensity k per pooled n-photon
/// pulse: p_k P(n|k) / tau_n.  Used to convert bounds between the two
/// scopes.
double signal_fraction(int n, const ProtocolParams& params);

/// Rescale pooled-scope bounds to the share attributable to the strongest
/// intensity.  Exact for the count bounds; the phase-error bound is a ratio
/// and carries over unchanged.
DecoyBounds to_signal_only(const DecoyBounds& bounds, const ProtocolParams& params);

/// Key length of the variant that distils from every intensity and spends
/// one entropy term on the single-photon phase error.  Returns a signed
/// value; negative means no key.
double secure_length_v1(const DecoyBounds& bounds, double lambda,
                        const SecurityParams& security);

/// Key length of the variant that distils from the strongest intensity only
/// and smooths over the single-photon count uncertainty, paying a slightly
/// larger fixed cost.
double secure_length_v2(const DecoyBounds& bounds, double lambda,
                        const SecurityParams& security);

/// Fixed finite-size costs of the two variants.
double fixed_cost_v1(const SecurityParams& security);
double fixed_cost_v2(const SecurityParams& security);

}  // namespace qkd

#include "qkd/params.hpp"

#include <cmath>

namespace qkd {

std::vector<std::string> ProtocolParams::validate() const {
    std::vector<std::string> problems;

    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) problems.push_back(msg);
    };

    check(intensity.u > intensity.v && intensity.v > intensity.w,
          "intensities must satisfy u > v > w");
    check(intensity.w >= 0.0, "weakest intensity must be non-negative");
    check(intensity.v + intensity.w < intensity.u,
          "need v + w < u for the single-photon bound to be solvable");

    check(prob.p_u > 0.0 && prob.p_v > 0.0 && prob.p_w > 0.0,
          "intensity probabilities must be positive");
    check(std::abs(prob.p_u + prob.p_v + prob.p_w - 1.0) < 1e-9,
          "intensity probabilities must sum to 1");
    check(prob.qz_alice > 0.0 && prob.qz_alice < 1.0,
          "qz_alice must lie strictly between 0 and 1");
    check(prob.qz_bob > 0.0 && prob.qz_bob < 1.0,
          "qz_bob must lie strictly between 0 and 1");

    check(security.eps_sec > 0.0 && security.eps_sec < 1.0,
          "eps_sec must lie in (0, 1)");
    check(security.eps_cor > 0.0 && security.eps_cor < 1.0,
          "eps_cor must lie in (0, 1)");
    check(security.f_ec >= 1.0, "f_ec below 1 would beat the Shannon limit");

    check(link.length_km >= 0.0, "fiber length must be non-negative");
    check(link.loss_coeff_db_per_km >= 0.0, "loss coefficient must be non-negative");
    check(link.extra_loss_db >= 0.0, "extra loss must be non-negative");
    check(link.clock_hz > 0.0, "clock rate must be positive");
    check(link.session_pulses >= 1.0, "session must contain at least one pulse");

    check(detector.efficiency > 0.0 && detector.efficiency <= 1.0,
          "detector efficiency must lie in (0, 1]");
    check(detector.dark_cps >= 0.0, "dark count rate must be non-negative");
    check(detector.ref_dark_cps >= 0.0, "reference dark count rate must be non-negative");
    check(detector.e_misalign >= 0.0 && detector.e_misalign < 0.5,
          "misalignment error must lie in [0, 0.5)");
    check(detector.gate_width_s > 0.0, "gate width must be positive");

    if (mux.enabled) {
        check(!mux.channels.empty(), "multiplexing enabled but no classical channels given");
        check(mux.filter_bandwidth_ghz > 0.0, "filter bandwidth must be positive");
        check(mux.drop_filter_loss_db >= 0.0, "drop filter loss must be non-negative");
        check(mux.raman_coeff_per_km_nm >= 0.0, "Raman coefficient must be non-negative");
        check(mux.wavelength_nm > 0.0, "wavelength must be positive");
    }

    return problems;
}

ProtocolParams default_params() {
    return ProtocolParams{};
}

double poisson_pn(int n, double mu) {
    if (n < 0) return 0.0;
    if (mu == 0.0) return n == 0 ? 1.0 : 0.0;
    // exp(-mu + n ln mu - ln n!) keeps intermediate values in range even for
    // large n where mu^n would overflow.
    return std::exp(-mu + n * std::log(mu) - std::lgamma(n + 1.0));
}

double tau_n(int n, const IntensitySet& intensity, const SelectionProbs& prob) {
    return prob.p_u * poisson_pn(n, intensity.u) +
           prob.p_v * poisson_pn(n, intensity.v) +
           prob.p_w * poisson_pn(n, intensity.w);
}

double dark_rate_at_temperature(const DetectorModel& det) {
    return det.ref_dark_cps *
           std::pow(2.0, (det.temperature_c - det.ref_temperature_c) / 10.0);
}

}  // namespace qkd

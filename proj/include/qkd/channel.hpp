#pragma once

#include <cstdint>
#include <vector>

#include "qkd/params.hpp"

namespace qkd {

enum class Basis { Z = 0, X = 1 };  // Z carries key material, X is the check basis

inline constexpr int kIntensityCount = 3;  // indices: 0 = u, 1 = v, 2 = w

/// Per-gate channel quantities derived from the static parameters.
struct ChannelEnv {
    double eta = 0.0;            // end-to-end detection probability of one photon
    double y0 = 0.0;             // click probability with no photon arriving
    double p_dark = 0.0;         // per-detector, per-gate dark click probability
    double p_raman = 0.0;        // per-detector, per-gate Raman click probability
    double attenuation_db = 0.0; // fiber + fixed losses (excludes detector)
};

ChannelEnv derive_channel_env(const ProtocolParams& params);

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
double photon_energy_j(double wavelength_nm);

/// Spectral filter width converted from frequency to wavelength units at the
/// quantum channel's wavelength.
double filter_bandwidth_nm(double bandwidth_ghz, double wavelength_nm);

/// Classical power arriving at the receiver end of the fiber, before the
/// demultiplexer: launch power minus fiber and fixed losses.
double receive_power_dbm(double launch_dbm, const ProtocolParams& params);

/// Per-detector, per-gate click probability caused by spontaneous Raman
/// scattering of all copropagating classical channels into the quantum
/// channel's filter band.  Counter-propagating channels are assumed to be
/// isolated and contribute nothing.
double raman_click_probability(const ProtocolParams& params);

/// Overall click probability for a pulse of mean photon number mu.
double gain_for_intensity(const ChannelEnv& env, double mu);

/// Error fraction among clicks for a pulse of mean photon number mu.
/// Throws std::domain_error when the gain is exactly zero.
double qber_for_intensity(const ChannelEnv& env, double mu, double e_misalign);

/// Click probability given exactly n photons entered the fiber.
double yield_n(const ChannelEnv& env, int n);

/// Error fraction among clicks given exactly n photons; 0.5 when only
/// background can click.
double error_n(const ChannelEnv& env, int n, double e_misalign);

struct CellCounts {
    long long sent = 0;
    long long detected = 0;
    long long errors = 0;
};

/// Outcome of one session, resolved by basis and intensity.
struct SessionCounts {
    CellCounts cell[2][kIntensityCount];  // [basis][intensity]
    long long discarded = 0;              // pulses lost to basis mismatch

    /// Detections and errors resolved by emitted photon number (index
    /// n = 0..n_cut).  A real receiver cannot observe this split; it is
    /// kept for consistency checks against the photon-number bounds.
    std::vector<long long> by_photon_number[2][kIntensityCount];
    std::vector<long long> errors_by_photon_number[2][kIntensityCount];

    long long total_sent(Basis b) const;
    long long total_detected(Basis b) const;
    long long total_errors(Basis b) const;
    double observed_qber(Basis b) const;  // errors / detections, 0 if none
};

/// Expectation-value session: every count is the rounded mean, so repeated
/// runs are identical.
SessionCounts simulate_session_expectation(const ProtocolParams& params,
                                           int n_cut = 9);

/// Sampled session: photon numbers, detections and errors are drawn from
/// their actual distributions.  Same seed, same counts.
SessionCounts simulate_session_stochastic(const ProtocolParams& params,
                                          std::uint64_t seed, int n_cut = 9);

}  // namespace qkd

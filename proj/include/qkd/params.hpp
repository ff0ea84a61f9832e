#pragma once

#include <string>
#include <vector>

namespace qkd {

/// Mean photon numbers of the three pulse classes Alice can emit.
/// Requires u > v > w >= 0 and v + w < u for the yield bounds to be solvable.
struct IntensitySet {
    double u = 0.5;      // signal
    double v = 0.11;     // decoy
    double w = 0.0007;   // vacuum-like decoy
};

/// Per-pulse choice probabilities on Alice's side plus the basis bias on
/// both sides.  p_w is stored explicitly so the three always sum to one.
struct SelectionProbs {
    double p_u = 0.5;
    double p_v = 0.25;
    double p_w = 0.25;
    double qz_alice = 0.5;   // probability of choosing the data basis
    double qz_bob = 0.5;
};

struct SecurityParams {
    double eps_sec = 1e-10;
    double eps_cor = 1e-15;
    double f_ec = 1.16;      // error-correction inefficiency
};

/// Fiber link and session timing.  session_pulses is a double because
/// sessions of 1e12..1e13 gates are routine; integer counts derived from it
/// are rounded where they are used.
struct LinkModel {
    double length_km = 160.0;
    double loss_coeff_db_per_km = 0.18;
    double extra_loss_db = 1.2;       // connectors, splices, receiver optics
    double clock_hz = 1e9;
    double session_pulses = 4.5e12;
};

struct DetectorModel {
    double efficiency = 0.1;
    double dark_cps = 10.0;           // per detector, at temperature_c
    double e_misalign = 0.03;
    double gate_width_s = 100e-12;
    double temperature_c = -60.0;
    double ref_dark_cps = 10.0;
    double ref_temperature_c = -60.0;
};

enum class ChannelRole { Clock, Data };

/// One classical DWDM channel sharing the fiber with the quantum channel.
struct MuxChannel {
    double launch_power_dbm = -8.7;
    ChannelRole role = ChannelRole::Clock;
    bool copropagating = true;
};

/// Classical multiplexing block.  When disabled no Raman noise and no drop
/// filter loss are applied.
struct MuxConfig {
    bool enabled = false;
    std::vector<MuxChannel> channels;
    double filter_bandwidth_ghz = 25.0;    // quantum-channel spectral filter
    double drop_filter_loss_db = 3.0;      // demux insertion loss at Bob
    double raman_coeff_per_km_nm = 2.065e-9; // spontaneous-scattering fraction
    double wavelength_nm = 1550.0;
};

struct ProtocolParams {
    IntensitySet intensity;
    SelectionProbs prob;
    SecurityParams security;
    LinkModel link;
    DetectorModel detector;
    MuxConfig mux;

    /// Returns a list of human-readable problems; empty means usable.
    std::vector<std::string> validate() const;
};

/// Defaults tuned so both key-length variants stay within a moderate gap of
/// each other over the 20..45 dB loss range while the weaker one still
/// survives a 44.4 dB dark-fiber budget.
ProtocolParams default_params();

/// Poisson photon-number distribution P(n | mean mu).  mu = 0 is exact
/// (all mass on n = 0).
double poisson_pn(int n, double mu);

/// Probability that an emitted pulse carries exactly n photons, marginal
/// over the intensity choice: sum_k p_k * P(n | k).
double tau_n(int n, const IntensitySet& intensity, const SelectionProbs& prob);

/// Dark counts double for every 10 C of warming relative to the reference
/// point, the usual rule of thumb for InGaAs avalanche diodes.
double dark_rate_at_temperature(const DetectorModel& det);

}  // namespace qkd

#include "qkd/channel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace qkd {

namespace {

constexpr double kPlanck = 6.62607015e-34;     // J s
constexpr double kLightSpeed = 299792458.0;    // m / s

// Highest photon number the stochastic sampler will split off explicitly;
// whatever probability mass is left beyond it is dumped into one bucket.
constexpr int kMaxSampledPhotons = 64;

long long sample_binomial(std::mt19937_64& rng, long long count, double p) {
    if (count <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return count;
    std::binomial_distribution<long long> dist(count, p);
    return dist(rng);
}

}  // namespace

double dbm_to_watts(double dbm) {
    return 1e-3 * std::pow(10.0, dbm / 10.0);
}

double watts_to_dbm(double watts) {
    return 10.0 * std::log10(watts / 1e-3);
}

double photon_energy_j(double wavelength_nm) {
    return kPlanck * kLightSpeed / (wavelength_nm * 1e-9);
}

double filter_bandwidth_nm(double bandwidth_ghz, double wavelength_nm) {
    const double lambda_m = wavelength_nm * 1e-9;
    return lambda_m * lambda_m * (bandwidth_ghz * 1e9) / kLightSpeed * 1e9;
}

double receive_power_dbm(double launch_dbm, const ProtocolParams& params) {
    return launch_dbm - params.link.loss_coeff_db_per_km * params.link.length_km -
           params.link.extra_loss_db;
}

double raman_click_probability(const ProtocolParams& params) {
    if (!params.mux.enabled) return 0.0;

    const double length = params.link.length_km;
    const double alpha_lin = params.link.loss_coeff_db_per_km * std::log(10.0) / 10.0;
    const double band_nm =
        filter_bandwidth_nm(params.mux.filter_bandwidth_ghz, params.mux.wavelength_nm);
    const double post_loss = std::pow(
        10.0, -(params.mux.drop_filter_loss_db + params.link.extra_loss_db) / 10.0);

    double power_w = 0.0;
    for (const MuxChannel& ch : params.mux.channels) {
        if (!ch.copropagating) continue;  // isolated from the receiver
        // Power scattered into the filter band along the fiber, forward
        // direction: grows linearly with length, then attenuates like the
        // quantum signal itself.
        power_w += dbm_to_watts(ch.launch_power_dbm) * params.mux.raman_coeff_per_km_nm *
                   band_nm * length * std::exp(-alpha_lin * length);
    }
    power_w *= post_loss;

    const double photons_per_s = power_w / photon_energy_j(params.mux.wavelength_nm);
    const double per_gate =
        photons_per_s * params.detector.efficiency * params.detector.gate_width_s;
    return std::min(per_gate, 1.0);
}

ChannelEnv derive_channel_env(const ProtocolParams& params) {
    ChannelEnv env;
    env.attenuation_db = params.link.loss_coeff_db_per_km * params.link.length_km +
                         params.link.extra_loss_db +
                         (params.mux.enabled ? params.mux.drop_filter_loss_db : 0.0);
    env.eta = params.detector.efficiency * std::pow(10.0, -env.attenuation_db / 10.0);
    env.p_dark =
        std::min(dark_rate_at_temperature(params.detector) / params.link.clock_hz, 1.0);
    env.p_raman = raman_click_probability(params);
    // Two detectors, each of which can fire on a dark count or a Raman
    // photon; a background click is "at least one of the four".
    env.y0 = -std::expm1(2.0 * std::log1p(-env.p_dark) + 2.0 * std::log1p(-env.p_raman));
    return env;
}

double gain_for_intensity(const ChannelEnv& env, double mu) {
    return env.y0 + (1.0 - env.y0) * -std::expm1(-env.eta * mu);
}

double qber_for_intensity(const ChannelEnv& env, double mu, double e_misalign) {
    const double gain = gain_for_intensity(env, mu);
    if (gain <= 0.0) {
        throw std::domain_error("error fraction undefined: click probability is zero");
    }
    const double erroneous =
        0.5 * env.y0 + e_misalign * -std::expm1(-env.eta * mu) * (1.0 - env.y0);
    return erroneous / gain;
}

double yield_n(const ChannelEnv& env, int n) {
    return env.y0 + (1.0 - env.y0) * (1.0 - std::pow(1.0 - env.eta, n));
}

double error_n(const ChannelEnv& env, int n, double e_misalign) {
    const double yield = yield_n(env, n);
    if (yield <= 0.0) return 0.5;  // only background could have clicked
    const double erroneous =
        0.5 * env.y0 + e_misalign * (1.0 - std::pow(1.0 - env.eta, n)) * (1.0 - env.y0);
    return erroneous / yield;
}

long long SessionCounts::total_sent(Basis b) const {
    long long total = 0;
    for (int k = 0; k < kIntensityCount; ++k) total += cell[static_cast<int>(b)][k].sent;
    return total;
}

long long SessionCounts::total_detected(Basis b) const {
    long long total = 0;
    for (int k = 0; k < kIntensityCount; ++k) total += cell[static_cast<int>(b)][k].detected;
    return total;
}

long long SessionCounts::total_errors(Basis b) const {
    long long total = 0;
    for (int k = 0; k < kIntensityCount; ++k) total += cell[static_cast<int>(b)][k].errors;
    return total;
}

double SessionCounts::observed_qber(Basis b) const {
    const long long detected = total_detected(b);
    if (detected == 0) return 0.0;
    return static_cast<double>(total_errors(b)) / static_cast<double>(detected);
}

namespace {

struct CellLayout {
    double sift[2];
    double p_k[kIntensityCount];
    double mu[kIntensityCount];
};

CellLayout cell_layout(const ProtocolParams& params) {
    CellLayout lay;
    lay.sift[0] = params.prob.qz_alice * params.prob.qz_bob;
    lay.sift[1] = (1.0 - params.prob.qz_alice) * (1.0 - params.prob.qz_bob);
    lay.p_k[0] = params.prob.p_u;
    lay.p_k[1] = params.prob.p_v;
    lay.p_k[2] = params.prob.p_w;
    lay.mu[0] = params.intensity.u;
    lay.mu[1] = params.intensity.v;
    lay.mu[2] = params.intensity.w;
    return lay;
}

}  // namespace

SessionCounts simulate_session_expectation(const ProtocolParams& params, int n_cut) {
    const ChannelEnv env = derive_channel_env(params);
    const CellLayout lay = cell_layout(params);
    const double pulses = params.link.session_pulses;

    SessionCounts out;
    long long sent_total = 0;
    for (int b = 0; b < 2; ++b) {
        for (int k = 0; k < kIntensityCount; ++k) {
            CellCounts& cell = out.cell[b][k];
            cell.sent = std::llround(pulses * lay.p_k[k] * lay.sift[b]);
            sent_total += cell.sent;

            const double gain = gain_for_intensity(env, lay.mu[k]);
            cell.detected = std::llround(static_cast<double>(cell.sent) * gain);
            if (cell.detected > 0) {
                const double qber = qber_for_intensity(env, lay.mu[k], params.detector.e_misalign);
                cell.errors = std::llround(static_cast<double>(cell.detected) * qber);
            }

            auto& by_n = out.by_photon_number[b][k];
            auto& err_n_counts = out.errors_by_photon_number[b][k];
            by_n.assign(n_cut + 1, 0);
            err_n_counts.assign(n_cut + 1, 0);
            for (int n = 0; n <= n_cut; ++n) {
                const double mean_clicks = static_cast<double>(cell.sent) *
                                           poisson_pn(n, lay.mu[k]) * yield_n(env, n);
                by_n[n] = std::llround(mean_clicks);
                err_n_counts[n] = std::llround(
                    mean_clicks * error_n(env, n, params.detector.e_misalign));
            }
        }
    }
    out.discarded = std::max<long long>(0, std::llround(pulses) - sent_total);
    return out;
}

SessionCounts simulate_session_stochastic(const ProtocolParams& params,
                                          std::uint64_t seed, int n_cut) {
    const ChannelEnv env = derive_channel_env(params);
    const CellLayout lay = cell_layout(params);
    const double pulses = params.link.session_pulses;

    std::mt19937_64 rng(seed);
    SessionCounts out;
    long long sent_total = 0;
    for (int b = 0; b < 2; ++b) {
        for (int k = 0; k < kIntensityCount; ++k) {
            CellCounts& cell = out.cell[b][k];
            cell.sent = std::llround(pulses * lay.p_k[k] * lay.sift[b]);
            sent_total += cell.sent;

            auto& by_n = out.by_photon_number[b][k];
            auto& err_n_counts = out.errors_by_photon_number[b][k];
            by_n.assign(n_cut + 1, 0);
            err_n_counts.assign(n_cut + 1, 0);

            // Peel the photon-number split off one binomial at a time:
            // conditioned on not being in buckets 0..n-1, bucket n holds a
            // binomial share of whatever pulses remain.
            long long remaining = cell.sent;
            double mass_used = 0.0;
            for (int n = 0; remaining > 0; ++n) {
                double share;
                if (n >= kMaxSampledPhotons) {
                    share = 1.0;
                } else {
                    const double tail = 1.0 - mass_used;
                    const double p_n = poisson_pn(n, lay.mu[k]);
                    share = tail <= 0.0 ? 1.0 : std::min(p_n / tail, 1.0);
                    mass_used += p_n;
                }
                const long long emitted = sample_binomial(rng, remaining, share);
                remaining -= emitted;

                const long long clicks = sample_binomial(rng, emitted, yield_n(env, n));
                const long long wrong = sample_binomial(
                    rng, clicks, error_n(env, n, params.detector.e_misalign));
                cell.detected += clicks;
                cell.errors += wrong;
                if (n <= n_cut) {
                    by_n[n] = clicks;
                    err_n_counts[n] = wrong;
                }
            }
        }
    }
    out.discarded = std::max<long long>(0, std::llround(pulses) - sent_total);
    return out;
}

}  // namespace qkd

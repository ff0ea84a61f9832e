#include "qkd/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "qkd/decoy_lp.hpp"

namespace qkd {

namespace {

void finish_variant(VariantResult& variant, double secure_len_raw, double seconds) {
    // A key can never be longer than the pool it is distilled from.
    variant.secure_len = std::min(secure_len_raw, static_cast<double>(variant.distill_bits));
    variant.key_rate_bps =
        seconds > 0.0 ? std::max(variant.secure_len, 0.0) / seconds : 0.0;
}

}  // namespace

KeyReport evaluate_session(const SessionCounts& counts, const ProtocolParams& params,
                           const BoundsOptions& options) {
    KeyReport report;
    report.counts = counts;
    report.qber_z = counts.observed_qber(Basis::Z);
    report.session_seconds = params.link.session_pulses / params.link.clock_hz;

    VariantResult& v1 = report.v1;
    v1.bounds = decoy_bounds_analytic(counts, params, options);
    v1.distill_bits = counts.total_detected(Basis::Z);
    v1.qber = counts.observed_qber(Basis::Z);
    v1.lambda = lambda_ec(static_cast<double>(v1.distill_bits), v1.qber,
                          params.security.f_ec);
    finish_variant(v1, secure_length_v1(v1.bounds, v1.lambda, params.security),
                   report.session_seconds);

    VariantResult& v2 = report.v2;
    v2.bounds = decoy_bounds_lp(counts, params, options);
    const CellCounts& signal_z = counts.cell[static_cast<int>(Basis::Z)][0];
    v2.distill_bits = signal_z.detected;
    v2.qber = signal_z.detected > 0 ? static_cast<double>(signal_z.errors) /
                                          static_cast<double>(signal_z.detected)
                                    : 0.0;
    v2.lambda = lambda_ec(static_cast<double>(v2.distill_bits), v2.qber,
                          params.security.f_ec);
    finish_variant(v2, secure_length_v2(v2.bounds, v2.lambda, params.security),
                   report.session_seconds);

    return report;
}

KeyReport evaluate_expectation(const ProtocolParams& params,
                               const BoundsOptions& options) {
    return evaluate_session(simulate_session_expectation(params, options.n_cut), params,
                            options);
}

KeyReport evaluate_stochastic(const ProtocolParams& params, std::uint64_t seed,
                              const BoundsOptions& options) {
    return evaluate_session(simulate_session_stochastic(params, seed, options.n_cut),
                            params, options);
}

namespace {

std::vector<double> range_points(double from, double to, double step) {
    if (step <= 0.0) throw std::invalid_argument("sweep step must be positive");
    std::vector<double> xs;
    for (int i = 0;; ++i) {
        const double x = from + i * step;
        if (x > to + step * 1e-9) break;
        xs.push_back(x);
    }
    return xs;
}

KeyReport evaluate_mode(const ProtocolParams& params, RunMode mode, std::uint64_t seed,
                        const BoundsOptions& options) {
    return mode == RunMode::Expectation ? evaluate_expectation(params, options)
                                        : evaluate_stochastic(params, seed, options);
}

}  // namespace

std::vector<SweepPoint> sweep_distance(const ProtocolParams& params, double from_km,
                                       double to_km, double step_km, RunMode mode,
                                       std::uint64_t seed, const BoundsOptions& options) {
    std::vector<SweepPoint> points;
    std::uint64_t index = 0;
    for (double x : range_points(from_km, to_km, step_km)) {
        ProtocolParams p = params;
        p.link.length_km = x;
        points.push_back({x, evaluate_mode(p, mode, seed + index, options)});
        ++index;
    }
    return points;
}

std::vector<SweepPoint> sweep_power(const ProtocolParams& params, double from_dbm,
                                    double to_dbm, double step_db, RunMode mode,
                                    std::uint64_t seed, const BoundsOptions& options) {
    const bool has_data_channel =
        params.mux.enabled &&
        std::any_of(params.mux.channels.begin(), params.mux.channels.end(),
                    [](const MuxChannel& ch) {
                        return ch.role == ChannelRole::Data && ch.copropagating;
                    });
    if (!has_data_channel) {
        throw std::runtime_error(
            "power sweep needs multiplexing enabled with a copropagating data channel");
    }

    const double path_loss_db = params.link.loss_coeff_db_per_km * params.link.length_km +
                                params.link.extra_loss_db;

    std::vector<SweepPoint> points;
    std::uint64_t index = 0;
    for (double x : range_points(from_dbm, to_dbm, step_db)) {
        ProtocolParams p = params;
        for (MuxChannel& ch : p.mux.channels) {
            if (ch.role == ChannelRole::Data && ch.copropagating) {
                ch.launch_power_dbm = x + path_loss_db;
            }
        }
        points.push_back({x, evaluate_mode(p, mode, seed + index, options)});
        ++index;
    }
    return points;
}

std::string sweep_csv(const std::vector<SweepPoint>& points, const std::string& unit) {
    // snprintf with %.10g keeps the output identical across runs and locales.
    auto num = [](double value) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.10g", value);
        return std::string(buf);
    };

    std::string csv =
        "x,unit,rate_v1_bps,rate_v2_bps,qber,n0_low,n1_low,n1_up,eph_up,"
        "lambda_ec,secure_len_v1,secure_len_v2\n";
    for (const SweepPoint& pt : points) {
        const KeyReport& r = pt.report;
        csv += num(pt.x) + ',' + unit + ',' + num(r.v1.key_rate_bps) + ',' +
               num(r.v2.key_rate_bps) + ',' + num(r.qber_z) + ',' +
               num(r.v2.bounds.n0_low) + ',' + num(r.v2.bounds.n1_low) + ',' +
               num(r.v2.bounds.n1_up) + ',' + num(r.v2.bounds.eph_up) + ',' +
               num(r.v2.lambda) + ',' + num(r.v1.secure_len) + ',' +
               num(r.v2.secure_len) + '\n';
    }
    return csv;
}

}  // namespace qkd

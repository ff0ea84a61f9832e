#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qkd/channel.hpp"
#include "qkd/finitekey.hpp"
#include "qkd/params.hpp"

namespace qkd {

/// One variant's end-to-end result for a session.
struct VariantResult {
    DecoyBounds bounds;          // in the scope this variant distils from
    double lambda = 0.0;         // error-correction cost in bits
    long long distill_bits = 0;  // data-basis clicks entering distillation
    double qber = 0.0;           // observed error rate of those clicks
    double secure_len = 0.0;     // signed whole bits; negative means no key
    double key_rate_bps = 0.0;   // clamped at zero
};

struct KeyReport {
    VariantResult v1;  // closed-form bounds, distils every intensity
    VariantResult v2;  // solver bounds, distils the strongest intensity only
    SessionCounts counts;
    double qber_z = 0.0;          // pooled data-basis error rate
    double session_seconds = 0.0;
};

/// Estimate both variants from already-simulated counts.
KeyReport evaluate_session(const SessionCounts& counts, const ProtocolParams& params,
                           const BoundsOptions& options = {});

KeyReport evaluate_expectation(const ProtocolParams& params,
                               const BoundsOptions& options = {});

KeyReport evaluate_stochastic(const ProtocolParams& params, std::uint64_t seed,
                              const BoundsOptions& options = {});

enum class RunMode { Expectation, Stochastic };

struct SweepPoint {
    double x = 0.0;
    KeyReport report;
};

/// Evaluate over fiber lengths from..to inclusive.  Stochastic points use
/// seed + point index.  Returns an empty vector when to < from.
std::vector<SweepPoint> sweep_distance(const ProtocolParams& params, double from_km,
                                       double to_km, double step_km, RunMode mode,
                                       std::uint64_t seed = 1,
                                       const BoundsOptions& options = {});

/// Evaluate over classical receive powers from..to inclusive (dBm).  Every
/// copropagating data channel's launch power is set so that its power
/// arriving at the receiver equals x; clock channels are left alone.
/// Throws std::runtime_error when no data channel is configured.
std::vector<SweepPoint> sweep_power(const ProtocolParams& params, double from_dbm,
                                    double to_dbm, double step_db, RunMode mode,
                                    std::uint64_t seed = 1,
                                    const BoundsOptions& options = {});

/// Render sweep points as CSV.  The bounds and error-correction columns
/// report the solver-based variant; `unit` labels the x axis.
std::string sweep_csv(const std::vector<SweepPoint>& points, const std::string& unit);

}  // namespace qkd

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "qkd/decoy_lp.hpp"
#include "qkd/report.hpp"
#include "qkd/selftest.hpp"

using namespace qkd;

namespace {

double hidden_signal_count(const SessionCounts& counts, Basis basis, int n) {
    return static_cast<double>(
        counts.by_photon_number[static_cast<int>(basis)][0][static_cast<std::size_t>(n)]);
}

}  // namespace

TEST_CASE("estimation program has the expected shape") {
    const ProtocolParams p = default_params();
    const SessionCounts counts = simulate_session_expectation(p);
    const DecoyLp prog = build_decoy_lp(counts, p, Basis::Z, DecoyTarget::MinY1);

    CHECK(prog.lp.num_vars() == prog.num_vars());
    CHECK(prog.lp.rows.size() == 2 * kIntensityCount);
    CHECK(prog.yield_scale > 0.0);
    CHECK(prog.yield_scale <= 1.0);
    CHECK(prog.lp.upper[prog.yield_index(0)] == doctest::Approx(1.0 / prog.yield_scale));
    // Slack for the truncated tail is tiny but never negative.
    for (int k = 0; k < kIntensityCount; ++k) {
        CHECK(prog.lp.upper[prog.slack_index(k)] >= 0.0);
    }
}

TEST_CASE("solver bounds bracket the hidden signal counts") {
    const ProtocolParams p = default_params();
    const SessionCounts counts = simulate_session_expectation(p);
    const DecoyBounds bounds = decoy_bounds_lp(counts, p);

    CHECK(bounds.method == BoundsMethod::LinearProgram);
    CHECK(bounds.scope == BoundsScope::SignalOnly);

    const double z0 = hidden_signal_count(counts, Basis::Z, 0);
    const double z1 = hidden_signal_count(counts, Basis::Z, 1);
    CHECK(bounds.n0_low <= z0 * (1.0 + 1e-9));
    CHECK(bounds.n1_low <= z1 * (1.0 + 1e-9));
    CHECK(bounds.n1_up >= z1 * (1.0 - 1e-9));
    CHECK(bounds.n1_low > 0.0);
    CHECK(bounds.eph_up >= 0.0);
    CHECK(bounds.eph_up <= 0.5);

    SUBCASE("turning off deviations tightens the bracket") {
        BoundsOptions exact;
        exact.zero_deviations = true;
        const DecoyBounds tight = decoy_bounds_lp(counts, p, exact);
        CHECK(tight.n1_low >= bounds.n1_low);
        CHECK(tight.n1_up <= bounds.n1_up);
        CHECK(tight.n1_low <= z1 * (1.0 + 1e-9));
        CHECK(tight.n1_up >= z1 * (1.0 - 1e-9));
    }
}

TEST_CASE("single targets are ordered") {
    const ProtocolParams p = default_params();
    const SessionCounts counts = simulate_session_expectation(p);
    const double y1_min = solve_decoy_target(counts, p, Basis::Z, DecoyTarget::MinY1);
    const double y1_max = solve_decoy_target(counts, p, Basis::Z, DecoyTarget::MaxY1);
    const double y0_min = solve_decoy_target(counts, p, Basis::Z, DecoyTarget::MinY0);
    CHECK(y1_min <= y1_max);
    CHECK(y0_min >= 0.0);
    CHECK(y1_max <= 1.0 + 1e-9);
}

TEST_CASE("closed form and solver roughly agree on the single-photon floor") {
    const ProtocolParams p = default_params();
    const SessionCounts counts = simulate_session_expectation(p);
    const DecoyBounds analytic = to_signal_only(decoy_bounds_analytic(counts, p), p);
    const DecoyBounds solver = decoy_bounds_lp(counts, p);

    const double gap = std::abs(analytic.n1_low - solver.n1_low) /
                       std::max(analytic.n1_low, solver.n1_low);
    CHECK(gap < 0.25);
}

TEST_CASE("degenerate sessions take the trivial path") {
    const ProtocolParams p = default_params();
    SessionCounts counts = simulate_session_expectation(p);

    SUBCASE("no clicks at all") {
        for (int b = 0; b < 2; ++b) {
            for (int k = 0; k < kIntensityCount; ++k) {
                counts.cell[b][k].detected = 0;
                counts.cell[b][k].errors = 0;
            }
        }
        const DecoyBounds bounds = decoy_bounds_lp(counts, p);
        CHECK(bounds.n0_low == 0.0);
        CHECK(bounds.n1_low == 0.0);
        CHECK(bounds.eph_up == 0.5);
    }
    SUBCASE("an empty cell is refused") {
        counts.cell[0][1].sent = 0;
        CHECK_THROWS_AS(decoy_bounds_lp(counts, p), std::runtime_error);
    }
}

TEST_CASE("full evaluation stays sane into the noise floor") {
    ProtocolParams p = default_params();
    p.link.length_km = 400.0;  // hopeless: the background dominates
    const KeyReport report = evaluate_expectation(p);
    CHECK(report.v1.key_rate_bps == 0.0);
    CHECK(report.v2.key_rate_bps == 0.0);
    CHECK(report.v1.secure_len <= 0.0);
    CHECK(report.v2.secure_len <= 0.0);
}

TEST_CASE("sampled sessions keep every bound honest") {
    ProtocolParams p = default_params();
    const SelftestOutcome outcome = bounds_sandwich_check(10, 777, p);
    CHECK(outcome.cases == 10);
    for (const std::string& note : outcome.notes) {
        INFO(note);
        CHECK(false);
    }
    CHECK(outcome.failures == 0);
}

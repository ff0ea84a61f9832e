#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "qkd/channel.hpp"
#include "qkd/finitekey.hpp"

using namespace qkd;

TEST_CASE("binary entropy reference points") {
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(binary_entropy(0.05) == doctest::Approx(0.28639695711595625).epsilon(1e-12));
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.11) == doctest::Approx(binary_entropy(0.89)).epsilon(1e-12));
}

TEST_CASE("statistical deviation terms") {
    CHECK(hoeffding_delta(1e6, 1e-10 / 21.0) ==
          doctest::Approx(3610.427493224582).epsilon(1e-12));
    CHECK(hoeffding_delta(0.0, 1e-10) == 0.0);

    SUBCASE("phase-error extrapolation penalty") {
        CHECK(gamma_correction(1e-10, 0.05, 1e4, 1e4) ==
              doctest::Approx(0.03037791317792094).epsilon(1e-9));
        CHECK(gamma_correction(1e-10, 0.05, 1e4, 2e4) ==
              gamma_correction(1e-10, 0.05, 2e4, 1e4));
        CHECK(gamma_correction(1e-10, 0.0, 1e4, 1e4) == 0.0);
        CHECK(gamma_correction(1e-10, 0.05, 0.0, 1e4) == 0.5);
        // Shrinking samples can only grow the penalty.
        CHECK(gamma_correction(1e-10, 0.05, 1e3, 1e3) >
              gamma_correction(1e-10, 0.05, 1e4, 1e4));
    }
}

TEST_CASE("error-correction cost") {
    CHECK(lambda_ec(1e4, 0.05, 1.0) == doctest::Approx(2863.9695711595627).epsilon(1e-12));
    CHECK(lambda_ec(1e4, 0.05, 1.16) ==
          doctest::Approx(3322.2047025450925).epsilon(1e-12));
    CHECK(lambda_ec(1e4, 0.0, 1.16) == 0.0);
}

TEST_CASE("fixed finite-size costs at the default failure budgets") {
    SecurityParams sec;
    sec.eps_sec = 1e-10;
    sec.eps_cor = 1e-15;
    CHECK(fixed_cost_v1(sec) == doctest::Approx(276.49851165322474).epsilon(1e-12));
    CHECK(fixed_cost_v2(sec) == doctest::Approx(283.28597885289423).epsilon(1e-12));
    // Tighter security budgets always cost more bits.
    SecurityParams tighter = sec;
    tighter.eps_sec = 1e-12;
    CHECK(fixed_cost_v1(tighter) > fixed_cost_v1(sec));
    CHECK(fixed_cost_v2(tighter) > fixed_cost_v2(sec));
}

TEST_CASE("key length fixtures") {
    SecurityParams sec;
    sec.eps_sec = 1e-10;
    sec.eps_cor = 1e-15;
    DecoyBounds b;
    b.n0_low = 1000.0;
    b.n1_low = 50000.0;
    b.n1_up = 52000.0;
    b.eph_up = 0.05;
    const double lambda = 30000.0;

    CHECK(secure_length_v1(b, lambda, sec) == 6403.0);
    CHECK(secure_length_v2(b, lambda, sec) == 5824.0);

    SUBCASE("lengths are whole bits and can go negative") {
        CHECK(secure_length_v1(b, 40000.0, sec) < 0.0);
        CHECK(std::floor(secure_length_v1(b, lambda, sec)) ==
              secure_length_v1(b, lambda, sec));
    }
    SUBCASE("monotone in every bound") {
        DecoyBounds worse = b;
        worse.eph_up = 0.06;
        CHECK(secure_length_v1(worse, lambda, sec) <= secure_length_v1(b, lambda, sec));
        CHECK(secure_length_v2(worse, lambda, sec) <= secure_length_v2(b, lambda, sec));

        worse = b;
        worse.n1_up = 55000.0;
        CHECK(secure_length_v2(worse, lambda, sec) <= secure_length_v2(b, lambda, sec));

        DecoyBounds better = b;
        better.n0_low += 500.0;
        CHECK(secure_length_v1(better, lambda, sec) >= secure_length_v1(b, lambda, sec));
        better = b;
        better.n1_low += 500.0;
        CHECK(secure_length_v1(better, lambda, sec) >= secure_length_v1(b, lambda, sec));

        CHECK(secure_length_v1(b, lambda + 100.0, sec) <=
              secure_length_v1(b, lambda, sec));
    }
}

namespace {

/// Hidden photon-number-resolved counts, pooled over every intensity.
double hidden_count(const SessionCounts& counts, Basis basis, int n, bool errors) {
    long long total = 0;
    for (int k = 0; k < kIntensityCount; ++k) {
        const auto& v = errors
                            ? counts.errors_by_photon_number[static_cast<int>(basis)][k]
                            : counts.by_photon_number[static_cast<int>(basis)][k];
        total += v[static_cast<std::size_t>(n)];
    }
    return static_cast<double>(total);
}

}  // namespace

TEST_CASE("closed-form bounds bracket the hidden counts without deviations") {
    const ProtocolParams p = default_params();
    const SessionCounts counts = simulate_session_expectation(p);
    BoundsOptions options;
    options.zero_deviations = true;

    const DecoyBounds bounds = decoy_bounds_analytic(counts, p, options);
    const double z0 = hidden_count(counts, Basis::Z, 0, false);
    const double z1 = hidden_count(counts, Basis::Z, 1, false);
    const double x1 = hidden_count(counts, Basis::X, 1, false);

    CHECK(bounds.n0_low <= z0 * (1.0 + 1e-9));
    CHECK(bounds.n1_low <= z1 * (1.0 + 1e-9));
    CHECK(bounds.n1_up >= z1 * (1.0 - 1e-9));
    CHECK(bounds.s_x1_low <= x1 * (1.0 + 1e-9));

    // The multi-photon correction gives away only a few percent on the
    // single-photon side.  (The vacuum bound is much looser by nature: the
    // two-photon cross term it discards is comparable to the dark rate.)
    CHECK(bounds.n1_low >= 0.9 * z1);
    CHECK(bounds.n0_low >= 0.0);

    SUBCASE("statistical deviations only widen the bracket") {
        const DecoyBounds noisy = decoy_bounds_analytic(counts, p);
        CHECK(noisy.n1_low <= bounds.n1_low);
        CHECK(noisy.n1_up >= bounds.n1_up);
        CHECK(noisy.n0_low <= bounds.n0_low);
        CHECK(noisy.eph_up >= bounds.eph_up);
    }
}

TEST_CASE("closed-form bounds refuse empty cells") {
    const ProtocolParams p = default_params();
    SessionCounts counts = simulate_session_expectation(p);
    counts.cell[1][2].sent = 0;
    CHECK_THROWS_AS(decoy_bounds_analytic(counts, p), std::runtime_error);
}

TEST_CASE("scope conversion rescales by the signal share per photon number") {
    const ProtocolParams p = default_params();
    CHECK(signal_fraction(0, p) == doctest::Approx(0.3902782953969569).epsilon(1e-9));
    CHECK(signal_fraction(1, p) == doctest::Approx(0.8593862102309018).epsilon(1e-9));

    DecoyBounds pooled;
    pooled.n0_low = 1000.0;
    pooled.n1_low = 50000.0;
    pooled.n1_up = 52000.0;
    pooled.s_x1_low = 48000.0;
    pooled.v_x1_up = 1500.0;
    pooled.eph_up = 0.04;
    const DecoyBounds scoped = to_signal_only(pooled, p);
    CHECK(scoped.scope == BoundsScope::SignalOnly);
    CHECK(scoped.n0_low == doctest::Approx(1000.0 * 0.3902782953969569).epsilon(1e-9));
    CHECK(scoped.n1_low == doctest::Approx(50000.0 * 0.8593862102309018).epsilon(1e-9));
    CHECK(scoped.eph_up == pooled.eph_up);  // a ratio does not rescale
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "qkd/channel.hpp"

using namespace qkd;

namespace {

ProtocolParams dark_fiber_240km() {
    ProtocolParams p = default_params();
    p.link.length_km = 240.0;         // 240 * 0.18 + 1.2 = 44.4 dB
    p.link.loss_coeff_db_per_km = 0.18;
    p.link.extra_loss_db = 1.2;
    p.mux.enabled = false;
    return p;
}

}  // namespace

TEST_CASE("unit conversions match reference values") {
    CHECK(photon_energy_j(1550.0) ==
          doctest::Approx(1.2815779723541474e-19).epsilon(1e-9));
    CHECK(filter_bandwidth_nm(25.0, 1550.0) ==
          doctest::Approx(0.20034693467839007).epsilon(1e-9));
    CHECK(dbm_to_watts(0.0) == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(dbm_to_watts(-30.0) == doctest::Approx(1e-6).epsilon(1e-12));
    CHECK(watts_to_dbm(dbm_to_watts(-8.7)) == doctest::Approx(-8.7).epsilon(1e-12));
}

TEST_CASE("channel efficiency and background click probability") {
    const ChannelEnv env = derive_channel_env(dark_fiber_240km());
    CHECK(env.attenuation_db == doctest::Approx(44.4).epsilon(1e-12));
    CHECK(env.eta == doctest::Approx(3.6307805477010175e-06).epsilon(1e-9));
    // 10 dark counts per second against a 1 GHz gate, two detectors.
    CHECK(env.p_dark == doctest::Approx(1e-8).epsilon(1e-12));
    CHECK(env.p_raman == 0.0);
    CHECK(env.y0 == doctest::Approx(1.9999999989472883e-08).epsilon(1e-9));
}

TEST_CASE("gain and error fraction of a pulse class") {
    ChannelEnv env;
    env.eta = 1e-3;
    env.y0 = 2e-6;
    CHECK(gain_for_intensity(env, 0.5) ==
          doctest::Approx(0.0005018740210806674).epsilon(1e-9));
    CHECK(qber_for_intensity(env, 0.5, 0.015) ==
          doctest::Approx(0.016932755949214773).epsilon(1e-9));

    SUBCASE("zero gain has no defined error fraction") {
        ChannelEnv dead;
        dead.eta = 0.0;
        dead.y0 = 0.0;
        CHECK_THROWS_AS(qber_for_intensity(dead, 0.5, 0.015), std::domain_error);
    }
    SUBCASE("background-only clicks are random") {
        CHECK(error_n(env, 0, 0.015) == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("per-photon-number yields are consistent with the pooled gain") {
    const ChannelEnv env = derive_channel_env(dark_fiber_240km());
    for (double mu : {0.0007, 0.11, 0.5}) {
        double pooled = 0.0;
        for (int n = 0; n < 80; ++n) pooled += poisson_pn(n, mu) * yield_n(env, n);
        CHECK(pooled == doctest::Approx(gain_for_intensity(env, mu)).epsilon(1e-10));
    }
}

TEST_CASE("classical receive power follows the link budget") {
    ProtocolParams p = default_params();
    p.link.length_km = 200.0;
    p.link.loss_coeff_db_per_km = 0.18;
    p.link.extra_loss_db = 1.9;
    CHECK(receive_power_dbm(-8.7, p) == doctest::Approx(-46.6).epsilon(1e-12));
}

TEST_CASE("Raman click probability") {
    ProtocolParams p = default_params();
    p.link.length_km = 100.0;
    p.link.loss_coeff_db_per_km = 0.18;
    p.link.extra_loss_db = 1.9;
    p.mux.enabled = true;
    p.mux.drop_filter_loss_db = 3.0;
    p.mux.filter_bandwidth_ghz = 25.0;
    p.mux.raman_coeff_per_km_nm = 2.6e-9;
    p.mux.channels.push_back({-8.7, ChannelRole::Clock, true});

    SUBCASE("matches the reference scattering budget") {
        CHECK(raman_click_probability(p) ==
              doctest::Approx(2.8119721550761125e-06).epsilon(1e-9));
    }
    SUBCASE("is linear and additive in launch power") {
        const double one = raman_click_probability(p);
        p.mux.channels.push_back({-8.7, ChannelRole::Data, true});
        CHECK(raman_click_probability(p) == doctest::Approx(2.0 * one).epsilon(1e-12));
        p.mux.channels.back().launch_power_dbm += 10.0;  // ten times the watts
        CHECK(raman_click_probability(p) == doctest::Approx(11.0 * one).epsilon(1e-9));
    }
    SUBCASE("counter-propagating channels are isolated") {
        p.mux.channels[0].copropagating = false;
        CHECK(raman_click_probability(p) == 0.0);
    }
    SUBCASE("no multiplexing, no Raman noise") {
        p.mux.enabled = false;
        CHECK(raman_click_probability(p) == 0.0);
        CHECK(derive_channel_env(p).p_raman == 0.0);
    }
    SUBCASE("zero length fiber scatters nothing") {
        p.link.length_km = 0.0;
        CHECK(raman_click_probability(p) == 0.0);
    }
    SUBCASE("drop filter loss applies to the quantum channel only when muxed") {
        const double with_mux = derive_channel_env(p).attenuation_db;
        p.mux.enabled = false;
        CHECK(derive_channel_env(p).attenuation_db ==
              doctest::Approx(with_mux - p.mux.drop_filter_loss_db).epsilon(1e-12));
    }
}

TEST_CASE("expectation sessions are deterministic and correctly split") {
    const ProtocolParams p = default_params();
    const SessionCounts a = simulate_session_expectation(p);
    const SessionCounts b = simulate_session_expectation(p);

    long long sent_total = 0;
    for (int basis = 0; basis < 2; ++basis) {
        for (int k = 0; k < kIntensityCount; ++k) {
            CHECK(a.cell[basis][k].sent == b.cell[basis][k].sent);
            CHECK(a.cell[basis][k].detected == b.cell[basis][k].detected);
            CHECK(a.cell[basis][k].errors == b.cell[basis][k].errors);
            CHECK(a.cell[basis][k].errors <= a.cell[basis][k].detected);
            CHECK(a.cell[basis][k].detected <= a.cell[basis][k].sent);
            sent_total += a.cell[basis][k].sent;
        }
    }
    CHECK(sent_total + a.discarded == std::llround(p.link.session_pulses));

    // With qz = 1/2 on both sides, each basis keeps a quarter of the pulses.
    CHECK(a.cell[0][0].sent == std::llround(p.link.session_pulses * 0.5 * 0.25));
    CHECK(a.total_sent(Basis::Z) == a.total_sent(Basis::X));

    SUBCASE("photon-number split accounts for almost every detection") {
        for (int basis = 0; basis < 2; ++basis) {
            for (int k = 0; k < kIntensityCount; ++k) {
                long long split = 0;
                for (long long c : a.by_photon_number[basis][k]) split += c;
                CHECK(std::abs(split - a.cell[basis][k].detected) <=
                      a.cell[basis][k].detected / 1000 + 12);
            }
        }
    }
}

TEST_CASE("sampled sessions reproduce per seed and track the expectation") {
    ProtocolParams p = default_params();
    p.link.session_pulses = 1e10;  // keep the test quick but well populated

    const SessionCounts s1 = simulate_session_stochastic(p, 42);
    const SessionCounts s2 = simulate_session_stochastic(p, 42);
    const SessionCounts s3 = simulate_session_stochastic(p, 43);
    const SessionCounts mean = simulate_session_expectation(p);

    bool any_difference = false;
    for (int basis = 0; basis < 2; ++basis) {
        for (int k = 0; k < kIntensityCount; ++k) {
            CHECK(s1.cell[basis][k].detected == s2.cell[basis][k].detected);
            CHECK(s1.cell[basis][k].errors == s2.cell[basis][k].errors);
            any_difference |=
                s1.cell[basis][k].detected != s3.cell[basis][k].detected;

            // Five-sigma window around the expected detection count.
            const double expected = static_cast<double>(mean.cell[basis][k].detected);
            const double spread = 5.0 * std::sqrt(expected) + 10.0;
            CHECK(std::abs(s1.cell[basis][k].detected - expected) <= spread);

            long long split = 0, errors_split = 0;
            for (long long c : s1.by_photon_number[basis][k]) split += c;
            for (long long c : s1.errors_by_photon_number[basis][k]) errors_split += c;
            CHECK(split <= s1.cell[basis][k].detected);
            CHECK(errors_split <= s1.cell[basis][k].errors);
        }
    }
    CHECK(any_difference);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "mwmix/reduced.hpp"

using namespace mwmix;

namespace {
const double TWO_PI = 2.0 * M_PI;

MediumSpec demo_medium() {
    MediumSpec m;
    m.number_density = 1e17;
    m.slab_length = 0.05;
    m.temperature = 365.15;
    m.atomic_mass = 1.40999e-25;
    m.hyperfine_splitting = TWO_PI * 3.0357e9;
    m.ground_coherence_decay = TWO_PI * 5e4;
    m.gamma = {1.80645e7, 1.80645e7, 1.9059e7, 1.9059e7};
    m.lambda = {794.979e-9, 794.979e-9, 780.241e-9, 780.241e-9};
    return m;
}

DriveSpec demo_drive() {
    DriveSpec d;
    d.rabi_forward = 2e8;
    d.rabi_backward = 6e7;
    d.detuning_forward = -TWO_PI * 8e8;
    d.detuning_backward = TWO_PI * 2e9;
    d.carrier_forward = TWO_PI * constants::c / 794.979e-9 + d.detuning_forward;
    d.carrier_backward = TWO_PI * constants::c / 780.241e-9 + d.detuning_backward;
    return d;
}

ReducedCoefficients direct_coeffs(cplx a11, cplx a14, cplx a41, cplx a44) {
    ReducedCoefficients c;
    c.a11 = a11;
    c.a14 = a14;
    c.a41 = a41;
    c.a44 = a44;
    c.delta_a = 0.5 * (a11 - a44);
    c.s = std::sqrt(a14 * a41 - c.delta_a * c.delta_a);
    return c;
}
} // namespace

TEST_CASE("no backward drive: a14 = a41 = 0 and s = i|delta_a|") {
    auto m = demo_medium();
    auto d = demo_drive();
    d.rabi_backward = 0;
    double w0 = m.hyperfine_splitting + TWO_PI * 2e5;
    auto rc = reduced_coefficients(m, d, w0, 0.0, 0.0);
    CHECK(std::abs(rc.a14) == 0.0);
    CHECK(std::abs(rc.a41) == 0.0);
    CHECK(std::abs(rc.s * rc.s + rc.delta_a * rc.delta_a) < 1e-12 * std::norm(rc.delta_a) + 1e-300);
    CHECK(rc.s.imag() >= 0); // principal branch: s on the +i side of |delta_a|
}

TEST_CASE("light-shifted two-photon resonance zeroes the a11 bracket") {
    auto m = demo_medium();
    m.ground_coherence_decay = 0;
    auto d = demo_drive();
    double xi = light_shift(d.rabi_forward, d.rabi_backward, d.detuning_backward);
    auto rc = reduced_coefficients(m, d, m.hyperfine_splitting + xi, 0.0, 0.0);
    CHECK(std::abs(rc.a11) < 1e-10);
}

TEST_CASE("coupling-ratio identity |a14/a41| = eta1/eta4") {
    auto m = demo_medium();
    auto d = demo_drive();
    double eta1 = eta_for_transition(m, TR_BA);
    double eta4 = eta_for_transition(m, TR_CAP);
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(0.2, 3.0);
    for (int i = 0; i < 50; ++i) {
        DriveSpec dd = d;
        dd.rabi_forward = cplx{2e8 * u(rng), 5e7 * u(rng)};
        dd.rabi_backward = cplx{4e7 * u(rng), -3e7 * u(rng)};
        auto rc = reduced_coefficients(m, dd, m.hyperfine_splitting, 12.0, -7.0);
        CHECK(std::abs(rc.a14 / rc.a41) == doctest::Approx(eta1 / eta4).epsilon(1e-12));
    }
}

TEST_CASE("coefficient magnitude consistency |a14 Delta_B |Omega_F|^2| = eta1 |Omega_B Omega_F|") {
    auto m = demo_medium();
    auto d = demo_drive();
    double eta1 = eta_for_transition(m, TR_BA);
    auto rc = reduced_coefficients(m, d, m.hyperfine_splitting, 0.0, 0.0);
    double lhs = std::abs(rc.a14) * std::abs(d.detuning_backward) * std::norm(d.rabi_forward);
    double rhs = eta1 * std::abs(d.rabi_backward) * std::abs(d.rabi_forward);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("s^2 + delta_a^2 = a14 a41 to machine precision") {
    auto m = demo_medium();
    auto d = demo_drive();
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        double w0 = m.hyperfine_splitting * (1.0 + 1e-4 * u(rng));
        auto rc = reduced_coefficients(m, d, w0, 100 * u(rng), 100 * u(rng));
        cplx lhs = rc.s * rc.s + rc.delta_a * rc.delta_a;
        cplx rhs = rc.a14 * rc.a41;
        double scale = std::abs(rhs) + std::norm(rc.delta_a) + 1e-300;
        CHECK(std::abs(lhs - rhs) < 1e-12 * scale);
    }
}

TEST_CASE("stored a14 a41 product is positive for phase-matched real drives") {
    // the backward-propagation sign is absorbed in a41, so sqrt(a14 a41) is
    // real and the tan(sL) = s/delta_a threshold becomes reachable
    auto m = demo_medium();
    auto d = demo_drive();
    auto rc = reduced_coefficients(m, d, m.hyperfine_splitting, 0.0, 0.0);
    cplx prod = rc.a14 * rc.a41;
    CHECK(prod.real() > 0);
    CHECK(std::abs(prod.imag()) < 1e-10 * prod.real());
    double eta1 = eta_for_transition(m, TR_BA);
    double eta4 = eta_for_transition(m, TR_CAP);
    double oracle = eta1 * eta4 * std::norm(d.rabi_backward) /
                    (d.detuning_backward * d.detuning_backward * std::norm(d.rabi_forward));
    CHECK(prod.real() == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("closed_form_gain: empty medium gives exactly 1") {
    auto c = direct_coeffs(0, 0, 0, 0);
    auto g = closed_form_gain(c, 0.05);
    CHECK_FALSE(g.at_threshold);
    CHECK(std::abs(g.gain - 1.0) < 1e-15);
}

TEST_CASE("closed_form_gain: delta_a = 0, sL = pi/3 gives |G| = 2") {
    double L = 0.05;
    double s = (M_PI / 3) / L;
    auto c = direct_coeffs(0, s, s, 0);
    REQUIRE(std::abs(c.s - s) < 1e-12 * s);
    auto g = closed_form_gain(c, L);
    // oracle: 1/cos(pi/3) = 2
    CHECK(std::abs(g.gain) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_FALSE(g.at_threshold);
}

TEST_CASE("closed_form_gain diverges and flags at sL -> pi/2") {
    double L = 0.05;
    double s = (M_PI / 2) * (1 - 1e-12) / L;
    auto c = direct_coeffs(0, s, s, 0);
    auto g = closed_form_gain(c, L);
    CHECK(g.at_threshold);
    CHECK(std::abs(g.gain) > 1e10);
}

TEST_CASE("closed_form_gain degenerate s -> 0 limit is 1/(1 - delta_a L)") {
    double L = 0.05;
    cplx da{7.0, 3.0};
    // trace-free construction: a11 = da, a44 = -da, a14 a41 = da^2 so s = 0
    auto c0 = direct_coeffs(da, da, da, -da);
    REQUIRE(std::abs(c0.s) < 1e-6);
    auto g0 = closed_form_gain(c0, L);
    cplx oracle = 1.0 / (1.0 - da * L);
    CHECK(std::abs(g0.gain - oracle) < 1e-9 * std::abs(oracle));
    // continuity against a slightly perturbed s
    auto c1 = direct_coeffs(da, da * 1.000001, da, -da);
    auto g1 = closed_form_gain(c1, L);
    CHECK(std::abs(g1.gain - g0.gain) < 1e-4 * std::abs(g0.gain));
}

TEST_CASE("oscillation_residual plug-in checks") {
    double L = 0.05;
    {
        // delta_a = 0, sL = pi/2: D = -s cos(pi/2) = 0
        double s = (M_PI / 2) / L;
        auto c = direct_coeffs(0, s, s, 0);
        CHECK(std::abs(oscillation_residual(c, L)) < 1e-12 * s);
    }
    {
        // s real, delta_a = s, sL = pi/4: tan(sL) = 1 = s/delta_a
        double s = (M_PI / 4) / L;
        // a11 - a44 = 2s, a14 a41 = s^2 + s^2 = 2 s^2
        auto c = direct_coeffs(2 * s, s * std::sqrt(2.0), s * std::sqrt(2.0), 0);
        REQUIRE(std::abs(c.delta_a - s) < 1e-12 * s);
        REQUIRE(std::abs(c.s - s) < 1e-12 * s);
        CHECK(std::abs(oscillation_residual(c, L)) < 1e-12 * s);
    }
}

TEST_CASE("gain and residual magnitudes are branch invariant under s -> -s") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double L = 0.05;
    for (int i = 0; i < 100; ++i) {
        ReducedCoefficients c = direct_coeffs(cplx{30 * u(rng), 30 * u(rng)},
                                              cplx{30 * u(rng), 30 * u(rng)},
                                              cplx{30 * u(rng), 30 * u(rng)},
                                              cplx{30 * u(rng), 30 * u(rng)});
        ReducedCoefficients cf = c;
        cf.s = -c.s;
        CHECK(std::abs(oscillation_residual(c, L)) ==
              doctest::Approx(std::abs(oscillation_residual(cf, L))).epsilon(1e-10));
        auto g = closed_form_gain(c, L);
        auto gf = closed_form_gain(cf, L);
        CHECK(std::abs(g.gain) == doctest::Approx(std::abs(gf.gain)).epsilon(1e-10));
    }
}

TEST_CASE("gain magnitude strictly increases in sL on (0, pi/2) at delta_a = 0") {
    double L = 0.05;
    double prev = 0;
    for (int i = 1; i <= 40; ++i) {
        double sL = (M_PI / 2) * i / 41.0;
        auto c = direct_coeffs(0, sL / L, sL / L, 0);
        double g = std::abs(closed_form_gain(c, L).gain);
        CHECK(g > prev);
        prev = g;
    }
}

TEST_CASE("strong_coupling predicate") {
    auto m = demo_medium();
    auto d = demo_drive();

    SUBCASE("zero ground decoherence with both drives on") {
        m.ground_coherence_decay = 0;
        CHECK(strong_coupling(m, d));
    }
    SUBCASE("no backward drive") {
        d.rabi_backward = 0;
        CHECK_FALSE(strong_coupling(m, d));
    }
    SUBCASE("exact equality counts as not strongly coupled") {
        double eta1 = eta_for_transition(m, TR_BA);
        double eta4 = eta_for_transition(m, TR_CAP);
        // pick gamma_bc so that eta4 |OF OB| = eta1 gamma_bc |DB| exactly
        m.ground_coherence_decay = eta4 * std::abs(d.rabi_forward) * std::abs(d.rabi_backward) /
                                   (eta1 * std::abs(d.detuning_backward));
        CHECK_FALSE(strong_coupling(m, d));
        m.ground_coherence_decay *= 0.999;
        CHECK(strong_coupling(m, d));
    }
}

TEST_CASE("pulled_frequency limits and arithmetic oracle") {
    auto m = demo_medium();
    auto d = demo_drive();
    double xi = light_shift(d.rabi_forward, d.rabi_backward, d.detuning_backward);
    double omega_r = m.hyperfine_splitting + xi;

    // vanishing geometric term
    CHECK(pulled_frequency(m, d, 0.0, 1.91e4) == doctest::Approx(omega_r).epsilon(1e-14));

    // kappa -> infinity locks to the light-shifted resonance
    CHECK(pulled_frequency(m, d, 100.0, 1e18) == doctest::Approx(omega_r).epsilon(1e-12));
    CHECK(pulled_frequency_collinear(m, d, 1e18) == doctest::Approx(omega_r).epsilon(1e-12));

    // kappa = 1.91e4 with c dk = 3.81e10: pull = -c dk/kappa ~ -2.0e6 rad/s
    double kappa = 1.91e4;
    double dk = 3.81e10 / constants::c;
    double pulled = pulled_frequency(m, d, dk, kappa);
    CHECK(pulled - omega_r == doctest::Approx(-3.81e10 / kappa).epsilon(1e-12));
    CHECK(pulled - omega_r == doctest::Approx(-1.995e6).epsilon(1e-3));

    CHECK_THROWS_AS(pulled_frequency(m, d, dk, 0.0), std::domain_error);

    // collinear pull is positive: dk_z = -(2 omega0/c) drags the lock upward
    double w = pulled_frequency_collinear(m, d, kappa);
    CHECK(w > omega_r);
    CHECK(w - omega_r == doctest::Approx(2 * omega_r / (kappa - 2)).epsilon(1e-9));
}

TEST_CASE("find_threshold reproduces the delta_a = 0 closed form") {
    auto m = demo_medium();
    m.ground_coherence_decay = 0; // keeps delta_a = 0 at the matched omega0
    auto d = demo_drive();
    double eta1 = eta_for_transition(m, TR_BA);
    double eta4 = eta_for_transition(m, TR_CAP);

    // oracle: sqrt(a14 a41) L = pi/2 with zero mismatch terms
    double oracle = (M_PI / 2) * std::abs(d.detuning_backward) * std::abs(d.rabi_forward) /
                    (std::sqrt(eta1 * eta4) * m.slab_length);

    ThresholdOptions opt;
    opt.mismatch.collinear = false; // k11 = k41 = 0
    auto rep = find_threshold(m, d, SweptParameter::RabiBackwardMagnitude, 0.5 * oracle,
                              1.6 * oracle, opt);
    REQUIRE(rep.converged);
    CHECK(rep.threshold_parameter_value == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(rep.residual_at_threshold < opt.tolerance);

    // threshold consistency: a converged threshold implies strong coupling
    DriveSpec at = d;
    at.rabi_backward = rep.threshold_parameter_value;
    CHECK(strong_coupling(m, at));

    SUBCASE("shrinking the bracket tenfold moves the answer less than tolerance") {
        auto rep2 = find_threshold(m, d, SweptParameter::RabiBackwardMagnitude, 0.95 * oracle,
                                   1.05 * oracle, opt);
        REQUIRE(rep2.converged);
        CHECK(rep2.threshold_parameter_value ==
              doctest::Approx(rep.threshold_parameter_value).epsilon(1e-6));
    }
}

TEST_CASE("every converged threshold satisfies the strong-coupling inequality") {
    std::mt19937 rng(55);
    std::uniform_real_distribution<double> u(0, 1);
    int converged_count = 0;
    for (int trial = 0; trial < 12; ++trial) {
        auto m = demo_medium();
        m.ground_coherence_decay = std::pow(10.0, 2 + 2.5 * u(rng));
        m.number_density = 1e16 * std::pow(10.0, u(rng));
        auto d = demo_drive();
        d.rabi_forward = 1e8 * (0.5 + u(rng));
        d.detuning_backward = TWO_PI * (1e9 + 2e9 * u(rng));

        double eta1 = eta_for_transition(m, TR_BA);
        double eta4 = eta_for_transition(m, TR_CAP);
        double oracle = (M_PI / 2) * std::abs(d.detuning_backward) * std::abs(d.rabi_forward) /
                        (std::sqrt(eta1 * eta4) * m.slab_length);
        ThresholdOptions opt;
        opt.mismatch.collinear = false;
        auto rep = find_threshold(m, d, SweptParameter::RabiBackwardMagnitude, 0.3 * oracle,
                                  3.0 * oracle, opt);
        if (!rep.converged) continue;
        ++converged_count;
        DriveSpec at = d;
        at.rabi_backward = rep.threshold_parameter_value;
        CHECK(strong_coupling(m, at));
    }
    CHECK(converged_count >= 6); // the draw must actually exercise the property
}

TEST_CASE("find_threshold reports no threshold when strong coupling fails everywhere") {
    auto m = demo_medium();
    m.ground_coherence_decay = TWO_PI * 5e4;
    auto d = demo_drive();
    // weak backward drive bracket, well inside the weak-coupling region
    double eta1 = eta_for_transition(m, TR_BA);
    double eta4 = eta_for_transition(m, TR_CAP);
    double ob_strong_coupling = eta1 * m.ground_coherence_decay * std::abs(d.detuning_backward) /
                                (eta4 * std::abs(d.rabi_forward));
    double lo = 0.01 * ob_strong_coupling, hi = 0.5 * ob_strong_coupling;

    ThresholdOptions opt;
    opt.mismatch.collinear = false;
    auto rep = find_threshold(m, d, SweptParameter::RabiBackwardMagnitude, lo, hi, opt);
    CHECK_FALSE(rep.converged);
    CHECK(rep.residual_at_threshold > 1e-3);

    // independent oracle: dense scan of |D|/|s| over bracket x omega0 shows a
    // positive floor
    double floor = 1e300;
    for (int i = 0; i <= 40; ++i) {
        DriveSpec dd = d;
        dd.rabi_backward = lo + (hi - lo) * i / 40.0;
        double xi = light_shift(dd.rabi_forward, dd.rabi_backward, dd.detuning_backward);
        for (int j = 0; j <= 80; ++j) {
            double w0 = m.hyperfine_splitting + xi + TWO_PI * 5e6 * (j - 40) / 40.0;
            auto rc = reduced_coefficients(m, dd, w0, 0.0, 0.0);
            double f = std::abs(oscillation_residual(rc, m.slab_length)) /
                       (std::abs(rc.s) + 1e-300);
            floor = std::min(floor, f);
        }
    }
    CHECK(floor > 1e-3);
}

TEST_CASE("find_threshold sweeps density and length too") {
    auto m = demo_medium();
    m.ground_coherence_decay = 0;
    auto d = demo_drive();
    double eta1 = eta_for_transition(m, TR_BA);
    double eta4 = eta_for_transition(m, TR_CAP);
    double g_per_N = std::sqrt(eta1 * eta4) / m.number_density * std::abs(d.rabi_backward) /
                     (std::abs(d.detuning_backward) * std::abs(d.rabi_forward));
    double n_star = (M_PI / 2) / (g_per_N * m.slab_length);

    ThresholdOptions opt;
    opt.mismatch.collinear = false;
    auto rep = find_threshold(m, d, SweptParameter::NumberDensity, 0.4 * n_star, 2.0 * n_star, opt);
    REQUIRE(rep.converged);
    CHECK(rep.threshold_parameter_value == doctest::Approx(n_star).epsilon(1e-6));

    double g_now = std::sqrt(eta1 * eta4) * std::abs(d.rabi_backward) /
                   (std::abs(d.detuning_backward) * std::abs(d.rabi_forward));
    double l_star = (M_PI / 2) / g_now;
    auto repL = find_threshold(m, d, SweptParameter::SlabLength, 0.4 * l_star, 2.2 * l_star, opt);
    REQUIRE(repL.converged);
    CHECK(repL.threshold_parameter_value == doctest::Approx(l_star).epsilon(1e-6));
}

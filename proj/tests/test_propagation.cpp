#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "mwmix/propagation.hpp"

using namespace mwmix;

namespace {
const double TWO_PI = 2.0 * M_PI;

MediumSpec clean_medium(double density = 1e16) {
    MediumSpec m;
    m.number_density = density;
    m.slab_length = 0.05;
    m.temperature = 0;
    m.atomic_mass = 1.40999e-25;
    m.hyperfine_splitting = TWO_PI * 3.0357e9;
    m.ground_coherence_decay = 1e3;
    m.gamma = {1.8e7, 1.8e7, 1.8e7, 1.8e7};
    m.lambda = {794.979e-9, 794.979e-9, 794.979e-9, 794.979e-9};
    return m;
}

DriveSpec demo_drive() {
    DriveSpec d;
    d.rabi_forward = 4e7;
    d.rabi_backward = 2e7;
    d.detuning_forward = 0;
    d.detuning_backward = TWO_PI * 1e9;
    double w_ca = TWO_PI * constants::c / 794.979e-9;
    d.carrier_forward = w_ca + d.detuning_forward;
    d.carrier_backward = w_ca + d.detuning_backward;
    return d;
}

ReducedCoefficients direct_coeffs(cplx a11, cplx a14, cplx a41, cplx a44, double k11 = 0,
                                  double k41 = 0) {
    ReducedCoefficients c;
    c.a11 = a11;
    c.a14 = a14;
    c.a41 = a41;
    c.a44 = a44;
    c.k11 = k11;
    c.k41 = k41;
    c.delta_a = 0.5 * (a11 - a44);
    c.s = std::sqrt(a14 * a41 - c.delta_a * c.delta_a);
    return c;
}
} // namespace

TEST_CASE("assemble_system: zero chi gives pure mismatch phases") {
    auto d = demo_drive();
    double w0 = TWO_PI * 3e9;
    SidebandSet sb(d, w0);
    CouplingMatrix cm;
    cm.omega0 = w0;
    for (int m = 0; m < 4; ++m) {
        cm.kz[m] = sb.kz(m);
        cm.qbar[m] = (w0 / constants::c) * (sb.direction[m] > 0 ? 1.0 : -1.0);
    }
    auto sys = assemble_system(cm, sb, 0.05);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            if (i == j)
                CHECK(std::abs(sys.generator(i, j) - cplx{0, cm.qbar[i]}) < 1e-18);
            else
                CHECK(std::abs(sys.generator(i, j)) == 0.0);
        }
    CHECK_THROWS_AS(assemble_system(cm, SidebandSet(d, 2 * w0), 0.05), std::invalid_argument);
}

TEST_CASE("assemble_system restricted to slots {1,4} reproduces the reduced generator") {
    auto m = clean_medium();
    auto d = demo_drive();
    double w0 = m.hyperfine_splitting + TWO_PI * 1e5;
    auto rc = reduced_coefficients(m, d, w0, -w0 / constants::c, w0 / constants::c);
    auto cm = reduced_chi(rc, d, w0);
    SidebandSet sb(d, w0);
    auto sys = assemble_system(cm, sb, m.slab_length);
    // oracle: d/dz (E1, E4*) = [[a11, a14], [-a41, a44]]
    CHECK(std::abs(sys.generator(0, 0) - rc.a11) < 1e-12 * std::abs(rc.a11));
    CHECK(std::abs(sys.generator(0, 3) - rc.a14) < 1e-12 * std::abs(rc.a14));
    CHECK(std::abs(sys.generator(3, 0) + rc.a41) < 1e-12 * std::abs(rc.a41));
    CHECK(std::abs(sys.generator(3, 3) - rc.a44) < 1e-12 * std::abs(rc.a44) + 1e-300);
    // decoupled middle slots
    CHECK(std::abs(sys.generator(1, 1)) == 0.0);
    CHECK(std::abs(sys.generator(2, 2)) == 0.0);
}

TEST_CASE("transfer_matrix oracles") {
    PropagationSystem sys;
    sys.length = 0.05;

    SUBCASE("zero generator gives the identity") {
        auto tr = transfer_matrix(sys);
        REQUIRE_FALSE(tr.saturated);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                CHECK(std::abs(tr.matrix(i, j) - (i == j ? 1.0 : 0.0)) < 1e-15);
    }
    SUBCASE("diagonal generator exponentiates entrywise") {
        sys.generator(0, 0) = cplx{3.0, -40.0};
        sys.generator(1, 1) = cplx{-6.0, 11.0};
        auto tr = transfer_matrix(sys);
        REQUIRE_FALSE(tr.saturated);
        CHECK(std::abs(tr.matrix(0, 0) - std::exp(cplx{0.15, -2.0})) < 1e-12);
        CHECK(std::abs(tr.matrix(1, 1) - std::exp(cplx{-0.3, 0.55})) < 1e-12);
    }
    SUBCASE("two-field block with delta_a = 0 matches the cos/sin closed form") {
        auto d = demo_drive();
        double w0 = TWO_PI * 3e9;
        double L = 0.05;
        double s = 0.8 * (M_PI / 2) / L;
        auto rc = direct_coeffs(0, s, s, 0);
        auto cm = reduced_chi(rc, d, w0);
        auto sys2 = assemble_system(cm, SidebandSet(d, w0), L);
        auto tr = transfer_matrix(sys2);
        REQUIRE_FALSE(tr.saturated);
        CHECK(std::abs(tr.matrix(0, 0) - std::cos(s * L)) < 1e-12);
        CHECK(std::abs(tr.matrix(3, 3) - std::cos(s * L)) < 1e-12);
        CHECK(std::abs(tr.matrix(0, 3) - std::sin(s * L)) < 1e-12);
        CHECK(std::abs(tr.matrix(3, 0) + std::sin(s * L)) < 1e-12);
    }
}

TEST_CASE("solve_boundary with identity transfer passes inputs through") {
    PropagationSystem sys;
    sys.length = 0.05;
    auto tr = transfer_matrix(sys);
    std::array<cplx, 4> seed{cplx{1, 0}, cplx{0.5, -0.5}, cplx{0, 0.25}, cplx{-2, 0}};
    auto br = solve_boundary(sys, tr, seed);
    CHECK(br.onset.sigma_min == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(br.onset.oscillating);
    for (int mslot = 0; mslot < 4; ++mslot)
        CHECK(std::abs(br.outputs[mslot] - seed[mslot]) < 1e-12);
    // imposed boundary entries are reproduced exactly, not just to roundoff
    int last = (int)br.profile.z.size() - 1;
    CHECK(br.profile.amplitude[0][0] == seed[0]);
    CHECK(br.profile.amplitude[2][0] == seed[2]);
    CHECK(br.profile.amplitude[1][last] == seed[1]);
    CHECK(br.profile.amplitude[3][last] == seed[3]);
    // constant profile
    for (int i = 0; i < (int)br.profile.z.size(); ++i)
        CHECK(std::abs(br.profile.amplitude[0][i] - seed[0]) < 1e-12);
}

TEST_CASE("BVP gain equals the closed form for randomized below-threshold sets") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> u(0, 1);
    auto d = demo_drive();
    auto m = clean_medium();
    int accepted = 0;
    while (accepted < 100) {
        MediumSpec mm = m;
        DriveSpec dd = d;
        mm.number_density = 1e16 * std::pow(10.0, 1.5 * u(rng));
        mm.ground_coherence_decay = std::pow(10.0, 2 + 3 * u(rng));
        dd.rabi_forward = cplx{3e7 + 5e7 * u(rng), 2e7 * (u(rng) - 0.5)};
        dd.rabi_backward = cplx{2e7 * u(rng), 2e7 * (u(rng) - 0.5)};
        dd.detuning_backward = TWO_PI * (5e8 + 2e9 * u(rng));
        double w0 = mm.hyperfine_splitting + TWO_PI * 4e5 * (u(rng) - 0.5);
        double k11 = -w0 / constants::c, k41 = w0 / constants::c;
        auto rc = reduced_coefficients(mm, dd, w0, k11, k41);
        double dsr = std::abs(oscillation_residual(rc, mm.slab_length)) /
                     (std::abs(rc.s) + 1e-300);
        if (dsr < 0.1) continue; // below-threshold margin filter
        auto g = closed_form_gain(rc, mm.slab_length);
        if (g.at_threshold || std::abs(g.gain) > 1e5) continue;
        ++accepted;

        auto cm = reduced_chi(rc, dd, w0);
        auto sys = assemble_system(cm, SidebandSet(dd, w0), mm.slab_length);
        auto br = solve_boundary(sys, transfer_matrix(sys), {cplx{1, 0}, 0, 0, 0});
        REQUIRE(br.amplitudes_meaningful);
        double bvp = std::abs(br.outputs[0]);
        double closed = std::abs(g.gain);
        CHECK(std::abs(bvp - closed) <= 1e-8 * closed);
    }
}

TEST_CASE("at the analytic threshold the boundary operator is singular") {
    auto d = demo_drive();
    double w0 = TWO_PI * 3e9;
    double L = 0.05;
    double s = (M_PI / 2) / L; // delta_a = 0, sL = pi/2
    auto rc = direct_coeffs(0, s, s, 0);
    auto cm = reduced_chi(rc, d, w0);
    auto sys = assemble_system(cm, SidebandSet(d, w0), L);
    auto br = solve_boundary(sys, transfer_matrix(sys), {cplx{1, 0}, 0, 0, 0});
    CHECK(br.onset.sigma_min < 1e-6);
    CHECK(br.onset.oscillating);
    CHECK_FALSE(br.amplitudes_meaningful);
}

TEST_CASE("Manley-Rowe: lossless phase-matched pair conserves the flux sum") {
    auto m = clean_medium(3e16);
    m.ground_coherence_decay = 0;
    auto d = demo_drive();
    double xi = light_shift(d.rabi_forward, d.rabi_backward, d.detuning_backward);
    double w0 = m.hyperfine_splitting + xi; // a11 = 0, and k11 = k41 = 0
    auto rc = reduced_coefficients(m, d, w0, 0.0, 0.0);
    REQUIRE(std::abs(rc.a11) < 1e-9);
    double sL = std::abs(rc.s) * m.slab_length;
    REQUIRE(sL > 0.1); // meaningfully coupled
    REQUIRE(sL < 1.4); // below threshold

    auto cm = reduced_chi(rc, d, w0);
    auto sys = assemble_system(cm, SidebandSet(d, w0), m.slab_length);
    BoundaryOptions bopt;
    bopt.grid_points = 200;
    auto br = solve_boundary(sys, transfer_matrix(sys), {cplx{1, 0}, 0, 0, 0}, bopt);
    REQUIRE(br.amplitudes_meaningful);

    double eta1 = eta_for_transition(m, TR_BA);
    double eta4 = eta_for_transition(m, TR_CAP);
    std::vector<double> inv(br.profile.z.size());
    for (std::size_t i = 0; i < br.profile.z.size(); ++i)
        inv[i] = std::norm(br.profile.amplitude[0][i]) / eta1 +
                 std::norm(br.profile.amplitude[3][i]) / eta4;
    double ref = inv.front();
    for (double val : inv) CHECK(std::abs(val - ref) <= 1e-9 * ref);

    // numeric z-derivative of the invariant stays at the rounding floor
    for (std::size_t i = 1; i + 1 < inv.size(); ++i) {
        double dz = br.profile.z[i + 1] - br.profile.z[i - 1];
        double deriv = (inv[i + 1] - inv[i - 1]) / dz;
        CHECK(std::abs(deriv) * m.slab_length <= 1e-8 * ref);
    }
}

TEST_CASE("doubling the seed doubles every output amplitude exactly") {
    auto m = clean_medium(2e16);
    auto d = demo_drive();
    double w0 = m.hyperfine_splitting;
    auto rc = reduced_coefficients(m, d, w0, 0.0, 0.0);
    auto cm = reduced_chi(rc, d, w0);
    auto sys = assemble_system(cm, SidebandSet(d, w0), m.slab_length);
    auto tr = transfer_matrix(sys);
    auto b1 = solve_boundary(sys, tr, {cplx{1, 0}, 0, 0, 0});
    auto b2 = solve_boundary(sys, tr, {cplx{2, 0}, 0, 0, 0});
    for (int mslot = 0; mslot < 4; ++mslot)
        CHECK(std::abs(b2.outputs[mslot] - 2.0 * b1.outputs[mslot]) <=
              1e-13 * std::abs(b2.outputs[mslot]) + 1e-300);
}

TEST_CASE("outputs are independent of the reporting grid resolution") {
    auto m = clean_medium(2e16);
    auto d = demo_drive();
    double w0 = m.hyperfine_splitting;
    auto rc = reduced_coefficients(m, d, w0, 0.0, 0.0);
    auto cm = reduced_chi(rc, d, w0);
    auto sys = assemble_system(cm, SidebandSet(d, w0), m.slab_length);
    auto tr = transfer_matrix(sys);
    BoundaryOptions coarse;
    coarse.grid_points = 2;
    BoundaryOptions fine;
    fine.grid_points = 333;
    auto b1 = solve_boundary(sys, tr, {cplx{1, 0}, 0, 0, 0}, coarse);
    auto b2 = solve_boundary(sys, tr, {cplx{1, 0}, 0, 0, 0}, fine);
    for (int mslot = 0; mslot < 4; ++mslot)
        CHECK(std::abs(b1.outputs[mslot] - b2.outputs[mslot]) <=
              1e-12 * std::abs(b1.outputs[mslot]) + 1e-300);
}

TEST_CASE("conjugate-partner system has identical onset indicator") {
    auto m = clean_medium(2e16);
    auto d = demo_drive();
    double w0 = m.hyperfine_splitting + TWO_PI * 2e5;
    auto rc = reduced_coefficients(m, d, w0, -w0 / constants::c, w0 / constants::c);
    auto cm = reduced_chi(rc, d, w0);
    SidebandSet sb(d, w0);
    auto sys = assemble_system(cm, sb, m.slab_length);

    CouplingMatrix cm2 = cm;
    for (auto& x : cm2.chi.v) x = -std::conj(x);
    for (auto& q : cm2.qbar) q = -q;
    auto sys2 = assemble_system(cm2, sb, m.slab_length);
    // conjugate generator indeed
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(std::abs(sys2.generator(i, j) - std::conj(sys.generator(i, j))) <
                  1e-14 * (1 + std::abs(sys.generator(i, j))));

    auto b1 = solve_boundary(sys, transfer_matrix(sys), {cplx{1, 0}, 0, 0, 0});
    auto b2 = solve_boundary(sys2, transfer_matrix(sys2), {cplx{1, 0}, 0, 0, 0});
    CHECK(b1.onset.sigma_min == doctest::Approx(b2.onset.sigma_min).epsilon(1e-12));
}

TEST_CASE("gain_spectrum row contract, empty grid, and per-point error capture") {
    auto m = clean_medium(1e15);
    m.temperature = 0;
    auto d = demo_drive();
    auto scheme = LevelScheme::standard(true);

    CHECK(gain_spectrum(scheme, m, d, {}, {}).empty());

    std::vector<double> grid;
    for (int i = 0; i < 21; ++i)
        grid.push_back(m.hyperfine_splitting + TWO_PI * 1e6 * (i - 10) / 10.0);
    // a poisoned point: omega0 beyond the backward carrier makes slot 4 unphysical
    grid.push_back(d.carrier_backward * 1.5);
    ScanOptions opt;
    opt.chi.quadrature_order = 2;
    opt.chi.check_convergence = false;
    auto rows = gain_spectrum(scheme, m, d, grid, opt);
    REQUIRE(rows.size() == grid.size());
    int failed = 0;
    for (const auto& r : rows) failed += r.error.empty() ? 0 : 1;
    CHECK(failed == 1);
    CHECK_FALSE(rows.back().error.empty());
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) CHECK(rows[i].error.empty());
}

TEST_CASE("attenuation mode with zero coefficients matches the plain pipeline") {
    auto m = clean_medium(1e15);
    auto d = demo_drive();
    auto scheme = LevelScheme::standard(true);
    double w0 = m.hyperfine_splitting;
    ScanOptions plain;
    plain.chi.check_convergence = false;
    ScanOptions att = plain;
    att.attenuation.enabled = true;
    att.attenuation.alpha_forward = 0;
    att.attenuation.alpha_backward = 0;
    att.attenuation.slabs = 16;
    auto a = propagate_point(scheme, m, d, w0, plain);
    auto b = propagate_point(scheme, m, d, w0, att);
    for (int mslot = 0; mslot < 4; ++mslot)
        CHECK(std::abs(a.outputs[mslot] - b.outputs[mslot]) <=
              1e-9 * std::abs(a.outputs[mslot]) + 1e-300);

    // nonzero attenuation weakens the coupling
    att.attenuation.alpha_forward = 10.0;
    auto c = propagate_point(scheme, m, d, w0, att);
    CHECK(std::abs(c.outputs[0]) != doctest::Approx(std::abs(a.outputs[0])).epsilon(1e-12));
}

TEST_CASE("two-slab attenuation matches a hand-built composite solution") {
    auto m = clean_medium(1e16);
    auto d = demo_drive();
    auto scheme = LevelScheme::standard(true);
    double w0 = m.hyperfine_splitting;
    double alpha_f = 25.0, alpha_b = 10.0;

    ScanOptions att;
    att.chi.check_convergence = false;
    att.attenuation.enabled = true;
    att.attenuation.alpha_forward = alpha_f;
    att.attenuation.alpha_backward = alpha_b;
    att.attenuation.slabs = 2;
    att.boundary.grid_points = 129; // grid sample 64 lands exactly on the slab joint
    auto got = propagate_point(scheme, m, d, w0, att);

    // oracle: build the two slabs by hand and solve the boundary algebra
    double L = m.slab_length, dz = L / 2;
    SidebandSet sb(d, w0);
    CMat4 t_slab[2];
    for (int k = 0; k < 2; ++k) {
        double zmid = (k + 0.5) * dz;
        DriveSpec dk = d;
        dk.rabi_forward *= std::exp(-0.5 * alpha_f * zmid);
        dk.rabi_backward *= std::exp(-0.5 * alpha_b * (L - zmid));
        auto cm = chi_doppler(scheme, m, dk, w0, att.chi);
        auto slab = assemble_system(cm, sb, dz);
        t_slab[k] = expm(slab.generator * cplx{dz, 0}).value;
    }
    CMat4 t_total = t_slab[1] * t_slab[0];
    CMat4 b;
    b(0, 0) = 1.0;
    b(2, 2) = 1.0;
    for (int j = 0; j < 4; ++j) {
        b(1, j) = t_total(1, j);
        b(3, j) = t_total(3, j);
    }
    std::array<cplx, 4> x0{cplx{1, 0}, 0, 0, 0};
    REQUIRE(lu_solve_vec(b, x0));
    auto xl = t_total * x0;
    CHECK(std::abs(got.outputs[0] - xl[0]) <= 1e-10 * std::abs(xl[0]));
    CHECK(std::abs(got.outputs[2] - xl[2]) <= 1e-10 * std::abs(xl[2]) + 1e-300);
    CHECK(std::abs(got.outputs[1] - x0[1]) <= 1e-10 * std::abs(x0[1]) + 1e-300);
    CHECK(std::abs(got.outputs[3] - x0[3]) <= 1e-10 * std::abs(x0[3]) + 1e-300);

    // at the slab joint the profile must equal the first-slab propagation of
    // the initial state
    int half = (int)got.profile.z.size() / 2;
    REQUIRE(std::abs(got.profile.z[half] - dz) < 1e-12);
    std::array<cplx, 4> want_mid = t_slab[0] * x0;
    for (int slot = 0; slot < 4; ++slot)
        CHECK(std::abs(got.profile.amplitude[slot][half] - want_mid[slot]) <=
              1e-10 * std::abs(want_mid[slot]) + 1e-300);
}

TEST_CASE("find_onset_crossing locates the density threshold of the full model") {
    auto m = clean_medium();
    m.ground_coherence_decay = 1e3;
    m.temperature = 0;
    auto d = demo_drive();
    auto scheme = LevelScheme::reduced_pair();

    // closed-form threshold density at the matched frequency (mismatch folds
    // k11 = -w0/c, k41 = +w0/c nearly cancel in delta_a here)
    double eta1_unit = eta_for_transition(m, TR_BA) / m.number_density;
    double eta4_unit = eta_for_transition(m, TR_CAP) / m.number_density;
    double n_star = (M_PI / 2) * std::abs(d.detuning_backward) * std::abs(d.rabi_forward) /
                    (std::sqrt(eta1_unit * eta4_unit) * std::abs(d.rabi_backward) *
                     m.slab_length);
    m.number_density = 1.25 * n_star; // slightly above threshold

    double xi = light_shift(d.rabi_forward, d.rabi_backward, d.detuning_backward);
    CrossingOptions opt;
    opt.omega0_lo = m.hyperfine_splitting + xi - TWO_PI * 2e6;
    opt.omega0_hi = m.hyperfine_splitting + xi + TWO_PI * 2e6;
    opt.omega0_samples = 41;
    opt.rho_samples = 31;
    auto res = find_onset_crossing(scheme, m, d, opt);
    REQUIRE(res.found);
    CHECK(res.sigma_min < 1e-6);
    CHECK(res.density_fraction * m.number_density == doctest::Approx(n_star).epsilon(0.05));
    CHECK(std::abs(res.omega0 - (m.hyperfine_splitting + xi)) < TWO_PI * 1e6);
}

// susceptibility.hpp - the 4x4 susceptibility coupling the four weak sidebands
// through the drive-dressed double-Lambda medium: per velocity group, Doppler
// averaged, and projected onto the reduced two-field coefficients.
//
// Stored convention: state vector Ebar = [E1, E2, E3*, E4*]; chi obeys
//     Pbar_m = eps0 chi_mn exp(i k_mn z) Ebar_n,   k_mn = qbar_n - qbar_m,
// with resonance denominators of the form gamma + i delta (matching the
// closed-form coefficient layer). The propagation rows are
//     dEbar_m/dz = rowfac_m chi_mn Ebar_n + i qbar_m Ebar_m,
//     rowfac_m = -i kz_m / 2 for m in {1,2},  +i kz_m / 2 for m in {3,4},
// kz signed by propagation direction. Restricted to slots {1,4} this
// reproduces the closed-form a_ij exactly in the far-detuned limit.
#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "mwmix/density_matrix.hpp"
#include "mwmix/level_scheme.hpp"
#include "mwmix/model_core.hpp"
#include "mwmix/quadrature.hpp"
#include "mwmix/reduced.hpp"
#include "mwmix/types.hpp"

namespace mwmix {

/// The three classes of sideband-coupling processes, switchable in isolation:
/// direct cross coupling of counter-propagating Stokes/anti-Stokes pairs
/// (slots 1-4, 2-3), co-propagating coherent Raman scattering (1-3, 2-4) and
/// parametric exchange between co-sideband counter-propagating pairs (1-2,
/// 3-4).
struct ProcessMask {
    bool direct_cross = true;
    bool coherent_raman = true;
    bool parametric_exchange = true;

    bool entry_enabled(int m, int n) const {
        if (m == n) return true;
        int cls = ((m ^ n) == 3) ? 0 : ((m ^ n) == 2 ? 1 : 2); // 0-based slot xor
        if (cls == 0) return direct_cross;
        if (cls == 1) return coherent_raman;
        return parametric_exchange;
    }
};

struct ChiOptions {
    int quadrature_order = 64;
    double convergence_rel = 1e-4; // doubling-check threshold
    bool check_convergence = true;
    bool disable_doppler_shifts = false; // test hook: quadrature sees a constant
    ProcessMask mask{};
};

struct CouplingMatrix {
    CMat4 chi;                    // dimensionless susceptibility, stored convention
    std::array<double, 4> qbar{}; // per-slot mismatch fold rates, 1/m
    std::array<double, 4> kz{};   // signed carrier z-wavenumbers, 1/m
    double omega0 = 0;
    bool doppler_averaged = false;
    int quadrature_order = 0;
    bool converged = true;

    /// Free-space wave-vector mismatch of the (m,n) coupling.
    double k_mn(int m, int n) const { return qbar[n] - qbar[m]; }
};

namespace detail {

/// Rotating-frame phase rates theta per level that render every drive leg
/// static. Throws when the coupling graph admits no such frame.
inline std::array<double, 4> solve_frame(const LevelScheme& scheme, double nu_f_eff,
                                         double nu_b_eff) {
    std::array<double, 4> theta{};
    std::array<bool, 4> set{true, false, false, false}; // theta_b = 0 anchors
    theta[1] = 0;
    set[1] = true; // ground states share the lab frame
    for (int pass = 0; pass < 4; ++pass) {
        for (const auto& c : scheme.couplings) {
            if (c.slot != SLOT_DRIVE_F && c.slot != SLOT_DRIVE_B) continue;
            if (c.weight == 0) continue;
            double nu = (c.slot == SLOT_DRIVE_F) ? nu_f_eff : nu_b_eff;
            int l = transition_lower(c.transition);
            int u = transition_upper(c.transition);
            if (scheme.degenerate_excited && u == 3) u = 2;
            if (set[l] && !set[u]) {
                theta[u] = theta[l] + nu;
                set[u] = true;
            } else if (set[l] && set[u]) {
                if (std::abs(theta[u] - theta[l] - nu) > 1e-3)
                    throw IllConditionedModel(
                        "drive couplings admit no static rotating frame");
            }
        }
    }
    // undriven excited levels get a harmless default
    if (!set[2]) theta[2] = nu_f_eff;
    if (!set[3]) theta[3] = nu_b_eff;
    return theta;
}

struct AtomContext {
    CMat16 liouville;
    CMat4 rho0;
    std::array<double, 4> theta;
    std::array<double, 4> omega_level;
};

inline AtomContext build_atom(const LevelScheme& scheme, const MediumSpec& medium,
                              const DriveSpec& drive, double v, const ChiOptions& opt) {
    double vshift = opt.disable_doppler_shifts ? 0.0 : v;
    double kf = drive.carrier_forward / constants::c;
    double kb = drive.carrier_backward / constants::c * std::cos(drive.beam_angle);
    double nu_f_eff = drive.carrier_forward - kf * vshift;
    double nu_b_eff = drive.carrier_backward + kb * vshift;

    AtomContext ctx;
    ctx.theta = solve_frame(scheme, nu_f_eff, nu_b_eff);

    // physical level energies (b at zero)
    ctx.omega_level = {0.0, medium.hyperfine_splitting,
                       medium.hyperfine_splitting + drive.carrier_forward - drive.detuning_forward,
                       drive.carrier_backward - drive.detuning_backward};
    if (scheme.degenerate_excited) ctx.omega_level[3] = ctx.omega_level[2];

    CMat4 h;
    for (int lvl = 0; lvl < 4; ++lvl) h(lvl, lvl) = ctx.omega_level[lvl] - ctx.theta[lvl];

    // drive couplings; qm frame uses the conjugates of the stored amplitudes
    for (const auto& c : scheme.couplings) {
        if (c.slot != SLOT_DRIVE_F && c.slot != SLOT_DRIVE_B) continue;
        if (c.weight == 0) continue;
        cplx omega = (c.slot == SLOT_DRIVE_F) ? std::conj(drive.rabi_forward)
                                              : std::conj(drive.rabi_backward);
        int l = transition_lower(c.transition);
        int u = transition_upper(c.transition);
        if (scheme.degenerate_excited && u == 3) u = 2;
        h(u, l) += -c.weight * omega;
        h(l, u) += -c.weight * std::conj(omega);
    }

    std::vector<DecayChannel> decays;
    for (int t = 0; t < 4; ++t) {
        int u = transition_upper(t);
        if (scheme.degenerate_excited && u == 3) u = 2;
        decays.push_back({u, transition_lower(t), 2.0 * medium.gamma[t]});
    }

    CMat4 rho_eq;
    rho_eq(0, 0) = rho_eq(1, 1) = 0.5;

    ctx.liouville = liouvillian(h, decays, medium.ground_coherence_decay, rho_eq);
    ctx.rho0 = steady_state(ctx.liouville);
    return ctx;
}

inline double slot_dipole(const MediumSpec& medium, int slot_index /*0..3*/) {
    int tr = slot_reference_transition[SLOT_S1 + slot_index];
    double k = 2.0 * M_PI / medium.lambda[tr];
    return std::sqrt(6.0 * M_PI * constants::eps0 * constants::hbar * medium.gamma[tr] /
                     (k * k * k));
}

} // namespace detail

/// chi for a single longitudinal velocity group: every optical detuning is
/// shifted by its leg's k.v, each sideband column is solved at its own frame
/// harmonic, and the raw response is mapped into the stored convention.
inline CouplingMatrix chi_velocity_group(const LevelScheme& scheme, const MediumSpec& medium,
                                         const DriveSpec& drive, double omega0, double v,
                                         const ChiOptions& opt = {}) {
    scheme.validate();
    medium.validate();
    drive.validate();
    detail::require_finite(omega0, "omega0");
    detail::require_finite(v, "velocity");

    SidebandSet sb(drive, omega0);
    auto ctx = detail::build_atom(scheme, medium, drive, v, opt);

    double vshift = opt.disable_doppler_shifts ? 0.0 : v;

    // per-slot frame harmonics nu_eff - (theta_u - theta_l); every leg of a
    // slot must agree or the six-field truncation cannot represent the drive
    CMat4 k_qm; // raw response, qm convention
    for (int n = 0; n < 4; ++n) {
        int slot = SLOT_S1 + n;
        auto legs = scheme.slot_couplings(slot);
        if (legs.empty()) continue;
        double nu_eff = sb.carrier[n] - sb.kz(n) * vshift;
        double h = 0;
        bool h_set = false;
        for (const auto& leg : legs) {
            int l = transition_lower(leg.transition);
            int u = transition_upper(leg.transition);
            if (scheme.degenerate_excited && u == 3) u = 2;
            double h_leg = nu_eff - (ctx.theta[u] - ctx.theta[l]);
            if (!h_set) {
                h = h_leg;
                h_set = true;
            } else if (std::abs(h_leg - h) > 1e-3 + 1e-9 * std::abs(h)) {
                throw IllConditionedModel("sideband slot couples legs at distinct harmonics");
            }
        }
        bool conj_slot = sb.conjugated[n];
        if (conj_slot) h = -h; // solve for the exp(-i|h|t) component of the pair

        // unit-amplitude perturbation for this column
        CMat4 vop;
        for (const auto& leg : legs) {
            int l = transition_lower(leg.transition);
            int u = transition_upper(leg.transition);
            if (scheme.degenerate_excited && u == 3) u = 2;
            if (!conj_slot)
                vop(u, l) += -leg.weight; // raising, coefficient of exp(-i h t)
            else
                vop(l, u) += -leg.weight; // lowering part of the conjugated slot
        }
        // source -i [V, rho0]
        CMat4 src = (vop * ctx.rho0 - ctx.rho0 * vop) * cplx{0, -1};
        CMat4 resp = harmonic_response(ctx.liouville, h, src);

        // extract each output slot's coherence combination
        for (int m = 0; m < 4; ++m) {
            auto out_legs = scheme.slot_couplings(SLOT_S1 + m);
            cplx sum{};
            for (const auto& leg : out_legs) {
                int l = transition_lower(leg.transition);
                int u = transition_upper(leg.transition);
                if (scheme.degenerate_excited && u == 3) u = 2;
                sum += leg.weight * (sb.conjugated[m] ? resp(l, u) : resp(u, l));
            }
            k_qm(m, n) = sum;
        }
    }

    // map to the stored convention: conjugate, then flip the sign of the
    // slot-4 component of the state vector (fixes the printed gauge of a14/a41)
    CMat4 k_stored = k_qm.conj();
    for (int j = 0; j < 4; ++j) {
        k_stored(3, j) *= -1.0;
        k_stored(j, 3) *= -1.0;
    }

    CouplingMatrix cm;
    cm.omega0 = omega0;
    for (int m = 0; m < 4; ++m) {
        cm.kz[m] = sb.kz(m);
        cm.qbar[m] = (omega0 / constants::c) *
                     (sb.direction[m] > 0 ? 1.0 : -std::cos(drive.beam_angle));
    }
    const double pref = medium.number_density / (constants::eps0 * constants::hbar);
    for (int m = 0; m < 4; ++m) {
        double dm = detail::slot_dipole(medium, m);
        for (int n = 0; n < 4; ++n) {
            double dn = detail::slot_dipole(medium, n);
            cm.chi(m, n) = opt.mask.entry_enabled(m, n) ? pref * dm * dn * k_stored(m, n) : cplx{};
        }
    }
    return cm;
}

namespace detail {

inline CouplingMatrix chi_average(const LevelScheme& scheme, const MediumSpec& medium,
                                  const DriveSpec& drive, double omega0, int order,
                                  const ChiOptions& opt) {
    auto rule = gauss_hermite(order);
    double sigma_v = medium.velocity_sigma();
    CouplingMatrix acc;
    bool first = true;
    const double inv_sqrt_pi = 1.0 / std::sqrt(M_PI);
    for (int i = 0; i < order; ++i) {
        double v = std::sqrt(2.0) * sigma_v * rule.nodes[i];
        CouplingMatrix cm = chi_velocity_group(scheme, medium, drive, omega0, v, opt);
        double w = rule.weights[i] * inv_sqrt_pi;
        if (first) {
            acc = cm;
            for (auto& x : acc.chi.v) x *= w;
            first = false;
        } else {
            for (int e = 0; e < 16; ++e) acc.chi.v[e] += w * cm.chi.v[e];
        }
    }
    acc.doppler_averaged = true;
    acc.quadrature_order = order;
    return acc;
}

} // namespace detail

/// Maxwellian average of chi_velocity_group over the longitudinal velocity
/// distribution, by Gauss-Hermite quadrature. T = 0 bypasses the quadrature.
inline CouplingMatrix chi_doppler(const LevelScheme& scheme, const MediumSpec& medium,
                                  const DriveSpec& drive, double omega0,
                                  const ChiOptions& opt = {}) {
    detail::require(opt.quadrature_order >= 2, "quadrature order must be >= 2");
    medium.validate();
    if (medium.temperature == 0) {
        CouplingMatrix cm = chi_velocity_group(scheme, medium, drive, omega0, 0.0, opt);
        cm.doppler_averaged = true;
        cm.quadrature_order = 0;
        return cm;
    }
    CouplingMatrix cm = detail::chi_average(scheme, medium, drive, omega0,
                                            opt.quadrature_order, opt);
    if (opt.check_convergence) {
        CouplingMatrix fine = detail::chi_average(scheme, medium, drive, omega0,
                                                  2 * opt.quadrature_order, opt);
        double num = 0, den = 0;
        for (int e = 0; e < 16; ++e) {
            num = std::max(num, std::abs(fine.chi.v[e] - cm.chi.v[e]));
            den = std::max(den, std::abs(fine.chi.v[e]));
        }
        cm.converged = den == 0 || num <= opt.convergence_rel * den;
    }
    return cm;
}

/// Propagation row prefactor of slot m (0-based): conjugated slots flip the
/// sign of i, kz carries the direction.
inline cplx chi_row_factor(const CouplingMatrix& cm, int m) {
    cplx i{0, 1};
    return (m < 2 ? -i : i) * cm.kz[m] * 0.5;
}

/// Restriction of the chi pipeline to the reduced two-field layout:
/// a11 = rowfac chi11 + i qbar1, a14 = rowfac chi14, a41 = -(rowfac4 chi41),
/// a44 = rowfac4 chi44 + i qbar4. The minus on a41 moves the backward row's
/// generator entry into the stored-coefficient convention.
inline ReducedCoefficients project_to_reduced(const CouplingMatrix& cm, const MediumSpec& medium,
                                              const DriveSpec& drive) {
    (void)medium;
    (void)drive;
    ReducedCoefficients rc;
    cplx f1 = chi_row_factor(cm, 0);
    cplx f4 = chi_row_factor(cm, 3);
    rc.k11 = -cm.qbar[0];
    rc.k41 = -cm.qbar[3];
    rc.a11 = f1 * cm.chi(0, 0) + cplx{0, cm.qbar[0]};
    rc.a14 = f1 * cm.chi(0, 3);
    rc.a41 = -(f4 * cm.chi(3, 0));
    rc.a44 = f4 * cm.chi(3, 3) + cplx{0, cm.qbar[3]};
    rc.delta_a = 0.5 * (rc.a11 - rc.a44);
    rc.s = std::sqrt(rc.a14 * rc.a41 - rc.delta_a * rc.delta_a);
    return rc;
}

/// Inverse of project_to_reduced: a synthetic CouplingMatrix whose {1,4} block
/// realizes the given closed-form coefficients, slots 2 and 3 decoupled.
inline CouplingMatrix reduced_chi(const ReducedCoefficients& rc, const DriveSpec& drive,
                                  double omega0) {
    SidebandSet sb(drive, omega0);
    CouplingMatrix cm;
    cm.omega0 = omega0;
    for (int m = 0; m < 4; ++m) cm.kz[m] = sb.kz(m);
    cm.qbar = {-rc.k11, 0.0, 0.0, -rc.k41};
    cplx f1 = chi_row_factor(cm, 0);
    cplx f4 = chi_row_factor(cm, 3);
    cm.chi(0, 0) = (rc.a11 - cplx{0, cm.qbar[0]}) / f1;
    cm.chi(0, 3) = rc.a14 / f1;
    cm.chi(3, 0) = -rc.a41 / f4;
    cm.chi(3, 3) = (rc.a44 - cplx{0, cm.qbar[3]}) / f4;
    return cm;
}

} // namespace mwmix

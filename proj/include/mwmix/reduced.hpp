// reduced.hpp - the analytically solvable two-field model: forward anti-Stokes
// E1 coupled to backward Stokes E4* through the ground-state coherence grating.
// Closed-form coefficients, gain, oscillation residual, threshold search,
// strong-coupling predicate and the pulled oscillation frequency.
//
// Coefficients act on the common-z state (E1, E4*):
//     d/dz [E1, E4*]^T = [[a11, a14], [-a41, a44]] [E1, E4*]^T
// a41 stores the coupling with the backward-propagation sign absorbed, so that
// s = sqrt(a14 a41 - delta_a^2) is real for a phase-matched strongly coupled
// medium and the oscillation condition reads tan(sL) = s/delta_a.
#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mwmix/model_core.hpp"
#include "mwmix/optimize.hpp"
#include "mwmix/types.hpp"

namespace mwmix {

struct ReducedCoefficients {
    cplx a11{}, a14{}, a41{}, a44{}; // 1/m
    cplx delta_a{};                  // (a11 - a44)/2
    cplx s{};                        // principal sqrt(a14 a41 - delta_a^2)
    double k11 = 0, k41 = 0;         // residual mismatch inputs, 1/m
};

inline ReducedCoefficients reduced_coefficients(const MediumSpec& medium, const DriveSpec& drive,
                                                double omega0, double k11, double k41) {
    medium.validate();
    drive.validate_reduced();
    detail::require_finite(omega0, "omega0");
    detail::require_finite(k11, "k11");
    detail::require_finite(k41, "k41");

    const cplx of = drive.rabi_forward;
    const cplx ob = drive.rabi_backward;
    const double db = drive.detuning_backward;
    const double of2 = std::norm(of);

    const double eta1 = eta_for_transition(medium, TR_BA);
    const double eta4 = eta_for_transition(medium, TR_CAP);

    ReducedCoefficients rc;
    rc.k11 = k11;
    rc.k41 = k41;
    const cplx i{0, 1};
    cplx bracket = medium.ground_coherence_decay +
                   i * (omega0 - medium.hyperfine_splitting) +
                   i * ((std::norm(ob) - of2) / db);
    rc.a11 = -eta1 * bracket / of2 - i * k11;
    rc.a14 = i * eta1 * ob * of / (db * of2);
    rc.a41 = -i * eta4 * std::conj(ob) * std::conj(of) / (db * of2);
    rc.a44 = -i * k41;
    rc.delta_a = 0.5 * (rc.a11 - rc.a44);
    rc.s = std::sqrt(rc.a14 * rc.a41 - rc.delta_a * rc.delta_a);
    return rc;
}

struct GainResult {
    cplx gain{};
    bool at_threshold = false;
};

/// |E1(L)| / |seed| for the two-field boundary-value problem, in closed form:
///     G = exp(abar L) * s / (s cos(sL) - delta_a sin(sL)),  abar = (a11+a44)/2
/// The empty-medium limit is exactly 1. The trace factor exp(abar L) carries
/// the common absorption/phase of the pair; it is 1 whenever a11 = -a44.
inline GainResult closed_form_gain(const ReducedCoefficients& c, double length,
                                   double threshold_eps = 1e-9) {
    detail::require(length > 0, "length must be > 0");
    const cplx sL = c.s * length;
    const cplx cos_sL = std::cos(sL);
    const cplx sin_sL = std::sin(sL);
    // sinc(sL) keeps the s -> 0 limit finite: G -> exp(abar L)/(1 - delta_a L)
    cplx sinc = (std::abs(sL) < 1e-6) ? (1.0 - sL * sL / 6.0) : sin_sL / sL;
    cplx denom_scaled = cos_sL - c.delta_a * length * sinc; // = (s cos - da sin)/s
    cplx denom = c.s * cos_sL - c.delta_a * sin_sL;

    GainResult g;
    g.at_threshold = std::abs(denom) < threshold_eps * std::abs(c.s) ||
                     std::abs(denom_scaled) < threshold_eps;
    cplx abar = 0.5 * (c.a11 + c.a44);
    g.gain = std::exp(abar * length) / denom_scaled;
    return g;
}

/// D = delta_a sin(sL) - s cos(sL); D = 0 at oscillation onset.
inline cplx oscillation_residual(const ReducedCoefficients& c, double length) {
    detail::require(length > 0, "length must be > 0");
    const cplx sL = c.s * length;
    return c.delta_a * std::sin(sL) - c.s * std::cos(sL);
}

/// Strict strong-coupling inequality eta4 |Omega_F Omega_B| > eta1 gamma_bc |Delta_B|.
inline bool strong_coupling(const MediumSpec& medium, const DriveSpec& drive) {
    medium.validate();
    drive.validate();
    const double eta1 = eta_for_transition(medium, TR_BA);
    const double eta4 = eta_for_transition(medium, TR_CAP);
    double lhs = eta4 * std::abs(drive.rabi_forward) * std::abs(drive.rabi_backward);
    double rhs = eta1 * medium.ground_coherence_decay * std::abs(drive.detuning_backward);
    return lhs > rhs;
}

/// omega0 solving kappa (omega0 - omega_hfs - xi) + c dk_z = 0 for a constant
/// mismatch dk_z.
inline double pulled_frequency(const MediumSpec& medium, const DriveSpec& drive,
                               double dk_z, double kappa) {
    medium.validate();
    drive.validate_reduced();
    detail::require_finite(dk_z, "dk_z");
    detail::require_finite(kappa, "kappa");
    if (kappa == 0) throw std::domain_error("pulled_frequency: kappa must be nonzero");
    double omega_r = medium.hyperfine_splitting +
                     light_shift(drive.rabi_forward, drive.rabi_backward, drive.detuning_backward);
    return omega_r - constants::c * dk_z / kappa;
}

/// Collinear-geometry variant where dk_z = -(omega0/c)(1 + cos theta) depends
/// on omega0 itself; the fixed point is linear.
inline double pulled_frequency_collinear(const MediumSpec& medium, const DriveSpec& drive,
                                         double kappa, double theta = 0) {
    medium.validate();
    drive.validate_reduced();
    detail::require_finite(kappa, "kappa");
    if (kappa == 0) throw std::domain_error("pulled_frequency: kappa must be nonzero");
    double geom = 1.0 + std::cos(theta);
    if (kappa <= geom)
        throw std::domain_error("pulled_frequency: kappa too small for a locked solution");
    double omega_r = medium.hyperfine_splitting +
                     light_shift(drive.rabi_forward, drive.rabi_backward, drive.detuning_backward);
    return kappa * omega_r / (kappa - geom);
}

enum class SweptParameter { RabiBackwardMagnitude, NumberDensity, SlabLength };

/// Residual-mismatch policy for threshold scans: either the collinear
/// free-space fold (k11 = -omega0/c, k41 = +omega0/c) or caller-fixed values.
struct MismatchPolicy {
    bool collinear = true;
    double fixed_k11 = 0;
    double fixed_k41 = 0;
    double k11(double omega0) const { return collinear ? -omega0 / constants::c : fixed_k11; }
    double k41(double omega0) const { return collinear ? +omega0 / constants::c : fixed_k41; }
};

struct ThresholdOptions {
    double tolerance = 1e-9;                      // on |D|/|s|
    double omega0_halfwidth = 2 * M_PI * 5e6;     // search window around omega_hfs + xi
    int omega0_samples = 41;
    int sweep_samples = 64;
    MismatchPolicy mismatch{};
};

struct ThresholdReport {
    double threshold_parameter_value = 0;
    double residual_at_threshold = 0;   // min |D|/|s|
    double pulled_frequency_at_threshold = 0; // locked omega0*
    double bracket_low = 0, bracket_high = 0;
    bool converged = false;
};

namespace detail {

inline void apply_swept(MediumSpec& m, DriveSpec& d, SweptParameter which, double value) {
    switch (which) {
        case SweptParameter::RabiBackwardMagnitude: {
            double mag = std::abs(d.rabi_backward);
            cplx phase = mag > 0 ? d.rabi_backward / mag : cplx{1, 0};
            d.rabi_backward = value * phase;
            break;
        }
        case SweptParameter::NumberDensity:
            m.number_density = value;
            break;
        case SweptParameter::SlabLength:
            m.slab_length = value;
            break;
    }
}

} // namespace detail

/// Nested search for the oscillation onset: the inner loop minimizes |D|/|s|
/// over omega0 (the medium picks its own frequency), the outer loop walks the
/// swept parameter across the bracket until the inner minimum collapses.
inline ThresholdReport find_threshold(const MediumSpec& medium0, const DriveSpec& drive0,
                                      SweptParameter swept, double bracket_low,
                                      double bracket_high, ThresholdOptions opt = {}) {
    medium0.validate();
    drive0.validate_reduced();
    detail::require(bracket_low < bracket_high, "bracket_low must be < bracket_high");

    struct Inner {
        double residual;
        double omega0;
    };
    auto inner_min = [&](double p) -> Inner {
        MediumSpec m = medium0;
        DriveSpec d = drive0;
        detail::apply_swept(m, d, swept, p);
        double center = m.hyperfine_splitting +
                        light_shift(d.rabi_forward, d.rabi_backward, d.detuning_backward);
        auto f = [&](double w0) {
            auto rc = reduced_coefficients(m, d, w0, opt.mismatch.k11(w0), opt.mismatch.k41(w0));
            cplx D = oscillation_residual(rc, m.slab_length);
            return std::abs(D) / (std::abs(rc.s) + 1e-300);
        };
        MinResult r = scan_min(f, center - opt.omega0_halfwidth, center + opt.omega0_halfwidth,
                               opt.omega0_samples);
        return {r.f, r.x};
    };

    ThresholdReport rep;
    rep.bracket_low = bracket_low;
    rep.bracket_high = bracket_high;

    // Outer scan; refine every local basin in sweep order until one dips
    // below tolerance.
    int n = std::max(3, opt.sweep_samples);
    std::vector<double> ps(n), hs(n);
    std::vector<Inner> inner(n);
    for (int i = 0; i < n; ++i) {
        ps[i] = bracket_low + (bracket_high - bracket_low) * i / (n - 1);
        inner[i] = inner_min(ps[i]);
        hs[i] = inner[i].residual;
    }

    double best_h = hs[0];
    int best_i = 0;
    for (int i = 1; i < n; ++i)
        if (hs[i] < best_h) {
            best_h = hs[i];
            best_i = i;
        }
    rep.threshold_parameter_value = ps[best_i];
    rep.residual_at_threshold = best_h;
    rep.pulled_frequency_at_threshold = inner[best_i].omega0;

    for (int i = 0; i < n; ++i) {
        bool local = (i == 0 || hs[i] <= hs[i - 1]) && (i == n - 1 || hs[i] <= hs[i + 1]);
        if (!local) continue;
        double lo = ps[std::max(0, i - 1)];
        double hi = ps[std::min(n - 1, i + 1)];
        auto h = [&](double p) { return inner_min(p).residual; };
        MinResult r = golden_min(h, lo, hi, 90);
        if (r.f < rep.residual_at_threshold) {
            Inner in = inner_min(r.x);
            rep.threshold_parameter_value = r.x;
            rep.residual_at_threshold = in.residual;
            rep.pulled_frequency_at_threshold = in.omega0;
        }
        if (rep.residual_at_threshold < opt.tolerance) {
            rep.converged = true;
            return rep;
        }
    }
    rep.converged = rep.residual_at_threshold < opt.tolerance;
    return rep;
}

} // namespace mwmix

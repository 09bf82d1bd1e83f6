// model_core.hpp - closed-form scalar quantities shared by every other module:
// the per-field gain prefactor eta, the drive light shift, the geometric wave
// vector mismatch of the counter-propagating sideband pair, and the frequency
// stabilization coefficient kappa.
#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "mwmix/constants.hpp"
#include "mwmix/types.hpp"

namespace mwmix {

/// eta = k_z * 3/(8 pi^2) * N * lambda^3 * gamma    [1/(m s)]
///
/// With gamma the radiative coherence decay rate this equals
/// k_z * N d^2 / (2 eps0 hbar) for a dipole d obeying 2*gamma = d^2 k^3/(3 pi eps0 hbar).
inline double eta_coefficient(double k_z, double number_density, double lambda, double gamma) {
    detail::require_finite(k_z, "k_z");
    detail::require_finite(number_density, "number_density");
    detail::require_finite(lambda, "lambda");
    detail::require_finite(gamma, "gamma");
    detail::require(number_density >= 0, "number_density must be >= 0");
    detail::require(lambda > 0, "lambda must be > 0");
    detail::require(gamma > 0, "gamma must be > 0");
    return k_z * (3.0 / (8.0 * M_PI * M_PI)) * number_density * lambda * lambda * lambda * gamma;
}

/// Light shift xi = (|Omega_F|^2 - |Omega_B|^2) / Delta_B   [rad/s]
inline double light_shift(cplx rabi_forward, cplx rabi_backward, double detuning_backward) {
    detail::require(std::isfinite(rabi_forward.real()) && std::isfinite(rabi_forward.imag()),
                    "rabi_forward must be finite");
    detail::require(std::isfinite(rabi_backward.real()) && std::isfinite(rabi_backward.imag()),
                    "rabi_backward must be finite");
    detail::require_finite(detuning_backward, "detuning_backward");
    if (detuning_backward == 0)
        throw std::domain_error("light_shift: detuning_backward must be nonzero");
    return (std::norm(rabi_forward) - std::norm(rabi_backward)) / detuning_backward;
}

/// z-projection of k_F + k_B - k_1 - k_4 with forward fields along +z and the
/// backward beam tilted by theta from -z. Collinear value is -2*omega0/c; the
/// +z-positive forward convention makes the sign negative while the magnitude
/// matches 2*omega0/c.
inline double geometric_mismatch(double omega0, double theta = 0,
                                 double c = constants::c) {
    detail::require_finite(omega0, "omega0");
    detail::require_finite(theta, "theta");
    detail::require(c > 0, "c must be > 0");
    // Slot carriers cancel pairwise: only the Raman offset survives.
    return -(omega0 / c) * (1.0 + std::cos(theta));
}

/// Frequency stabilization coefficient kappa = c * eta_1 / |Omega_F|^2
/// (dimensionless).
inline double stabilization_coefficient(double eta1, cplx rabi_forward,
                                        double c = constants::c) {
    detail::require_finite(eta1, "eta1");
    detail::require(std::isfinite(rabi_forward.real()) && std::isfinite(rabi_forward.imag()),
                    "rabi_forward must be finite");
    if (rabi_forward == cplx{0, 0})
        throw std::domain_error("stabilization_coefficient: rabi_forward must be nonzero");
    return c * eta1 / std::norm(rabi_forward);
}

/// Half-Rabi frequency from beam power and spot size: I = 2P/(pi w^2) with w
/// the spot radius, E = sqrt(2 I/(eps0 c)), Omega = d E/(2 hbar). The dipole
/// moment is external atomic data, not something the theory fixes.
inline double rabi_from_power(double power_watt, double spot_diameter_m, double dipole_Cm) {
    detail::require_finite(power_watt, "power");
    detail::require_finite(spot_diameter_m, "spot_diameter");
    detail::require_finite(dipole_Cm, "dipole");
    detail::require(power_watt >= 0, "power must be >= 0");
    detail::require(spot_diameter_m > 0, "spot_diameter must be > 0");
    detail::require(dipole_Cm > 0, "dipole must be > 0");
    double w = spot_diameter_m / 2.0;
    double intensity = 2.0 * power_watt / (M_PI * w * w);
    double field = std::sqrt(2.0 * intensity / (constants::eps0 * constants::c));
    return dipole_Cm * field / (2.0 * constants::hbar);
}

/// eta for the slot whose reference transition is `tr`, using the slot's own
/// wavenumber magnitude. Direction signs live in the propagation rows, not in
/// eta.
inline double eta_for_transition(const MediumSpec& medium, int tr) {
    double k = 2.0 * M_PI / medium.lambda[tr];
    return eta_coefficient(k, medium.number_density, medium.lambda[tr], medium.gamma[tr]);
}

} // namespace mwmix

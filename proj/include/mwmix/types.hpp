// types.hpp - domain value types for the double-Lambda medium and the drive fields.
//
// Unit conventions used project-wide:
//   * every frequency, decay rate, Rabi frequency and shift is angular (rad/s)
//   * every length is in meters
//   * Rabi frequencies are half-Rabi, Omega = d E / (2 hbar), so that a level
//     light-shifts by |Omega|^2/Delta and power broadening scales as |Omega|^2
//   * gamma of an optical transition is the radiative decay rate of its
//     coherence (half the upper-state population rate on that transition)
//
// Field convention: slowly varying amplitudes are defined against carriers
// exp(+i(nu t - k.r)) for +z propagation, so a single resonance responds as
// 1/(gamma + i delta). Amplitudes in the opposite time convention are the
// complex conjugates of ours.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "mwmix/constants.hpp"

namespace mwmix {

namespace detail {
inline void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}
inline void require_finite(double x, const std::string& name) {
    require(std::isfinite(x), name + " must be finite");
}
} // namespace detail

/// The four optical transitions of the double-Lambda scheme. Ground states are
/// b (lower) and c (upper, split from b by omega_hfs); excited states are a
/// and a' (ap).
enum Transition : int {
    TR_BA = 0,  // b -> a   (forward anti-Stokes leg)
    TR_CA = 1,  // c -> a   (forward drive leg)
    TR_BAP = 2, // b -> a'  (backward drive leg)
    TR_CAP = 3, // c -> a'  (backward Stokes leg)
};

inline int transition_lower(int t) { return (t == TR_BA || t == TR_BAP) ? 0 : 1; }
inline int transition_upper(int t) { return (t == TR_BA || t == TR_CA) ? 2 : 3; }

/// Atomic/cell parameters.
struct MediumSpec {
    double number_density = 0;      // N, atoms per m^3
    double slab_length = 0;         // L, m
    double temperature = 0;         // T, K
    double atomic_mass = 0;         // kg
    double hyperfine_splitting = 0; // omega_hfs, rad/s
    double ground_coherence_decay = 0; // gamma_bc, rad/s
    std::array<double, 4> gamma{};  // per-transition radiative coherence decay, rad/s
    std::array<double, 4> lambda{}; // per-transition wavelength, m

    void validate() const {
        detail::require_finite(number_density, "number_density");
        detail::require(number_density >= 0, "number_density must be >= 0");
        detail::require_finite(slab_length, "slab_length");
        detail::require(slab_length > 0, "slab_length must be > 0");
        detail::require_finite(temperature, "temperature");
        detail::require(temperature >= 0, "temperature must be >= 0");
        detail::require_finite(atomic_mass, "atomic_mass");
        detail::require(atomic_mass > 0, "atomic_mass must be > 0");
        detail::require_finite(hyperfine_splitting, "hyperfine_splitting");
        detail::require(hyperfine_splitting > 0, "hyperfine_splitting must be > 0");
        detail::require_finite(ground_coherence_decay, "ground_coherence_decay");
        detail::require(ground_coherence_decay >= 0, "ground_coherence_decay must be >= 0");
        for (int t = 0; t < 4; ++t) {
            detail::require_finite(gamma[t], "gamma[" + std::to_string(t) + "]");
            detail::require(gamma[t] > 0, "gamma[" + std::to_string(t) + "] must be > 0");
            detail::require_finite(lambda[t], "lambda[" + std::to_string(t) + "]");
            detail::require(lambda[t] > 0, "lambda[" + std::to_string(t) + "] must be > 0");
        }
        // double-Lambda consistency: the two legs sharing an excited level are
        // nearly degenerate (split only by the hyperfine interval)
        auto close = [](double l1, double l2) {
            return std::abs(l1 - l2) < 0.01 * std::max(l1, l2);
        };
        detail::require(close(lambda[TR_BA], lambda[TR_CA]),
                        "lambda(b-a) and lambda(c-a) must agree to 1%");
        detail::require(close(lambda[TR_BAP], lambda[TR_CAP]),
                        "lambda(b-a') and lambda(c-a') must agree to 1%");
    }

    /// Most-probable 1-D thermal velocity spread sqrt(kB T / m), m/s.
    double velocity_sigma() const {
        return std::sqrt(constants::k_boltzmann * temperature / atomic_mass);
    }
};

/// The two strong counter-propagating driving fields.
struct DriveSpec {
    cplx rabi_forward{};    // Omega_F, rad/s (half-Rabi)
    cplx rabi_backward{};   // Omega_B, rad/s (half-Rabi)
    double detuning_forward = 0;  // Delta_F = nu_F - omega(c->a), rad/s, signed
    double detuning_backward = 0; // Delta_B = nu_B - omega(b->a'), rad/s, signed
    double carrier_forward = 0;   // nu_F, rad/s
    double carrier_backward = 0;  // nu_B, rad/s
    double beam_angle = 0;        // theta between forward axis and reversed backward axis

    void validate() const {
        detail::require(std::isfinite(rabi_forward.real()) && std::isfinite(rabi_forward.imag()),
                        "rabi_forward must be finite");
        detail::require(std::isfinite(rabi_backward.real()) && std::isfinite(rabi_backward.imag()),
                        "rabi_backward must be finite");
        detail::require_finite(detuning_forward, "detuning_forward");
        detail::require_finite(detuning_backward, "detuning_backward");
        detail::require_finite(carrier_forward, "carrier_forward");
        detail::require_finite(carrier_backward, "carrier_backward");
        detail::require(carrier_forward > 0, "carrier_forward must be > 0");
        detail::require(carrier_backward > 0, "carrier_backward must be > 0");
        detail::require_finite(beam_angle, "beam_angle");
        detail::require(std::abs(beam_angle) < M_PI / 2, "|beam_angle| must be < pi/2");
    }

    /// Preconditions specific to the reduced two-field model, where Delta_B
    /// divides every coefficient.
    void validate_reduced() const {
        validate();
        if (detuning_backward == 0)
            throw std::domain_error("reduced model requires detuning_backward != 0");
        if (rabi_forward == cplx{0, 0})
            throw std::domain_error("reduced model requires rabi_forward != 0");
    }
};

/// Fixed roles of the four weak sidebands. Slots 3 and 4 enter the state
/// vector [E1, E2, E3*, E4*] conjugated.
struct SidebandSet {
    double raman_offset = 0;          // omega0, rad/s
    std::array<double, 4> carrier{};  // nu_1..nu_4, rad/s
    std::array<int, 4> direction{};   // +1 forward (slots 1,3), -1 backward (2,4)
    std::array<bool, 4> conjugated{}; // {false,false,true,true}
    double beam_angle = 0;            // angle of the backward slots vs -z

    SidebandSet() = default;

    SidebandSet(const DriveSpec& drive, double omega0) {
        detail::require_finite(omega0, "raman_offset");
        detail::require(omega0 > 0, "raman_offset must be > 0");
        raman_offset = omega0;
        beam_angle = drive.beam_angle;
        carrier = {drive.carrier_forward + omega0, drive.carrier_backward + omega0,
                   drive.carrier_forward - omega0, drive.carrier_backward - omega0};
        direction = {+1, -1, +1, -1};
        conjugated = {false, false, true, true};
        for (int m = 0; m < 4; ++m)
            detail::require(carrier[m] > 0,
                            "slot " + std::to_string(m + 1) + " carrier must be > 0");
    }

    /// |k| of slot m (1/m).
    double wavenumber(int m) const { return carrier[m] / constants::c; }

    /// Signed z-projection of slot m's wave vector (backward slots follow the
    /// reversed backward-beam axis).
    double kz(int m) const {
        double k = wavenumber(m);
        return direction[m] > 0 ? k : -k * std::cos(beam_angle);
    }
};

} // namespace mwmix

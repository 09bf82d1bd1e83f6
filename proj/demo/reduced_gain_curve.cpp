// Minimal library walk-through: sweep the backward drive through the
// oscillation threshold of the two-field model and print the closed-form
// gain next to the boundary-value solution.
#include <cstdio>

#include "mwmix/propagation.hpp"

using namespace mwmix;

int main() {
    MediumSpec medium;
    medium.number_density = 1e16;
    medium.slab_length = 0.05;
    medium.temperature = 0;
    medium.atomic_mass = 1.40999e-25;
    medium.hyperfine_splitting = 2 * M_PI * 3.0357e9;
    medium.ground_coherence_decay = 0;
    medium.gamma = {1.8e7, 1.8e7, 1.8e7, 1.8e7};
    medium.lambda = {794.979e-9, 794.979e-9, 794.979e-9, 794.979e-9};

    DriveSpec drive;
    drive.rabi_forward = 4e7;
    drive.detuning_forward = 0;
    drive.detuning_backward = 2 * M_PI * 1e9;
    drive.carrier_forward = 2 * M_PI * constants::c / medium.lambda[TR_CA];
    drive.carrier_backward = drive.carrier_forward + drive.detuning_backward;

    double eta1 = eta_for_transition(medium, TR_BA);
    double eta4 = eta_for_transition(medium, TR_CAP);
    double threshold = (M_PI / 2) * drive.detuning_backward * std::abs(drive.rabi_forward) /
                       (std::sqrt(eta1 * eta4) * medium.slab_length);
    std::printf("# analytic threshold |Omega_B| = %.6e rad/s\n", threshold);
    std::printf("# omega_b_frac  closed_form_db  bvp_db  sigma_min\n");

    for (double frac = 0.05; frac < 1.0; frac += 0.05) {
        drive.rabi_backward = frac * threshold;
        double xi = light_shift(drive.rabi_forward, drive.rabi_backward,
                                drive.detuning_backward);
        double omega0 = medium.hyperfine_splitting + xi;

        auto coeffs = reduced_coefficients(medium, drive, omega0, 0.0, 0.0);
        auto gain = closed_form_gain(coeffs, medium.slab_length);

        auto chi = reduced_chi(coeffs, drive, omega0);
        auto sys = assemble_system(chi, SidebandSet(drive, omega0), medium.slab_length);
        auto bvp = solve_boundary(sys, transfer_matrix(sys), {cplx{1, 0}, 0, 0, 0});

        std::printf("%6.2f  %12.4f  %12.4f  %10.3e\n", frac,
                    20 * std::log10(std::abs(gain.gain)),
                    20 * std::log10(std::abs(bvp.outputs[0])), bvp.onset.sigma_min);
    }
    return 0;
}

// density_matrix.hpp - steady state and first-order harmonic response of the
// driven four-level system. Works in the standard exp(-i nu t) rotating frame;
// the susceptibility layer handles the mapping to the project's stored sign
// convention.
#pragma once

#include <stdexcept>
#include <vector>

#include "mwmix/linalg.hpp"

namespace mwmix {

using CMat16 = CMat<16>;

/// Raised when the driven system has no usable steady state (no decay
/// channels, inconsistent frame, ...).
struct IllConditionedModel : std::runtime_error {
    explicit IllConditionedModel(const std::string& what) : std::runtime_error(what) {}
};

struct DecayChannel {
    int upper;
    int lower;
    double rate; // population rate, rad/s
};

inline int rho_index(int i, int j) { return 4 * i + j; }

/// Liouvillian of d(rho)/dt = -i[H, rho] + sum_t A_t D[|l><u|] rho
///                            + transit (rho_eq tr(rho) - rho)
/// as a 16x16 matrix acting on vec(rho), row-major (i,j) -> 4i+j.
inline CMat16 liouvillian(const CMat4& h, const std::vector<DecayChannel>& decays,
                          double transit_rate, const CMat4& rho_eq) {
    CMat16 L;
    const cplx mi{0, -1};
    // -i (H rho - rho H)
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) {
                L(rho_index(i, j), rho_index(k, j)) += mi * h(i, k);
                L(rho_index(i, j), rho_index(i, k)) -= mi * h(k, j);
            }
    // radiative jumps |l><u|
    for (const auto& d : decays) {
        L(rho_index(d.lower, d.lower), rho_index(d.upper, d.upper)) += d.rate;
        for (int j = 0; j < 4; ++j) {
            L(rho_index(d.upper, j), rho_index(d.upper, j)) -= 0.5 * d.rate;
            L(rho_index(j, d.upper), rho_index(j, d.upper)) -= 0.5 * d.rate;
        }
    }
    // transit relaxation toward the replacement mixture
    if (transit_rate != 0) {
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                for (int k = 0; k < 4; ++k)
                    L(rho_index(i, j), rho_index(k, k)) += transit_rate * rho_eq(i, j);
                L(rho_index(i, j), rho_index(i, j)) -= transit_rate;
            }
    }
    return L;
}

/// Unique trace-one steady state of L. Replaces the (b,b) row with the trace
/// constraint; a failed pivot means the model is singular.
inline CMat4 steady_state(const CMat16& L) {
    CMat16 a = L;
    CMat16::col rhs{};
    for (int col = 0; col < 16; ++col) a(rho_index(0, 0), col) = 0;
    for (int k = 0; k < 4; ++k) a(rho_index(0, 0), rho_index(k, k)) = 1.0;
    rhs[rho_index(0, 0)] = 1.0;
    if (!lu_solve_vec(a, rhs, 1e-13))
        throw IllConditionedModel("steady state is singular (no decay channels?)");
    CMat4 rho;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) rho(i, j) = rhs[rho_index(i, j)];
    // sanity: physical steady states are Hermitian with unit trace
    cplx tr = rho(0, 0) + rho(1, 1) + rho(2, 2) + rho(3, 3);
    if (std::abs(tr - 1.0) > 1e-6)
        throw IllConditionedModel("steady state trace deviates from 1");
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j)
            if (std::abs(rho(i, j) - std::conj(rho(j, i))) > 1e-6)
                throw IllConditionedModel("steady state is not Hermitian");
    return rho;
}

/// First-order response at harmonic h: solves (L + i h I) x = -source for the
/// coefficient of exp(-i h t).
inline CMat4 harmonic_response(const CMat16& L, double h, const CMat4& source) {
    CMat16 a = L;
    for (int d = 0; d < 16; ++d) a(d, d) += cplx{0, h};
    CMat16::col rhs{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) rhs[rho_index(i, j)] = -source(i, j);
    if (!lu_solve_vec(a, rhs, 1e-13))
        throw IllConditionedModel("harmonic response system is singular");
    CMat4 x;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) x(i, j) = rhs[rho_index(i, j)];
    return x;
}

} // namespace mwmix

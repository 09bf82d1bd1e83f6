// linalg.hpp - dense complex kernels for the small fixed sizes this project
// needs: 4x4 propagation generators, 16x16 master-equation superoperators.
// LU with partial pivoting, scaling-and-squaring matrix exponential, and
// Jacobi singular values.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "mwmix/constants.hpp"

namespace mwmix {

template <int N>
struct CMat {
    std::array<cplx, N * N> v{};

    static constexpr int size = N;
    using col = std::array<cplx, static_cast<std::size_t>(N)>;

    cplx& operator()(int r, int c) { return v[r * N + c]; }
    const cplx& operator()(int r, int c) const { return v[r * N + c]; }

    static CMat identity() {
        CMat m;
        for (int i = 0; i < N; ++i) m(i, i) = 1.0;
        return m;
    }

    CMat operator+(const CMat& o) const {
        CMat r;
        for (int i = 0; i < N * N; ++i) r.v[i] = v[i] + o.v[i];
        return r;
    }
    CMat operator-(const CMat& o) const {
        CMat r;
        for (int i = 0; i < N * N; ++i) r.v[i] = v[i] - o.v[i];
        return r;
    }
    CMat operator*(const CMat& o) const {
        CMat r;
        for (int i = 0; i < N; ++i)
            for (int k = 0; k < N; ++k) {
                cplx a = (*this)(i, k);
                if (a == cplx{}) continue;
                for (int j = 0; j < N; ++j) r(i, j) += a * o(k, j);
            }
        return r;
    }
    CMat operator*(cplx s) const {
        CMat r;
        for (int i = 0; i < N * N; ++i) r.v[i] = v[i] * s;
        return r;
    }
    std::array<cplx, N> operator*(const std::array<cplx, N>& x) const {
        std::array<cplx, N> y{};
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) y[i] += (*this)(i, j) * x[j];
        return y;
    }

    CMat conj() const {
        CMat r;
        for (int i = 0; i < N * N; ++i) r.v[i] = std::conj(v[i]);
        return r;
    }

    CMat adjoint() const {
        CMat r;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) r(i, j) = std::conj((*this)(j, i));
        return r;
    }

    double norm1() const { // max column sum
        double best = 0;
        for (int j = 0; j < N; ++j) {
            double s = 0;
            for (int i = 0; i < N; ++i) s += std::abs((*this)(i, j));
            best = std::max(best, s);
        }
        return best;
    }

    double max_abs() const {
        double best = 0;
        for (const auto& x : v) best = std::max(best, std::abs(x));
        return best;
    }

    bool finite() const {
        for (const auto& x : v)
            if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
        return true;
    }
};

using CMat2 = CMat<2>;
using CMat4 = CMat<4>;

/// In-place LU with partial pivoting; solves A X = B for K right-hand sides.
/// Returns false when a pivot collapses relative to the matrix scale.
template <int N, std::size_t K>
inline bool lu_solve(CMat<N> a, std::array<typename CMat<N>::col, K>& rhs,
                     double rel_pivot_floor = 1e-14) {
    std::array<int, N> piv{};
    for (int i = 0; i < N; ++i) piv[i] = i;
    double scale = a.max_abs();
    if (scale == 0) return false;

    for (int col = 0; col < N; ++col) {
        int best = col;
        double bestmag = std::abs(a(col, col));
        for (int r = col + 1; r < N; ++r) {
            double m = std::abs(a(r, col));
            if (m > bestmag) {
                bestmag = m;
                best = r;
            }
        }
        if (bestmag <= rel_pivot_floor * scale) return false;
        if (best != col) {
            for (int j = 0; j < N; ++j) std::swap(a(col, j), a(best, j));
            for (std::size_t k = 0; k < K; ++k) std::swap(rhs[k][col], rhs[k][best]);
        }
        cplx inv = 1.0 / a(col, col);
        for (int r = col + 1; r < N; ++r) {
            cplx f = a(r, col) * inv;
            if (f == cplx{}) continue;
            a(r, col) = f;
            for (int j = col + 1; j < N; ++j) a(r, j) -= f * a(col, j);
            for (std::size_t k = 0; k < K; ++k) rhs[k][r] -= f * rhs[k][col];
        }
    }
    for (std::size_t k = 0; k < K; ++k)
        for (int i = N - 1; i >= 0; --i) {
            cplx s = rhs[k][i];
            for (int j = i + 1; j < N; ++j) s -= a(i, j) * rhs[k][j];
            rhs[k][i] = s / a(i, i);
        }
    return true;
}

template <int N>
inline bool lu_solve_vec(const CMat<N>& a, typename CMat<N>::col& x,
                         double rel_pivot_floor = 1e-14) {
    std::array<typename CMat<N>::col, 1> rhs{x};
    if (!lu_solve(a, rhs, rel_pivot_floor)) return false;
    x = rhs[0];
    return true;
}

/// Solves A X = B with matrix right-hand side.
template <int N>
inline bool lu_solve_mat(const CMat<N>& a, const CMat<N>& b, CMat<N>& x,
                         double rel_pivot_floor = 1e-14) {
    std::array<typename CMat<N>::col, static_cast<std::size_t>(N)> rhs;
    for (int k = 0; k < N; ++k)
        for (int i = 0; i < N; ++i) rhs[k][i] = b(i, k);
    if (!lu_solve(a, rhs, rel_pivot_floor)) return false;
    for (int k = 0; k < N; ++k)
        for (int i = 0; i < N; ++i) x(i, k) = rhs[k][i];
    return true;
}

struct ExpmResult4 {
    CMat4 value;
    bool overflow = false; // norm too extreme for a meaningful exponential
};

/// exp(A) by Pade-13 with scaling and squaring (Higham 2005 constants).
/// Backward error at working precision, well below the documented 1e-12.
inline ExpmResult4 expm(const CMat4& a_in) {
    ExpmResult4 out;
    if (!a_in.finite()) {
        out.overflow = true;
        out.value = CMat4::identity();
        return out;
    }
    static const double theta13 = 5.371920351148152;
    static const double b[14] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
    double nrm = a_in.norm1();
    // exp overflows double around norm ~ 709; treat anything wilder as a
    // saturated above-threshold indicator rather than garbage.
    if (nrm > 680.0) {
        out.overflow = true;
        out.value = CMat4::identity();
        return out;
    }
    int s = 0;
    CMat4 a = a_in;
    if (nrm > theta13) {
        s = (int)std::ceil(std::log2(nrm / theta13));
        double f = std::ldexp(1.0, -s);
        a = a * cplx{f, 0};
    }
    CMat4 I = CMat4::identity();
    CMat4 a2 = a * a;
    CMat4 a4 = a2 * a2;
    CMat4 a6 = a4 * a2;
    CMat4 u_inner = a6 * (a6 * cplx{b[13], 0} + a4 * cplx{b[11], 0} + a2 * cplx{b[9], 0}) +
                    a6 * cplx{b[7], 0} + a4 * cplx{b[5], 0} + a2 * cplx{b[3], 0} + I * cplx{b[1], 0};
    CMat4 u = a * u_inner;
    CMat4 v = a6 * (a6 * cplx{b[12], 0} + a4 * cplx{b[10], 0} + a2 * cplx{b[8], 0}) +
              a6 * cplx{b[6], 0} + a4 * cplx{b[4], 0} + a2 * cplx{b[2], 0} + I * cplx{b[0], 0};
    CMat4 p = v + u;
    CMat4 q = v - u;
    CMat4 r;
    if (!lu_solve_mat(q, p, r)) {
        out.overflow = true;
        out.value = CMat4::identity();
        return out;
    }
    for (int i = 0; i < s; ++i) r = r * r;
    if (!r.finite()) {
        out.overflow = true;
        out.value = CMat4::identity();
        return out;
    }
    out.value = r;
    return out;
}

/// Singular values, descending, by one-sided Jacobi (column orthogonalization
/// of A itself), which keeps small singular values at full absolute accuracy.
template <int N>
inline std::array<double, N> singular_values(const CMat<N>& a_in) {
    CMat<N> a = a_in;
    std::array<double, N> sv{};
    if (!a.finite()) {
        sv.fill(std::numeric_limits<double>::quiet_NaN());
        return sv;
    }
    if (a.max_abs() == 0) return sv;
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < N; ++p)
            for (int q = p + 1; q < N; ++q) {
                double app = 0, aqq = 0;
                cplx apq{};
                for (int i = 0; i < N; ++i) {
                    app += std::norm(a(i, p));
                    aqq += std::norm(a(i, q));
                    apq += std::conj(a(i, p)) * a(i, q);
                }
                double mag = std::abs(apq);
                if (mag <= 1e-17 * std::sqrt(app * aqq) || mag == 0) continue;
                rotated = true;
                cplx phase = apq / mag;
                double tau = (aqq - app) / (2.0 * mag);
                double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                double cth = 1.0 / std::sqrt(1.0 + t * t);
                double sth = t * cth;
                for (int i = 0; i < N; ++i) {
                    cplx aip = a(i, p), aiq = a(i, q);
                    a(i, p) = cth * aip - sth * std::conj(phase) * aiq;
                    a(i, q) = sth * phase * aip + cth * aiq;
                }
            }
        if (!rotated) break;
    }
    for (int j = 0; j < N; ++j) {
        double s = 0;
        for (int i = 0; i < N; ++i) s += std::norm(a(i, j));
        sv[j] = std::sqrt(s);
    }
    std::sort(sv.begin(), sv.end(), std::greater<double>());
    return sv;
}

} // namespace mwmix

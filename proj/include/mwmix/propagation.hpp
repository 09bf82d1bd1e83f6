// propagation.hpp - the linear six-field slab problem: z-propagation generator
// from chi, exact transfer matrix, counter-propagating boundary conditions
// with a weak seed, onset detection through the boundary operator's smallest
// singular value, and scan drivers.
#pragma once

#include <limits>
#include <string>
#include <vector>

#include "mwmix/optimize.hpp"
#include "mwmix/susceptibility.hpp"

namespace mwmix {

struct PropagationSystem {
    CMat4 generator;            // constant-coefficient generator (mismatch folded), 1/m
    double length = 0;          // slab length, m
    std::array<int, 4> direction{+1, -1, +1, -1};
    std::array<double, 4> qbar{};
    // piecewise-constant form for the drive-attenuation mode: equal-width
    // slabs along z; empty means the single constant generator applies
    std::vector<CMat4> slab_generators;

    const CMat4& generator_at(double z) const {
        if (slab_generators.empty()) return generator;
        int n = (int)slab_generators.size();
        int k = std::min(n - 1, std::max(0, (int)(z / length * n)));
        return slab_generators[k];
    }
};

/// M[m][n] = rowfac_m chi_mn + i qbar_m delta_mn, acting on [E1, E2, E3*, E4*].
/// Direction signs are fixed by slot role; the residual free-space mismatches
/// enter as the constant qbar fold.
inline PropagationSystem assemble_system(const CouplingMatrix& cm, const SidebandSet& sb,
                                         double length) {
    detail::require(length > 0, "slab length must be > 0");
    if (std::abs(cm.omega0 - sb.raman_offset) > 1e-6 * std::abs(sb.raman_offset))
        throw std::invalid_argument("assemble_system: chi and sidebands disagree on omega0");
    for (int m = 0; m < 4; ++m)
        if (cm.kz[m] != 0 && sb.kz(m) != 0 && cm.kz[m] * sb.kz(m) < 0)
            throw std::invalid_argument("assemble_system: chi and sidebands disagree on directions");

    PropagationSystem sys;
    sys.length = length;
    sys.direction = sb.direction;
    sys.qbar = cm.qbar;
    for (int m = 0; m < 4; ++m) {
        cplx f = chi_row_factor(cm, m);
        for (int n = 0; n < 4; ++n) sys.generator(m, n) = f * cm.chi(m, n);
        sys.generator(m, m) += cplx{0, cm.qbar[m]};
    }
    return sys;
}

struct TransferResult {
    CMat4 matrix;
    bool saturated = false; // gain too extreme for a finite exponential
};

/// T = exp(M L): exact propagator of the constant-coefficient system. For a
/// piecewise system, the ordered product of the per-slab exponentials.
inline TransferResult transfer_matrix(const PropagationSystem& sys) {
    if (sys.slab_generators.empty()) {
        ExpmResult4 e = expm(sys.generator * cplx{sys.length, 0});
        return {e.value, e.overflow};
    }
    double dz = sys.length / sys.slab_generators.size();
    CMat4 total = CMat4::identity();
    bool saturated = false;
    for (const auto& g : sys.slab_generators) {
        ExpmResult4 e = expm(g * cplx{dz, 0});
        saturated = saturated || e.overflow;
        total = e.value * total;
    }
    return {total, saturated || !total.finite()};
}

struct OnsetIndicator {
    double sigma_min = 0;  // smallest singular value / largest, dimensionless
    double tolerance = 0;
    bool oscillating = false;
    bool saturated = false;
};

struct FieldProfile {
    std::vector<double> z;                      // ascending, z[0] = 0, z.back() = L
    std::array<std::vector<cplx>, 4> amplitude; // per-slot along z (normalized seed units)
    std::array<cplx, 4> inputs{};               // imposed boundary values
};

struct BoundaryOptions {
    double tolerance = 1e-6; // sigma_min/|B| threshold for the oscillating flag
    int grid_points = 128;
};

struct BoundaryResult {
    FieldProfile profile;
    OnsetIndicator onset;
    std::array<cplx, 4> outputs{}; // slots 1,3 at z=L; slots 2,4 at z=0
    bool amplitudes_meaningful = true;
};

/// Imposes slots 1,3 at z = 0 and slots 2,4 at z = L, solves the boundary
/// operator B x = inputs for the initial state, and samples the exact solution
/// on the grid. sigma_min(B)/sigma_max(B) is the oscillation-onset indicator.
inline BoundaryResult solve_boundary(const PropagationSystem& sys, const TransferResult& tr,
                                     const std::array<cplx, 4>& inputs,
                                     const BoundaryOptions& opt = {}) {
    for (const auto& s : inputs)
        detail::require(std::isfinite(s.real()) && std::isfinite(s.imag()),
                        "seed inputs must be finite");
    detail::require(opt.grid_points >= 2, "profile grid needs at least 2 points");

    BoundaryResult out;
    out.onset.tolerance = opt.tolerance;
    out.profile.inputs = inputs;

    if (tr.saturated) {
        out.onset.saturated = true;
        out.onset.oscillating = true;
        out.onset.sigma_min = 0;
        out.amplitudes_meaningful = false;
        return out;
    }

    // boundary operator: rows 1,3 pin X(0); rows 2,4 pin X(L) via T
    CMat4 b;
    b(0, 0) = 1.0;
    b(2, 2) = 1.0;
    for (int j = 0; j < 4; ++j) {
        b(1, j) = tr.matrix(1, j);
        b(3, j) = tr.matrix(3, j);
    }
    auto sv = singular_values(b);
    out.onset.sigma_min = sv[3] / sv[0];
    out.onset.oscillating = out.onset.sigma_min < opt.tolerance;

    std::array<cplx, 4> x0 = inputs;
    bool solved = lu_solve_vec(b, x0, 1e-15);
    if (!solved) {
        out.onset.oscillating = true;
        out.amplitudes_meaningful = false;
        return out;
    }
    out.amplitudes_meaningful = !out.onset.oscillating;

    // cumulative slab propagators for the piecewise case
    std::vector<CMat4> cum;
    double dz = 0;
    if (!sys.slab_generators.empty()) {
        dz = sys.length / sys.slab_generators.size();
        cum.reserve(sys.slab_generators.size() + 1);
        cum.push_back(CMat4::identity());
        for (const auto& g : sys.slab_generators)
            cum.push_back(expm(g * cplx{dz, 0}).value * cum.back());
    }

    out.profile.z.resize(opt.grid_points);
    for (auto& a : out.profile.amplitude) a.resize(opt.grid_points);
    for (int i = 0; i < opt.grid_points; ++i) {
        double z = sys.length * i / (opt.grid_points - 1);
        out.profile.z[i] = z;
        std::array<cplx, 4> xz;
        if (i == 0) {
            xz = x0;
        } else if (sys.slab_generators.empty()) {
            auto ez = expm(sys.generator * cplx{z, 0});
            xz = ez.value * x0;
        } else {
            int k = std::min((int)sys.slab_generators.size() - 1,
                             std::max(0, (int)(z / dz)));
            auto ez = expm(sys.slab_generators[k] * cplx{z - k * dz, 0});
            xz = (ez.value * cum[k]) * x0;
        }
        for (int m = 0; m < 4; ++m) out.profile.amplitude[m][i] = xz[m];
    }
    // the imposed components are boundary data; pin them exactly
    out.profile.amplitude[0][0] = inputs[0];
    out.profile.amplitude[2][0] = inputs[2];
    out.profile.amplitude[1][opt.grid_points - 1] = inputs[1];
    out.profile.amplitude[3][opt.grid_points - 1] = inputs[3];

    out.outputs[0] = out.profile.amplitude[0][opt.grid_points - 1];
    out.outputs[2] = out.profile.amplitude[2][opt.grid_points - 1];
    out.outputs[1] = out.profile.amplitude[1][0];
    out.outputs[3] = out.profile.amplitude[3][0];
    return out;
}

/// Optional Beer-law envelope on the drive amplitudes, for sensitivity checks
/// of the undepleted-drive assumption. alpha_* are intensity attenuation
/// coefficients (1/m); the forward drive decays toward +z, the backward one
/// toward -z.
struct DriveAttenuation {
    bool enabled = false;
    double alpha_forward = 0;
    double alpha_backward = 0;
    int slabs = 64;
};

struct ScanOptions {
    ChiOptions chi{};
    BoundaryOptions boundary{};
    std::array<cplx, 4> seed{cplx{1, 0}, cplx{0, 0}, cplx{0, 0}, cplx{0, 0}};
    DriveAttenuation attenuation{};
};

struct SpectrumPoint {
    double omega0 = 0;
    std::array<double, 4> gain_db{}; // per-slot output power relative to the seed
    double sigma_min = 0;
    bool oscillating = false;
    bool saturated = false;
    std::string error;
};

namespace detail {

inline TransferResult attenuated_transfer(const LevelScheme& scheme, const MediumSpec& medium,
                                          const DriveSpec& drive, double omega0,
                                          const SidebandSet& sb, const ScanOptions& opt,
                                          PropagationSystem& sys_out) {
    const auto& att = opt.attenuation;
    int n = std::max(1, att.slabs);
    double dz = medium.slab_length / n;
    for (int k = 0; k < n; ++k) {
        double zmid = (k + 0.5) * dz;
        DriveSpec dk = drive;
        dk.rabi_forward *= std::exp(-0.5 * att.alpha_forward * zmid);
        dk.rabi_backward *= std::exp(-0.5 * att.alpha_backward * (medium.slab_length - zmid));
        auto cm = chi_doppler(scheme, medium, dk, omega0, opt.chi);
        PropagationSystem slab = assemble_system(cm, sb, dz);
        if (k == 0) {
            sys_out = slab;
            sys_out.length = medium.slab_length;
        }
        sys_out.slab_generators.push_back(slab.generator);
    }
    return transfer_matrix(sys_out);
}

} // namespace detail

/// One full pipeline evaluation: chi -> system -> transfer -> boundary.
inline BoundaryResult propagate_point(const LevelScheme& scheme, const MediumSpec& medium,
                                      const DriveSpec& drive, double omega0,
                                      const ScanOptions& opt = {}) {
    SidebandSet sb(drive, omega0);
    if (opt.attenuation.enabled) {
        PropagationSystem sys;
        TransferResult tr = detail::attenuated_transfer(scheme, medium, drive, omega0, sb, opt, sys);
        return solve_boundary(sys, tr, opt.seed, opt.boundary);
    }
    auto cm = chi_doppler(scheme, medium, drive, omega0, opt.chi);
    PropagationSystem sys = assemble_system(cm, sb, medium.slab_length);
    return solve_boundary(sys, transfer_matrix(sys), opt.seed, opt.boundary);
}

/// Raman-offset scan: one row per grid point; per-point failures are recorded
/// in the row and the scan continues.
inline std::vector<SpectrumPoint> gain_spectrum(const LevelScheme& scheme,
                                                const MediumSpec& medium, const DriveSpec& drive,
                                                const std::vector<double>& omega0_grid,
                                                const ScanOptions& opt = {}) {
    for (std::size_t i = 0; i + 1 < omega0_grid.size(); ++i)
        detail::require(omega0_grid[i] <= omega0_grid[i + 1], "omega0 grid must be sorted");
    double seed_norm = 0;
    for (const auto& s : opt.seed) seed_norm = std::max(seed_norm, std::abs(s));
    detail::require(seed_norm > 0, "at least one seed entry must be nonzero");

    std::vector<SpectrumPoint> rows;
    rows.reserve(omega0_grid.size());
    for (double w0 : omega0_grid) {
        SpectrumPoint p;
        p.omega0 = w0;
        try {
            auto br = propagate_point(scheme, medium, drive, w0, opt);
            p.sigma_min = br.onset.sigma_min;
            p.oscillating = br.onset.oscillating;
            p.saturated = br.onset.saturated;
            for (int m = 0; m < 4; ++m) {
                double ratio = std::abs(br.outputs[m]) / seed_norm;
                p.gain_db[m] = ratio > 0 ? 20.0 * std::log10(ratio) : -999.0;
            }
        } catch (const std::exception& e) {
            p.error = e.what();
            p.gain_db = {-999.0, -999.0, -999.0, -999.0};
        }
        rows.push_back(std::move(p));
    }
    return rows;
}

/// Nearest threshold crossing at or below the given medium density: locates
/// (density fraction rho, omega0) where the boundary operator turns singular.
/// Newton iteration on the complex 2x2 boundary determinant after a coarse
/// scan; chi scales linearly in density, so the scan reuses one chi per
/// omega0 sample.
struct CrossingOptions {
    double omega0_lo = 0, omega0_hi = 0; // search window (required)
    int omega0_samples = 61;
    double rho_lo = 0.05;
    int rho_samples = 41;
    double sigma_tolerance = 1e-6;
    ChiOptions chi{};
};

struct CrossingResult {
    bool found = false;
    double omega0 = 0;
    double density_fraction = 0; // threshold density / configured density
    double sigma_min = 1;
};

inline CrossingResult find_onset_crossing(const LevelScheme& scheme, const MediumSpec& medium,
                                          const DriveSpec& drive, CrossingOptions opt) {
    detail::require(opt.omega0_lo < opt.omega0_hi, "omega0 window required");
    opt.chi.check_convergence = false;

    // Boundary singularity condition: the 2x2 block [[T11,T13],[T31,T33]]
    // (backward-slot rows of T) turns singular at threshold. det/sigma_max^2
    // is a complex function with a simple zero there whose magnitude equals
    // sigma_min/sigma_max of the block.
    auto boundary_tau = [&](const CMat4& t) -> cplx {
        CMat<2> blk;
        blk(0, 0) = t(1, 1);
        blk(0, 1) = t(1, 3);
        blk(1, 0) = t(3, 1);
        blk(1, 1) = t(3, 3);
        cplx det = blk(0, 0) * blk(1, 1) - blk(0, 1) * blk(1, 0);
        auto sv = singular_values(blk);
        return det / (sv[0] * sv[0] + 1e-300);
    };
    auto tau = [&](double rho, double w0) -> cplx {
        if (rho <= 0) return cplx{1e6, 0};
        MediumSpec m = medium;
        m.number_density *= rho;
        auto cm = chi_doppler(scheme, m, drive, w0, opt.chi);
        SidebandSet sb(drive, w0);
        auto sys = assemble_system(cm, sb, m.slab_length);
        auto tr = transfer_matrix(sys);
        if (tr.saturated) return cplx{1e6, 0};
        return boundary_tau(tr.matrix);
    };

    // Profile h(omega0) = min over rho of |tau| per grid column; chi is linear
    // in density so each column reuses one chi evaluation. h descends in a
    // wide V toward every crossing frequency, so the dips survive a coarse
    // omega0 grid even though each fixed-rho dip is razor thin.
    struct Column {
        double h = std::numeric_limits<double>::infinity();
        double rho = 1.0;
    };
    auto column_min = [&](double w0) -> Column {
        Column col;
        CouplingMatrix cm;
        try {
            cm = chi_doppler(scheme, medium, drive, w0, opt.chi);
        } catch (const std::exception&) {
            return col;
        }
        SidebandSet sb(drive, w0);
        auto sys = assemble_system(cm, sb, medium.slab_length);
        CMat4 fold;
        for (int m = 0; m < 4; ++m) fold(m, m) = cplx{0, cm.qbar[m]};
        CMat4 chirows = sys.generator - fold;
        auto f = [&](double rho) {
            CMat4 gen = chirows * cplx{rho, 0} + fold;
            PropagationSystem s{gen, medium.slab_length, sb.direction, cm.qbar};
            auto tr = transfer_matrix(s);
            if (tr.saturated) return 1e6;
            return std::abs(boundary_tau(tr.matrix));
        };
        MinResult r = scan_min(f, opt.rho_lo, 1.0, opt.rho_samples, 48);
        col.h = r.f;
        col.rho = r.x;
        return col;
    };

    CrossingResult res;
    int n = std::max(5, opt.omega0_samples);
    std::vector<double> ws(n);
    std::vector<Column> cols(n);
    for (int i = 0; i < n; ++i) {
        ws[i] = opt.omega0_lo + (opt.omega0_hi - opt.omega0_lo) * i / (n - 1);
        cols[i] = column_min(ws[i]);
    }

    // candidate basins: local minima of h, best first
    std::vector<int> candidates;
    for (int i = 0; i < n; ++i) {
        bool local = (i == 0 || cols[i].h <= cols[i - 1].h) &&
                     (i == n - 1 || cols[i].h <= cols[i + 1].h);
        if (local && std::isfinite(cols[i].h)) candidates.push_back(i);
    }
    std::sort(candidates.begin(), candidates.end(),
              [&](int a, int b) { return cols[a].h < cols[b].h; });
    if (candidates.size() > 6) candidates.resize(6);

    for (int ci : candidates) {
        // refine omega0 on the h-profile
        double lo = ws[std::max(0, ci - 1)];
        double hi = ws[std::min(n - 1, ci + 1)];
        double rho = cols[ci].rho;
        auto h_of_w = [&](double w) {
            Column c = column_min(w);
            if (c.h < 1e5) rho = c.rho;
            return c.h;
        };
        MinResult mw = golden_min(h_of_w, lo, hi, 28);
        double w0 = mw.x;
        Column final_col = column_min(w0);
        if (final_col.h < 1e5) rho = final_col.rho;

        // best-effort Newton on tau = 0 in (rho, omega0) with a backtracking
        // line search; the refine stage often lands at the cone tip already
        double w_scale = std::max(1.0, (opt.omega0_hi - opt.omega0_lo) * 1e-7);
        cplx f = tau(rho, w0);
        for (int it = 0; it < 40 && std::abs(f) > 1e-12; ++it) {
            cplx frho = (tau(rho * (1 + 1e-7), w0) - f) / (rho * 1e-7);
            cplx fw = (tau(rho, w0 + w_scale) - f) / w_scale;
            double a = frho.real(), b = fw.real(), c = frho.imag(), d = fw.imag();
            double det = a * d - b * c;
            if (det == 0 || !std::isfinite(det)) break;
            double drho = (-f.real() * d + f.imag() * b) / det;
            double dw = (-f.imag() * a + f.real() * c) / det;
            double damp = 1.0;
            if (std::abs(drho) > 0.1) damp = std::min(damp, 0.1 / std::abs(drho));
            double wlim = 0.02 * (opt.omega0_hi - opt.omega0_lo);
            if (std::abs(dw) > wlim) damp = std::min(damp, wlim / std::abs(dw));
            bool stepped = false;
            for (int bt = 0; bt < 10; ++bt) {
                double rho_try = rho + damp * drho;
                double w_try = w0 + damp * dw;
                if (rho_try > 0.25 * opt.rho_lo && rho_try < 1.5 &&
                    w_try > opt.omega0_lo - (opt.omega0_hi - opt.omega0_lo) &&
                    w_try < opt.omega0_hi + (opt.omega0_hi - opt.omega0_lo)) {
                    cplx f_try = tau(rho_try, w_try);
                    if (std::abs(f_try) < std::abs(f)) {
                        rho = rho_try;
                        w0 = w_try;
                        f = f_try;
                        stepped = true;
                        break;
                    }
                }
                damp *= 0.5;
            }
            if (!stepped) break;
        }

        // the cone makes the Newton system ill-conditioned near its tip; a
        // short fine-scale coordinate polish finishes the descent
        double span_r = 2e-3, span_w = 1e-3 * (opt.omega0_hi - opt.omega0_lo);
        for (int round = 0; round < 6 && std::abs(f) > 1e-12; ++round) {
            auto fw2 = [&](double w) { return std::abs(tau(rho, w)); };
            MinResult mw2 = golden_min(fw2, w0 - span_w, w0 + span_w, 24);
            w0 = mw2.x;
            auto fr2 = [&](double r) { return std::abs(tau(r, w0)); };
            MinResult mr2 = golden_min(fr2, std::max(0.25 * opt.rho_lo, rho - span_r),
                                       std::min(1.5, rho + span_r), 24);
            rho = mr2.x;
            f = cplx{mr2.f, 0};
            span_r *= 0.2;
            span_w *= 0.2;
        }

        // verify with the full pipeline at the scaled density
        MediumSpec m = medium;
        m.number_density *= rho;
        ScanOptions sopt;
        sopt.chi = opt.chi;
        sopt.boundary.tolerance = opt.sigma_tolerance;
        sopt.boundary.grid_points = 2;
        double sigma;
        try {
            sigma = propagate_point(scheme, m, drive, w0, sopt).onset.sigma_min;
        } catch (const std::exception&) {
            continue;
        }
        bool in_range = rho > 0 && rho <= 1.0 + 1e-9;
        bool better = !res.found ? (in_range && sigma < opt.sigma_tolerance) ||
                                       (sigma < res.sigma_min)
                                 : (in_range && sigma < opt.sigma_tolerance &&
                                    sigma < res.sigma_min);
        if (better) {
            res.sigma_min = sigma;
            res.omega0 = w0;
            res.density_fraction = rho;
            res.found = in_range && sigma < opt.sigma_tolerance;
        }
    }
    return res;
}

} // namespace mwmix

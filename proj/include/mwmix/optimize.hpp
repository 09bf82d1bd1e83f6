// optimize.hpp - derivative-free 1-D search helpers used by the threshold
// finder and the onset-crossing search.
#pragma once

#include <cmath>
#include <functional>
#include <utility>

namespace mwmix {

struct MinResult {
    double x = 0;
    double f = 0;
};

/// Golden-section minimum of f on [lo, hi]. Assumes a single interior basin;
/// callers bracket with a coarse scan first.
template <typename F>
inline MinResult golden_min(F&& f, double lo, double hi, int iters = 80) {
    const double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters && (b - a) > 0; ++i) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? MinResult{x1, f1} : MinResult{x2, f2};
}

/// Coarse scan + golden refinement over every interior basin; returns the
/// global minimum found.
template <typename F>
inline MinResult scan_min(F&& f, double lo, double hi, int samples, int refine_iters = 80) {
    if (samples < 3) samples = 3;
    MinResult best{lo, f(lo)};
    std::vector<double> xs(samples), fs(samples);
    for (int i = 0; i < samples; ++i) {
        xs[i] = lo + (hi - lo) * i / (samples - 1);
        fs[i] = f(xs[i]);
        if (fs[i] < best.f) best = {xs[i], fs[i]};
    }
    for (int i = 0; i < samples; ++i) {
        bool local = (i == 0 || fs[i] <= fs[i - 1]) && (i == samples - 1 || fs[i] <= fs[i + 1]);
        if (!local) continue;
        double a = xs[std::max(0, i - 1)];
        double b = xs[std::min(samples - 1, i + 1)];
        MinResult r = golden_min(f, a, b, refine_iters);
        if (r.f < best.f) best = r;
    }
    return best;
}

} // namespace mwmix

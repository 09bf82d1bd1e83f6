// quadrature.hpp - Gauss-Hermite rule via the Golub-Welsch tridiagonal
// eigenproblem. Weight function exp(-u^2); sum of weights is sqrt(pi).
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mwmix {

struct GaussHermiteRule {
    std::vector<double> nodes;   // ascending
    std::vector<double> weights; // same order
};

/// Nodes/weights of the order-n Gauss-Hermite rule. Exact for polynomials of
/// degree <= 2n-1 against exp(-u^2).
inline GaussHermiteRule gauss_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");

    // Jacobi matrix of the (physicists') Hermite polynomials: zero diagonal,
    // off-diagonal beta_k = sqrt(k/2), k = 1..n-1.
    std::vector<double> d(n, 0.0);
    std::vector<double> e(n, 0.0); // e[i] couples d[i] and d[i+1]; e[n-1] spare
    for (int i = 0; i < n - 1; ++i) e[i] = std::sqrt((i + 1) / 2.0);
    std::vector<double> z(n, 0.0); // first row of the eigenvector matrix
    z[0] = 1.0;

    auto sign = [](double a, double b) { return b >= 0 ? std::abs(a) : -std::abs(a); };

    // implicit-shift QL (tqli) tracking the first eigenvector row
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= 2.3e-16 * dd) break;
            }
            if (m != l) {
                if (iter++ == 60) throw std::runtime_error("gauss_hermite: QL failed to converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + sign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    double zi = z[i], zi1 = z[i + 1];
                    z[i + 1] = s * zi + c * zi1;
                    z[i] = c * zi - s * zi1;
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }

    GaussHermiteRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return d[a] < d[b]; });
    const double sqrt_pi = std::sqrt(M_PI);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = d[idx[i]];
        rule.weights[i] = sqrt_pi * z[idx[i]] * z[idx[i]];
    }
    // enforce the exact +/- symmetry of the Hermite rule
    for (int i = 0, j = n - 1; i < j; ++i, --j) {
        double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        rule.nodes[i] = -x;
        rule.nodes[j] = x;
        double w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.weights[i] = rule.weights[j] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

} // namespace mwmix

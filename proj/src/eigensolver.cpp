#include "busyper/eigensolver.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "busyper/model.hpp"

namespace busyper {

TridiagEigen eig_tridiag(std::vector<double> d, std::vector<double> e) {
    const int n = int(d.size());
    if (n < 1) throw std::domain_error("empty tridiagonal");
    if (int(e.size()) != n - 1) throw std::domain_error("offdiag must have n-1 entries");
    e.push_back(0.0);  // workspace slot e[n-1]

    std::vector<double> z(std::size_t(n) * n, 0.0);
    for (int k = 0; k < n; ++k) z[k + std::size_t(n) * k] = 1.0;

    for (int l = 0; l < n; ++l) {
        int iter = 0, m;
        do {
            // find a negligible off-diagonal element, splitting the problem
            for (m = l; m < n - 1; ++m) {
                double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= DBL_EPSILON * dd) break;
            }
            if (m != l) {
                if (iter++ == 60)
                    throw NumericError("tridiagonal QL: iteration cap reached");
                // implicit Wilkinson shift from the leading 2x2
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i], b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {  // premature deflation: recover and restart sweep
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
                    // accumulate the plane rotation into the eigenvector matrix
                    double* zi = &z[std::size_t(n) * i];
                    double* zi1 = &z[std::size_t(n) * (i + 1)];
                    for (int k = 0; k < n; ++k) {
                        f = zi1[k];
                        zi1[k] = s * zi[k] + c * f;
                        zi[k] = c * zi[k] - s * f;
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });

    TridiagEigen out;
    out.n = n;
    out.values.resize(n);
    out.vectors.resize(std::size_t(n) * n);
    for (int j = 0; j < n; ++j) {
        out.values[j] = d[order[j]];
        for (int k = 0; k < n; ++k)
            out.vectors[k + std::size_t(n) * j] = z[k + std::size_t(n) * order[j]];
    }
    return out;
}

double orthonormality_residual(const TridiagEigen& e) {
    const int n = e.n;
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double dot = 0.0;
            for (int k = 0; k < n; ++k) dot += e.vec(k, i) * e.vec(k, j);
            worst = std::max(worst, std::fabs(dot - (i == j ? 1.0 : 0.0)));
        }
    return worst;
}

}  // namespace busyper

#pragma once

// Special functions: scaled modified Bessel I, complementary Marcum Q with
// complex arguments, regularized Kummer M, upper incomplete gamma, erfcx,
// Gauss-Laguerre rules.  All pure and reentrant.

#include <complex>
#include <utility>
#include <vector>

namespace busyper::specfun {

using cd = std::complex<double>;

// e^{-x} I_n(x); underflow-safe, value in [0,1] for x >= 0
double bessel_i_scaled(int n, double x);

// e^{-x} I_k(x) for k = 0..nmax in one backward (Miller) pass
std::vector<double> bessel_i_scaled_seq(double x, int nmax);

// complex-argument scaled sequence e^{-w} I_k(w); principal conventions
std::vector<cd> bessel_i_scaled_seq(cd w, int nmax);

// Qbar(a,b) = 1 - Q(a,b), complementary Marcum Q.  Neumann expansion in
// (b/a)^k I_k(ab) when |b/a| < 1, complement series otherwise; only the
// product ab and ratio b/a enter, so square-root branch choices cancel.
cd marcum_qbar(cd a, cd b);

// regularized confluent hypergeometric M(a,b,z)/Gamma(b), entire in a,b;
// negative z routed through the Kummer transform to avoid cancellation
double kummer_m_reg(double a, double b, double z);

// Gamma(n, x), upper incomplete
double upper_gamma(double n, double x);

// e^{x^2} erfc(x) for x >= 0, no overflow
double erfcx(double x);

// nodes/weights for weight e^{-x} on [0, inf); exact through degree 2L-1
std::vector<std::pair<double, double>> gauss_laguerre(int L);

}  // namespace busyper::specfun

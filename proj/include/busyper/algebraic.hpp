#pragma once

// Continued-fraction MGF, cut-polynomial machinery (X-recursion, D-polynomials,
// D+D- product), critical traffic intensities and pole residues.

#include <vector>

#include "busyper/model.hpp"

namespace busyper {

// dense polynomial, lowest-degree-first coefficients
using Poly = std::vector<double>;

namespace poly {
double eval(const Poly& p, double x);
Poly add(const Poly& a, const Poly& b);
Poly mul(const Poly& a, const Poly& b);
Poly scale(const Poly& a, double c);
Poly shift(const Poly& a, double c);  // q(x) = p(x + c)
Poly derivative(const Poly& a);
}  // namespace poly

// phi_1(s) by the backward continued-fraction recursion
// eta_N = r psi_-, eta_k = r mu_k/(sigma_k - eta_{k+1}), phi_1 = eta_1/r
double eta_chain_mgf(const ModelParams& p, double s);

// X_0..X_{N-1} as polynomials in sigma_1 = s + r + mu_1:
// X_n = (sigma_1 + muhat_{n-1}) X_{n-1} - r mu_{n-1} X_{n-2}, muhat_k = mu_k - mu_1
std::vector<Poly> x_recursion(const ModelParams& p);

struct DPolynomials {
    Poly d0, d1;  // in powers of s
};

// D0 = X_{N-1}, D1 = -r mu_{N-1} X_{N-2}  (index convention fixed by the
// N = 3, 4 closed forms: D0 = sigma_1 and sigma_1 sigma_2 - r mu_2)
DPolynomials d_polynomials(const ModelParams& p);

// D+D- = D1^2 + D0[((mu_{N-1}-1) sigma_{N-1} + r) D0 + (sigma_{N-1}+mu_{N-1}-1) D1],
// polynomial in s of degree 2N-3
Poly dplus_dminus(const ModelParams& p, const DPolynomials& dp);

// cut function from the D-product: (1/(r mu1)) prod(r mu_k) / (D+D-)(s)
double rcut_algebraic(const ModelParams& p, double s);

struct CutPolynomial {
    int n_servers = 0;
    double r = 0.0;
    Poly coeffs;               // monic, in sigma = s + r + mu_1, degree 2N-3
    double scale_const = 1.0;  // monic * scale_const = -mu_1 * (D+D-)(s(sigma))
};

CutPolynomial cut_polynomial(const ModelParams& p);  // N >= 2

// critical traffic intensity r_c(N): N = 1 -> 0; N = 2 -> 1/2 (the single
// cut-polynomial root s = r - 1/2 reaches the origin); N >= 3 -> largest
// y = sqrt(r) in (0,1) solving D0 (sigma_{N-1} - y) + D1 = 0 at the cut
// edge s = -(1-y)^2
double critical_r(int N);

// residue of phi_1 at a simple zero s of D-:
// (1/r) prod(r mu_k) (sigma_{N-1} + mu_{N-1} - 1 + 2 D1/D0) / d(D+D-)/ds
double algebraic_pole_residue(const ModelParams& p, const DPolynomials& dp, double s);

// evaluate the two conjugate factors D-+(s) = D0 (sigma_{N-1} - r psi_-+) + D1;
// a root of D+D- is a physical pole iff the D- factor is the vanishing one
std::pair<double, double> d_factors(const ModelParams& p, const DPolynomials& dp,
                                    double s);

}  // namespace busyper
